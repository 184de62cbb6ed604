#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace etml {

enum class Location { Base, Client, Server, Mixed };

inline bool is_core(Location l) { return l != Location::Mixed; }

// Whether something declared at `from` may be referenced from code at `at`.
inline bool can_use(Location from, Location at) {
    if (from == at) return true;
    switch (from) {
    case Location::Mixed: return at == Location::Server || at == Location::Client;
    case Location::Base: return true;
    default: return false;
    }
}

// Whether a structure at `outer` may hold a component at `inner`.
inline bool can_contain(Location outer, Location inner) {
    return outer == inner || outer == Location::Mixed;
}

inline bool within(Location mloc, Location l1, Location l2) {
    return can_contain(mloc, l1) && can_contain(mloc, l2) && can_use(l1, l2);
}

inline const char* to_string(Location l) {
    switch (l) {
    case Location::Base: return "base";
    case Location::Client: return "client";
    case Location::Server: return "server";
    case Location::Mixed: return "mixed";
    }
    return "?";
}

inline std::optional<Location> location_from_string(std::string_view s) {
    if (s == "base" || s == "b") return Location::Base;
    if (s == "client" || s == "c") return Location::Client;
    if (s == "server" || s == "s") return Location::Server;
    if (s == "mixed" || s == "m") return Location::Mixed;
    return std::nullopt;
}

}  // namespace etml
