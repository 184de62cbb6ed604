#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "etml/ast.hpp"

namespace etml {

enum class Side { Server, Client };

const char* to_string(Side s);

struct SliceError : std::runtime_error {
    SrcPos span;
    explicit SliceError(const std::string& msg, SrcPos span = {});
};

struct EscapedValue {
    std::string converter;
    ExprPtr target;
};

struct SlicedPair {
    Program server;
    Program client;
    std::map<std::string, Ref> slot_table;                           // injection site -> slot
    std::map<std::string, std::vector<EscapedValue>> frag_table;     // fragment ref -> escaped values
};

// Moves converter applications out of fragments and client declarations,
// and injections out of mixed functor bodies.
Program hoist(const Program& p);

// Mixed structures may only appear at top level or as the direct body of a
// top-level mixed functor.
void check_sliceable(const Program& p);

TypePtr slice_type(const TypePtr& t, Side side);
ModTypePtr slice_modtype(const ModTypePtr& m, Side side);

// Slices an annotated, hoisted, sliceable program.
SlicedPair slice(const Program& annotated);
Program slice(const Program& annotated, Side side);

// hoist, annotate, check_sliceable, slice.
SlicedPair compile(const Program& p);

// Client restriction of a structure body: client and base declarations only.
std::vector<DeclPtr> erase_client(const std::vector<DeclPtr>& body);

}  // namespace etml
