#pragma once

#include <map>
#include <string>
#include <vector>

#include "etml/machine.hpp"
#include "etml/slicer.hpp"

namespace etml {

// One entry of the server-to-client execution queue.
struct QueueItem {
    enum class Kind { Frag, Mod, End };
    Kind kind = Kind::End;
    Ref fresh;                    // Frag: closure result r; Mod: module result R
    Ref fn;                       // Frag: bound function f; Mod: bound functor F
    std::vector<ValuePtr> args;   // Frag
    std::vector<Ref> mod_args;    // Mod: dyn fields of the arguments
};
using Queue = std::vector<QueueItem>;

// Injection slot -> serialized value.
using InjectionTable = std::map<std::string, ValuePtr>;

struct ServerTargetRun {
    ModValuePtr value;
    Queue queue;
    InjectionTable iota;
    Trace trace;
    std::vector<Ref> minted;
};
ServerTargetRun run_server_target(const Program& server);

struct ClientTargetRun {
    ValuePtr value; // bound to `return`; null when absent
    Trace trace;
    GlobalEnv zeta;
    size_t consumed = 0; // queue entries executed
};
ClientTargetRun run_client_target(const Program& client, const Queue& queue, const InjectionTable& iota);

// Line formats: `FRAG r f <wire>...`, `MOD R F R1 ...`, `END`; `<slot> <wire>`.
// Wire values are separated by single spaces; strings carry their length.
std::string write_queue(const Queue& q);
Queue read_queue(const std::string& text);
std::string write_injections(const InjectionTable& t);
InjectionTable read_injections(const std::string& text);

// Types a sliced program with the single-location checker.
ModTypePtr typecheck_target(const Program& p, Side side);

}  // namespace etml
