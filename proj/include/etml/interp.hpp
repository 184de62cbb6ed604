#pragma once

#include <vector>

#include "etml/machine.hpp"

namespace etml {

// Plain ML evaluation. The value is the last `return` binding, or the last
// value binding when there is none.
struct BaseRun {
    ValuePtr value;
    Trace trace;
};
BaseRun eval_base(const Program& p);
BaseRun eval_base(const ExprPtr& e);

struct ServerExprResult {
    ValuePtr value;
    Program client; // instructions emitted for the client, in order
    Trace trace;
};
// Server expression under the interpreted semantics. Fragments must carry
// their closure references.
ServerExprResult eval_server_expr(const RtEnv& env, const ExprPtr& e);

struct ContextResult {
    ExprPtr residual; // injections replaced by f^c <value>
    Program client;
    Trace trace;
};
ContextResult eval_client_context(const RtEnv& env, const ExprPtr& e);

struct MixedResult {
    ModValuePtr value;
    Program client;
    Trace trace;
    std::vector<Ref> minted; // fresh references in creation order
};
// Server-side reduction of a whole program; emits the client program.
MixedResult eval_mixed(const Program& annotated);

struct ClientRun {
    ValuePtr value; // null when the program binds no `return`
    Trace trace;
    GlobalEnv zeta;
};
ClientRun eval_client_program(const Program& mu, GlobalEnv zeta0 = {});

struct InterpResult {
    ValuePtr value;
    Trace server_trace;
    Trace client_trace;
    Program client_program;
    std::vector<Ref> minted;
    Trace trace() const;
};
// Annotates, runs the server part, then the emitted client program.
InterpResult run_program(const Program& p);

// Value bound to `return` in a structure value.
ValuePtr find_return(const ModValuePtr& m);

}  // namespace etml
