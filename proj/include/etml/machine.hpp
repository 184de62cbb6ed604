#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etml/value.hpp"

namespace etml {

// Global environment shared by client-side evaluators: a reference names a
// value, a module, or a captured local environment.
struct GlobalEntry {
    ValuePtr v;
    ModValuePtr m;
    std::optional<RtEnv> env;
};
using GlobalEnv = std::map<std::string, GlobalEntry>;

struct StructBuilder {
    std::vector<ModField> fields;
    std::optional<Ref> dyn;
    ModValuePtr finish() const;
};

// Call-by-value big-step evaluator for the ML core. Each semantics overrides
// the hooks for the constructs it adds.
class Machine {
public:
    virtual ~Machine() = default;

    Trace trace;

    ValuePtr eval(const RtEnv& env, const ExprPtr& e);
    ValuePtr apply(const ValuePtr& f, const ValuePtr& x);
    ModValuePtr eval_mod(const RtEnv& env, const ModExprPtr& m);
    ModValuePtr eval_path(const RtEnv& env, const PathPtr& p);
    ModValuePtr apply_functor(const ModValuePtr& f, const std::vector<ModValuePtr>& args,
                              std::optional<Ref> dyn = std::nullopt);
    void eval_decls(RtEnv& env, const std::vector<DeclPtr>& ds, StructBuilder& out);
    virtual void eval_decl(RtEnv& env, const DeclPtr& d, StructBuilder& out);

    // Module closure for `functor X -> m`; mixed chains keep every parameter.
    static ModValuePtr make_functor(const RtEnv& env, const ModExprPtr& m);

protected:
    virtual ValuePtr on_fragment(const RtEnv& env, const ExprPtr& e);
    virtual ValuePtr on_injection(const RtEnv& env, const ExprPtr& e);
    virtual ValuePtr on_ref(const RtEnv& env, const Ref& r);
    virtual ValuePtr on_frag_call(const RtEnv& env, const ExprPtr& e);
    // fragment^c
    virtual ValuePtr on_fragment_client(const ValuePtr& v) { return v; }
    virtual ModValuePtr on_special_mod(const RtEnv& env, const ModExprPtr& m);
    virtual void on_special_decl(RtEnv& env, const DeclPtr& d, StructBuilder& out);

    ValuePtr delta(const std::string& prim, const std::vector<ValuePtr>& args);
};

int prim_arity(const std::string& name);

// Resolves a `dyn`-rooted reference against the local dyn field.
Ref resolve_dyn(const RtEnv& env, const Ref& r);

}  // namespace etml
