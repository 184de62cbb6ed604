#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "etml/ast.hpp"

namespace etml {

struct TypeError : std::runtime_error {
    enum class Kind { LocationViolation, Unbound, Mismatch, BadFunctorApp, InjectionInMixedFunctor, ArityMismatch,
                      NotASignature };
    Kind kind;
    SrcPos span;
    TypeError(Kind kind, const std::string& msg, SrcPos span = {});
};

const char* to_string(TypeError::Kind k);

struct TypeScheme {
    std::vector<TypeParam> quantified;
    TypePtr body;
};

struct Binding {
    enum class Kind { Val, Type, Mod };
    Kind kind = Kind::Val;
    Location loc = Location::Base;
    Ident id;
    TypePtr type;                  // Val: free variables are quantified; Type: manifest body or null
    std::vector<TypeParam> params; // Type
    ModTypePtr mty;                // Mod
};

// Persistent environment; extension shares the tail.
class Env {
public:
    Env extend(Binding b) const;
    Env extend_sig(const std::vector<SigItem>& items) const;
    const Binding* find(Binding::Kind kind, const Ident& id) const;
    std::vector<Binding> bindings() const;

    // Built-in base types int, unit, string, serial (and fragty for targets).
    static Env initial(bool target = false);

private:
    struct Node {
        Binding b;
        std::shared_ptr<const Node> next;
    };
    std::shared_ptr<const Node> head_;
};

Binding binding_of(const SigItem& it);

// ---- core judgments -------------------------------------------------------

// Principal type of `e` at core location `loc`, generalized.
TypeScheme type_expr(const Env& env, Location loc, const ExprPtr& e);
bool equiv_type(const Env& env, Location loc, const TypePtr& a, const TypePtr& b);
void wf_type(const Env& env, Location loc, const TypePtr& t);
void wf_modtype(const Env& env, Location loc, const ModTypePtr& m);

ModTypePtr specialize(const ModTypePtr& m, Location from, Location to);
ModTypePtr strengthen(const ModTypePtr& m, const PathPtr& p);
void subtype(const Env& env, Location mloc, const ModTypePtr& a, const ModTypePtr& b);
ModTypePtr type_module(const Env& env, Location mloc, const ModExprPtr& m);

struct ProgramType {
    ModTypePtr sig;
    bool runnable = false;
};
ProgramType type_program(const Program& p);

struct SeparateReport {
    bool ok = true;
    std::vector<std::string> failures;
    std::vector<SigItem> pieces; // per-declaration signatures, in order
};
SeparateReport check_separate(const Program& p);

// The single-location checker used for target programs and plain ML:
// every location is base, converter halves and references are allowed.
ModTypePtr type_ml_structure(const Program& p);

// Structural equality of module types up to mutual subtyping.
bool sig_equal(const Env& env, Location mloc, const ModTypePtr& a, const ModTypePtr& b);

// All location annotations replaced by base.
ModTypePtr erase_locations(const ModTypePtr& m);
TypePtr erase_locations(const TypePtr& t);

// Deep copy that follows solved unification variables.
TypePtr zonk(const TypePtr& t);

}  // namespace etml
