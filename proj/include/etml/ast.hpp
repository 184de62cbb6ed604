#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "etml/location.hpp"

namespace etml {

struct SrcPos {
    int line = 0;
    int col = 0;
};

struct Ident {
    std::string name;
    int stamp = 0;

    bool operator==(const Ident& o) const { return name == o.name && stamp == o.stamp; }
    bool operator!=(const Ident& o) const { return !(*this == o); }
    bool operator<(const Ident& o) const {
        return name != o.name ? name < o.name : stamp < o.stamp;
    }
    std::string key() const { return name + "#" + std::to_string(stamp); }
};

// ---- references -----------------------------------------------------------

enum class RefKind { FragClosure, FragValue, InjSlot, ModRef, Dyn };

struct Ref {
    RefKind kind = RefKind::FragValue;
    int id = 0;
    std::shared_ptr<const Ref> prefix;

    std::string str() const;
    bool operator==(const Ref& o) const { return str() == o.str(); }
    bool operator!=(const Ref& o) const { return !(*this == o); }
    bool operator<(const Ref& o) const { return str() < o.str(); }

    // Root segment is the `dyn` placeholder.
    bool dyn_rooted() const;
    // Replace the root with `root` (which may itself be a path).
    Ref rooted_at(const Ref& root) const;
    // Prepend `p` in front of the whole path.
    Ref prefixed(const Ref& p) const;
};

Ref make_ref(RefKind kind, int id, std::optional<Ref> prefix = std::nullopt);
Ref dyn_ref();
// Parses "R1.f0", "dyn.f2", "x3". Returns nullopt on bad syntax.
std::optional<Ref> parse_ref(const std::string& text);

class FreshRefs {
public:
    Ref fresh(RefKind kind, std::optional<Ref> prefix = std::nullopt);
    // Ensure future ids of `kind` are strictly above `id`.
    void reserve(RefKind kind, int id);
    int next(RefKind kind) const { return counters_[static_cast<int>(kind)]; }

private:
    std::array<int, 5> counters_{};
};

// ---- paths ----------------------------------------------------------------

struct Path;
using PathPtr = std::shared_ptr<const Path>;

struct Path {
    enum class Kind { Var, Access, Apply };
    Kind kind = Kind::Var;
    Ident id;          // Var
    PathPtr base;      // Access, Apply (functor)
    std::string field; // Access
    PathPtr arg;       // Apply

    static PathPtr var(Ident id);
    static PathPtr access(PathPtr base, std::string field);
    static PathPtr apply(PathPtr f, PathPtr arg);
    const Ident& root() const;
};

bool path_equal(const PathPtr& a, const PathPtr& b);
std::string path_str(const PathPtr& p);

// ---- types ----------------------------------------------------------------

struct Type;
using TypePtr = std::shared_ptr<Type>;

struct Type {
    enum class Kind { Var, Meta, Arrow, Constr, Fragment, Conv };
    Kind kind = Kind::Var;

    std::string name;            // Var
    Location loc = Location::Base; // Var, Meta

    int meta_id = 0;             // Meta
    int level = 0;
    TypePtr link;

    TypePtr a, b;                // Arrow(a, b), Fragment(a), Conv(a, b)
    std::vector<TypePtr> args;   // Constr
    std::optional<Ident> head_id;  // Constr with a local head
    PathPtr head_path;             // Constr with a qualified head p.name
    std::string head_name;

    static TypePtr var(std::string name, Location loc);
    static TypePtr arrow(TypePtr a, TypePtr b);
    static TypePtr constr(Ident head, std::vector<TypePtr> args = {});
    static TypePtr qconstr(PathPtr path, std::string name, std::vector<TypePtr> args = {});
    static TypePtr fragment(TypePtr t);
    static TypePtr conv(TypePtr server, TypePtr client);
};

// Built-in base types carry stamp -1.
Ident builtin_type(const std::string& name);
TypePtr t_int();
TypePtr t_unit();
TypePtr t_string();
TypePtr t_serial();
TypePtr t_fragty();

struct TypeParam {
    std::string name;
    Location loc = Location::Base;
};

// ---- module types ---------------------------------------------------------

struct ModType;
using ModTypePtr = std::shared_ptr<const ModType>;

struct SigItem {
    enum class Kind { Val, TypeAbs, TypeManifest, Mod };
    Kind kind = Kind::Val;
    Location loc = Location::Base;
    Ident id;
    TypePtr type;                  // Val type (free Vars quantified), manifest body
    std::vector<TypeParam> params; // type items
    ModTypePtr mty;                // Mod
};

struct ModType {
    enum class Kind { Sig, Functor, MixedFunctor };
    Kind kind = Kind::Sig;
    std::vector<SigItem> items;
    Ident param;
    ModTypePtr arg, res;

    static ModTypePtr sig(std::vector<SigItem> items);
    static ModTypePtr functor(Ident param, ModTypePtr arg, ModTypePtr res, bool mixed = false);
};

// ---- expressions ----------------------------------------------------------

struct Literal {
    enum class Kind { Int, Unit, String, Prim, Conv };
    Kind kind = Kind::Unit;
    long long i = 0;
    std::string s;          // string value, primitive name, converter name
    bool server_side = true; // Conv: the ^s half when true

    static Literal integer(long long v);
    static Literal unit();
    static Literal string(std::string v);
    static Literal prim(std::string name);
    static Literal conv(std::string name, bool server_side);
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Const, Var, QualVar, App, Lam, Let, Fragment, Injection, RefExpr, FragCall };
    Kind kind = Kind::Const;
    Literal lit;
    Ident id;                 // Var; Lam parameter; Let binder
    PathPtr path;             // QualVar
    std::string field;        // QualVar
    ExprPtr a, b;             // App(a,b); Lam body a; Let rhs a body b; Fragment body a; Injection target a
    std::string conv;         // Injection converter
    std::optional<Ref> ref;   // Fragment ref, Injection slot, RefExpr, FragCall function
    std::vector<ExprPtr> args; // FragCall
    SrcPos pos;

    static ExprPtr constant(Literal lit, SrcPos pos = {});
    static ExprPtr var(Ident id, SrcPos pos = {});
    static ExprPtr qualvar(PathPtr p, std::string field, SrcPos pos = {});
    static ExprPtr app(ExprPtr f, ExprPtr x, SrcPos pos = {});
    static ExprPtr lam(Ident x, ExprPtr body, SrcPos pos = {});
    static ExprPtr let(Ident x, ExprPtr rhs, ExprPtr body, SrcPos pos = {});
    static ExprPtr fragment(ExprPtr body, std::optional<Ref> ref = std::nullopt, SrcPos pos = {});
    static ExprPtr injection(ExprPtr target, std::string conv, std::optional<Ref> slot = std::nullopt,
                             SrcPos pos = {});
    static ExprPtr refexpr(Ref r, SrcPos pos = {});
    static ExprPtr fragcall(Ref f, std::vector<ExprPtr> args, SrcPos pos = {});
};

ExprPtr e_int(long long v);
ExprPtr e_prim(const std::string& name);
ExprPtr e_conv(const std::string& name, bool server_side);
ExprPtr e_binop(const std::string& op, ExprPtr l, ExprPtr r);

// ---- modules and declarations ---------------------------------------------

struct Decl;
using DeclPtr = std::shared_ptr<const Decl>;
struct ModExpr;
using ModExprPtr = std::shared_ptr<const ModExpr>;
using Program = std::vector<DeclPtr>;

struct ModExpr {
    enum class Kind { Path, Constraint, Apply, Functor, MixedFunctor, Struct, RefMod, FragMod, GetDyn };
    Kind kind = Kind::Path;
    PathPtr path;              // Path, GetDyn
    ModTypePtr mty;            // Constraint, functor parameter type
    ModExprPtr a, b;           // Constraint(a), Apply(a,b), functor body a
    Ident param;
    std::vector<DeclPtr> items; // Struct
    bool mixed = false;        // Struct written in a mixed context
    std::optional<Ref> ref;    // Struct ref, RefMod, FragMod functor ref
    std::vector<ModExprPtr> dyn_args; // FragMod: GetDyn nodes
    SrcPos pos;

    static ModExprPtr path_of(PathPtr p, SrcPos pos = {});
    static ModExprPtr constraint(ModExprPtr m, ModTypePtr t, SrcPos pos = {});
    static ModExprPtr apply(ModExprPtr f, ModExprPtr x, SrcPos pos = {});
    static ModExprPtr functor(Ident param, ModTypePtr arg, ModExprPtr body, bool mixed, SrcPos pos = {});
    static ModExprPtr structure(std::vector<DeclPtr> items, bool mixed, std::optional<Ref> ref = std::nullopt,
                                SrcPos pos = {});
    static ModExprPtr refmod(Ref r, SrcPos pos = {});
    static ModExprPtr fragmod(Ref f, std::vector<ModExprPtr> dyn_args, SrcPos pos = {});
    static ModExprPtr getdyn(PathPtr p, SrcPos pos = {});
};

struct Decl {
    enum class Kind { Let, Type, Module, BindEnv, Bind, BindMod, Exec, End, Injection, Dyn };
    Kind kind = Kind::Let;
    Location loc = Location::Base;
    Ident id;
    ExprPtr expr;                  // Let, Bind, Injection
    std::vector<TypeParam> params; // Type
    TypePtr manifest;              // Type (null when abstract)
    ModExprPtr mod;                // Module, BindMod, Dyn
    std::optional<Ref> ref;        // BindEnv/Bind/BindMod target; Injection slot
    std::optional<Ref> with;       // Bind/BindMod environment
    SrcPos pos;

    static DeclPtr let(Location loc, Ident id, ExprPtr e, SrcPos pos = {});
    static DeclPtr type(Location loc, Ident id, std::vector<TypeParam> params, TypePtr body, SrcPos pos = {});
    static DeclPtr module(Location loc, Ident id, ModExprPtr m, SrcPos pos = {});
    static DeclPtr bind_env(Ref r);
    static DeclPtr bind(Ref r, std::optional<Ref> with, ExprPtr e);
    static DeclPtr bind_mod(Ref r, std::optional<Ref> with, ModExprPtr m);
    static DeclPtr exec();
    static DeclPtr end();
    static DeclPtr injection(Ref slot, ExprPtr e);
    static DeclPtr dyn(ModExprPtr m);
};

// Copies of a declaration with a different location (used for erasure).
DeclPtr with_location(const DeclPtr& d, Location loc);

// ---- annotation -----------------------------------------------------------

// Bumps the counters of `fresh` above every ref already present in `p`.
void reserve_refs(const Program& p, FreshRefs& fresh);

// Gives every fragment a FragClosure ref, every mixed structure a ModRef and
// every injection outside a fragment an InjSlot ref; existing refs are kept.
Program annotate(const Program& p);
Program annotate(const Program& p, FreshRefs& fresh);

// All refs carried by syntax nodes, in pre-order.
std::vector<Ref> collect_refs(const Program& p);

// Largest stamp in use for any identifier.
int max_stamp(const Program& p);

}  // namespace etml
