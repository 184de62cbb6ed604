#include "etml/ast.hpp"

#include <algorithm>
#include <cctype>

#include "etml/walk.hpp"

namespace etml {

namespace {

char kind_letter(RefKind k) {
    switch (k) {
    case RefKind::FragClosure: return 'f';
    case RefKind::FragValue: return 'r';
    case RefKind::InjSlot: return 'x';
    case RefKind::ModRef: return 'R';
    case RefKind::Dyn: return 'd';
    }
    return '?';
}

}  // namespace

std::string Ref::str() const {
    std::string seg = kind == RefKind::Dyn ? std::string("dyn") : kind_letter(kind) + std::to_string(id);
    return prefix ? prefix->str() + "." + seg : seg;
}

bool Ref::dyn_rooted() const {
    const Ref* r = this;
    while (r->prefix) r = r->prefix.get();
    return r->kind == RefKind::Dyn;
}

Ref Ref::rooted_at(const Ref& root) const {
    if (!prefix) return root;
    Ref out = *this;
    out.prefix = std::make_shared<Ref>(prefix->rooted_at(root));
    return out;
}

Ref Ref::prefixed(const Ref& p) const {
    Ref out = *this;
    out.prefix = std::make_shared<Ref>(prefix ? prefix->prefixed(p) : p);
    return out;
}

Ref make_ref(RefKind kind, int id, std::optional<Ref> prefix) {
    Ref r;
    r.kind = kind;
    r.id = id;
    if (prefix) r.prefix = std::make_shared<Ref>(*prefix);
    return r;
}

Ref dyn_ref() { return make_ref(RefKind::Dyn, 0); }

std::optional<Ref> parse_ref(const std::string& text) {
    std::optional<Ref> cur;
    size_t i = 0;
    while (i <= text.size()) {
        size_t j = text.find('.', i);
        if (j == std::string::npos) j = text.size();
        std::string seg = text.substr(i, j - i);
        Ref r;
        if (seg == "dyn") {
            r.kind = RefKind::Dyn;
        } else {
            if (seg.size() < 2) return std::nullopt;
            switch (seg[0]) {
            case 'f': r.kind = RefKind::FragClosure; break;
            case 'r': r.kind = RefKind::FragValue; break;
            case 'x': r.kind = RefKind::InjSlot; break;
            case 'R': r.kind = RefKind::ModRef; break;
            default: return std::nullopt;
            }
            for (size_t k = 1; k < seg.size(); ++k)
                if (!std::isdigit(static_cast<unsigned char>(seg[k]))) return std::nullopt;
            r.id = std::stoi(seg.substr(1));
        }
        if (cur) r.prefix = std::make_shared<Ref>(*cur);
        cur = r;
        i = j + 1;
    }
    return cur;
}

Ref FreshRefs::fresh(RefKind kind, std::optional<Ref> prefix) {
    int& c = counters_[static_cast<int>(kind)];
    return make_ref(kind, c++, std::move(prefix));
}

void FreshRefs::reserve(RefKind kind, int id) {
    int& c = counters_[static_cast<int>(kind)];
    c = std::max(c, id + 1);
}

// ---- paths ----------------------------------------------------------------

PathPtr Path::var(Ident id) {
    auto p = std::make_shared<Path>();
    p->kind = Kind::Var;
    p->id = std::move(id);
    return p;
}

PathPtr Path::access(PathPtr base, std::string field) {
    auto p = std::make_shared<Path>();
    p->kind = Kind::Access;
    p->base = std::move(base);
    p->field = std::move(field);
    return p;
}

PathPtr Path::apply(PathPtr f, PathPtr arg) {
    auto p = std::make_shared<Path>();
    p->kind = Kind::Apply;
    p->base = std::move(f);
    p->arg = std::move(arg);
    return p;
}

const Ident& Path::root() const {
    const Path* p = this;
    while (p->kind != Kind::Var) p = p->base.get();
    return p->id;
}

bool path_equal(const PathPtr& a, const PathPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case Path::Kind::Var: return a->id == b->id;
    case Path::Kind::Access: return a->field == b->field && path_equal(a->base, b->base);
    case Path::Kind::Apply: return path_equal(a->base, b->base) && path_equal(a->arg, b->arg);
    }
    return false;
}

std::string path_str(const PathPtr& p) {
    switch (p->kind) {
    case Path::Kind::Var: return p->id.name;
    case Path::Kind::Access: return path_str(p->base) + "." + p->field;
    case Path::Kind::Apply: return path_str(p->base) + "(" + path_str(p->arg) + ")";
    }
    return "";
}

// ---- types ----------------------------------------------------------------

TypePtr Type::var(std::string name, Location loc) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Var;
    t->name = std::move(name);
    t->loc = loc;
    return t;
}

TypePtr Type::arrow(TypePtr a, TypePtr b) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Arrow;
    t->a = std::move(a);
    t->b = std::move(b);
    return t;
}

TypePtr Type::constr(Ident head, std::vector<TypePtr> args) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Constr;
    t->head_name = head.name;
    t->head_id = std::move(head);
    t->args = std::move(args);
    return t;
}

TypePtr Type::qconstr(PathPtr path, std::string name, std::vector<TypePtr> args) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Constr;
    t->head_path = std::move(path);
    t->head_name = std::move(name);
    t->args = std::move(args);
    return t;
}

TypePtr Type::fragment(TypePtr inner) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Fragment;
    t->a = std::move(inner);
    return t;
}

TypePtr Type::conv(TypePtr server, TypePtr client) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Conv;
    t->a = std::move(server);
    t->b = std::move(client);
    return t;
}

Ident builtin_type(const std::string& name) { return Ident{name, -1}; }
TypePtr t_int() { return Type::constr(builtin_type("int")); }
TypePtr t_unit() { return Type::constr(builtin_type("unit")); }
TypePtr t_string() { return Type::constr(builtin_type("string")); }
TypePtr t_serial() { return Type::constr(builtin_type("serial")); }
TypePtr t_fragty() { return Type::constr(builtin_type("fragty")); }

ModTypePtr ModType::sig(std::vector<SigItem> items) {
    auto m = std::make_shared<ModType>();
    m->kind = Kind::Sig;
    m->items = std::move(items);
    return m;
}

ModTypePtr ModType::functor(Ident param, ModTypePtr arg, ModTypePtr res, bool mixed) {
    auto m = std::make_shared<ModType>();
    m->kind = mixed ? Kind::MixedFunctor : Kind::Functor;
    m->param = std::move(param);
    m->arg = std::move(arg);
    m->res = std::move(res);
    return m;
}

// ---- expressions ----------------------------------------------------------

Literal Literal::integer(long long v) {
    Literal l;
    l.kind = Kind::Int;
    l.i = v;
    return l;
}
Literal Literal::unit() { return Literal{}; }
Literal Literal::string(std::string v) {
    Literal l;
    l.kind = Kind::String;
    l.s = std::move(v);
    return l;
}
Literal Literal::prim(std::string name) {
    Literal l;
    l.kind = Kind::Prim;
    l.s = std::move(name);
    return l;
}
Literal Literal::conv(std::string name, bool server_side) {
    Literal l;
    l.kind = Kind::Conv;
    l.s = std::move(name);
    l.server_side = server_side;
    return l;
}

namespace {
std::shared_ptr<Expr> mk(Expr::Kind k, SrcPos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->pos = pos;
    return e;
}
}  // namespace

ExprPtr Expr::constant(Literal lit, SrcPos pos) {
    auto e = mk(Kind::Const, pos);
    e->lit = std::move(lit);
    return e;
}
ExprPtr Expr::var(Ident id, SrcPos pos) {
    auto e = mk(Kind::Var, pos);
    e->id = std::move(id);
    return e;
}
ExprPtr Expr::qualvar(PathPtr p, std::string field, SrcPos pos) {
    auto e = mk(Kind::QualVar, pos);
    e->path = std::move(p);
    e->field = std::move(field);
    return e;
}
ExprPtr Expr::app(ExprPtr f, ExprPtr x, SrcPos pos) {
    auto e = mk(Kind::App, pos);
    e->a = std::move(f);
    e->b = std::move(x);
    return e;
}
ExprPtr Expr::lam(Ident x, ExprPtr body, SrcPos pos) {
    auto e = mk(Kind::Lam, pos);
    e->id = std::move(x);
    e->a = std::move(body);
    return e;
}
ExprPtr Expr::let(Ident x, ExprPtr rhs, ExprPtr body, SrcPos pos) {
    auto e = mk(Kind::Let, pos);
    e->id = std::move(x);
    e->a = std::move(rhs);
    e->b = std::move(body);
    return e;
}
ExprPtr Expr::fragment(ExprPtr body, std::optional<Ref> ref, SrcPos pos) {
    auto e = mk(Kind::Fragment, pos);
    e->a = std::move(body);
    e->ref = std::move(ref);
    return e;
}
ExprPtr Expr::injection(ExprPtr target, std::string conv, std::optional<Ref> slot, SrcPos pos) {
    auto e = mk(Kind::Injection, pos);
    e->a = std::move(target);
    e->conv = std::move(conv);
    e->ref = std::move(slot);
    return e;
}
ExprPtr Expr::refexpr(Ref r, SrcPos pos) {
    auto e = mk(Kind::RefExpr, pos);
    e->ref = std::move(r);
    return e;
}
ExprPtr Expr::fragcall(Ref f, std::vector<ExprPtr> args, SrcPos pos) {
    auto e = mk(Kind::FragCall, pos);
    e->ref = std::move(f);
    e->args = std::move(args);
    return e;
}

ExprPtr e_int(long long v) { return Expr::constant(Literal::integer(v)); }
ExprPtr e_prim(const std::string& name) { return Expr::constant(Literal::prim(name)); }
ExprPtr e_conv(const std::string& name, bool server_side) {
    return Expr::constant(Literal::conv(name, server_side));
}
ExprPtr e_binop(const std::string& op, ExprPtr l, ExprPtr r) {
    return Expr::app(Expr::app(e_prim(op), std::move(l)), std::move(r));
}

// ---- modules --------------------------------------------------------------

namespace {
std::shared_ptr<ModExpr> mkm(ModExpr::Kind k, SrcPos pos) {
    auto m = std::make_shared<ModExpr>();
    m->kind = k;
    m->pos = pos;
    return m;
}
}  // namespace

ModExprPtr ModExpr::path_of(PathPtr p, SrcPos pos) {
    auto m = mkm(Kind::Path, pos);
    m->path = std::move(p);
    return m;
}
ModExprPtr ModExpr::constraint(ModExprPtr x, ModTypePtr t, SrcPos pos) {
    auto m = mkm(Kind::Constraint, pos);
    m->a = std::move(x);
    m->mty = std::move(t);
    return m;
}
ModExprPtr ModExpr::apply(ModExprPtr f, ModExprPtr x, SrcPos pos) {
    auto m = mkm(Kind::Apply, pos);
    m->a = std::move(f);
    m->b = std::move(x);
    return m;
}
ModExprPtr ModExpr::functor(Ident param, ModTypePtr arg, ModExprPtr body, bool mixed, SrcPos pos) {
    auto m = mkm(mixed ? Kind::MixedFunctor : Kind::Functor, pos);
    m->param = std::move(param);
    m->mty = std::move(arg);
    m->a = std::move(body);
    return m;
}
ModExprPtr ModExpr::structure(std::vector<DeclPtr> items, bool mixed, std::optional<Ref> ref, SrcPos pos) {
    auto m = mkm(Kind::Struct, pos);
    m->items = std::move(items);
    m->mixed = mixed;
    m->ref = std::move(ref);
    return m;
}
ModExprPtr ModExpr::refmod(Ref r, SrcPos pos) {
    auto m = mkm(Kind::RefMod, pos);
    m->ref = std::move(r);
    return m;
}
ModExprPtr ModExpr::fragmod(Ref f, std::vector<ModExprPtr> dyn_args, SrcPos pos) {
    auto m = mkm(Kind::FragMod, pos);
    m->ref = std::move(f);
    m->dyn_args = std::move(dyn_args);
    return m;
}
ModExprPtr ModExpr::getdyn(PathPtr p, SrcPos pos) {
    auto m = mkm(Kind::GetDyn, pos);
    m->path = std::move(p);
    return m;
}

namespace {
std::shared_ptr<Decl> mkd(Decl::Kind k) {
    auto d = std::make_shared<Decl>();
    d->kind = k;
    return d;
}
}  // namespace

DeclPtr Decl::let(Location loc, Ident id, ExprPtr e, SrcPos pos) {
    auto d = mkd(Kind::Let);
    d->loc = loc;
    d->id = std::move(id);
    d->expr = std::move(e);
    d->pos = pos;
    return d;
}
DeclPtr Decl::type(Location loc, Ident id, std::vector<TypeParam> params, TypePtr body, SrcPos pos) {
    auto d = mkd(Kind::Type);
    d->loc = loc;
    d->id = std::move(id);
    d->params = std::move(params);
    d->manifest = std::move(body);
    d->pos = pos;
    return d;
}
DeclPtr Decl::module(Location loc, Ident id, ModExprPtr m, SrcPos pos) {
    auto d = mkd(Kind::Module);
    d->loc = loc;
    d->id = std::move(id);
    d->mod = std::move(m);
    d->pos = pos;
    return d;
}
DeclPtr Decl::bind_env(Ref r) {
    auto d = mkd(Kind::BindEnv);
    d->ref = std::move(r);
    return d;
}
DeclPtr Decl::bind(Ref r, std::optional<Ref> with, ExprPtr e) {
    auto d = mkd(Kind::Bind);
    d->ref = std::move(r);
    d->with = std::move(with);
    d->expr = std::move(e);
    return d;
}
DeclPtr Decl::bind_mod(Ref r, std::optional<Ref> with, ModExprPtr m) {
    auto d = mkd(Kind::BindMod);
    d->ref = std::move(r);
    d->with = std::move(with);
    d->mod = std::move(m);
    return d;
}
DeclPtr Decl::exec() { return mkd(Kind::Exec); }
DeclPtr Decl::end() { return mkd(Kind::End); }
DeclPtr Decl::injection(Ref slot, ExprPtr e) {
    auto d = mkd(Kind::Injection);
    d->ref = std::move(slot);
    d->expr = std::move(e);
    return d;
}
DeclPtr Decl::dyn(ModExprPtr m) {
    auto d = mkd(Kind::Dyn);
    d->mod = std::move(m);
    return d;
}

DeclPtr with_location(const DeclPtr& d, Location loc) {
    if (d->loc == loc) return d;
    auto n = std::make_shared<Decl>(*d);
    n->loc = loc;
    return n;
}

// ---- annotation -----------------------------------------------------------

namespace {

class RefCollector : public Visitor {
public:
    std::vector<Ref> refs;
    void expr(const ExprPtr& e) override {
        if (e->ref) refs.push_back(*e->ref);
        visit_children(e);
    }
    void mod(const ModExprPtr& m) override {
        if (m->ref) refs.push_back(*m->ref);
        visit_children(m);
    }
    void decl(const DeclPtr& d) override {
        if (d->ref) refs.push_back(*d->ref);
        if (d->with) refs.push_back(*d->with);
        visit_children(d);
    }
};

class Annotator : public Rewriter {
public:
    explicit Annotator(FreshRefs& fresh) : fresh_(fresh) {}

    ExprPtr expr(const ExprPtr& e) override {
        if (e->kind == Expr::Kind::Fragment) {
            auto n = std::make_shared<Expr>(*e);
            if (!n->ref) n->ref = fresh_.fresh(RefKind::FragClosure);
            ++in_fragment_;
            n->a = expr(e->a);
            --in_fragment_;
            return n;
        }
        if (e->kind == Expr::Kind::Injection && in_fragment_ == 0 && !e->ref) {
            auto n = std::make_shared<Expr>(*e);
            n->ref = fresh_.fresh(RefKind::InjSlot);
            n->a = expr(e->a);
            return n;
        }
        return recurse_expr(e);
    }

    ModExprPtr mod(const ModExprPtr& m) override {
        if (m->kind == ModExpr::Kind::Struct && m->mixed && !m->ref) {
            auto n = std::make_shared<ModExpr>(*m);
            n->ref = fresh_.fresh(RefKind::ModRef);
            n->items = decls(m->items);
            return n;
        }
        return recurse_mod(m);
    }

private:
    FreshRefs& fresh_;
    int in_fragment_ = 0;
};

class StampScanner : public Visitor {
public:
    int best = -1;
    void see(const Ident& id) { best = std::max(best, id.stamp); }
    void see(const PathPtr& p) {
        if (!p) return;
        if (p->kind == Path::Kind::Var) see(p->id);
        see(p->base);
        see(p->arg);
    }
    void expr(const ExprPtr& e) override {
        see(e->id);
        see(e->path);
        visit_children(e);
    }
    void mod(const ModExprPtr& m) override {
        see(m->param);
        see(m->path);
        visit_children(m);
    }
    void decl(const DeclPtr& d) override {
        see(d->id);
        visit_children(d);
    }
};

}  // namespace

std::vector<Ref> collect_refs(const Program& p) {
    RefCollector c;
    c.decls(p);
    return c.refs;
}

void reserve_refs(const Program& p, FreshRefs& fresh) {
    for (auto& r : collect_refs(p)) {
        // Every segment of a path counts, so prefixes are covered too.
        const Ref* cur = &r;
        while (cur) {
            if (cur->kind != RefKind::Dyn) fresh.reserve(cur->kind, cur->id);
            cur = cur->prefix.get();
        }
    }
}

Program annotate(const Program& p, FreshRefs& fresh) {
    reserve_refs(p, fresh);
    Annotator a(fresh);
    return a.decls(p);
}

Program annotate(const Program& p) {
    FreshRefs fresh;
    return annotate(p, fresh);
}

int max_stamp(const Program& p) {
    StampScanner s;
    s.decls(p);
    return s.best;
}

}  // namespace etml
