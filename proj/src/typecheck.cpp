#include "etml/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "etml/pretty.hpp"

namespace etml {

const char* to_string(TypeError::Kind k) {
    switch (k) {
    case TypeError::Kind::LocationViolation: return "LocationViolation";
    case TypeError::Kind::Unbound: return "Unbound";
    case TypeError::Kind::Mismatch: return "Mismatch";
    case TypeError::Kind::BadFunctorApp: return "BadFunctorApp";
    case TypeError::Kind::InjectionInMixedFunctor: return "InjectionInMixedFunctor";
    case TypeError::Kind::ArityMismatch: return "ArityMismatch";
    case TypeError::Kind::NotASignature: return "NotASignature";
    }
    return "?";
}

namespace {
std::string render_error(TypeError::Kind k, const std::string& msg, SrcPos span) {
    std::string s = std::string(to_string(k)) + ": " + msg;
    if (span.line > 0) s += " (line " + std::to_string(span.line) + ", column " + std::to_string(span.col) + ")";
    return s;
}
}  // namespace

TypeError::TypeError(Kind k, const std::string& msg, SrcPos sp)
    : std::runtime_error(render_error(k, msg, sp)), kind(k), span(sp) {}

// ---- environments ---------------------------------------------------------

Env Env::extend(Binding b) const {
    Env e;
    e.head_ = std::make_shared<Node>(Node{std::move(b), head_});
    return e;
}

Binding binding_of(const SigItem& it) {
    Binding b;
    b.loc = it.loc;
    b.id = it.id;
    switch (it.kind) {
    case SigItem::Kind::Val:
        b.kind = Binding::Kind::Val;
        b.type = it.type;
        break;
    case SigItem::Kind::TypeAbs:
    case SigItem::Kind::TypeManifest:
        b.kind = Binding::Kind::Type;
        b.type = it.kind == SigItem::Kind::TypeManifest ? it.type : nullptr;
        b.params = it.params;
        break;
    case SigItem::Kind::Mod:
        b.kind = Binding::Kind::Mod;
        b.mty = it.mty;
        break;
    }
    return b;
}

Env Env::extend_sig(const std::vector<SigItem>& items) const {
    Env e = *this;
    for (auto& it : items) e = e.extend(binding_of(it));
    return e;
}

const Binding* Env::find(Binding::Kind kind, const Ident& id) const {
    for (auto n = head_.get(); n; n = n->next.get())
        if (n->b.kind == kind && n->b.id == id) return &n->b;
    return nullptr;
}

std::vector<Binding> Env::bindings() const {
    std::vector<Binding> out;
    for (auto n = head_.get(); n; n = n->next.get()) out.push_back(n->b);
    std::reverse(out.begin(), out.end());
    return out;
}

Env Env::initial(bool target) {
    Env e;
    std::vector<std::string> names = {"int", "unit", "string", "serial"};
    if (target) names.push_back("fragty");
    for (auto& n : names) {
        Binding b;
        b.kind = Binding::Kind::Type;
        b.loc = Location::Base;
        b.id = builtin_type(n);
        e = e.extend(b);
    }
    return e;
}

// ---- type utilities -------------------------------------------------------

namespace {

TypePtr repr(TypePtr t) {
    while (t->kind == Type::Kind::Meta && t->link) t = t->link;
    return t;
}

struct HeadRepl {
    std::optional<Ident> id;
    PathPtr path;
    std::string name;
};

struct Subst {
    std::map<std::string, PathPtr> mods;
    std::map<std::string, HeadRepl> types;
    bool empty() const { return mods.empty() && types.empty(); }
};

PathPtr subst_path(const Subst& s, const PathPtr& p) {
    switch (p->kind) {
    case Path::Kind::Var: {
        auto it = s.mods.find(p->id.key());
        return it == s.mods.end() ? p : it->second;
    }
    case Path::Kind::Access: {
        auto b = subst_path(s, p->base);
        return b == p->base ? p : Path::access(b, p->field);
    }
    case Path::Kind::Apply: {
        auto f = subst_path(s, p->base);
        auto a = subst_path(s, p->arg);
        return f == p->base && a == p->arg ? p : Path::apply(f, a);
    }
    }
    return p;
}

TypePtr map_type(const TypePtr& t0, const std::function<TypePtr(const TypePtr&)>& leaf) {
    TypePtr t = repr(t0);
    if (auto r = leaf(t)) return r;
    switch (t->kind) {
    case Type::Kind::Var:
    case Type::Kind::Meta: return t;
    case Type::Kind::Arrow: {
        auto a = map_type(t->a, leaf), b = map_type(t->b, leaf);
        return a == t->a && b == t->b ? t : Type::arrow(a, b);
    }
    case Type::Kind::Conv: {
        auto a = map_type(t->a, leaf), b = map_type(t->b, leaf);
        return a == t->a && b == t->b ? t : Type::conv(a, b);
    }
    case Type::Kind::Fragment: {
        auto a = map_type(t->a, leaf);
        return a == t->a ? t : Type::fragment(a);
    }
    case Type::Kind::Constr: {
        bool changed = false;
        std::vector<TypePtr> args;
        for (auto& x : t->args) {
            args.push_back(map_type(x, leaf));
            changed |= args.back() != x;
        }
        if (!changed) return t;
        auto n = std::make_shared<Type>(*t);
        n->args = std::move(args);
        return n;
    }
    }
    return t;
}

TypePtr subst_type(const Subst& s, const TypePtr& t) {
    if (s.empty()) return t;
    return map_type(t, [&](const TypePtr& x) -> TypePtr {
        if (x->kind != Type::Kind::Constr) return nullptr;
        std::vector<TypePtr> args;
        for (auto& a : x->args) args.push_back(subst_type(s, a));
        if (x->head_id) {
            auto it = s.types.find(x->head_id->key());
            if (it == s.types.end()) {
                auto n = std::make_shared<Type>(*x);
                n->args = std::move(args);
                return n;
            }
            if (it->second.id) return Type::constr(*it->second.id, args);
            return Type::qconstr(it->second.path, it->second.name, args);
        }
        return Type::qconstr(subst_path(s, x->head_path), x->head_name, args);
    });
}

TypePtr subst_vars(const TypePtr& t, const std::map<std::string, TypePtr>& m) {
    if (m.empty()) return t;
    return map_type(t, [&](const TypePtr& x) -> TypePtr {
        if (x->kind != Type::Kind::Var) return nullptr;
        auto it = m.find(x->name);
        return it == m.end() ? x : it->second;
    });
}

TypePtr relabel_base(const TypePtr& t, Location to) {
    return map_type(t, [&](const TypePtr& x) -> TypePtr {
        if (x->kind == Type::Kind::Var && x->loc == Location::Base) return Type::var(x->name, to);
        return nullptr;
    });
}

ModTypePtr subst_modtype(const Subst& s, const ModTypePtr& m) {
    if (s.empty()) return m;
    auto n = std::make_shared<ModType>(*m);
    switch (m->kind) {
    case ModType::Kind::Sig:
        for (auto& it : n->items) {
            if (it.type) it.type = subst_type(s, it.type);
            if (it.mty) it.mty = subst_modtype(s, it.mty);
        }
        break;
    default:
        n->arg = subst_modtype(s, m->arg);
        n->res = subst_modtype(s, m->res);
        break;
    }
    return n;
}

bool is_type_item(const SigItem& it) {
    return it.kind == SigItem::Kind::TypeAbs || it.kind == SigItem::Kind::TypeManifest;
}

int find_item(const std::vector<SigItem>& items, SigItem::Kind kind, const std::string& name) {
    for (int i = static_cast<int>(items.size()) - 1; i >= 0; --i) {
        const auto& it = items[static_cast<size_t>(i)];
        bool k = kind == SigItem::Kind::TypeAbs || kind == SigItem::Kind::TypeManifest ? is_type_item(it)
                                                                                          : it.kind == kind;
        if (k && it.id.name == name) return i;
    }
    return -1;
}

// Items before `upto` referenced through `p`.
Subst prefix_subst(const std::vector<SigItem>& items, size_t upto, const PathPtr& p) {
    Subst s;
    for (size_t i = 0; i < upto && i < items.size(); ++i) {
        const auto& it = items[i];
        if (is_type_item(it)) s.types[it.id.key()] = HeadRepl{std::nullopt, p, it.id.name};
        if (it.kind == SigItem::Kind::Mod) s.mods[it.id.key()] = Path::access(p, it.id.name);
    }
    return s;
}

void collect_vars(const TypePtr& t0, std::vector<TypeParam>& out) {
    TypePtr t = repr(t0);
    switch (t->kind) {
    case Type::Kind::Var:
        for (auto& p : out)
            if (p.name == t->name) return;
        out.push_back({t->name, t->loc});
        return;
    case Type::Kind::Meta: return;
    case Type::Kind::Constr:
        for (auto& a : t->args) collect_vars(a, out);
        return;
    default:
        if (t->a) collect_vars(t->a, out);
        if (t->b) collect_vars(t->b, out);
    }
}

Location meet(Location a, Location b) {
    if (can_use(a, b)) return a;
    if (can_use(b, a)) return b;
    return Location::Base;
}

}  // namespace

TypePtr zonk(const TypePtr& t0) {
    TypePtr t = repr(t0);
    switch (t->kind) {
    case Type::Kind::Var:
    case Type::Kind::Meta: return t;
    case Type::Kind::Arrow: return Type::arrow(zonk(t->a), zonk(t->b));
    case Type::Kind::Conv: return Type::conv(zonk(t->a), zonk(t->b));
    case Type::Kind::Fragment: return Type::fragment(zonk(t->a));
    case Type::Kind::Constr: {
        auto n = std::make_shared<Type>(*t);
        for (auto& a : n->args) a = zonk(a);
        return n;
    }
    }
    return t;
}

TypePtr erase_locations(const TypePtr& t) { return relabel_base(map_type(t, [](const TypePtr& x) -> TypePtr {
    if (x->kind == Type::Kind::Var && x->loc != Location::Base) return Type::var(x->name, Location::Base);
    return nullptr;
}), Location::Base); }

ModTypePtr erase_locations(const ModTypePtr& m) {
    auto n = std::make_shared<ModType>(*m);
    if (m->kind == ModType::Kind::Sig) {
        for (auto& it : n->items) {
            it.loc = Location::Base;
            for (auto& p : it.params) p.loc = Location::Base;
            if (it.type) it.type = erase_locations(it.type);
            if (it.mty) it.mty = erase_locations(it.mty);
        }
    } else {
        n->arg = erase_locations(m->arg);
        n->res = erase_locations(m->res);
    }
    return n;
}

// ---- specialization and strengthening -------------------------------------

ModTypePtr specialize(const ModTypePtr& m, Location from, Location to) {
    if (to == Location::Base || to == Location::Mixed) return m;
    switch (m->kind) {
    case ModType::Kind::Sig: {
        std::vector<SigItem> items;
        for (auto it : m->items) {
            if (!can_use(it.loc, to)) continue;
            if (it.loc == Location::Base) {
                if (it.type) it.type = relabel_base(it.type, to);
                for (auto& p : it.params)
                    if (p.loc == Location::Base) p.loc = to;
            }
            if (it.mty) it.mty = specialize(it.mty, it.loc, to);
            it.loc = to;
            items.push_back(std::move(it));
        }
        return ModType::sig(std::move(items));
    }
    case ModType::Kind::Functor:
        return ModType::functor(m->param, specialize(m->arg, from, to), specialize(m->res, from, to), false);
    case ModType::Kind::MixedFunctor:
        return ModType::functor(m->param, m->arg, specialize(m->res, Location::Mixed, to), true);
    }
    return m;
}

ModTypePtr strengthen(const ModTypePtr& m, const PathPtr& p) {
    switch (m->kind) {
    case ModType::Kind::Sig: {
        std::vector<SigItem> items;
        for (auto it : m->items) {
            if (is_type_item(it)) {
                std::vector<TypePtr> args;
                for (auto& q : it.params) args.push_back(Type::var(q.name, q.loc));
                it.kind = SigItem::Kind::TypeManifest;
                it.type = Type::qconstr(p, it.id.name, args);
            } else if (it.kind == SigItem::Kind::Mod) {
                it.mty = strengthen(it.mty, Path::access(p, it.id.name));
            }
            items.push_back(std::move(it));
        }
        return ModType::sig(std::move(items));
    }
    case ModType::Kind::Functor:
    case ModType::Kind::MixedFunctor:
        return ModType::functor(m->param, m->arg, strengthen(m->res, Path::apply(p, Path::var(m->param))),
                                m->kind == ModType::Kind::MixedFunctor);
    }
    return m;
}

// ---- the checker ----------------------------------------------------------

namespace {

using K = TypeError::Kind;

class Checker {
public:
    explicit Checker(bool target) : target_(target) {}

    [[noreturn]] void error(K k, const std::string& msg) const { throw TypeError(k, msg, pos_); }

    void at(SrcPos p) {
        if (p.line > 0) pos_ = p;
    }

    TypePtr meta(Location loc) {
        auto t = std::make_shared<Type>();
        t->kind = Type::Kind::Meta;
        t->meta_id = next_meta_++;
        t->level = level_;
        t->loc = target_ ? Location::Base : loc;
        return t;
    }

    static std::string show(const TypePtr& t) { return pretty(zonk(t)); }

    // ---- type heads ----

    ModTypePtr path_modtype(const Env& env, const PathPtr& p) {
        switch (p->kind) {
        case Path::Kind::Var: {
            auto b = env.find(Binding::Kind::Mod, p->id);
            if (!b) error(K::Unbound, "unbound module " + p->id.name);
            return b->mty;
        }
        case Path::Kind::Access: {
            auto mq = path_modtype(env, p->base);
            if (mq->kind != ModType::Kind::Sig) error(K::NotASignature, path_str(p->base) + " is a functor");
            int i = find_item(mq->items, SigItem::Kind::Mod, p->field);
            if (i < 0) error(K::Unbound, "unbound module " + path_str(p));
            return subst_modtype(prefix_subst(mq->items, static_cast<size_t>(i), p->base),
                                 mq->items[static_cast<size_t>(i)].mty);
        }
        case Path::Kind::Apply: {
            auto mf = path_modtype(env, p->base);
            if (mf->kind == ModType::Kind::Sig) error(K::BadFunctorApp, path_str(p->base) + " is not a functor");
            Subst s;
            s.mods[mf->param.key()] = p->arg;
            return subst_modtype(s, mf->res);
        }
        }
        return nullptr;
    }

    struct HeadInfo {
        Location loc;
        std::vector<TypeParam> params;
        TypePtr manifest; // already prefixed, parameters still free
    };

    HeadInfo head_info(const Env& env, const TypePtr& t) {
        if (t->head_id) {
            auto b = env.find(Binding::Kind::Type, *t->head_id);
            if (!b) error(K::Unbound, "unbound type " + t->head_id->name);
            return {b->loc, b->params, b->type};
        }
        auto m = path_modtype(env, t->head_path);
        if (m->kind != ModType::Kind::Sig) error(K::NotASignature, path_str(t->head_path) + " is a functor");
        int i = find_item(m->items, SigItem::Kind::TypeAbs, t->head_name);
        if (i < 0) error(K::Unbound, "unbound type " + path_str(t->head_path) + "." + t->head_name);
        const auto& it = m->items[static_cast<size_t>(i)];
        TypePtr body;
        if (it.kind == SigItem::Kind::TypeManifest)
            body = subst_type(prefix_subst(m->items, static_cast<size_t>(i), t->head_path), it.type);
        return {it.loc, it.params, body};
    }

    static bool same_head(const TypePtr& a, const TypePtr& b) {
        if (a->head_id || b->head_id) return a->head_id && b->head_id && *a->head_id == *b->head_id;
        return a->head_name == b->head_name && path_equal(a->head_path, b->head_path);
    }

    std::optional<TypePtr> expand(const Env& env, const TypePtr& t) {
        auto info = head_info(env, t);
        if (!info.manifest) return std::nullopt;
        if (info.params.size() != t->args.size())
            error(K::ArityMismatch, "type " + t->head_name + " expects " + std::to_string(info.params.size()) +
                                        " argument(s)");
        std::map<std::string, TypePtr> m;
        for (size_t i = 0; i < info.params.size(); ++i) m[info.params[i].name] = t->args[i];
        auto body = repr(subst_vars(info.manifest, m));
        if (body->kind == Type::Kind::Constr && same_head(body, t)) return std::nullopt;
        return body;
    }

    // ---- validity ----

    // Makes `t` valid at `loc`, narrowing unification variables as needed.
    void restrict(const Env& env, const TypePtr& t0, Location loc) {
        TypePtr t = repr(t0);
        switch (t->kind) {
        case Type::Kind::Meta:
            if (target_ || can_use(t->loc, loc)) return;
            t->loc = can_use(loc, t->loc) ? loc : Location::Base;
            return;
        case Type::Kind::Var:
            if (!target_ && !can_use(t->loc, loc))
                error(K::LocationViolation, "type variable '" + t->name + "@" + to_string(t->loc) +
                                                " cannot be used at " + to_string(loc));
            return;
        case Type::Kind::Arrow:
            restrict(env, t->a, loc);
            restrict(env, t->b, loc);
            return;
        case Type::Kind::Fragment:
            if (target_) error(K::Mismatch, "fragment types do not exist in target programs");
            if (loc != Location::Server)
                error(K::LocationViolation, "fragment types are only valid on the server, not at " +
                                                std::string(to_string(loc)));
            restrict(env, t->a, Location::Client);
            return;
        case Type::Kind::Conv:
            if (target_) error(K::Mismatch, "converter types do not exist in target programs");
            if (loc != Location::Server)
                error(K::LocationViolation, "converter types are only valid on the server");
            restrict(env, t->a, Location::Server);
            restrict(env, t->b, Location::Client);
            return;
        case Type::Kind::Constr: {
            auto info = head_info(env, t);
            if (!target_ && !can_use(info.loc, loc))
                error(K::LocationViolation, "type " + show(t) + " declared at " + to_string(info.loc) +
                                                " cannot be used at " + to_string(loc));
            if (info.params.size() != t->args.size())
                error(K::ArityMismatch, "type " + t->head_name + " expects " +
                                            std::to_string(info.params.size()) + " argument(s)");
            for (size_t i = 0; i < t->args.size(); ++i) {
                Location pl = info.params[i].loc;
                if (pl == Location::Base && info.loc == Location::Base) pl = loc;
                restrict(env, t->args[i], target_ ? Location::Base : pl);
            }
            return;
        }
        }
    }

    // ---- unification ----

    void occurs(const TypePtr& m, const TypePtr& t0) {
        TypePtr t = repr(t0);
        switch (t->kind) {
        case Type::Kind::Meta:
            if (t == m) error(K::Mismatch, "recursive type");
            t->level = std::min(t->level, m->level);
            return;
        case Type::Kind::Var: return;
        case Type::Kind::Constr:
            for (auto& a : t->args) occurs(m, a);
            return;
        default:
            if (t->a) occurs(m, t->a);
            if (t->b) occurs(m, t->b);
        }
    }

    void bind_meta(const Env& env, const TypePtr& m, const TypePtr& t) {
        if (t->kind == Type::Kind::Meta) {
            t->loc = target_ ? Location::Base : meet(m->loc, t->loc);
            t->level = std::min(t->level, m->level);
            m->link = t;
            return;
        }
        occurs(m, t);
        restrict(env, t, m->loc);
        m->link = t;
    }

    void unify(const Env& env, const TypePtr& a0, const TypePtr& b0) {
        TypePtr a = repr(a0), b = repr(b0);
        if (a == b) return;
        if (a->kind == Type::Kind::Meta) return bind_meta(env, a, b);
        if (b->kind == Type::Kind::Meta) return bind_meta(env, b, a);
        if (a->kind == Type::Kind::Constr || b->kind == Type::Kind::Constr) {
            if (a->kind == Type::Kind::Constr && b->kind == Type::Kind::Constr && same_head(a, b)) {
                auto info = head_info(env, a);
                if (!info.manifest) {
                    if (a->args.size() != b->args.size()) error(K::ArityMismatch, "type arity mismatch");
                    for (size_t i = 0; i < a->args.size(); ++i) unify(env, a->args[i], b->args[i]);
                    return;
                }
            }
            if (a->kind == Type::Kind::Constr) {
                if (auto ea = expand(env, a)) return unify(env, *ea, b);
            }
            if (b->kind == Type::Kind::Constr) {
                if (auto eb = expand(env, b)) return unify(env, a, *eb);
            }
            mismatch(a, b);
        }
        if (a->kind != b->kind) mismatch(a, b);
        switch (a->kind) {
        case Type::Kind::Var:
            if (a->name != b->name || a->loc != b->loc) mismatch(a, b);
            return;
        case Type::Kind::Arrow:
        case Type::Kind::Conv:
            unify(env, a->a, b->a);
            unify(env, a->b, b->b);
            return;
        case Type::Kind::Fragment: unify(env, a->a, b->a); return;
        default: mismatch(a, b);
        }
    }

    [[noreturn]] void mismatch(const TypePtr& a, const TypePtr& b) const {
        error(K::Mismatch, "cannot unify " + show(a) + " with " + show(b));
    }

    bool equal(const Env& env, const TypePtr& a0, const TypePtr& b0) {
        TypePtr a = repr(a0), b = repr(b0);
        if (a == b) return true;
        if (a->kind == Type::Kind::Constr || b->kind == Type::Kind::Constr) {
            if (a->kind == Type::Kind::Constr && b->kind == Type::Kind::Constr && same_head(a, b)) {
                auto info = head_info(env, a);
                if (!info.manifest) {
                    if (a->args.size() != b->args.size()) return false;
                    for (size_t i = 0; i < a->args.size(); ++i)
                        if (!equal(env, a->args[i], b->args[i])) return false;
                    return true;
                }
            }
            if (a->kind == Type::Kind::Constr)
                if (auto ea = expand(env, a)) return equal(env, *ea, b);
            if (b->kind == Type::Kind::Constr)
                if (auto eb = expand(env, b)) return equal(env, a, *eb);
            return false;
        }
        if (a->kind != b->kind) return false;
        switch (a->kind) {
        case Type::Kind::Var: return a->name == b->name && a->loc == b->loc;
        case Type::Kind::Meta: return false;
        case Type::Kind::Fragment: return equal(env, a->a, b->a);
        default: return equal(env, a->a, b->a) && equal(env, a->b, b->b);
        }
    }

    // ---- schemes ----

    TypePtr instantiate(const TypePtr& t, Location use) {
        std::vector<TypeParam> vars;
        collect_vars(t, vars);
        if (vars.empty()) return t;
        std::map<std::string, TypePtr> m;
        for (auto& v : vars) m[v.name] = meta(v.loc == Location::Base ? use : v.loc);
        return subst_vars(t, m);
    }

    void gen_walk(const TypePtr& t0) {
        TypePtr t = repr(t0);
        switch (t->kind) {
        case Type::Kind::Meta:
            if (t->level > level_) t->link = Type::var("g" + std::to_string(gen_counter_++), t->loc);
            return;
        case Type::Kind::Var: return;
        case Type::Kind::Constr:
            for (auto& a : t->args) gen_walk(a);
            return;
        default:
            if (t->a) gen_walk(t->a);
            if (t->b) gen_walk(t->b);
        }
    }

    TypePtr generalize(const TypePtr& t) {
        gen_walk(t);
        return zonk(t);
    }

    // ---- expressions ----

    TypePtr infer(const Env& env, Location loc, const ExprPtr& e) {
        at(e->pos);
        switch (e->kind) {
        case Expr::Kind::Const: return constant(e->lit, loc);
        case Expr::Kind::Var: {
            auto b = env.find(Binding::Kind::Val, e->id);
            if (!b) error(K::Unbound, "unbound value " + e->id.name);
            if (!target_ && !can_use(b->loc, loc))
                error(K::LocationViolation, "value " + e->id.name + " declared at " + to_string(b->loc) +
                                                " cannot be used at " + to_string(loc));
            return instantiate(b->type, loc);
        }
        case Expr::Kind::QualVar: {
            auto m = modpath(env, loc, e->path);
            if (m->kind != ModType::Kind::Sig) error(K::NotASignature, path_str(e->path) + " is a functor");
            int i = find_item(m->items, SigItem::Kind::Val, e->field);
            if (i < 0) error(K::Unbound, "unbound value " + path_str(e->path) + "." + e->field);
            const auto& it = m->items[static_cast<size_t>(i)];
            if (!target_ && !can_use(it.loc, loc))
                error(K::LocationViolation, "value " + path_str(e->path) + "." + e->field + " declared at " +
                                                to_string(it.loc) + " cannot be used at " + to_string(loc));
            auto t = subst_type(prefix_subst(m->items, static_cast<size_t>(i), e->path), it.type);
            return instantiate(t, loc);
        }
        case Expr::Kind::App: {
            auto tf = infer(env, loc, e->a);
            auto tx = infer(env, loc, e->b);
            auto r = meta(loc);
            at(e->pos);
            unify(env, tf, Type::arrow(tx, r));
            return r;
        }
        case Expr::Kind::Lam: {
            auto a = meta(loc);
            Binding b;
            b.kind = Binding::Kind::Val;
            b.loc = loc;
            b.id = e->id;
            b.type = a;
            auto tb = infer(env.extend(b), loc, e->a);
            return Type::arrow(a, tb);
        }
        case Expr::Kind::Let: {
            ++level_;
            auto t1 = infer(env, loc, e->a);
            --level_;
            Binding b;
            b.kind = Binding::Kind::Val;
            b.loc = loc;
            b.id = e->id;
            b.type = generalize(t1);
            return infer(env.extend(b), loc, e->b);
        }
        case Expr::Kind::Fragment: {
            if (target_) error(K::Mismatch, "fragments do not exist in target programs");
            if (loc != Location::Server)
                error(K::LocationViolation, "fragments can only be built on the server, not at " +
                                                std::string(to_string(loc)));
            ++in_fragment_;
            auto tb = infer(env, Location::Client, e->a);
            --in_fragment_;
            return Type::fragment(tb);
        }
        case Expr::Kind::Injection: {
            if (target_) error(K::Mismatch, "injections do not exist in target programs");
            if (loc != Location::Client)
                error(K::LocationViolation, "injections can only be used on the client, not at " +
                                                std::string(to_string(loc)));
            if (mixed_outer_ && in_fragment_ == 0) check_outer_injection(e->a);
            TypePtr ts, tc;
            if (e->conv == "int") {
                ts = t_int();
                tc = t_int();
            } else if (e->conv == "serial") {
                ts = t_serial();
                tc = t_serial();
            } else if (e->conv == "fragment") {
                auto a = meta(Location::Client);
                ts = Type::fragment(a);
                tc = a;
            } else {
                error(K::Unbound, "unknown converter " + e->conv);
            }
            auto tt = infer(env, Location::Server, e->a);
            at(e->pos);
            unify(env, tt, ts);
            return tc;
        }
        case Expr::Kind::RefExpr:
            if (!target_) error(K::Mismatch, "references only exist in target programs");
            return t_serial();
        case Expr::Kind::FragCall: {
            if (!target_) error(K::Mismatch, "fragment calls only exist in target programs");
            for (auto& a : e->args) {
                // A fragment without injections is called with `()`.
                if (e->args.size() == 1 && a->kind == Expr::Kind::Const && a->lit.kind == Literal::Kind::Unit)
                    continue;
                auto ta = infer(env, loc, a);
                at(a->pos);
                try {
                    unify(env, ta, t_serial());
                } catch (const TypeError&) {
                    error(K::Mismatch, "fragment call arguments must be serial, got " + show(ta));
                }
            }
            return t_fragty();
        }
        }
        error(K::Mismatch, "unknown expression");
    }

    void check_outer_injection(const ExprPtr& target) {
        bool ok = true;
        std::string what;
        if (target->kind == Expr::Kind::Var) {
            ok = mixed_outer_->find(Binding::Kind::Val, target->id) != nullptr;
            what = target->id.name;
        } else if (target->kind == Expr::Kind::QualVar) {
            ok = mixed_outer_->find(Binding::Kind::Mod, target->path->root()) != nullptr;
            what = path_str(target->path) + "." + target->field;
        }
        if (!ok)
            error(K::InjectionInMixedFunctor,
                  "injection of " + what + " inside a mixed functor must only mention values defined outside "
                  "the functor");
    }

    TypePtr constant(const Literal& l, Location loc) {
        switch (l.kind) {
        case Literal::Kind::Int: return t_int();
        case Literal::Kind::Unit: return t_unit();
        case Literal::Kind::String: return t_string();
        case Literal::Kind::Prim: {
            if (l.s == "+" || l.s == "-" || l.s == "*")
                return Type::arrow(t_int(), Type::arrow(t_int(), t_int()));
            if (l.s == "print") {
                auto a = meta(loc);
                return Type::arrow(a, a);
            }
            if (l.s == "fix") {
                auto t1 = meta(loc), t2 = meta(loc);
                auto f = Type::arrow(t1, t2);
                return Type::arrow(Type::arrow(f, f), f);
            }
            error(K::Unbound, "unknown primitive " + l.s);
        }
        case Literal::Kind::Conv: {
            if (!target_) {
                Location need = l.server_side ? Location::Server : Location::Client;
                if (loc != need)
                    error(K::LocationViolation, l.s + (l.server_side ? "^s" : "^c") + " is only available at " +
                                                    to_string(need));
            }
            if (l.s == "int") return l.server_side ? Type::arrow(t_int(), t_serial()) : Type::arrow(t_serial(), t_int());
            if (l.s == "serial") return Type::arrow(t_serial(), t_serial());
            if (l.s == "fragment") {
                if (l.server_side) {
                    auto arg = target_ ? t_fragty() : Type::fragment(meta(Location::Client));
                    return Type::arrow(arg, t_serial());
                }
                return Type::arrow(t_serial(), meta(loc));
            }
            error(K::Unbound, "unknown converter " + l.s);
        }
        }
        error(K::Mismatch, "unknown constant");
    }

    // ---- module types ----

    void wf_mod(const Env& env, Location loc, const ModTypePtr& m) {
        switch (m->kind) {
        case ModType::Kind::Sig: {
            Env e = env;
            for (auto& it : m->items) {
                if (!target_ && !can_contain(loc, it.loc))
                    error(K::LocationViolation, "a " + std::string(to_string(loc)) + " signature cannot contain " +
                                                    to_string(it.loc) + " component " + it.id.name);
                switch (it.kind) {
                case SigItem::Kind::Val: restrict(e, it.type, it.loc); break;
                case SigItem::Kind::TypeManifest: check_type_body(e, it.loc, it.params, it.type); break;
                case SigItem::Kind::TypeAbs: break;
                case SigItem::Kind::Mod: wf_mod(e, it.loc, it.mty); break;
                }
                e = e.extend(binding_of(it));
            }
            return;
        }
        case ModType::Kind::Functor:
        case ModType::Kind::MixedFunctor: {
            Location inner = loc;
            if (m->kind == ModType::Kind::MixedFunctor) {
                if (!target_ && loc != Location::Mixed)
                    error(K::LocationViolation, "mixed functor types only exist at mixed location");
                if (m->arg->kind != ModType::Kind::Sig)
                    error(K::NotASignature, "the argument of a mixed functor must be a signature");
                inner = Location::Mixed;
            }
            wf_mod(env, inner, m->arg);
            Binding b;
            b.kind = Binding::Kind::Mod;
            b.loc = inner;
            b.id = m->param;
            b.mty = m->arg;
            wf_mod(env.extend(b), inner, m->res);
            return;
        }
        }
    }

    void check_type_body(const Env& env, Location loc, const std::vector<TypeParam>& params, const TypePtr& body) {
        std::vector<TypeParam> used;
        collect_vars(body, used);
        for (auto& u : used) {
            bool ok = false;
            for (auto& p : params) ok |= p.name == u.name;
            if (!ok) error(K::Unbound, "unbound type variable '" + u.name);
        }
        restrict(env, body, loc);
    }

    // ---- modules ----

    Location path_location(const Env& env, const PathPtr& p) {
        switch (p->kind) {
        case Path::Kind::Var: {
            auto b = env.find(Binding::Kind::Mod, p->id);
            if (!b) error(K::Unbound, "unbound module " + p->id.name);
            return b->loc;
        }
        case Path::Kind::Access: {
            Location outer = path_location(env, p->base);
            auto m = path_modtype(env, p->base);
            if (m->kind != ModType::Kind::Sig) return outer;
            int i = find_item(m->items, SigItem::Kind::Mod, p->field);
            return i < 0 ? outer : m->items[static_cast<size_t>(i)].loc;
        }
        case Path::Kind::Apply: return path_location(env, p->base);
        }
        return Location::Base;
    }

    ModTypePtr modpath(const Env& env, Location loc, const PathPtr& p) {
        switch (p->kind) {
        case Path::Kind::Var: {
            auto b = env.find(Binding::Kind::Mod, p->id);
            if (!b) error(K::Unbound, "unbound module " + p->id.name);
            if (!target_ && !can_use(b->loc, loc))
                error(K::LocationViolation, "module " + p->id.name + " declared at " + to_string(b->loc) +
                                                " cannot be used at " + to_string(loc));
            return strengthen(specialize(b->mty, b->loc, loc), p);
        }
        case Path::Kind::Access: {
            auto mq = modpath(env, loc, p->base);
            if (mq->kind != ModType::Kind::Sig) error(K::NotASignature, path_str(p->base) + " is a functor");
            int i = find_item(mq->items, SigItem::Kind::Mod, p->field);
            if (i < 0) error(K::Unbound, "unbound module " + path_str(p));
            const auto& it = mq->items[static_cast<size_t>(i)];
            if (!target_ && !can_use(it.loc, loc))
                error(K::LocationViolation, "module " + path_str(p) + " cannot be used at " + to_string(loc));
            auto m = subst_modtype(prefix_subst(mq->items, static_cast<size_t>(i), p->base), it.mty);
            return strengthen(specialize(m, it.loc, loc), p);
        }
        case Path::Kind::Apply: error(K::BadFunctorApp, "functor application in a module path");
        }
        return nullptr;
    }

    ModTypePtr module(const Env& env, Location loc, const ModExprPtr& m) {
        at(m->pos);
        switch (m->kind) {
        case ModExpr::Kind::Path: return modpath(env, loc, m->path);
        case ModExpr::Kind::Constraint: {
            wf_mod(env, loc, m->mty);
            auto inner = module(env, loc, m->a);
            at(m->pos);
            sub(env, loc, inner, m->mty);
            return m->mty;
        }
        case ModExpr::Kind::Struct: {
            Env e = env;
            auto items = structure(e, loc, m->items);
            return ModType::sig(std::move(items));
        }
        case ModExpr::Kind::Functor: {
            if (!target_ && loc == Location::Mixed)
                error(K::LocationViolation, "functors at mixed location must be written functor%mixed");
            wf_mod(env, loc, m->mty);
            Binding b;
            b.kind = Binding::Kind::Mod;
            b.loc = loc;
            b.id = m->param;
            b.mty = m->mty;
            auto res = module(env.extend(b), loc, m->a);
            return ModType::functor(m->param, m->mty, res, false);
        }
        case ModExpr::Kind::MixedFunctor: {
            if (!target_ && loc != Location::Mixed)
                error(K::LocationViolation, "mixed functors can only be declared at mixed location");
            if (m->mty->kind != ModType::Kind::Sig)
                error(K::NotASignature, "the argument of a mixed functor must be a signature");
            wf_mod(env, Location::Mixed, m->mty);
            Binding b;
            b.kind = Binding::Kind::Mod;
            b.loc = Location::Mixed;
            b.id = m->param;
            b.mty = m->mty;
            auto saved = mixed_outer_;
            if (!mixed_outer_) mixed_outer_ = env;
            ModTypePtr res;
            try {
                res = module(env.extend(b), Location::Mixed, m->a);
            } catch (...) {
                mixed_outer_ = saved;
                throw;
            }
            mixed_outer_ = saved;
            return ModType::functor(m->param, m->mty, res, true);
        }
        case ModExpr::Kind::Apply: {
            auto mf = module(env, loc, m->a);
            at(m->pos);
            if (mf->kind == ModType::Kind::Sig) error(K::BadFunctorApp, "applying a structure, not a functor");
            ModTypePtr mx;
            if (mf->kind == ModType::Kind::MixedFunctor) {
                if (!target_ && !can_use(Location::Mixed, loc))
                    error(K::BadFunctorApp, "mixed functors cannot be applied at " + std::string(to_string(loc)));
                if (m->b->kind != ModExpr::Kind::Path ||
                    (!target_ && path_location(env, m->b->path) != Location::Mixed))
                    error(K::BadFunctorApp, "the argument of a mixed functor must be a mixed module");
                mx = module(env, Location::Mixed, m->b);
                at(m->pos);
                sub(env, Location::Mixed, mx, mf->arg);
            } else {
                mx = module(env, loc, m->b);
                at(m->pos);
                sub(env, loc, mx, mf->arg);
            }
            if (m->b->kind == ModExpr::Kind::Path) {
                Subst s;
                s.mods[mf->param.key()] = m->b->path;
                return subst_modtype(s, mf->res);
            }
            return eliminate(env, mf->res, mf->param, mx);
        }
        case ModExpr::Kind::RefMod: {
            auto it = refmods_.find(m->ref->str());
            if (it == refmods_.end()) error(K::Unbound, "unbound module reference $" + m->ref->str());
            return it->second;
        }
        case ModExpr::Kind::FragMod:
        case ModExpr::Kind::GetDyn: error(K::Mismatch, "dyn module expressions only appear in dyn fields");
        }
        error(K::Mismatch, "unknown module expression");
    }

    // Result type of applying a functor to a non-path argument: dependencies
    // on the parameter are replaced by the argument's manifest definitions.
    ModTypePtr eliminate(const Env& env, const ModTypePtr& res, const Ident& param, const ModTypePtr& arg) {
        std::function<TypePtr(const TypePtr&)> fix = [&](const TypePtr& t) -> TypePtr {
            return map_type(t, [&](const TypePtr& x) -> TypePtr {
                if (x->kind != Type::Kind::Constr || !x->head_path || x->head_path->root() != param) return nullptr;
                if (x->head_path->kind != Path::Kind::Var || arg->kind != ModType::Kind::Sig)
                    error(K::BadFunctorApp, "functor result depends on an anonymous argument");
                int i = find_item(arg->items, SigItem::Kind::TypeAbs, x->head_name);
                if (i < 0 || arg->items[static_cast<size_t>(i)].kind != SigItem::Kind::TypeManifest)
                    error(K::BadFunctorApp, "functor result depends on abstract type " + x->head_name +
                                                " of an anonymous argument");
                const auto& it = arg->items[static_cast<size_t>(i)];
                std::map<std::string, TypePtr> vm;
                for (size_t k = 0; k < it.params.size() && k < x->args.size(); ++k)
                    vm[it.params[k].name] = fix(x->args[k]);
                auto body = subst_vars(it.type, vm);
                std::function<void(const TypePtr&)> check = [&](const TypePtr& b) {
                    map_type(b, [&](const TypePtr& y) -> TypePtr {
                        if (y->kind == Type::Kind::Constr && y->head_id && y->head_id->stamp >= 0 &&
                            !env.find(Binding::Kind::Type, *y->head_id))
                            error(K::BadFunctorApp, "functor result escapes a type of an anonymous argument");
                        return nullptr;
                    });
                };
                check(body);
                return body;
            });
        };
        std::function<ModTypePtr(const ModTypePtr&)> go = [&](const ModTypePtr& m) -> ModTypePtr {
            auto n = std::make_shared<ModType>(*m);
            if (m->kind == ModType::Kind::Sig) {
                for (auto& it : n->items) {
                    if (it.type) it.type = fix(it.type);
                    if (it.mty) it.mty = go(it.mty);
                }
            } else {
                n->arg = go(m->arg);
                n->res = go(m->res);
            }
            return n;
        };
        return go(res);
    }

    static void locs_of(const ModTypePtr& m, std::set<Location>& out) {
        if (m->kind != ModType::Kind::Sig) return;
        for (auto& it : m->items) out.insert(it.loc);
    }

    std::vector<SigItem> structure(Env& env, Location loc, const std::vector<DeclPtr>& decls) {
        std::vector<SigItem> items;
        for (auto& d : decls) {
            at(d->pos);
            auto check_contain = [&](Location inner, const std::string& what) {
                if (!target_ && !can_contain(loc, inner))
                    error(K::LocationViolation, "a " + std::string(to_string(loc)) + " structure cannot contain " +
                                                    to_string(inner) + " declaration " + what);
            };
            switch (d->kind) {
            case Decl::Kind::Let: {
                check_contain(d->loc, d->id.name);
                if (d->loc == Location::Mixed) error(K::LocationViolation, "values cannot be mixed");
                ++level_;
                auto t = infer(env, target_ ? Location::Base : d->loc, d->expr);
                --level_;
                SigItem it;
                it.kind = SigItem::Kind::Val;
                it.loc = d->loc;
                it.id = d->id;
                it.type = generalize(t);
                env = env.extend(binding_of(it));
                items.push_back(it);
                break;
            }
            case Decl::Kind::Type: {
                check_contain(d->loc, d->id.name);
                if (d->loc == Location::Mixed) error(K::LocationViolation, "types cannot be mixed");
                if (d->manifest) check_type_body(env, d->loc, d->params, d->manifest);
                SigItem it;
                it.kind = d->manifest ? SigItem::Kind::TypeManifest : SigItem::Kind::TypeAbs;
                it.loc = d->loc;
                it.id = d->id;
                it.params = d->params;
                it.type = d->manifest;
                env = env.extend(binding_of(it));
                items.push_back(it);
                break;
            }
            case Decl::Kind::Module: {
                check_contain(d->loc, d->id.name);
                auto m = module(env, d->loc, d->mod);
                at(d->pos);
                if (!target_) {
                    std::set<Location> ls;
                    locs_of(m, ls);
                    for (auto l : ls)
                        if (!can_contain(d->loc, l))
                            error(K::LocationViolation, "module " + d->id.name + " at " + to_string(d->loc) +
                                                            " has a component at " + to_string(l));
                }
                SigItem it;
                it.kind = SigItem::Kind::Mod;
                it.loc = d->loc;
                it.id = d->id;
                it.mty = m;
                env = env.extend(binding_of(it));
                items.push_back(it);
                break;
            }
            case Decl::Kind::Injection: {
                if (!target_) error(K::Mismatch, "injection declarations only exist in target programs");
                auto t = infer(env, Location::Base, d->expr);
                at(d->pos);
                try {
                    unify(env, t, t_serial());
                } catch (const TypeError&) {
                    error(K::Mismatch, "injected values must be serial, got " + show(t));
                }
                break;
            }
            case Decl::Kind::Bind:
                if (!target_) error(K::Mismatch, "bind only exists in client programs");
                infer(env, Location::Base, d->expr);
                break;
            case Decl::Kind::BindMod: {
                if (!target_) error(K::Mismatch, "bind only exists in client programs");
                auto m = module(env, Location::Base, d->mod);
                refmods_[d->ref->str()] = m;
                break;
            }
            case Decl::Kind::BindEnv:
            case Decl::Kind::Exec:
            case Decl::Kind::End:
            case Decl::Kind::Dyn:
                if (!target_) error(K::Mismatch, "target-only declaration in a source program");
                break;
            }
        }
        return items;
    }

    // ---- subtyping ----

    void sub(const Env& env, Location mloc, const ModTypePtr& a, const ModTypePtr& b) {
        if (a->kind == ModType::Kind::Sig && b->kind == ModType::Kind::Sig) return sub_sig(env, mloc, a, b);
        if (a->kind != b->kind || a->kind == ModType::Kind::Sig)
            error(K::Mismatch, "module type mismatch: expected " + pretty(b) + " but got " + pretty(a));
        Location inner = a->kind == ModType::Kind::MixedFunctor ? Location::Mixed : mloc;
        sub(env, inner, b->arg, a->arg);
        Subst s;
        s.mods[a->param.key()] = Path::var(b->param);
        Binding bb;
        bb.kind = Binding::Kind::Mod;
        bb.loc = inner;
        bb.id = b->param;
        bb.mty = b->arg;
        sub(env.extend(bb), inner, subst_modtype(s, a->res), b->res);
    }

    void sub_sig(const Env& env, Location mloc, const ModTypePtr& a, const ModTypePtr& b) {
        std::vector<int> match(b->items.size(), -1);
        Subst s;
        for (size_t j = 0; j < b->items.size(); ++j) {
            const auto& want = b->items[j];
            int found = -1;
            for (int i = static_cast<int>(a->items.size()) - 1; i >= 0; --i) {
                const auto& have = a->items[static_cast<size_t>(i)];
                bool same_class = is_type_item(want) ? is_type_item(have) : have.kind == want.kind;
                if (!same_class || have.id.name != want.id.name) continue;
                if (have.id == want.id) {
                    found = i;
                    break;
                }
                if (found < 0) found = i;
            }
            if (found < 0) error(K::Mismatch, "missing component " + want.id.name);
            match[j] = found;
            const auto& have = a->items[static_cast<size_t>(found)];
            if (is_type_item(want)) s.types[want.id.key()] = HeadRepl{have.id, nullptr, have.id.name};
            if (want.kind == SigItem::Kind::Mod) s.mods[want.id.key()] = Path::var(have.id);
        }
        Env e = env.extend_sig(a->items);
        for (size_t j = 0; j < b->items.size(); ++j) {
            const auto& have = a->items[static_cast<size_t>(match[j])];
            SigItem want = b->items[j];
            if (want.type) want.type = subst_type(s, want.type);
            if (want.mty) want.mty = subst_modtype(s, want.mty);
            if (!target_ && !within(mloc, have.loc, want.loc))
                error(K::LocationViolation, "component " + want.id.name + " at " + to_string(have.loc) +
                                                " cannot be seen as " + to_string(want.loc) + " inside a " +
                                                to_string(mloc) + " signature");
            switch (want.kind) {
            case SigItem::Kind::Val: {
                auto general = instantiate(have.type, want.loc);
                try {
                    unify(e, general, want.type);
                } catch (const TypeError&) {
                    error(K::Mismatch, "value " + want.id.name + " has type " + pretty(have.type) +
                                           " which is not more general than " + pretty(want.type));
                }
                break;
            }
            case SigItem::Kind::TypeAbs:
            case SigItem::Kind::TypeManifest: {
                if (have.params.size() != want.params.size())
                    error(K::ArityMismatch, "type " + want.id.name + " has the wrong number of parameters");
                for (size_t k = 0; k < want.params.size(); ++k)
                    if (!target_ && have.params[k].loc != want.params[k].loc)
                        error(K::LocationViolation, "type " + want.id.name + " has parameters at other locations");
                if (want.kind == SigItem::Kind::TypeManifest) {
                    std::vector<TypePtr> args;
                    std::map<std::string, TypePtr> rn;
                    for (size_t k = 0; k < have.params.size(); ++k) {
                        args.push_back(Type::var(have.params[k].name, have.params[k].loc));
                        rn[want.params[k].name] = args.back();
                    }
                    auto lhs = Type::constr(have.id, args);
                    auto rhs = subst_vars(want.type, rn);
                    if (!equal(e, lhs, rhs))
                        error(K::Mismatch, "type " + want.id.name + " is not equal to " + pretty(want.type));
                }
                break;
            }
            case SigItem::Kind::Mod: sub(e, want.loc, have.mty, want.mty); break;
            }
        }
    }

    bool target_;
    int next_meta_ = 0;
    int level_ = 0;
    int gen_counter_ = 0;
    SrcPos pos_;
    std::optional<Env> mixed_outer_;
    int in_fragment_ = 0;
    std::map<std::string, ModTypePtr> refmods_;
};

}  // namespace

// ---- public API -----------------------------------------------------------

TypeScheme type_expr(const Env& env, Location loc, const ExprPtr& e) {
    Checker c(false);
    TypeScheme s;
    s.body = c.generalize([&] {
        struct Lvl {};
        return c.infer(env, loc, e);
    }());
    collect_vars(s.body, s.quantified);
    return s;
}

bool equiv_type(const Env& env, Location loc, const TypePtr& a, const TypePtr& b) {
    (void)loc;
    Checker c(false);
    try {
        return c.equal(env, a, b);
    } catch (const TypeError&) {
        return false;
    }
}

void wf_type(const Env& env, Location loc, const TypePtr& t) {
    Checker c(false);
    c.restrict(env, t, loc);
}

void wf_modtype(const Env& env, Location loc, const ModTypePtr& m) {
    Checker c(false);
    c.wf_mod(env, loc, m);
}

void subtype(const Env& env, Location mloc, const ModTypePtr& a, const ModTypePtr& b) {
    Checker c(false);
    c.sub(env, mloc, a, b);
}

ModTypePtr type_module(const Env& env, Location mloc, const ModExprPtr& m) {
    Checker c(false);
    return c.module(env, mloc, m);
}

ProgramType type_program(const Program& p) {
    Checker c(false);
    Env env = Env::initial();
    auto items = c.structure(env, Location::Mixed, p);
    ProgramType out;
    int i = find_item(items, SigItem::Kind::Val, "return");
    out.runnable = i >= 0 && (items[static_cast<size_t>(i)].loc == Location::Client ||
                              items[static_cast<size_t>(i)].loc == Location::Base);
    out.sig = ModType::sig(std::move(items));
    return out;
}

SeparateReport check_separate(const Program& p) {
    SeparateReport rep;
    ModTypePtr whole = type_program(p).sig;
    Env env = Env::initial();
    for (auto& d : p) {
        try {
            Checker c(false);
            Env scratch = env;
            auto items = c.structure(scratch, Location::Mixed, {d});
            env = env.extend_sig(items);
            rep.pieces.insert(rep.pieces.end(), items.begin(), items.end());
        } catch (const TypeError& e) {
            rep.ok = false;
            rep.failures.push_back(pretty(d) + ": " + e.what());
            return rep;
        }
    }
    try {
        subtype(Env::initial(), Location::Mixed, ModType::sig(rep.pieces), whole);
    } catch (const TypeError& e) {
        rep.ok = false;
        rep.failures.push_back(std::string("whole-program subsumption: ") + e.what());
    }
    return rep;
}

ModTypePtr type_ml_structure(const Program& p) {
    Checker c(true);
    Env env = Env::initial(true);
    return ModType::sig(c.structure(env, Location::Base, p));
}

bool sig_equal(const Env& env, Location mloc, const ModTypePtr& a, const ModTypePtr& b) {
    try {
        Checker c(mloc == Location::Base);
        c.sub(env, mloc, a, b);
        Checker d(mloc == Location::Base);
        d.sub(env, mloc, b, a);
        return true;
    } catch (const TypeError&) {
        return false;
    }
}

}  // namespace etml
