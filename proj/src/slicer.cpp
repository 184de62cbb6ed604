#include "etml/slicer.hpp"

#include <functional>

#include "etml/pretty.hpp"
#include "etml/walk.hpp"

namespace etml {

const char* to_string(Side s) { return s == Side::Server ? "server" : "client"; }

SliceError::SliceError(const std::string& msg, SrcPos sp)
    : std::runtime_error("SliceError: " + msg +
                         (sp.line > 0 ? " (line " + std::to_string(sp.line) + ")" : std::string())),
      span(sp) {}

namespace {

bool primitive_converter(const std::string& c) { return c == "serial" || c == "fragment"; }

bool keeps_in_place(const ExprPtr& inj) {
    return primitive_converter(inj->conv) && (inj->a->kind == Expr::Kind::Var || inj->a->kind == Expr::Kind::QualVar);
}

ModExprPtr strip_constraints(ModExprPtr m) {
    while (m->kind == ModExpr::Kind::Constraint) m = m->a;
    return m;
}

// Body structure of a mixed functor chain, or null.
ModExprPtr functor_struct(const ModExprPtr& m) {
    if (m->kind != ModExpr::Kind::MixedFunctor) return nullptr;
    auto cur = m;
    while (cur->kind == ModExpr::Kind::MixedFunctor) cur = cur->a;
    return cur->kind == ModExpr::Kind::Struct ? cur : nullptr;
}

ModExprPtr replace_functor_body(const ModExprPtr& m, const ModExprPtr& body) {
    if (m->kind != ModExpr::Kind::MixedFunctor) return body;
    auto n = std::make_shared<ModExpr>(*m);
    n->a = replace_functor_body(m->a, body);
    return n;
}

ModExprPtr with_items(const ModExprPtr& s, std::vector<DeclPtr> items) {
    auto n = std::make_shared<ModExpr>(*s);
    n->items = std::move(items);
    return n;
}

DeclPtr with_mod(const DeclPtr& d, ModExprPtr m) {
    auto n = std::make_shared<Decl>(*d);
    n->mod = std::move(m);
    return n;
}

// Pre-order list of injections outside fragments and outside injection targets.
class InjectionCollector : public Visitor {
public:
    std::vector<ExprPtr> found;
    void expr(const ExprPtr& e) override {
        if (e->kind == Expr::Kind::Injection) {
            found.push_back(e);
            return;
        }
        if (e->kind == Expr::Kind::Fragment) return;
        visit_children(e);
    }
};

// Replaces injections in pre-order with the results of `f`.
class InjectionReplacer : public Rewriter {
public:
    explicit InjectionReplacer(std::function<ExprPtr(const ExprPtr&)> f) : f_(std::move(f)) {}
    ExprPtr expr(const ExprPtr& e) override {
        if (e->kind == Expr::Kind::Injection) return f_(e);
        if (e->kind == Expr::Kind::Fragment) return e;
        return recurse_expr(e);
    }

private:
    std::function<ExprPtr(const ExprPtr&)> f_;
};

// ---- hoisting -------------------------------------------------------------

class Hoister {
public:
    explicit Hoister(int first_stamp) : stamp_(first_stamp) {}

    Program run(const Program& p) { return items(p); }

private:
    int stamp_;
    int counter_ = 0;

    Ident fresh(const std::string& base) { return Ident{base + std::to_string(counter_++), stamp_++}; }

    // Escaped values of fragments become server lets around the fragment.
    class FragmentHoist : public Rewriter {
    public:
        explicit FragmentHoist(Hoister& h) : h_(h) {}
        ExprPtr expr(const ExprPtr& e) override {
            if (e->kind != Expr::Kind::Fragment) return recurse_expr(e);
            std::vector<std::pair<Ident, ExprPtr>> lets;
            InjectionReplacer rep([&](const ExprPtr& inj) -> ExprPtr {
                auto target = expr(inj->a);
                auto n = std::make_shared<Expr>(*inj);
                n->a = target;
                if (keeps_in_place(n)) return n;
                auto a = h_.fresh("a'");
                if (primitive_converter(inj->conv)) {
                    lets.push_back({a, target});
                    return Expr::injection(Expr::var(a), inj->conv, inj->ref, inj->pos);
                }
                lets.push_back({a, Expr::app(e_conv(inj->conv, true), target)});
                return Expr::app(e_conv(inj->conv, false), Expr::injection(Expr::var(a), "serial", inj->ref),
                                 inj->pos);
            });
            auto body = rep.expr(e->a);
            ExprPtr out = Expr::fragment(body, e->ref, e->pos);
            for (auto it = lets.rbegin(); it != lets.rend(); ++it) out = Expr::let(it->first, it->second, out);
            return out;
        }

    private:
        Hoister& h_;
    };

    DeclPtr hoist_fragments(const DeclPtr& d) {
        FragmentHoist fh(*this);
        return fh.decl(d).front();
    }

    ExprPtr hoist_fragments(const ExprPtr& e) {
        FragmentHoist fh(*this);
        return fh.expr(e);
    }

    // Injections of a client declaration become server lets placed before it.
    std::vector<DeclPtr> client_decl(const DeclPtr& d) {
        std::vector<DeclPtr> out;
        InjectionReplacer rep([&](const ExprPtr& inj) -> ExprPtr {
            auto target = hoist_fragments(inj->a);
            auto n = std::make_shared<Expr>(*inj);
            n->a = target;
            if (keeps_in_place(n)) return n;
            auto x = fresh("x'");
            if (primitive_converter(inj->conv)) {
                out.push_back(Decl::let(Location::Server, x, target, inj->pos));
                return Expr::injection(Expr::var(x), inj->conv, inj->ref, inj->pos);
            }
            out.push_back(Decl::let(Location::Server, x, Expr::app(e_conv(inj->conv, true), target), inj->pos));
            return Expr::app(e_conv(inj->conv, false), Expr::injection(Expr::var(x), "serial", inj->ref),
                             inj->pos);
        });
        out.push_back(rep.decl(d).front());
        return out;
    }

    // Injections in client parts of a mixed functor body become client lets
    // placed before the functor.
    std::vector<DeclPtr> functor_body(const std::vector<DeclPtr>& body, std::vector<DeclPtr>& lifted) {
        std::vector<DeclPtr> out;
        for (auto& d : body) {
            switch (d->loc) {
            case Location::Client: {
                InjectionReplacer rep([&](const ExprPtr& inj) -> ExprPtr {
                    auto y = fresh("y'");
                    lifted.push_back(Decl::let(Location::Client, y, inj, inj->pos));
                    return Expr::var(y, inj->pos);
                });
                out.push_back(rep.decl(d).front());
                break;
            }
            case Location::Server: out.push_back(hoist_fragments(d)); break;
            case Location::Mixed: {
                auto m = strip_constraints(d->mod);
                if (m->kind == ModExpr::Kind::Struct && m->mixed)
                    out.push_back(with_mod(d, with_items(m, functor_body(m->items, lifted))));
                else
                    out.push_back(d);
                break;
            }
            default: out.push_back(d);
            }
        }
        return out;
    }

    std::vector<DeclPtr> items(const std::vector<DeclPtr>& ds) {
        std::vector<DeclPtr> out;
        auto append = [&](const std::vector<DeclPtr>& v) { out.insert(out.end(), v.begin(), v.end()); };
        for (auto& d : ds) {
            switch (d->loc) {
            case Location::Base: out.push_back(d); break;
            case Location::Server: out.push_back(hoist_fragments(d)); break;
            case Location::Client: append(client_decl(d)); break;
            case Location::Mixed: {
                if (d->kind != Decl::Kind::Module) {
                    out.push_back(d);
                    break;
                }
                if (auto body = functor_struct(d->mod)) {
                    std::vector<DeclPtr> lifted;
                    auto new_body = with_items(body, functor_body(body->items, lifted));
                    for (auto& l : lifted) append(client_decl(l));
                    out.push_back(with_mod(d, replace_functor_body(d->mod, new_body)));
                } else if (d->mod->kind == ModExpr::Kind::Struct && d->mod->mixed) {
                    out.push_back(with_mod(d, with_items(d->mod, items(d->mod->items))));
                } else {
                    out.push_back(d);
                }
                break;
            }
            }
        }
        return out;
    }
};

// ---- module type slicing --------------------------------------------------

class SliceModTypes : public Rewriter {
public:
    explicit SliceModTypes(Side s) : side_(s) {}
    ModExprPtr mod(const ModExprPtr& m) override {
        auto r = recurse_mod(m);
        if (r->kind == ModExpr::Kind::Functor || r->kind == ModExpr::Kind::MixedFunctor ||
            r->kind == ModExpr::Kind::Constraint) {
            auto n = std::make_shared<ModExpr>(*r);
            n->mty = slice_modtype(r->mty, side_);
            if (n->kind == ModExpr::Kind::MixedFunctor) n->kind = ModExpr::Kind::Functor;
            return n;
        }
        if (r->kind == ModExpr::Kind::Struct && r->mixed) {
            auto n = std::make_shared<ModExpr>(*r);
            n->mixed = false;
            return n;
        }
        return r;
    }
    std::vector<DeclPtr> decl(const DeclPtr& d) override {
        auto r = recurse_decl(d);
        if (r->kind == Decl::Kind::Type || r->loc != Location::Base) {
            auto n = std::make_shared<Decl>(*r);
            n->loc = Location::Base;
            if (n->manifest) n->manifest = slice_type(n->manifest, side_);
            for (auto& p : n->params) p.loc = Location::Base;
            return {n};
        }
        return {r};
    }

private:
    Side side_;
};

// ---- slicing --------------------------------------------------------------

class Slicer {
public:
    explicit Slicer(int first_stamp) : stamp_(first_stamp) {}

    SlicedPair out;

    std::pair<std::vector<DeclPtr>, std::vector<DeclPtr>> items(const std::vector<DeclPtr>& ds,
                                                                const std::optional<Ref>& prefix) {
        std::vector<DeclPtr> s, c;
        for (auto& d : ds) {
            switch (d->loc) {
            case Location::Base:
                s.push_back(d);
                c.push_back(d);
                break;
            case Location::Client: client_decl(d, s, c); break;
            case Location::Server: server_decl(d, prefix, s, c); break;
            case Location::Mixed: mixed_decl(d, s, c); break;
            }
        }
        return {s, c};
    }

private:
    int stamp_;
    int counter_ = 0;

    Ident fresh(const std::string& base) { return Ident{base + std::to_string(counter_++), stamp_++}; }

    void client_decl(const DeclPtr& d, std::vector<DeclPtr>& s, std::vector<DeclPtr>& c) {
        InjectionCollector col;
        col.decl(d);
        for (auto& inj : col.found) {
            if (!inj->ref) throw SliceError("injection without a slot reference", inj->pos);
            s.push_back(Decl::injection(*inj->ref, Expr::app(e_conv(inj->conv, true), inj->a)));
            out.slot_table[pretty(inj) + "@" + std::to_string(inj->pos.line) + ":" + std::to_string(inj->pos.col)] =
                *inj->ref;
        }
        InjectionReplacer rep([](const ExprPtr& inj) {
            return Expr::app(e_conv(inj->conv, false), Expr::refexpr(*inj->ref), inj->pos);
        });
        c.push_back(rep.decl(d).front());
    }

    class FragmentReplacer : public Rewriter {
    public:
        FragmentReplacer(Slicer& sl, const std::optional<Ref>& prefix) : sl_(sl), prefix_(prefix) {}
        std::vector<DeclPtr> binds;

        ExprPtr expr(const ExprPtr& e) override {
            if (e->kind != Expr::Kind::Fragment) return recurse_expr(e);
            if (!e->ref) throw SliceError("fragment without a closure reference", e->pos);
            Ref f = prefix_ ? e->ref->prefixed(*prefix_) : *e->ref;
            InjectionCollector col;
            col.expr(e->a);
            std::vector<ExprPtr> args;
            std::vector<Ident> params;
            std::vector<EscapedValue> escaped;
            for (auto& inj : col.found) {
                args.push_back(Expr::app(e_conv(inj->conv, true), inj->a));
                params.push_back(sl_.fresh("v"));
                escaped.push_back({inj->conv, inj->a});
            }
            size_t k = 0;
            InjectionReplacer rep([&](const ExprPtr& inj) {
                return Expr::app(e_conv(inj->conv, false), Expr::var(params[k++]), inj->pos);
            });
            ExprPtr body = rep.expr(e->a);
            if (params.empty()) {
                args.push_back(Expr::constant(Literal::unit()));
                body = Expr::lam(Ident{"_", 0}, body);
            } else {
                for (auto it = params.rbegin(); it != params.rend(); ++it) body = Expr::lam(*it, body);
            }
            binds.push_back(Decl::bind(f, std::nullopt, body));
            sl_.out.frag_table[f.str()] = escaped;
            return Expr::fragcall(f, args, e->pos);
        }

    private:
        Slicer& sl_;
        std::optional<Ref> prefix_;
    };

    void server_decl(const DeclPtr& d, const std::optional<Ref>& prefix, std::vector<DeclPtr>& s,
                     std::vector<DeclPtr>& c) {
        FragmentReplacer fr(*this, prefix);
        s.push_back(fr.decl(d).front());
        s.push_back(Decl::end());
        c.insert(c.end(), fr.binds.begin(), fr.binds.end());
        c.push_back(Decl::exec());
    }

    void mixed_decl(const DeclPtr& d, std::vector<DeclPtr>& s, std::vector<DeclPtr>& c) {
        if (d->kind != Decl::Kind::Module) throw SliceError("mixed declaration that is not a module", d->pos);
        const auto& m = d->mod;
        if (m->kind == ModExpr::Kind::Struct && m->mixed) {
            Ref r = *m->ref;
            auto [si, ci] = items(m->items, r);
            si.insert(si.begin(), Decl::dyn(ModExpr::refmod(r)));
            s.push_back(Decl::module(Location::Base, d->id, ModExpr::structure(si, false), d->pos));
            c.push_back(Decl::bind_mod(r, std::nullopt, ModExpr::structure(ci, false)));
            c.push_back(Decl::module(Location::Base, d->id, ModExpr::refmod(r), d->pos));
            return;
        }
        if (auto body = functor_struct(m)) {
            Ref f = *body->ref;
            std::vector<std::pair<Ident, ModTypePtr>> params;
            for (auto cur = m; cur->kind == ModExpr::Kind::MixedFunctor; cur = cur->a)
                params.push_back({cur->param, cur->mty});
            auto [si, ci] = items(body->items, dyn_ref());
            std::vector<ModExprPtr> dyn_args;
            for (auto& p : params) dyn_args.push_back(ModExpr::getdyn(Path::var(p.first)));
            si.insert(si.begin(), Decl::dyn(ModExpr::fragmod(f, dyn_args)));
            auto wrap = [&](ModExprPtr inner) {
                for (auto it = params.rbegin(); it != params.rend(); ++it)
                    inner = ModExpr::functor(it->first, it->second, inner, false);
                return inner;
            };
            s.push_back(Decl::module(Location::Base, d->id, wrap(ModExpr::structure(si, false)), d->pos));
            c.push_back(Decl::bind_mod(f, std::nullopt, wrap(ModExpr::structure(ci, false))));
            c.push_back(Decl::module(Location::Base, d->id, wrap(ModExpr::structure(erase_client(body->items), false)),
                                     d->pos));
            return;
        }
        s.push_back(d);
        s.push_back(Decl::end());
        c.push_back(d);
        c.push_back(Decl::exec());
    }
};

class SliceabilityChecker : public Visitor {
public:
    void mod(const ModExprPtr& m) override {
        if (m->kind == ModExpr::Kind::Struct && m->mixed)
            throw SliceError("mixed structure nested inside another module; mixed structures must be at top level "
                             "or directly inside a top-level mixed functor",
                             m->pos);
        visit_children(m);
    }
};

void check_no_mixed_struct(const std::vector<DeclPtr>& ds) {
    SliceabilityChecker c;
    c.decls(ds);
}

}  // namespace

Program hoist(const Program& p) {
    Hoister h(max_stamp(p) + 1);
    return h.run(p);
}

void check_sliceable(const Program& p) {
    for (auto& d : p) {
        if (d->loc != Location::Mixed || d->kind != Decl::Kind::Module) {
            check_no_mixed_struct({d});
            continue;
        }
        const auto& m = d->mod;
        if (m->kind == ModExpr::Kind::Struct && m->mixed) {
            check_no_mixed_struct(m->items);
        } else if (m->kind == ModExpr::Kind::MixedFunctor) {
            auto body = functor_struct(m);
            if (!body)
                throw SliceError("mixed functor " + d->id.name + " must return a structure", d->pos);
            check_no_mixed_struct(body->items);
        } else {
            check_no_mixed_struct({d});
        }
    }
}

TypePtr slice_type(const TypePtr& t0, Side side) {
    TypePtr t = t0;
    while (t->kind == Type::Kind::Meta && t->link) t = t->link;
    switch (t->kind) {
    case Type::Kind::Var: return Type::var(t->name, Location::Base);
    case Type::Kind::Meta: return t;
    case Type::Kind::Arrow: return Type::arrow(slice_type(t->a, side), slice_type(t->b, side));
    case Type::Kind::Fragment:
        if (side == Side::Server) return t_fragty();
        return Type::fragment(slice_type(t->a, side));
    case Type::Kind::Conv:
        if (side == Side::Server) return Type::arrow(slice_type(t->a, side), t_serial());
        return Type::conv(slice_type(t->a, side), slice_type(t->b, side));
    case Type::Kind::Constr: {
        auto n = std::make_shared<Type>(*t);
        for (auto& a : n->args) a = slice_type(a, side);
        return n;
    }
    }
    return t;
}

ModTypePtr slice_modtype(const ModTypePtr& m, Side side) {
    Location at = side == Side::Server ? Location::Server : Location::Client;
    if (m->kind == ModType::Kind::Sig) {
        std::vector<SigItem> items;
        for (auto it : m->items) {
            if (!can_use(it.loc, at)) continue;
            it.loc = Location::Base;
            for (auto& p : it.params) p.loc = Location::Base;
            if (it.type) it.type = slice_type(it.type, side);
            if (it.mty) it.mty = slice_modtype(it.mty, side);
            items.push_back(std::move(it));
        }
        return ModType::sig(std::move(items));
    }
    return ModType::functor(m->param, slice_modtype(m->arg, side), slice_modtype(m->res, side), false);
}

std::vector<DeclPtr> erase_client(const std::vector<DeclPtr>& body) {
    std::vector<DeclPtr> out;
    for (auto& d : body) {
        switch (d->loc) {
        case Location::Base:
        case Location::Client: out.push_back(d); break;
        case Location::Server: break;
        case Location::Mixed: {
            auto m = d->mod;
            if (m->kind == ModExpr::Kind::Struct) {
                out.push_back(with_mod(d, ModExpr::structure(erase_client(m->items), false, std::nullopt, m->pos)));
            } else if (m->kind == ModExpr::Kind::MixedFunctor) {
                std::function<ModExprPtr(const ModExprPtr&)> restrict = [&](const ModExprPtr& x) -> ModExprPtr {
                    if (x->kind == ModExpr::Kind::MixedFunctor)
                        return ModExpr::functor(x->param, x->mty, restrict(x->a), false, x->pos);
                    if (x->kind == ModExpr::Kind::Struct)
                        return ModExpr::structure(erase_client(x->items), false, std::nullopt, x->pos);
                    return x;
                };
                out.push_back(with_mod(d, restrict(m)));
            } else {
                out.push_back(d);
            }
            break;
        }
        }
    }
    return out;
}

SlicedPair slice(const Program& annotated) {
    Slicer sl(max_stamp(annotated) + 1);
    auto [s, c] = sl.items(annotated, std::nullopt);
    SliceModTypes ss(Side::Server), sc(Side::Client);
    sl.out.server = ss.decls(s);
    sl.out.client = sc.decls(c);
    return sl.out;
}

Program slice(const Program& annotated, Side side) {
    auto pair = slice(annotated);
    return side == Side::Server ? pair.server : pair.client;
}

SlicedPair compile(const Program& p) {
    FreshRefs fresh;
    auto annotated = annotate(p, fresh);
    auto hoisted = annotate(hoist(annotated), fresh);
    check_sliceable(hoisted);
    return slice(hoisted);
}

}  // namespace etml
