#include "etml/interp.hpp"

#include "etml/pretty.hpp"
#include "etml/slicer.hpp"
#include "etml/walk.hpp"

namespace etml {

namespace {

using RK = RuntimeError::Kind;

ValuePtr last_value(const StructBuilder& b) {
    for (auto it = b.fields.rbegin(); it != b.fields.rend(); ++it)
        if (!it->is_mod && it->name == "return") return it->v;
    for (auto it = b.fields.rbegin(); it != b.fields.rend(); ++it)
        if (!it->is_mod) return it->v;
    return nullptr;
}

class PrefixFragments : public Rewriter {
public:
    explicit PrefixFragments(Ref p) : p_(std::move(p)) {}
    ExprPtr expr(const ExprPtr& e) override {
        auto r = recurse_expr(e);
        if (r->kind != Expr::Kind::Fragment || !r->ref) return r;
        auto n = std::make_shared<Expr>(*r);
        n->ref = r->ref->prefixed(p_);
        return n;
    }

private:
    Ref p_;
};

std::vector<DeclPtr> prefix_fragments(const std::vector<DeclPtr>& ds, const Ref& p) {
    PrefixFragments pf(p);
    return pf.decls(ds);
}

class FragmentRefs : public Visitor {
public:
    std::vector<Ref> refs;
    void expr(const ExprPtr& e) override {
        if (e->kind == Expr::Kind::Fragment && e->ref) refs.push_back(*e->ref);
        visit_children(e);
    }
};

// Body structure of a (curried) mixed functor, if it is one.
ModExprPtr mixed_functor_body(const ModExprPtr& m) {
    auto cur = m;
    while (cur->kind == ModExpr::Kind::Constraint) cur = cur->a;
    if (cur->kind != ModExpr::Kind::MixedFunctor) return nullptr;
    while (cur->kind == ModExpr::Kind::MixedFunctor) cur = cur->a;
    return cur->kind == ModExpr::Kind::Struct ? cur : nullptr;
}

class ServerInterp : public Machine {
public:
    FreshRefs fresh;
    std::vector<Ref> minted;
    std::vector<Program*> sinks;

    void emit(DeclPtr d) { sinks.back()->push_back(std::move(d)); }

    Ref mint(RefKind k) {
        auto r = fresh.fresh(k);
        minted.push_back(r);
        return r;
    }

    ValuePtr on_fragment(const RtEnv& env, const ExprPtr& e) override {
        if (!e->ref) throw RuntimeError(RK::Stuck, "fragment without a closure reference");
        auto residual = residualize(env, e->a);
        auto r = mint(RefKind::FragValue);
        emit(Decl::bind(r, e->ref, residual));
        return Value::ref_val(r);
    }

    // Client contexts: each injection becomes f^c applied to the injected value.
    class Residualizer : public Rewriter {
    public:
        Residualizer(ServerInterp& m, const RtEnv& env) : m_(m), env_(env) {}
        ExprPtr expr(const ExprPtr& e) override {
            if (e->kind != Expr::Kind::Injection) return recurse_expr(e);
            auto v = m_.eval(env_, Expr::app(e_conv(e->conv, true), e->a));
            auto injected = value_to_expr(inject_value(v));
            return Expr::app(e_conv(e->conv, false), injected, e->pos);
        }

    private:
        ServerInterp& m_;
        RtEnv env_;
    };

    ExprPtr residualize(const RtEnv& env, const ExprPtr& e) {
        Residualizer r(*this, env);
        return r.expr(e);
    }

    DeclPtr residualize(const RtEnv& env, const DeclPtr& d) {
        Residualizer r(*this, env);
        auto out = r.decl(d);
        return out.front();
    }

    ModExprPtr residualize(const RtEnv& env, const ModExprPtr& m) {
        Residualizer r(*this, env);
        return r.mod(m);
    }

    // A declaration inside a mixed context (top level or mixed structure).
    void eval_located(RtEnv& env, const DeclPtr& d, StructBuilder& out) {
        switch (d->loc) {
        case Location::Base: {
            eval_decl(env, d, out);
            emit(d);
            return;
        }
        case Location::Client: emit(residualize(env, d)); return;
        case Location::Server: {
            FragmentRefs fr;
            fr.decl(d);
            for (auto& r : fr.refs) emit(Decl::bind_env(r));
            eval_decl(env, d, out);
            return;
        }
        case Location::Mixed: {
            if (d->kind != Decl::Kind::Module)
                throw RuntimeError(RK::Stuck, "mixed declaration that is not a module");
            if (auto body = mixed_functor_body(d->mod)) emit(Decl::bind_env(*body->ref));
            auto [v, mc] = eval_mixed_mod(env, d->mod);
            emit(Decl::module(Location::Base, d->id, mc, d->pos));
            env = env.bind_mod(d->id, v);
            out.fields.push_back({d->id.name, true, nullptr, v});
            return;
        }
        }
    }

    std::pair<ModValuePtr, ModExprPtr> eval_mixed_mod(const RtEnv& env, const ModExprPtr& m) {
        switch (m->kind) {
        case ModExpr::Kind::Path: return {eval_path(env, m->path), m};
        case ModExpr::Kind::Constraint: {
            auto [v, mc] = eval_mixed_mod(env, m->a);
            return {v, ModExpr::constraint(mc, slice_modtype(m->mty, Side::Client), m->pos)};
        }
        case ModExpr::Kind::Struct: {
            if (!m->ref) throw RuntimeError(RK::Stuck, "mixed structure without a reference");
            Ref x = *m->ref;
            auto items = prefix_fragments(m->items, x);
            Program mu;
            sinks.push_back(&mu);
            RtEnv inner = env;
            StructBuilder b;
            for (auto& d : items) eval_located(inner, d, b);
            sinks.pop_back();
            emit(Decl::bind_mod(x, std::nullopt, ModExpr::structure(mu, false)));
            b.dyn = x;
            return {b.finish(), ModExpr::refmod(x)};
        }
        case ModExpr::Kind::MixedFunctor: {
            auto closure = make_functor(env, m);
            return {closure, residualize(env, client_functor(m))};
        }
        case ModExpr::Kind::Apply: return mixed_apply(env, m);
        case ModExpr::Kind::Functor:
            throw RuntimeError(RK::Unsupported, "plain functor in a mixed module");
        default: throw RuntimeError(RK::Stuck, "unexpected mixed module expression " + pretty(m));
        }
    }

    // Client-side version of a mixed functor: server parts removed.
    static ModExprPtr client_functor(const ModExprPtr& m) {
        if (m->kind == ModExpr::Kind::MixedFunctor)
            return ModExpr::functor(m->param, slice_modtype(m->mty, Side::Client), client_functor(m->a), false,
                                    m->pos);
        if (m->kind == ModExpr::Kind::Struct) return ModExpr::structure(erase_client(m->items), false);
        return m;
    }

    std::pair<ModValuePtr, ModExprPtr> mixed_apply(const RtEnv& env, const ModExprPtr& m) {
        std::vector<ModExprPtr> arg_exprs;
        auto head = m;
        while (head->kind == ModExpr::Kind::Apply) {
            arg_exprs.insert(arg_exprs.begin(), head->b);
            head = head->a;
        }
        auto [f, fc] = eval_mixed_mod(env, head);
        std::vector<ModValuePtr> args;
        std::vector<ModExprPtr> args_c;
        for (auto& a : arg_exprs) {
            auto [v, ac] = eval_mixed_mod(env, a);
            args.push_back(v);
            args_c.push_back(ac);
        }
        if (f->kind != ModValue::Kind::Functor || !f->mixed)
            throw RuntimeError(RK::Unsupported, "only mixed functors can be applied in mixed modules");
        if (args.size() != f->params.size())
            throw RuntimeError(RK::Unsupported, "partial application of a mixed functor");
        if (f->body->kind != ModExpr::Kind::Struct || !f->body->ref)
            throw RuntimeError(RK::Unsupported, "mixed functor whose body is not a structure");
        auto v = struct_beta(f, args);
        ModExprPtr mc = fc;
        for (auto& a : args_c) mc = ModExpr::apply(mc, a, m->pos);
        return {v, mc};
    }

    ModValuePtr struct_beta(const ModValuePtr& f, const std::vector<ModValuePtr>& args) {
        Ref r = mint(RefKind::ModRef);
        RtEnv env = f->env;
        Program mu;
        for (size_t i = 0; i < args.size(); ++i) {
            if (!args[i]->dyn)
                throw RuntimeError(RK::UnboundDyn, "argument " + f->params[i].name + " has no client part");
            env = env.bind_mod(f->params[i], args[i]);
            mu.push_back(Decl::module(Location::Base, f->params[i], ModExpr::refmod(*args[i]->dyn)));
        }
        auto items = prefix_fragments(f->body->items, r);
        sinks.push_back(&mu);
        StructBuilder b;
        for (auto& d : items) eval_located(env, d, b);
        sinks.pop_back();
        emit(Decl::bind_mod(r, f->body->ref, ModExpr::structure(mu, false)));
        b.dyn = r;
        return b.finish();
    }
};

class ClientInterp : public Machine {
public:
    GlobalEnv zeta;

    const GlobalEntry& lookup(const Ref& r) {
        auto it = zeta.find(r.str());
        if (it == zeta.end()) throw RuntimeError(RK::Unbound, "unbound reference $" + r.str());
        return it->second;
    }

    ValuePtr on_ref(const RtEnv&, const Ref& r) override {
        auto& e = lookup(r);
        if (!e.v) throw RuntimeError(RK::Unbound, "$" + r.str() + " is not a value");
        return e.v;
    }

    ValuePtr on_fragment_client(const ValuePtr& v) override {
        if (v->kind != Value::Kind::RefVal) return v;
        return on_ref(RtEnv{}, *v->ref);
    }

    ModValuePtr on_special_mod(const RtEnv& env, const ModExprPtr& m) override {
        if (m->kind == ModExpr::Kind::RefMod) {
            auto& e = lookup(*m->ref);
            if (!e.m) throw RuntimeError(RK::Unbound, "$" + m->ref->str() + " is not a module");
            return e.m;
        }
        return Machine::on_special_mod(env, m);
    }

    RtEnv env_of(const RtEnv& env, const std::optional<Ref>& with) {
        if (!with) return env;
        auto& e = lookup(*with);
        if (!e.env) throw RuntimeError(RK::Unbound, "$" + with->str() + " is not an environment");
        return *e.env;
    }

    void on_special_decl(RtEnv& env, const DeclPtr& d, StructBuilder& out) override {
        switch (d->kind) {
        case Decl::Kind::BindEnv: zeta[d->ref->str()].env = env; return;
        case Decl::Kind::Bind: {
            auto v = eval(env_of(env, d->with), d->expr);
            zeta[d->ref->str()].v = v;
            return;
        }
        case Decl::Kind::BindMod: {
            auto m = eval_mod(env_of(env, d->with), d->mod);
            zeta[d->ref->str()].m = m;
            return;
        }
        default: Machine::on_special_decl(env, d, out);
        }
    }
};

}  // namespace

BaseRun eval_base(const Program& p) {
    Machine m;
    RtEnv env;
    StructBuilder b;
    m.eval_decls(env, p, b);
    return {last_value(b), m.trace};
}

BaseRun eval_base(const ExprPtr& e) {
    Machine m;
    auto v = m.eval(RtEnv{}, e);
    return {v, m.trace};
}

ServerExprResult eval_server_expr(const RtEnv& env, const ExprPtr& e) {
    ServerInterp m;
    Program out;
    m.sinks.push_back(&out);
    auto v = m.eval(env, e);
    return {v, out, m.trace};
}

ContextResult eval_client_context(const RtEnv& env, const ExprPtr& e) {
    ServerInterp m;
    Program out;
    m.sinks.push_back(&out);
    auto r = m.residualize(env, e);
    return {r, out, m.trace};
}

MixedResult eval_mixed(const Program& annotated) {
    ServerInterp m;
    reserve_refs(annotated, m.fresh);
    Program out;
    m.sinks.push_back(&out);
    RtEnv env;
    StructBuilder b;
    for (auto& d : annotated) m.eval_located(env, d, b);
    return {b.finish(), out, m.trace, m.minted};
}

ClientRun eval_client_program(const Program& mu, GlobalEnv zeta0) {
    ClientInterp c;
    c.zeta = std::move(zeta0);
    RtEnv env;
    StructBuilder b;
    c.eval_decls(env, mu, b);
    ValuePtr ret;
    for (auto it = b.fields.rbegin(); it != b.fields.rend(); ++it)
        if (!it->is_mod && it->name == "return") {
            ret = it->v;
            break;
        }
    return {ret, c.trace, c.zeta};
}

Trace InterpResult::trace() const {
    Trace t = server_trace;
    t.insert(t.end(), client_trace.begin(), client_trace.end());
    return t;
}

InterpResult run_program(const Program& p) {
    auto annotated = annotate(p);
    auto mixed = eval_mixed(annotated);
    auto client = eval_client_program(mixed.client);
    if (!client.value) throw RuntimeError(RK::MissingReturn, "the program binds no client `return`");
    InterpResult r;
    r.value = client.value;
    r.server_trace = mixed.trace;
    r.client_trace = client.trace;
    r.client_program = mixed.client;
    r.minted = mixed.minted;
    return r;
}

ValuePtr find_return(const ModValuePtr& m) {
    if (!m || m->kind != ModValue::Kind::Struct) return nullptr;
    auto f = m->field("return", false);
    return f ? f->v : nullptr;
}

}  // namespace etml
