#include "etml/machine.hpp"

#include "etml/pretty.hpp"

namespace etml {

namespace {
using RK = RuntimeError::Kind;

[[noreturn]] void stuck(const std::string& msg) { throw RuntimeError(RK::Stuck, msg); }
}  // namespace

ModValuePtr StructBuilder::finish() const {
    auto m = std::make_shared<ModValue>();
    m->kind = ModValue::Kind::Struct;
    m->fields = fields;
    m->dyn = dyn;
    return m;
}

int prim_arity(const std::string& name) {
    if (name == "+" || name == "-" || name == "*" || name == "fix") return 2;
    return 1;
}

Ref resolve_dyn(const RtEnv& env, const Ref& r) {
    if (!r.dyn_rooted()) return r;
    auto d = env.dyn();
    if (!d) throw RuntimeError(RK::UnboundDyn, "no dyn field in scope for $" + r.str());
    return r.rooted_at(*d);
}

ValuePtr Machine::eval(const RtEnv& env, const ExprPtr& e) {
    switch (e->kind) {
    case Expr::Kind::Const:
        switch (e->lit.kind) {
        case Literal::Kind::Int: return Value::integer(e->lit.i);
        case Literal::Kind::Unit: return Value::unit();
        case Literal::Kind::String: return Value::string(e->lit.s);
        case Literal::Kind::Prim: return Value::prim(e->lit.s);
        case Literal::Kind::Conv: return Value::prim(e->lit.s + (e->lit.server_side ? "^s" : "^c"));
        }
        break;
    case Expr::Kind::Var: {
        auto v = env.find(e->id);
        if (!v) throw RuntimeError(RK::Unbound, "unbound variable " + e->id.name);
        return v;
    }
    case Expr::Kind::QualVar: {
        auto m = eval_path(env, e->path);
        auto f = m->field(e->field, false);
        if (!f) throw RuntimeError(RK::Unbound, "no field " + path_str(e->path) + "." + e->field);
        return f->v;
    }
    case Expr::Kind::App: {
        auto f = eval(env, e->a);
        auto x = eval(env, e->b);
        return apply(f, x);
    }
    case Expr::Kind::Lam: return Value::closure(e->id, e->a, env);
    case Expr::Kind::Let: {
        auto v = eval(env, e->a);
        return eval(env.bind(e->id, v), e->b);
    }
    case Expr::Kind::Fragment: return on_fragment(env, e);
    case Expr::Kind::Injection: return on_injection(env, e);
    case Expr::Kind::RefExpr: return on_ref(env, *e->ref);
    case Expr::Kind::FragCall: return on_frag_call(env, e);
    }
    stuck("unknown expression");
}

ValuePtr Machine::apply(const ValuePtr& f, const ValuePtr& x) {
    switch (f->kind) {
    case Value::Kind::Closure: return eval(f->env.bind(f->param, x), f->body);
    case Value::Kind::Prim: {
        auto args = f->pargs;
        args.push_back(x);
        if (static_cast<int>(args.size()) < prim_arity(f->s)) return Value::prim(f->s, std::move(args));
        return delta(f->s, args);
    }
    default: stuck("applying a non-function value " + show_value(f));
    }
}

ValuePtr Machine::delta(const std::string& p, const std::vector<ValuePtr>& a) {
    auto ints = [&] {
        if (a[0]->kind != Value::Kind::Int || a[1]->kind != Value::Kind::Int)
            stuck("arithmetic on non-integers " + show_value(a[0]) + ", " + show_value(a[1]));
    };
    if (p == "+") return ints(), Value::integer(a[0]->i + a[1]->i);
    if (p == "-") return ints(), Value::integer(a[0]->i - a[1]->i);
    if (p == "*") return ints(), Value::integer(a[0]->i * a[1]->i);
    if (p == "print") {
        trace.push_back(a[0]);
        return a[0];
    }
    if (p == "fix") return apply(apply(a[0], Value::prim("fix", {a[0]})), a[1]);
    if (p == "fragment^c") return on_fragment_client(a[0]);
    if (p == "int^s" || p == "int^c" || p == "serial^s" || p == "serial^c" || p == "fragment^s") return a[0];
    stuck("unknown primitive " + p);
}

ModValuePtr Machine::make_functor(const RtEnv& env, const ModExprPtr& m) {
    auto f = std::make_shared<ModValue>();
    f->kind = ModValue::Kind::Functor;
    f->env = env;
    f->mixed = m->kind == ModExpr::Kind::MixedFunctor;
    auto cur = m;
    f->params.push_back(cur->param);
    cur = cur->a;
    if (f->mixed)
        while (cur->kind == ModExpr::Kind::MixedFunctor) {
            f->params.push_back(cur->param);
            cur = cur->a;
        }
    f->body = cur;
    return f;
}

ModValuePtr Machine::eval_path(const RtEnv& env, const PathPtr& p) {
    switch (p->kind) {
    case Path::Kind::Var: {
        auto m = env.find_mod(p->id);
        if (!m) throw RuntimeError(RK::Unbound, "unbound module " + p->id.name);
        return m;
    }
    case Path::Kind::Access: {
        auto m = eval_path(env, p->base);
        if (m->kind != ModValue::Kind::Struct) stuck(path_str(p->base) + " is not a structure");
        auto f = m->field(p->field, true);
        if (!f) throw RuntimeError(RK::Unbound, "no module " + path_str(p));
        return f->m;
    }
    case Path::Kind::Apply: return apply_functor(eval_path(env, p->base), {eval_path(env, p->arg)});
    }
    stuck("bad path");
}

ModValuePtr Machine::apply_functor(const ModValuePtr& f, const std::vector<ModValuePtr>& args,
                                   std::optional<Ref> dyn) {
    if (f->kind != ModValue::Kind::Functor) stuck("applying a structure");
    size_t n = std::min(args.size(), f->params.size());
    RtEnv env = f->env;
    for (size_t i = 0; i < n; ++i) env = env.bind_mod(f->params[i], args[i]);
    if (n < f->params.size()) {
        auto part = std::make_shared<ModValue>(*f);
        part->env = env;
        part->params.erase(part->params.begin(), part->params.begin() + static_cast<long>(n));
        return part;
    }
    std::vector<ModValuePtr> rest(args.begin() + static_cast<long>(n), args.end());
    if (dyn && rest.empty()) env = env.bind_dyn(*dyn);
    auto r = eval_mod(env, f->body);
    if (rest.empty()) return r;
    return apply_functor(r, rest, dyn);
}

ModValuePtr Machine::eval_mod(const RtEnv& env, const ModExprPtr& m) {
    switch (m->kind) {
    case ModExpr::Kind::Path: return eval_path(env, m->path);
    case ModExpr::Kind::Constraint: return eval_mod(env, m->a);
    case ModExpr::Kind::Apply: {
        auto f = eval_mod(env, m->a);
        auto x = eval_mod(env, m->b);
        return apply_functor(f, {x});
    }
    case ModExpr::Kind::Functor:
    case ModExpr::Kind::MixedFunctor: return make_functor(env, m);
    case ModExpr::Kind::Struct: {
        RtEnv inner = env;
        StructBuilder b;
        eval_decls(inner, m->items, b);
        return b.finish();
    }
    default: return on_special_mod(env, m);
    }
}

void Machine::eval_decls(RtEnv& env, const std::vector<DeclPtr>& ds, StructBuilder& out) {
    for (auto& d : ds) eval_decl(env, d, out);
}

void Machine::eval_decl(RtEnv& env, const DeclPtr& d, StructBuilder& out) {
    switch (d->kind) {
    case Decl::Kind::Let: {
        auto v = eval(env, d->expr);
        env = env.bind(d->id, v);
        out.fields.push_back({d->id.name, false, v, nullptr});
        return;
    }
    case Decl::Kind::Type: return;
    case Decl::Kind::Module: {
        auto m = eval_mod(env, d->mod);
        env = env.bind_mod(d->id, m);
        out.fields.push_back({d->id.name, true, nullptr, m});
        return;
    }
    default: on_special_decl(env, d, out);
    }
}

ValuePtr Machine::on_fragment(const RtEnv&, const ExprPtr& e) { stuck("fragment outside the server: " + pretty(e)); }
ValuePtr Machine::on_injection(const RtEnv&, const ExprPtr& e) {
    stuck("unresolved injection: " + pretty(e));
}
ValuePtr Machine::on_ref(const RtEnv&, const Ref& r) { stuck("reference $" + r.str() + " in this program"); }
ValuePtr Machine::on_frag_call(const RtEnv&, const ExprPtr& e) { stuck("fragment call here: " + pretty(e)); }
ModValuePtr Machine::on_special_mod(const RtEnv&, const ModExprPtr& m) {
    stuck("unexpected module expression " + pretty(m));
}
void Machine::on_special_decl(RtEnv&, const DeclPtr& d, StructBuilder&) {
    stuck("unexpected declaration " + pretty(d, PrintMode::Target));
}

}  // namespace etml
