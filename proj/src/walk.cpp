#include "etml/walk.hpp"

namespace etml {

std::vector<DeclPtr> Rewriter::decls(const std::vector<DeclPtr>& ds) {
    std::vector<DeclPtr> out;
    out.reserve(ds.size());
    for (auto& d : ds) {
        auto r = decl(d);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

ExprPtr Rewriter::recurse_expr(const ExprPtr& e) {
    if (!e) return e;
    switch (e->kind) {
    case Expr::Kind::App:
    case Expr::Kind::Let: {
        auto a = expr(e->a);
        auto b = expr(e->b);
        if (a == e->a && b == e->b) return e;
        auto n = std::make_shared<Expr>(*e);
        n->a = a;
        n->b = b;
        return n;
    }
    case Expr::Kind::Lam:
    case Expr::Kind::Fragment:
    case Expr::Kind::Injection: {
        auto a = expr(e->a);
        if (a == e->a) return e;
        auto n = std::make_shared<Expr>(*e);
        n->a = a;
        return n;
    }
    case Expr::Kind::FragCall: {
        bool changed = false;
        std::vector<ExprPtr> args;
        for (auto& x : e->args) {
            args.push_back(expr(x));
            changed |= args.back() != x;
        }
        if (!changed) return e;
        auto n = std::make_shared<Expr>(*e);
        n->args = std::move(args);
        return n;
    }
    default:
        return e;
    }
}

ModExprPtr Rewriter::recurse_mod(const ModExprPtr& m) {
    if (!m) return m;
    switch (m->kind) {
    case ModExpr::Kind::Constraint:
    case ModExpr::Kind::Functor:
    case ModExpr::Kind::MixedFunctor: {
        auto a = mod(m->a);
        if (a == m->a) return m;
        auto n = std::make_shared<ModExpr>(*m);
        n->a = a;
        return n;
    }
    case ModExpr::Kind::Apply: {
        auto a = mod(m->a);
        auto b = mod(m->b);
        if (a == m->a && b == m->b) return m;
        auto n = std::make_shared<ModExpr>(*m);
        n->a = a;
        n->b = b;
        return n;
    }
    case ModExpr::Kind::Struct: {
        auto items = decls(m->items);
        bool same = items.size() == m->items.size();
        for (size_t i = 0; same && i < items.size(); ++i) same = items[i] == m->items[i];
        if (same) return m;
        auto n = std::make_shared<ModExpr>(*m);
        n->items = std::move(items);
        return n;
    }
    case ModExpr::Kind::FragMod: {
        bool changed = false;
        std::vector<ModExprPtr> args;
        for (auto& x : m->dyn_args) {
            args.push_back(mod(x));
            changed |= args.back() != x;
        }
        if (!changed) return m;
        auto n = std::make_shared<ModExpr>(*m);
        n->dyn_args = std::move(args);
        return n;
    }
    default:
        return m;
    }
}

DeclPtr Rewriter::recurse_decl(const DeclPtr& d) {
    if (d->expr) {
        auto e = expr(d->expr);
        if (e == d->expr) return d;
        auto n = std::make_shared<Decl>(*d);
        n->expr = e;
        return n;
    }
    if (d->mod) {
        auto m = mod(d->mod);
        if (m == d->mod) return d;
        auto n = std::make_shared<Decl>(*d);
        n->mod = m;
        return n;
    }
    return d;
}

void Visitor::visit_children(const ExprPtr& e) {
    if (!e) return;
    if (e->a) expr(e->a);
    if (e->b) expr(e->b);
    for (auto& x : e->args) expr(x);
}

void Visitor::visit_children(const ModExprPtr& m) {
    if (!m) return;
    if (m->a) mod(m->a);
    if (m->b) mod(m->b);
    for (auto& d : m->items) decl(d);
    for (auto& x : m->dyn_args) mod(x);
}

void Visitor::visit_children(const DeclPtr& d) {
    if (d->expr) expr(d->expr);
    if (d->mod) mod(d->mod);
}

}  // namespace etml
