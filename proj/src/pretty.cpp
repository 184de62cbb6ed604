#include "etml/pretty.hpp"

#include <sstream>

namespace etml {

namespace {

bool is_binop(const ExprPtr& e, std::string* op, ExprPtr* l, ExprPtr* r) {
    if (e->kind != Expr::Kind::App || e->a->kind != Expr::Kind::App) return false;
    const auto& f = e->a->a;
    if (f->kind != Expr::Kind::Const || f->lit.kind != Literal::Kind::Prim) return false;
    const auto& n = f->lit.s;
    if (n != "+" && n != "-" && n != "*") return false;
    *op = n;
    *l = e->a->b;
    *r = e->b;
    return true;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string lit_str(const Literal& l) {
    switch (l.kind) {
    case Literal::Kind::Int: return l.i < 0 ? "(" + std::to_string(l.i) + ")" : std::to_string(l.i);
    case Literal::Kind::Unit: return "()";
    case Literal::Kind::String: return quote(l.s);
    case Literal::Kind::Prim:
        if (l.s == "+" || l.s == "-" || l.s == "*") return "( " + l.s + " )";
        return l.s;
    case Literal::Kind::Conv: return l.s + (l.server_side ? "^s" : "^c");
    }
    return "?";
}

// Precedence: 0 binders, 1 additive, 2 multiplicative, 3 application, 4 atoms.
std::string ex(const ExprPtr& e, int ctx);

std::string paren_if(bool b, const std::string& s) { return b ? "(" + s + ")" : s; }

std::string ex(const ExprPtr& e, int ctx) {
    std::string op;
    ExprPtr l, r;
    if (is_binop(e, &op, &l, &r)) {
        int p = op == "*" ? 2 : 1;
        return paren_if(ctx > p, ex(l, p) + " " + op + " " + ex(r, p + 1));
    }
    switch (e->kind) {
    case Expr::Kind::Const: {
        auto s = lit_str(e->lit);
        return s;
    }
    case Expr::Kind::Var: return e->id.name;
    case Expr::Kind::QualVar: return path_str(e->path) + "." + e->field;
    case Expr::Kind::App: return paren_if(ctx > 3, ex(e->a, 3) + " " + ex(e->b, 4));
    case Expr::Kind::Lam: return paren_if(ctx > 0, "fun " + e->id.name + " -> " + ex(e->a, 0));
    case Expr::Kind::Let:
        return paren_if(ctx > 0, "let " + e->id.name + " = " + ex(e->a, 0) + " in " + ex(e->b, 0));
    case Expr::Kind::Fragment: return "{{ " + ex(e->a, 0) + " }}";
    case Expr::Kind::Injection: {
        std::string t = e->a->kind == Expr::Kind::QualVar ? "(" + ex(e->a, 4) + ")" : ex(e->a, 4);
        return "~" + t + ":" + e->conv;
    }
    case Expr::Kind::RefExpr: return "$" + e->ref->str();
    case Expr::Kind::FragCall: {
        std::string s = "fragment $" + e->ref->str();
        for (auto& a : e->args) s += " " + ex(a, 4);
        return paren_if(ctx > 3, s);
    }
    }
    return "?";
}

std::string loc_tag(Location l, PrintMode mode) {
    return mode == PrintMode::Source ? std::string("%") + to_string(l) : "";
}

std::string ty(const TypePtr& t, int ctx, PrintMode mode);

std::string ty_args(const std::vector<TypePtr>& args, PrintMode mode) {
    if (args.empty()) return "";
    if (args.size() == 1) return ty(args[0], 2, mode) + " ";
    std::string s = "(";
    for (size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + ty(args[i], 0, mode);
    return s + ") ";
}

// 0 converter, 1 arrow, 2 postfix application.
std::string ty(const TypePtr& t0, int ctx, PrintMode mode) {
    TypePtr t = t0;
    while (t->kind == Type::Kind::Meta && t->link) t = t->link;
    switch (t->kind) {
    case Type::Kind::Var:
        return "'" + t->name + (mode == PrintMode::Source ? std::string("@") + to_string(t->loc) : "");
    case Type::Kind::Meta:
        return "'_" + std::to_string(t->meta_id) +
               (mode == PrintMode::Source ? std::string("@") + to_string(t->loc) : "");
    case Type::Kind::Arrow: return paren_if(ctx > 1, ty(t->a, 2, mode) + " -> " + ty(t->b, 1, mode));
    case Type::Kind::Conv: return paren_if(ctx > 0, ty(t->a, 1, mode) + " ~> " + ty(t->b, 1, mode));
    case Type::Kind::Fragment: return ty(t->a, 2, mode) + " fragment";
    case Type::Kind::Constr: {
        std::string head = t->head_path ? path_str(t->head_path) + "." + t->head_name : t->head_name;
        return ty_args(t->args, mode) + head;
    }
    }
    return "?";
}

std::string params_str(const std::vector<TypeParam>& ps, PrintMode mode) {
    if (ps.empty()) return "";
    std::string s = "(";
    for (size_t i = 0; i < ps.size(); ++i) {
        s += (i ? ", '" : "'") + ps[i].name;
        if (mode == PrintMode::Source) s += std::string("@") + to_string(ps[i].loc);
    }
    return s + ") ";
}

class Printer {
public:
    explicit Printer(PrintMode mode) : mode_(mode) {}

    std::string modtype(const ModTypePtr& m, int ind) {
        switch (m->kind) {
        case ModType::Kind::Sig: {
            if (m->items.empty()) return "sig end";
            std::string s = "sig\n";
            for (auto& it : m->items) s += pad(ind + 1) + sig_item(it, ind + 1) + "\n";
            return s + pad(ind) + "end";
        }
        case ModType::Kind::Functor:
        case ModType::Kind::MixedFunctor: {
            std::string kw = m->kind == ModType::Kind::MixedFunctor && mode_ == PrintMode::Source
                                 ? "functor%mixed" : "functor";
            return kw + " (" + m->param.name + " : " + modtype(m->arg, ind) + ") -> " + modtype(m->res, ind);
        }
        }
        return "?";
    }

    std::string sig_item(const SigItem& it, int ind) {
        std::string l = loc_tag(it.loc, mode_);
        switch (it.kind) {
        case SigItem::Kind::Val: return "val" + l + " " + it.id.name + " : " + ty(it.type, 0, mode_);
        case SigItem::Kind::TypeAbs: return "type" + l + " " + params_str(it.params, mode_) + it.id.name;
        case SigItem::Kind::TypeManifest:
            return "type" + l + " " + params_str(it.params, mode_) + it.id.name + " = " + ty(it.type, 0, mode_);
        case SigItem::Kind::Mod: return "module" + l + " " + it.id.name + " : " + modtype(it.mty, ind);
        }
        return "?";
    }

    std::string modexpr(const ModExprPtr& m, int ind) {
        switch (m->kind) {
        case ModExpr::Kind::Path: return path_str(m->path);
        case ModExpr::Kind::Constraint:
            return "(" + modexpr(m->a, ind) + " : " + modtype(m->mty, ind) + ")";
        case ModExpr::Kind::Apply: {
            auto f = m->a;
            bool atomic = f->kind == ModExpr::Kind::Path || f->kind == ModExpr::Kind::Apply ||
                          f->kind == ModExpr::Kind::RefMod;
            return (atomic ? modexpr(f, ind) : "(" + modexpr(f, ind) + ")") + "(" + modexpr(m->b, ind) + ")";
        }
        case ModExpr::Kind::Functor:
        case ModExpr::Kind::MixedFunctor: {
            std::string kw = m->kind == ModExpr::Kind::MixedFunctor && mode_ == PrintMode::Source
                                 ? "functor%mixed" : "functor";
            return kw + " (" + m->param.name + " : " + modtype(m->mty, ind) + ") -> " + modexpr(m->a, ind);
        }
        case ModExpr::Kind::Struct: {
            if (m->items.empty()) return "struct end";
            std::string s = "struct\n";
            for (auto& d : m->items) s += pad(ind + 1) + decl(d, ind + 1) + "\n";
            return s + pad(ind) + "end";
        }
        case ModExpr::Kind::RefMod: return "$" + m->ref->str();
        case ModExpr::Kind::FragMod: {
            std::string s = "fragment_m $" + m->ref->str();
            for (auto& a : m->dyn_args) s += " (" + modexpr(a, ind) + ")";
            return s;
        }
        case ModExpr::Kind::GetDyn: return "dyn " + path_str(m->path);
        }
        return "?";
    }

    std::string decl(const DeclPtr& d, int ind) {
        std::string l = loc_tag(d->loc, mode_);
        switch (d->kind) {
        case Decl::Kind::Let: return "let" + l + " " + d->id.name + " = " + ex(d->expr, 0);
        case Decl::Kind::Type: {
            std::string s = "type" + l + " " + params_str(d->params, mode_) + d->id.name;
            if (d->manifest) s += " = " + ty(d->manifest, 0, mode_);
            return s;
        }
        case Decl::Kind::Module: return "module" + l + " " + d->id.name + " = " + modexpr(d->mod, ind);
        case Decl::Kind::BindEnv: return "bind env $" + d->ref->str();
        case Decl::Kind::Bind:
            return "bind $" + d->ref->str() + " = " + (d->with ? "$" + d->with->str() + " with " : "") +
                   ex(d->expr, 0);
        case Decl::Kind::BindMod:
            return "bind_m $" + d->ref->str() + " = " + modexpr(d->mod, ind) +
                   (d->with ? " with $" + d->with->str() : "");
        case Decl::Kind::Exec: return "exec";
        case Decl::Kind::End: return "END";
        case Decl::Kind::Injection: return "injection $" + d->ref->str() + " " + ex(d->expr, 4);
        case Decl::Kind::Dyn: return "module dyn = " + modexpr(d->mod, ind);
        }
        return "?";
    }

private:
    static std::string pad(int ind) { return std::string(static_cast<size_t>(ind) * 2, ' '); }
    PrintMode mode_;
};

}  // namespace

std::string pretty(const ExprPtr& e) { return ex(e, 0); }
std::string pretty(const TypePtr& t, PrintMode mode) { return ty(t, 0, mode); }
std::string pretty(const ModTypePtr& m, PrintMode mode) { return Printer(mode).modtype(m, 0); }
std::string pretty(const ModExprPtr& m, PrintMode mode) { return Printer(mode).modexpr(m, 0); }
std::string pretty(const DeclPtr& d, PrintMode mode) { return Printer(mode).decl(d, 0); }
std::string pretty_sig_item(const SigItem& it, PrintMode mode) { return Printer(mode).sig_item(it, 0); }

std::string pretty(const Program& p, PrintMode mode) {
    Printer pr(mode);
    std::string s;
    for (auto& d : p) s += pr.decl(d, 0) + "\n";
    return s;
}

}  // namespace etml
