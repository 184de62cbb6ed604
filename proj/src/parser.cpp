#include "etml/parser.hpp"

#include <cctype>
#include <map>
#include <set>

namespace etml {

ParseError::ParseError(int l, int c, const std::string& msg)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c) {}

namespace {

enum class Tok { Int, String, LIdent, UIdent, TyVar, RefTok, Sym, Eof };

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    long long ival = 0;
    int line = 1;
    int col = 1;
};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n && i < s.size(); ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '(' && i + 1 < s.size() && s[i + 1] == '*') {
            int depth = 0;
            int l0 = line, c0 = col;
            do {
                if (i + 1 < s.size() && s[i] == '(' && s[i + 1] == '*') {
                    ++depth;
                    adv(2);
                } else if (i + 1 < s.size() && s[i] == '*' && s[i + 1] == ')') {
                    --depth;
                    adv(2);
                } else if (i >= s.size()) {
                    throw ParseError(l0, c0, "unterminated comment");
                } else {
                    adv(1);
                }
            } while (depth > 0);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            t.kind = Tok::Int;
            t.text = s.substr(i, j - i);
            try {
                t.ival = std::stoll(t.text);
            } catch (...) {
                throw ParseError(line, col, "integer literal out of range");
            }
            adv(j - i);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            t.text = s.substr(i, j - i);
            t.kind = std::isupper(static_cast<unsigned char>(c)) ? Tok::UIdent : Tok::LIdent;
            adv(j - i);
        } else if (c == '\'' && i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
            size_t j = i + 1;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.kind = Tok::TyVar;
            t.text = s.substr(i + 1, j - i - 1);
            adv(j - i);
        } else if (c == '$') {
            size_t j = i + 1;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
            while (j > i + 1 && s[j - 1] == '.') --j;
            t.kind = Tok::RefTok;
            t.text = s.substr(i + 1, j - i - 1);
            adv(j - i);
        } else if (c == '"') {
            size_t j = i + 1;
            std::string v;
            while (j < s.size() && s[j] != '"') {
                if (s[j] == '\\' && j + 1 < s.size()) {
                    ++j;
                    v += s[j] == 'n' ? '\n' : s[j];
                } else {
                    v += s[j];
                }
                ++j;
            }
            if (j >= s.size()) throw ParseError(line, col, "unterminated string literal");
            t.kind = Tok::String;
            t.text = v;
            adv(j + 1 - i);
        } else {
            static const char* two[] = {"{{", "}}", "~>", "->"};
            t.kind = Tok::Sym;
            for (auto* p : two) {
                if (s.compare(i, 2, p) == 0) {
                    t.text = p;
                    break;
                }
            }
            if (t.text.empty()) {
                static const std::string one = "~:(),.=+-*;@%^";
                if (one.find(c) == std::string::npos)
                    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
            }
            adv(t.text.size());
        }
        out.push_back(t);
    }
    Token eof;
    eof.kind = Tok::Eof;
    eof.line = line;
    eof.col = col;
    out.push_back(eof);
    return out;
}

const std::set<std::string> kKeywords = {"let",  "in",   "fun",    "fix",       "print",  "type",
                                         "module", "struct", "sig", "end",      "val",    "functor",
                                         "with", "bind", "bind_m", "exec",     "injection", "env",
                                         "dyn",  "fragment_m", "END"};
const std::set<std::string> kConverters = {"serial", "fragment", "int"};
const std::set<std::string> kBuiltinTypes = {"int", "unit", "string", "serial", "fragty"};

enum class NS { Val, Type, Mod };

struct ScopeEntry {
    NS ns;
    std::string name;
    Ident id;
    Location loc;
};

class Parser {
public:
    Parser(const std::string& text, bool target, bool allow_free)
        : toks_(lex(text)), target_(target), allow_free_(allow_free) {}

    Program program() {
        Location ctx = target_ ? Location::Base : Location::Mixed;
        auto ds = decls(ctx, true);
        expect_eof();
        return ds;
    }

    ModTypePtr modtype_top(Location ctx) {
        auto m = modtype(ctx);
        expect_eof();
        return m;
    }

    ExprPtr expr_top(Location loc) {
        auto e = expr(loc);
        expect_eof();
        return e;
    }

    TypePtr type_top(Location loc) {
        auto t = type(loc);
        expect_eof();
        return t;
    }

private:
    // ---- token helpers ----
    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool is_sym(const std::string& s, size_t k = 0) const {
        return peek(k).kind == Tok::Sym && peek(k).text == s;
    }
    bool is_kw(const std::string& s, size_t k = 0) const {
        auto& t = peek(k);
        return (t.kind == Tok::LIdent || t.kind == Tok::UIdent) && t.text == s;
    }
    [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
    [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
        throw ParseError(t.line, t.col, msg);
    }
    void expect_sym(const std::string& s) {
        if (!is_sym(s)) fail("expected '" + s + "' but found '" + describe(peek()) + "'");
        next();
    }
    void expect_kw(const std::string& s) {
        if (!is_kw(s)) fail("expected '" + s + "' but found '" + describe(peek()) + "'");
        next();
    }
    void expect_eof() {
        if (peek().kind != Tok::Eof) fail("unexpected '" + describe(peek()) + "'");
    }
    static std::string describe(const Token& t) {
        if (t.kind == Tok::Eof) return "end of input";
        if (t.kind == Tok::TyVar) return "'" + t.text;
        if (t.kind == Tok::RefTok) return "$" + t.text;
        return t.text;
    }
    SrcPos here() const { return SrcPos{peek().line, peek().col}; }

    std::string lident() {
        if (peek().kind != Tok::LIdent || kKeywords.count(peek().text))
            fail("expected identifier but found '" + describe(peek()) + "'");
        return next().text;
    }
    std::string uident() {
        if (peek().kind != Tok::UIdent || kKeywords.count(peek().text))
            fail("expected module name but found '" + describe(peek()) + "'");
        return next().text;
    }
    Ref refpath() {
        if (peek().kind != Tok::RefTok) fail("expected a reference but found '" + describe(peek()) + "'");
        auto t = next();
        auto r = parse_ref(t.text);
        if (!r) fail_at(t, "malformed reference $" + t.text);
        return *r;
    }

    // ---- scopes ----
    Ident bind(NS ns, const std::string& name, Location loc) {
        Ident id{name, stamps_[name]++};
        scope_.push_back({ns, name, id, loc});
        return id;
    }
    size_t mark() const { return scope_.size(); }
    void restore(size_t m) { scope_.resize(m); }

    std::optional<Ident> lookup(NS ns, const std::string& name, Location at) const {
        std::optional<Ident> any;
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
            if (it->ns != ns || it->name != name) continue;
            if (target_ || can_use(it->loc, at)) return it->id;
            if (!any) any = it->id;
        }
        return any;
    }

    Location opt_loc(Location ctx, bool value_like) {
        if (is_sym("%")) {
            next();
            auto t = peek();
            std::string name = lident();
            auto l = location_from_string(name);
            if (!l) fail_at(t, "unknown location '" + name + "'");
            if (value_like && *l == Location::Mixed)
                fail_at(t, "mixed not allowed on values and types");
            return target_ ? Location::Base : *l;
        }
        if (target_) return Location::Base;
        if (ctx == Location::Mixed) fail("location annotation required at mixed level");
        return ctx;
    }

    // ---- declarations ----
    std::vector<DeclPtr> decls(Location ctx, bool toplevel) {
        std::vector<DeclPtr> out;
        for (;;) {
            while (is_sym(";")) next();
            if (toplevel ? peek().kind == Tok::Eof : is_kw("end")) break;
            out.push_back(decl(ctx));
        }
        return out;
    }

    DeclPtr decl(Location ctx) {
        SrcPos pos = here();
        if (is_kw("let")) {
            next();
            Location loc = opt_loc(ctx, true);
            std::string name = lident();
            auto m = mark();
            auto params = lam_params(loc);
            expect_sym("=");
            auto body = expr(loc);
            restore(m);
            for (auto it = params.rbegin(); it != params.rend(); ++it) body = Expr::lam(*it, body, pos);
            return Decl::let(loc, bind(NS::Val, name, loc), body, pos);
        }
        if (is_kw("type")) {
            next();
            Location loc = opt_loc(ctx, true);
            auto params = type_params(loc);
            std::string name = lident();
            TypePtr body;
            if (is_sym("=")) {
                next();
                auto saved = tparams_;
                tparams_ = params;
                body = type(loc);
                tparams_ = saved;
            }
            return Decl::type(loc, bind(NS::Type, name, loc), params, body, pos);
        }
        if (is_kw("module")) {
            next();
            if (is_kw("dyn")) {
                next();
                expect_sym("=");
                return Decl::dyn(modexpr(Location::Base));
            }
            Location loc = opt_loc(ctx, false);
            std::string name = uident();
            auto m = mark();
            std::vector<std::pair<Ident, ModTypePtr>> fparams;
            Location inner = loc;
            while (is_sym("(")) {
                next();
                std::string pn = uident();
                expect_sym(":");
                auto mt = modtype(loc);
                expect_sym(")");
                fparams.push_back({bind(NS::Mod, pn, loc), mt});
            }
            ModTypePtr constraint;
            if (is_sym(":")) {
                next();
                constraint = modtype(inner);
            }
            expect_sym("=");
            auto body = modexpr(inner);
            if (constraint) body = ModExpr::constraint(body, constraint, pos);
            restore(m);
            bool mixed = loc == Location::Mixed;
            for (auto it = fparams.rbegin(); it != fparams.rend(); ++it)
                body = ModExpr::functor(it->first, it->second, body, mixed, pos);
            return Decl::module(loc, bind(NS::Mod, name, loc), body, pos);
        }
        if (is_kw("bind")) {
            next();
            if (is_kw("env")) {
                next();
                return Decl::bind_env(refpath());
            }
            Ref r = refpath();
            expect_sym("=");
            std::optional<Ref> with;
            if (peek().kind == Tok::RefTok && is_kw("with", 1)) {
                with = refpath();
                next();
            }
            return Decl::bind(r, with, expr(Location::Base));
        }
        if (is_kw("bind_m")) {
            next();
            Ref r = refpath();
            expect_sym("=");
            auto m = modexpr(Location::Base);
            std::optional<Ref> with;
            if (is_kw("with")) {
                next();
                with = refpath();
            }
            return Decl::bind_mod(r, with, m);
        }
        if (is_kw("exec")) {
            next();
            return Decl::exec();
        }
        if (is_kw("END")) {
            next();
            return Decl::end();
        }
        if (is_kw("injection")) {
            next();
            Ref r = refpath();
            return Decl::injection(r, expr(Location::Base));
        }
        fail("expected a declaration but found '" + describe(peek()) + "'");
    }

    std::vector<TypeParam> type_params(Location loc) {
        std::vector<TypeParam> ps;
        auto one = [&]() {
            if (peek().kind != Tok::TyVar) fail("expected a type parameter");
            TypeParam p{next().text, loc};
            if (is_sym("@")) {
                next();
                auto t = peek();
                auto l = location_from_string(lident());
                if (!l || *l == Location::Mixed) fail_at(t, "type parameters need a core location");
                p.loc = target_ ? Location::Base : *l;
            }
            ps.push_back(p);
        };
        if (peek().kind == Tok::TyVar) {
            one();
        } else if (is_sym("(") && peek(1).kind == Tok::TyVar) {
            next();
            one();
            while (is_sym(",")) {
                next();
                one();
            }
            expect_sym(")");
        }
        return ps;
    }

    // ---- module expressions ----
    ModExprPtr modexpr(Location loc) {
        SrcPos pos = here();
        if (is_kw("functor")) {
            next();
            bool mixed = false;
            if (is_sym("%")) {
                next();
                auto t = peek();
                if (lident() != "mixed") fail_at(t, "only functor%mixed is allowed");
                mixed = true;
            }
            Location inner = mixed ? Location::Mixed : loc;
            expect_sym("(");
            std::string pn = uident();
            expect_sym(":");
            auto mt = modtype(inner);
            expect_sym(")");
            expect_sym("->");
            auto m = mark();
            Ident p = bind(NS::Mod, pn, inner);
            auto body = modexpr(inner);
            restore(m);
            return ModExpr::functor(p, mt, body, mixed, pos);
        }
        auto m = modatom(loc);
        while (is_sym("(")) {
            SrcPos p2 = here();
            next();
            auto arg = modexpr(loc);
            expect_sym(")");
            m = ModExpr::apply(m, arg, p2);
        }
        return m;
    }

    ModExprPtr modatom(Location loc) {
        SrcPos pos = here();
        if (is_kw("struct")) {
            next();
            auto m = mark();
            auto items = decls(loc, false);
            expect_kw("end");
            restore(m);
            return ModExpr::structure(items, loc == Location::Mixed, std::nullopt, pos);
        }
        if (is_sym("(")) {
            next();
            auto m = modexpr(loc);
            if (is_sym(":")) {
                next();
                auto mt = modtype(loc);
                m = ModExpr::constraint(m, mt, pos);
            }
            expect_sym(")");
            return m;
        }
        if (peek().kind == Tok::RefTok) return ModExpr::refmod(refpath(), pos);
        if (is_kw("fragment_m")) {
            next();
            Ref f = refpath();
            std::vector<ModExprPtr> args;
            while (is_sym("(") && is_kw("dyn", 1)) {
                next();
                next();
                args.push_back(ModExpr::getdyn(modpath(loc), pos));
                expect_sym(")");
            }
            return ModExpr::fragmod(f, args, pos);
        }
        if (is_kw("dyn")) {
            next();
            return ModExpr::getdyn(modpath(loc), pos);
        }
        return ModExpr::path_of(modpath(loc), pos);
    }

    PathPtr modpath(Location loc) {
        auto t = peek();
        std::string root = uident();
        auto id = lookup(NS::Mod, root, loc);
        if (!id) {
            if (!allow_free_) fail_at(t, "unbound module " + root);
            id = Ident{root, 0};
        }
        PathPtr p = Path::var(*id);
        while (is_sym(".") && peek(1).kind == Tok::UIdent && !kKeywords.count(peek(1).text)) {
            next();
            p = Path::access(p, next().text);
        }
        return p;
    }

    // ---- module types ----
    ModTypePtr modtype(Location ctx) {
        if (is_kw("sig")) {
            next();
            auto m = mark();
            std::vector<SigItem> items;
            for (;;) {
                while (is_sym(";")) next();
                if (is_kw("end")) break;
                items.push_back(sig_item(ctx));
            }
            next();
            restore(m);
            return ModType::sig(items);
        }
        if (is_kw("functor")) {
            next();
            bool mixed = false;
            if (is_sym("%")) {
                next();
                auto t = peek();
                if (lident() != "mixed") fail_at(t, "only functor%mixed is allowed");
                mixed = true;
            }
            Location inner = mixed ? Location::Mixed : ctx;
            expect_sym("(");
            std::string pn = uident();
            expect_sym(":");
            auto arg = modtype(inner);
            expect_sym(")");
            expect_sym("->");
            auto m = mark();
            Ident p = bind(NS::Mod, pn, inner);
            auto res = modtype(inner);
            restore(m);
            return ModType::functor(p, arg, res, mixed);
        }
        if (is_sym("(")) {
            next();
            auto m = modtype(ctx);
            expect_sym(")");
            return m;
        }
        fail("expected a module type but found '" + describe(peek()) + "'");
    }

    SigItem sig_item(Location ctx) {
        SigItem it;
        if (is_kw("val")) {
            next();
            it.kind = SigItem::Kind::Val;
            it.loc = opt_loc(ctx, true);
            std::string name = lident();
            expect_sym(":");
            it.type = type(it.loc);
            it.id = bind(NS::Val, name, it.loc);
            return it;
        }
        if (is_kw("type")) {
            next();
            it.loc = opt_loc(ctx, true);
            it.params = type_params(it.loc);
            std::string name = lident();
            it.kind = SigItem::Kind::TypeAbs;
            if (is_sym("=")) {
                next();
                auto saved = tparams_;
                tparams_ = it.params;
                it.type = type(it.loc);
                tparams_ = saved;
                it.kind = SigItem::Kind::TypeManifest;
            }
            it.id = bind(NS::Type, name, it.loc);
            return it;
        }
        if (is_kw("module")) {
            next();
            it.kind = SigItem::Kind::Mod;
            it.loc = opt_loc(ctx, false);
            std::string name = uident();
            expect_sym(":");
            it.mty = modtype(it.loc);
            it.id = bind(NS::Mod, name, it.loc);
            return it;
        }
        fail("expected a signature item but found '" + describe(peek()) + "'");
    }

    // ---- types ----
    TypePtr type(Location loc) {
        auto t = arrow_type(loc);
        if (is_sym("~>")) {
            next();
            auto c = arrow_type(loc);
            return Type::conv(t, c);
        }
        return t;
    }

    TypePtr arrow_type(Location loc) {
        auto t = app_type(loc);
        if (is_sym("->")) {
            next();
            return Type::arrow(t, arrow_type(loc));
        }
        return t;
    }

    bool type_name_start() const {
        return (peek().kind == Tok::LIdent && !kKeywords.count(peek().text)) ||
               (peek().kind == Tok::UIdent && !kKeywords.count(peek().text));
    }

    TypePtr app_type(Location loc) {
        TypePtr t;
        std::vector<TypePtr> args;
        bool have_args = false;
        if (peek().kind == Tok::TyVar) {
            t = tyvar(loc);
        } else if (is_sym("(")) {
            next();
            auto first = type(loc);
            if (is_sym(",")) {
                args.push_back(first);
                while (is_sym(",")) {
                    next();
                    args.push_back(type(loc));
                }
                expect_sym(")");
                have_args = true;
            } else {
                expect_sym(")");
                t = first;
            }
        } else if (type_name_start()) {
            t = type_name(loc, {});
        } else {
            fail("expected a type but found '" + describe(peek()) + "'");
        }
        if (have_args) {
            if (!type_name_start()) fail("expected a type constructor after argument list");
            t = type_name(loc, args);
        }
        while (type_name_start()) t = type_name(loc, {t});
        return t;
    }

    TypePtr tyvar(Location loc) {
        std::string name = next().text;
        Location l = loc;
        bool found = false;
        for (auto& p : tparams_)
            if (p.name == name) {
                l = p.loc;
                found = true;
            }
        if (is_sym("@")) {
            next();
            auto t = peek();
            auto x = location_from_string(lident());
            if (!x || *x == Location::Mixed) fail_at(t, "type variables need a core location");
            l = *x;
            (void)found;
        }
        return Type::var(name, target_ ? Location::Base : l);
    }

    TypePtr type_name(Location loc, std::vector<TypePtr> args) {
        auto t = peek();
        if (t.kind == Tok::LIdent) {
            next();
            if (t.text == "fragment") {
                if (args.size() != 1) fail_at(t, "fragment takes exactly one type argument");
                return Type::fragment(args[0]);
            }
            auto id = lookup(NS::Type, t.text, loc);
            if (id) return Type::constr(*id, args);
            if (kBuiltinTypes.count(t.text)) return Type::constr(builtin_type(t.text), args);
            if (allow_free_) return Type::constr(Ident{t.text, 0}, args);
            fail_at(t, "unbound type " + t.text);
        }
        // qualified: M.N.t or F(X).t
        auto path = type_path(loc);
        return Type::qconstr(path.first, path.second, args);
    }

    std::pair<PathPtr, std::string> type_path(Location loc) {
        auto t = peek();
        std::string root = uident();
        auto id = lookup(NS::Mod, root, loc);
        if (!id) {
            if (!allow_free_) fail_at(t, "unbound module " + root);
            id = Ident{root, 0};
        }
        PathPtr p = Path::var(*id);
        for (;;) {
            if (is_sym("(")) {
                next();
                auto arg = modpath(loc);
                expect_sym(")");
                p = Path::apply(p, arg);
                continue;
            }
            expect_sym(".");
            if (peek().kind == Tok::UIdent) {
                p = Path::access(p, next().text);
                continue;
            }
            return {p, lident()};
        }
    }

    // ---- expressions ----
    std::vector<Ident> lam_params(Location loc) {
        std::vector<Ident> ps;
        for (;;) {
            if (peek().kind == Tok::LIdent && !kKeywords.count(peek().text)) {
                ps.push_back(bind(NS::Val, next().text, loc));
            } else if (is_sym("(") && is_sym(")", 1)) {
                next();
                next();
                ps.push_back(bind(NS::Val, "_", loc));
            } else {
                return ps;
            }
        }
    }

    ExprPtr expr(Location loc) {
        SrcPos pos = here();
        if (is_kw("let")) {
            next();
            std::string name = lident();
            auto m = mark();
            auto params = lam_params(loc);
            expect_sym("=");
            auto rhs = expr(loc);
            restore(m);
            for (auto it = params.rbegin(); it != params.rend(); ++it) rhs = Expr::lam(*it, rhs, pos);
            expect_kw("in");
            auto m2 = mark();
            Ident x = bind(NS::Val, name, loc);
            auto body = expr(loc);
            restore(m2);
            return Expr::let(x, rhs, body, pos);
        }
        if (is_kw("fun")) {
            next();
            auto m = mark();
            auto params = lam_params(loc);
            if (params.empty()) fail("expected a parameter");
            expect_sym("->");
            auto body = expr(loc);
            restore(m);
            for (auto it = params.rbegin(); it != params.rend(); ++it) body = Expr::lam(*it, body, pos);
            return body;
        }
        return additive(loc);
    }

    ExprPtr additive(Location loc) {
        auto l = mult(loc);
        while (is_sym("+") || is_sym("-")) {
            SrcPos pos = here();
            std::string op = next().text;
            auto r = mult(loc);
            l = Expr::app(Expr::app(e_prim(op), l, pos), r, pos);
        }
        return l;
    }

    ExprPtr mult(Location loc) {
        auto l = app(loc);
        while (is_sym("*")) {
            SrcPos pos = here();
            next();
            auto r = app(loc);
            l = Expr::app(Expr::app(e_prim("*"), l, pos), r, pos);
        }
        return l;
    }

    bool atom_start() const {
        auto& t = peek();
        switch (t.kind) {
        case Tok::Int:
        case Tok::String:
        case Tok::RefTok: return true;
        case Tok::LIdent:
            if (t.text == "fix" || t.text == "print") return true;
            if (t.text == "fragment") return is_sym("^", 1);
            return !kKeywords.count(t.text);
        case Tok::UIdent: return !kKeywords.count(t.text);
        case Tok::Sym: return t.text == "(" || t.text == "{{" || t.text == "~";
        default: return false;
        }
    }

    ExprPtr app(Location loc) {
        SrcPos pos = here();
        ExprPtr f;
        if (is_kw("fragment") && peek(1).kind == Tok::RefTok) {
            next();
            Ref r = refpath();
            std::vector<ExprPtr> args;
            while (atom_start()) args.push_back(atom(loc));
            return Expr::fragcall(r, args, pos);
        }
        f = atom(loc);
        while (atom_start()) {
            SrcPos p2 = here();
            f = Expr::app(f, atom(loc), p2);
        }
        return f;
    }

    ExprPtr atom(Location loc) {
        SrcPos pos = here();
        auto t = peek();
        switch (t.kind) {
        case Tok::Int: next(); return Expr::constant(Literal::integer(t.ival), pos);
        case Tok::String: next(); return Expr::constant(Literal::string(t.text), pos);
        case Tok::RefTok: return Expr::refexpr(refpath(), pos);
        case Tok::UIdent: return qualified(loc);
        case Tok::LIdent: {
            next();
            if (t.text == "fix" || t.text == "print") return Expr::constant(Literal::prim(t.text), pos);
            if (is_sym("^")) {
                next();
                auto side = peek();
                std::string s = lident();
                if (!kConverters.count(t.text)) fail_at(t, "unknown converter " + t.text);
                if (s != "s" && s != "c") fail_at(side, "converter halves are ^s or ^c");
                return Expr::constant(Literal::conv(t.text, s == "s"), pos);
            }
            return Expr::var(resolve_val(t, loc), pos);
        }
        case Tok::Sym:
            if (t.text == "(") {
                next();
                if (is_sym(")")) {
                    next();
                    return Expr::constant(Literal::unit(), pos);
                }
                if (is_sym("-") && peek(1).kind == Tok::Int && is_sym(")", 2)) {
                    next();
                    long long v = next().ival;
                    next();
                    return Expr::constant(Literal::integer(-v), pos);
                }
                if ((is_sym("+") || is_sym("-") || is_sym("*")) && is_sym(")", 1)) {
                    std::string op = next().text;
                    next();
                    return e_prim(op);
                }
                auto e = expr(loc);
                expect_sym(")");
                return e;
            }
            if (t.text == "{{") {
                next();
                auto body = expr(Location::Client);
                expect_sym("}}");
                return Expr::fragment(body, std::nullopt, pos);
            }
            if (t.text == "~") {
                next();
                auto target = injection_target();
                expect_sym(":");
                auto ct = peek();
                std::string conv = lident_or_fragment();
                if (!kConverters.count(conv)) fail_at(ct, "unknown converter " + conv);
                return Expr::injection(target, conv, std::nullopt, pos);
            }
            break;
        default: break;
        }
        fail("expected an expression but found '" + describe(t) + "'");
    }

    std::string lident_or_fragment() {
        if (peek().kind != Tok::LIdent) fail("expected a converter name");
        return next().text;
    }

    ExprPtr injection_target() {
        SrcPos pos = here();
        auto t = peek();
        switch (t.kind) {
        case Tok::Int: next(); return Expr::constant(Literal::integer(t.ival), pos);
        case Tok::String: next(); return Expr::constant(Literal::string(t.text), pos);
        case Tok::UIdent: return qualified(Location::Server);
        case Tok::LIdent:
            if (kKeywords.count(t.text)) break;
            next();
            return Expr::var(resolve_val(t, Location::Server), pos);
        case Tok::Sym:
            if (t.text == "(") {
                next();
                if (is_sym(")")) {
                    next();
                    return Expr::constant(Literal::unit(), pos);
                }
                ExprPtr e;
                if (peek().kind == Tok::UIdent) {
                    e = qualified(Location::Server);
                } else if (peek().kind == Tok::LIdent && !kKeywords.count(peek().text)) {
                    auto v = next();
                    e = Expr::var(resolve_val(v, Location::Server), pos);
                } else if (peek().kind == Tok::Int) {
                    e = Expr::constant(Literal::integer(next().ival), pos);
                } else {
                    fail("injections apply to variables and constants only");
                }
                expect_sym(")");
                return e;
            }
            break;
        default: break;
        }
        fail("injections apply to variables and constants only");
    }

    ExprPtr qualified(Location loc) {
        SrcPos pos = here();
        auto t = peek();
        std::string root = uident();
        auto id = lookup(NS::Mod, root, loc);
        if (!id) {
            if (!allow_free_) fail_at(t, "unbound module " + root);
            id = Ident{root, 0};
        }
        PathPtr p = Path::var(*id);
        for (;;) {
            expect_sym(".");
            if (peek().kind == Tok::UIdent) {
                p = Path::access(p, next().text);
                continue;
            }
            return Expr::qualvar(p, lident(), pos);
        }
    }

    Ident resolve_val(const Token& t, Location loc) {
        auto id = lookup(NS::Val, t.text, loc);
        if (id) return *id;
        if (allow_free_) return Ident{t.text, 0};
        fail_at(t, "unbound value " + t.text);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    bool target_;
    bool allow_free_;
    std::vector<ScopeEntry> scope_;
    std::map<std::string, int> stamps_;
    std::vector<TypeParam> tparams_;
};

}  // namespace

Program parse_program(const std::string& text) { return Parser(text, false, false).program(); }

Program parse_target_program(const std::string& text) { return Parser(text, true, true).program(); }

ModTypePtr parse_modtype(const std::string& text, Location ctx) {
    return Parser(text, false, true).modtype_top(ctx);
}

ExprPtr parse_expr(const std::string& text, Location loc) { return Parser(text, false, true).expr_top(loc); }

TypePtr parse_type(const std::string& text, Location loc) { return Parser(text, false, true).type_top(loc); }

}  // namespace etml
