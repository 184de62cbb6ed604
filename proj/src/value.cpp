#include "etml/value.hpp"

namespace etml {

const char* to_string(RuntimeError::Kind k) {
    switch (k) {
    case RuntimeError::Kind::NonSerializable: return "NonSerializable";
    case RuntimeError::Kind::Unbound: return "Unbound";
    case RuntimeError::Kind::Stuck: return "Stuck";
    case RuntimeError::Kind::MissingReturn: return "MissingReturn";
    case RuntimeError::Kind::QueueUnderflow: return "QueueUnderflow";
    case RuntimeError::Kind::UnboundDyn: return "UnboundDyn";
    case RuntimeError::Kind::Unsupported: return "Unsupported";
    }
    return "?";
}

RuntimeError::RuntimeError(Kind k, const std::string& msg)
    : std::runtime_error(std::string(to_string(k)) + ": " + msg), kind(k) {}

RtEnv RtEnv::push(Node n) const {
    RtEnv e;
    n.next = head_;
    e.head_ = std::make_shared<const Node>(std::move(n));
    return e;
}

RtEnv RtEnv::bind(const Ident& id, ValuePtr v) const { return push(Node{0, id, std::move(v), nullptr, {}, {}}); }
RtEnv RtEnv::bind_mod(const Ident& id, ModValuePtr m) const {
    return push(Node{1, id, nullptr, std::move(m), {}, {}});
}
RtEnv RtEnv::bind_dyn(const Ref& r) const { return push(Node{2, {}, nullptr, nullptr, r, {}}); }

ValuePtr RtEnv::find(const Ident& id) const {
    for (auto n = head_.get(); n; n = n->next.get())
        if (n->kind == 0 && n->id == id) return n->v;
    return nullptr;
}

ModValuePtr RtEnv::find_mod(const Ident& id) const {
    for (auto n = head_.get(); n; n = n->next.get())
        if (n->kind == 1 && n->id == id) return n->m;
    return nullptr;
}

std::optional<Ref> RtEnv::dyn() const {
    for (auto n = head_.get(); n; n = n->next.get())
        if (n->kind == 2) return n->dyn;
    return std::nullopt;
}

ValuePtr Value::integer(long long v) {
    auto p = std::make_shared<Value>();
    p->kind = Kind::Int;
    p->i = v;
    return p;
}

ValuePtr Value::unit() {
    static const ValuePtr u = std::make_shared<Value>();
    return u;
}

ValuePtr Value::string(std::string s) {
    auto p = std::make_shared<Value>();
    p->kind = Kind::String;
    p->s = std::move(s);
    return p;
}

ValuePtr Value::prim(std::string name, std::vector<ValuePtr> args) {
    auto p = std::make_shared<Value>();
    p->kind = Kind::Prim;
    p->s = std::move(name);
    p->pargs = std::move(args);
    return p;
}

ValuePtr Value::closure(Ident param, ExprPtr body, RtEnv env) {
    auto p = std::make_shared<Value>();
    p->kind = Kind::Closure;
    p->param = std::move(param);
    p->body = std::move(body);
    p->env = std::move(env);
    return p;
}

ValuePtr Value::ref_val(Ref r) {
    auto p = std::make_shared<Value>();
    p->kind = Kind::RefVal;
    p->ref = std::move(r);
    return p;
}

const ModField* ModValue::field(const std::string& name, bool is_mod) const {
    for (auto it = fields.rbegin(); it != fields.rend(); ++it)
        if (it->name == name && it->is_mod == is_mod) return &*it;
    return nullptr;
}

std::string show_value(const ValuePtr& v) {
    switch (v->kind) {
    case Value::Kind::Int: return std::to_string(v->i);
    case Value::Kind::Unit: return "()";
    case Value::Kind::String: return "\"" + v->s + "\"";
    case Value::Kind::Prim:
    case Value::Kind::Closure: return "<fun>";
    case Value::Kind::RefVal: return "$" + v->ref->str();
    }
    return "?";
}

std::string render_trace(const Trace& t, const std::string& sep) {
    std::string s;
    for (size_t i = 0; i < t.size(); ++i) s += (i ? sep : "") + show_value(t[i]);
    return s;
}

ValuePtr inject_value(const ValuePtr& v) {
    if (v->is_base_const() || v->kind == Value::Kind::RefVal) return v;
    throw RuntimeError(RuntimeError::Kind::NonSerializable, "cannot send " + show_value(v) + " to the client");
}

ExprPtr value_to_expr(const ValuePtr& v) {
    switch (v->kind) {
    case Value::Kind::Int: return Expr::constant(Literal::integer(v->i));
    case Value::Kind::Unit: return Expr::constant(Literal::unit());
    case Value::Kind::String: return Expr::constant(Literal::string(v->s));
    case Value::Kind::RefVal: return Expr::refexpr(*v->ref);
    default:
        throw RuntimeError(RuntimeError::Kind::NonSerializable, "cannot send " + show_value(v) + " to the client");
    }
}

std::string encode_wire(const ValuePtr& v) {
    switch (v->kind) {
    case Value::Kind::Int: return "i:" + std::to_string(v->i);
    case Value::Kind::Unit: return "u:";
    case Value::Kind::String: return "s:" + std::to_string(v->s.size()) + ":" + v->s;
    case Value::Kind::RefVal: return "r:" + v->ref->str();
    default:
        throw RuntimeError(RuntimeError::Kind::NonSerializable, "cannot serialize " + show_value(v));
    }
}

ValuePtr decode_wire(const std::string& text) {
    auto bad = [&] { return std::invalid_argument("malformed wire value: " + text); };
    if (text.size() < 2 || text[1] != ':') throw bad();
    std::string body = text.substr(2);
    switch (text[0]) {
    case 'i': {
        size_t used = 0;
        long long n = 0;
        try {
            n = std::stoll(body, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != body.size()) throw bad();
        return Value::integer(n);
    }
    case 'u':
        if (!body.empty()) throw bad();
        return Value::unit();
    case 's': {
        auto colon = body.find(':');
        if (colon == std::string::npos) throw bad();
        size_t len = std::stoul(body.substr(0, colon));
        std::string payload = body.substr(colon + 1);
        if (payload.size() != len) throw bad();
        return Value::string(payload);
    }
    case 'r': {
        auto r = parse_ref(body);
        if (!r) throw bad();
        return Value::ref_val(*r);
    }
    default: throw bad();
    }
}

}  // namespace etml
