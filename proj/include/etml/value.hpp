#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etml/ast.hpp"

namespace etml {

struct RuntimeError : std::runtime_error {
    enum class Kind { NonSerializable, Unbound, Stuck, MissingReturn, QueueUnderflow, UnboundDyn, Unsupported };
    Kind kind;
    RuntimeError(Kind kind, const std::string& msg);
};

const char* to_string(RuntimeError::Kind k);

struct Value;
using ValuePtr = std::shared_ptr<const Value>;
struct ModValue;
using ModValuePtr = std::shared_ptr<const ModValue>;

// Persistent runtime environment: values, modules and the local `dyn` field.
class RtEnv {
public:
    RtEnv bind(const Ident& id, ValuePtr v) const;
    RtEnv bind_mod(const Ident& id, ModValuePtr m) const;
    RtEnv bind_dyn(const Ref& r) const;

    ValuePtr find(const Ident& id) const;
    ModValuePtr find_mod(const Ident& id) const;
    std::optional<Ref> dyn() const;

private:
    struct Node {
        int kind; // 0 value, 1 module, 2 dyn
        Ident id;
        ValuePtr v;
        ModValuePtr m;
        std::optional<Ref> dyn;
        std::shared_ptr<const Node> next;
    };
    std::shared_ptr<const Node> head_;
    RtEnv push(Node n) const;
};

struct Value {
    enum class Kind { Int, Unit, String, Prim, Closure, RefVal };
    Kind kind = Kind::Unit;
    long long i = 0;
    std::string s;               // string payload or primitive name
    std::vector<ValuePtr> pargs; // Prim: arguments received so far
    Ident param;                 // Closure
    ExprPtr body;
    RtEnv env;
    std::optional<Ref> ref;      // RefVal

    static ValuePtr integer(long long v);
    static ValuePtr unit();
    static ValuePtr string(std::string s);
    static ValuePtr prim(std::string name, std::vector<ValuePtr> args = {});
    static ValuePtr closure(Ident param, ExprPtr body, RtEnv env);
    static ValuePtr ref_val(Ref r);

    bool is_base_const() const { return kind == Kind::Int || kind == Kind::Unit || kind == Kind::String; }
};

struct ModField {
    std::string name;
    bool is_mod = false;
    ValuePtr v;
    ModValuePtr m;
};

struct ModValue {
    enum class Kind { Struct, Functor };
    Kind kind = Kind::Struct;
    std::vector<ModField> fields;   // Struct, in declaration order
    std::optional<Ref> dyn;         // Struct: client counterpart of a mixed structure
    RtEnv env;                      // Functor
    std::vector<Ident> params;      // Functor: curried parameters (mixed chains keep all)
    ModExprPtr body;
    bool mixed = false;

    const ModField* field(const std::string& name, bool is_mod) const;
};

using Trace = std::vector<ValuePtr>;

// Printed form used for traces and results: 3, (), "s", <fun>, $r1.
std::string show_value(const ValuePtr& v);
std::string render_trace(const Trace& t, const std::string& sep = "; ");

// The injection of values: base constants and references pass, anything else
// is NonSerializable.
ValuePtr inject_value(const ValuePtr& v);

// Values that have a literal syntax (the image of inject_value).
ExprPtr value_to_expr(const ValuePtr& v);

// Wire format of serial values: i:<n>, u:, s:<len>:<bytes>, r:<ref>.
std::string encode_wire(const ValuePtr& v);
ValuePtr decode_wire(const std::string& text);

}  // namespace etml
