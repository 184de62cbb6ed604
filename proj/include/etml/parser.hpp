#pragma once

#include <stdexcept>
#include <string>

#include "etml/ast.hpp"

namespace etml {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int line, int column, const std::string& msg);
};

// Source programs: every top-level declaration carries a location.
Program parse_program(const std::string& text);

// Target programs (client programs, MLs, MLc): no location annotations,
// every declaration is located at base.
Program parse_target_program(const std::string& text);

ModTypePtr parse_modtype(const std::string& text, Location ctx = Location::Mixed);

// Expressions for tests. Names not bound inside `text` resolve to stamp 0.
ExprPtr parse_expr(const std::string& text, Location loc = Location::Base);
TypePtr parse_type(const std::string& text, Location loc = Location::Base);

}  // namespace etml
