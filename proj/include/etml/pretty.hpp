#pragma once

#include <string>

#include "etml/ast.hpp"

namespace etml {

// Source mode prints location annotations; target mode (client programs,
// MLs/MLc) omits them.
enum class PrintMode { Source, Target };

std::string pretty(const ExprPtr& e);
std::string pretty(const TypePtr& t, PrintMode mode = PrintMode::Source);
std::string pretty(const ModTypePtr& m, PrintMode mode = PrintMode::Source);
std::string pretty(const ModExprPtr& m, PrintMode mode = PrintMode::Source);
std::string pretty(const DeclPtr& d, PrintMode mode = PrintMode::Source);
std::string pretty(const Program& p, PrintMode mode = PrintMode::Source);
std::string pretty_sig_item(const SigItem& it, PrintMode mode = PrintMode::Source);

}  // namespace etml
