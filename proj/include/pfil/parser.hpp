#pragma once

#include <string>
#include <string_view>

#include "pfil/ir.hpp"

namespace pfil {

/// Parses one source file. Throws CompileError("syntax error", ...) with the
/// line/column of the offending token and the set of tokens that would have
/// been accepted.
Program parse(std::string_view text, const std::string& filename = "<input>");

/// Reads and parses each file, combining the declarations in order.
Program parse_files(const std::vector<std::string>& paths);

Expr parse_expr(std::string_view text);
Formula parse_formula(std::string_view text);

}  // namespace pfil
