#pragma once

#include <string_view>

#include "microlam/rational.hpp"

namespace microlam {

// Grammar (exact rational arithmetic):
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := number | name | 'diag(' expr, ... ')' | '[' row (',' row)* ']' | '(' expr ')' | '-' factor
//   row    := '[' expr (',' expr)* ']'
// Names: A1 A2 A3 S1 S2 S3 (T3 wells and auxiliaries), Id (3x3), Id2, Id3.
// Numbers: integers, decimals, and exponents such as 1e-3, all read exactly.
RMat parse_matrix_literal(std::string_view text);

}  // namespace microlam
