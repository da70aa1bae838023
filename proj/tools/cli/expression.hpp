#pragma once

#include <string>

#include "expint/stencil.hpp"

namespace expint::cli {

/// Compiles an arithmetic expression in x, y, z into a callable.
///
/// Grammar: + - * / ^ (right-associative, binds tighter than unary minus),
/// parentheses, sin cos exp sqrt, constants pi and e, decimal literals.
/// Throws ParseError naming the offending token.
ScalarFunction parse_expression(const std::string& text);

} // namespace expint::cli
