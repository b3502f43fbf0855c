// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace pirem {

/// Parses a coefficient expression over the input point. Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := ('-')? base ('^' factor)?
///   base   := number | 'pi' | 'x' digits | ('sin'|'cos') '(' expr ')' | '(' expr ')'
/// Variables x1..x9 index the coordinates of the evaluation point.
/// Throws std::invalid_argument on malformed input or out-of-range variables.
std::function<double(const Eigen::VectorXd&)> parse_coeff_expr(const std::string& text, int dx);

/// Evaluates a constant expression (no variables); used for config scalars.
double eval_const_expr(const std::string& text);

}  // namespace pirem
