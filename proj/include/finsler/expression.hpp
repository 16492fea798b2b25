#pragma once

// Arithmetic expressions over x1..xn, y1..yn used by scenario files.
//
// Grammar: + - * / ^, unary minus, parentheses, numbers (scientific notation
// allowed), constants pi and e, and the functions sin cos tan tanh exp log
// sqrt. Integer exponents are evaluated by repeated multiplication so that
// negative bases are allowed.

#include <memory>
#include <string>

#include "finsler/jet.hpp"

namespace finsler {

/// Parse `source` into a field of dimension `dim`. With `allow_fiber` false,
/// any reference to y1..yn is rejected. Throws ConfigError with the character
/// position of the first problem.
std::shared_ptr<const ScalarField> parse_expression(const std::string& source, int dim,
                                                    bool allow_fiber = true);

}  // namespace finsler
