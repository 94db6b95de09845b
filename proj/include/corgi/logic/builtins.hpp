#pragma once

#include "corgi/logic/term.hpp"

#include <optional>

namespace corgi::logic {

/// `=`, `==`, `>=`, `=<`, `>`, `<` with two arguments.
bool is_builtin(const Term& goal);
bool is_comparison(const Term& goal);
bool is_arithmetic(const Term& t);

/// Evaluates a ground arithmetic expression (+, -, *, /).
/// Throws InstantiationError on unbound variables, TypeError otherwise.
Number evaluate(const Term& expr, const Substitution& s);

/// Runs a builtin goal. `=` evaluates whichever side is a ground arithmetic
/// expression and then unifies; it never solves constraints. Comparisons
/// require both sides to evaluate. Returns nullopt when the goal is false.
std::optional<Substitution> eval_builtin(const Term& goal, const Substitution& s);

}  // namespace corgi::logic
