#include "corgi/logic/builtins.hpp"

#include "corgi/logic/errors.hpp"

namespace corgi::logic {

namespace {

bool is_op(const std::string& f) { return f == "+" || f == "-" || f == "*" || f == "/"; }

}  // namespace

bool is_comparison(const Term& goal) {
    if (!goal.is_compound() || goal.arity() != 2) return false;
    const auto& f = goal.name();
    return f == "==" || f == ">=" || f == "=<" || f == ">" || f == "<";
}

bool is_builtin(const Term& goal) {
    return is_comparison(goal) || (goal.is_compound() && goal.arity() == 2 && goal.name() == "=");
}

bool is_arithmetic(const Term& t) { return t.is_compound() && t.arity() == 2 && is_op(t.name()); }

Number evaluate(const Term& expr, const Substitution& s) {
    const Term& t = s.walk(expr);
    switch (t.kind()) {
        case TermKind::number:
            return t.value();
        case TermKind::variable:
            throw InstantiationError("unbound variable " + t.name() + " in arithmetic");
        case TermKind::atom:
            throw TypeError("atom '" + t.name() + "' is not a number");
        case TermKind::compound:
            break;
    }
    if (!is_arithmetic(t)) throw TypeError("not an arithmetic expression: " + t.to_string());
    const Number a = evaluate(t.args()[0], s);
    const Number b = evaluate(t.args()[1], s);
    const auto& f = t.name();
    if (f == "+") return a + b;
    if (f == "-") return a - b;
    if (f == "*") return a * b;
    if (b.numerator() == 0) throw TypeError("division by zero");
    return a / b;
}

std::optional<Substitution> eval_builtin(const Term& goal, const Substitution& s) {
    if (!is_builtin(goal)) throw Error("not a builtin: " + goal.to_string());
    const Term lhs = s.resolve(goal.args()[0]);
    const Term rhs = s.resolve(goal.args()[1]);
    const auto& f = goal.name();

    if (f == "=") {
        auto reduce = [&](const Term& side) {
            if (is_arithmetic(side) && side.is_ground()) return Term::number(evaluate(side, s));
            return side;
        };
        return unify(reduce(lhs), reduce(rhs), s);
    }

    if (f == "==" && !is_arithmetic(lhs) && !is_arithmetic(rhs) && !lhs.is_number() && !rhs.is_number()) {
        if (!lhs.is_ground() || !rhs.is_ground()) {
            throw InstantiationError("unbound argument in " + goal.to_string());
        }
        return lhs == rhs ? std::optional<Substitution>(s) : std::nullopt;
    }

    const Number a = evaluate(lhs, s);
    const Number b = evaluate(rhs, s);
    bool ok = false;
    if (f == "==") ok = a == b;
    else if (f == ">=") ok = a >= b;
    else if (f == "=<") ok = a <= b;
    else if (f == ">") ok = a > b;
    else if (f == "<") ok = a < b;
    return ok ? std::optional<Substitution>(s) : std::nullopt;
}

}  // namespace corgi::logic
