#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace corgi::logic {

/// Exact rational; rendered as an integer when integral.
using Number = boost::rational<std::int64_t>;

std::string format_number(const Number& n);

enum class TermKind : std::uint8_t { atom, variable, number, compound };

/// Identity of a variable: its source name plus a renaming generation.
/// Query variables live in generation 0; each clause use gets a fresh one.
struct VarKey {
    std::string name;
    std::uint32_t id = 0;

    auto operator<=>(const VarKey&) const = default;
};

/// Type tag implied by a variable name: trailing digits stripped, lowercased.
/// Person1 -> "person", ToPlace -> "toplace".
std::string variable_type(std::string_view name);

class Term {
public:
    Term() = default;

    static Term atom(std::string name);
    static Term variable(std::string name, std::uint32_t id = 0);
    static Term number(Number value);
    static Term number(std::int64_t value) { return number(Number(value)); }
    static Term compound(std::string functor, std::vector<Term> args);

    TermKind kind() const noexcept { return kind_; }
    bool is_atom() const noexcept { return kind_ == TermKind::atom; }
    bool is_variable() const noexcept { return kind_ == TermKind::variable; }
    bool is_number() const noexcept { return kind_ == TermKind::number; }
    bool is_compound() const noexcept { return kind_ == TermKind::compound; }
    bool is_callable() const noexcept { return is_atom() || is_compound(); }

    /// Atom name, variable name, or compound functor.
    const std::string& name() const noexcept { return name_; }
    std::uint32_t var_id() const noexcept { return var_id_; }
    VarKey var_key() const { return VarKey{name_, var_id_}; }
    const Number& value() const noexcept { return number_; }
    const std::vector<Term>& args() const noexcept { return args_; }
    std::size_t arity() const noexcept { return args_.size(); }

    bool is_ground() const;
    void collect_variables(std::set<VarKey>& out) const;
    bool contains_variable(const VarKey& key) const;

    /// Moves every variable into generation `id`.
    Term renamed(std::uint32_t id) const;

    std::string to_string() const;

    friend bool operator==(const Term& a, const Term& b);
    friend bool operator<(const Term& a, const Term& b);

private:
    TermKind kind_ = TermKind::atom;
    std::string name_;
    std::uint32_t var_id_ = 0;
    Number number_;
    std::vector<Term> args_;
};

/// Triangular variable bindings. Lookups chase chains; `resolve` yields the
/// fully substituted term, so resolving twice equals resolving once.
class Substitution {
public:
    bool empty() const noexcept { return bindings_.empty(); }
    std::size_t size() const noexcept { return bindings_.size(); }

    const Term* lookup(const VarKey& key) const;
    bool is_bound(const VarKey& key) const { return lookup(key) != nullptr; }

    /// Binds an unbound variable. Caller guarantees the occurs check.
    void bind(const VarKey& key, Term value);

    /// Follows variable chains at the top level only.
    const Term& walk(const Term& t) const;
    Term resolve(const Term& t) const;

    const std::map<VarKey, Term>& bindings() const noexcept { return bindings_; }

    /// Bindings present here but not in `before`.
    Substitution delta_since(const Substitution& before) const;

    std::string to_string() const;

    friend bool operator==(const Substitution&, const Substitution&) = default;

private:
    std::map<VarKey, Term> bindings_;
};

Term apply_substitution(const Term& t, const Substitution& s);

/// Most general unifier extending `s`, with occurs check. Functor and arity
/// must match exactly. Returns nullopt on mismatch.
std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& s = {});

/// In-place variant; on failure `s` may be partially extended.
bool unify_into(const Term& a, const Term& b, Substitution& s);

/// True if `v` occurs in `t` under `s`.
bool occurs_in(const VarKey& v, const Term& t, const Substitution& s);

}  // namespace corgi::logic
