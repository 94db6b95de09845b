#pragma once

#include "corgi/logic/term.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace corgi::logic {

/// Where a clause came from. `hypothesis` marks the temporary context
/// clauses a dialog adds for a single proof attempt.
enum class Provenance : std::uint8_t { builtin, user_session, hypothesis };

std::string to_string(Provenance p);

struct Clause {
    Term head;
    std::vector<Term> body;
    int id = -1;
    Provenance provenance = Provenance::builtin;
    std::string domain;  // empty when the program never tagged one

    bool is_fact() const noexcept { return body.empty(); }
    std::string to_string() const;
};

using PredicateKey = std::pair<std::string, std::size_t>;

PredicateKey predicate_key(const Term& callable);

class KnowledgeBase {
public:
    /// Appends a clause and returns its id. Ids are never reused.
    int add_clause(Term head, std::vector<Term> body, Provenance provenance = Provenance::builtin,
                   std::string domain = {});
    /// Returns false if the id is unknown.
    bool remove_clause(int id);

    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    std::size_t size() const noexcept { return clauses_.size(); }
    bool empty() const noexcept { return clauses_.empty(); }
    const Clause* find(int id) const;
    const Clause& at(int id) const;

    /// Clause ids for (functor, arity) in program order.
    const std::vector<int>& candidates(const PredicateKey& key) const;
    bool has_predicate(const PredicateKey& key) const { return !candidates(key).empty(); }
    std::vector<PredicateKey> predicates() const;

    /// One past the largest id ever handed out.
    int next_id() const noexcept { return next_id_; }
    /// Number of builtin clauses; these own rows of the rule-embedding matrix.
    std::size_t builtin_count() const;

    void declare_user_state(PredicateKey key) { user_state_.insert(std::move(key)); }
    bool is_user_state(const PredicateKey& key) const { return user_state_.count(key) > 0; }
    const std::set<PredicateKey>& user_state_predicates() const noexcept { return user_state_; }

    std::map<std::string, std::string>& types() noexcept { return types_; }
    const std::map<std::string, std::string>& types() const noexcept { return types_; }
    /// Type of an atom from the types dictionary; "thing" when unknown.
    std::string type_of(const std::string& noun) const;
    /// Parses `noun<TAB>type` lines into the dictionary.
    void load_types(const std::string& text);

    /// Every atom and variable name in head/body positions, sorted.
    std::set<std::string> atoms() const;
    std::set<std::string> variable_names() const;

    /// Canonical program text, one clause per line.
    std::string to_text() const;
    /// Hash over the builtin clauses only, so session overlays keep the
    /// fingerprint of the program the model was trained against.
    std::uint64_t fingerprint() const;

    /// Checks the (functor, arity) index against the clause list.
    bool index_consistent() const;

private:
    std::vector<Clause> clauses_;
    std::map<int, std::size_t> position_;
    std::map<PredicateKey, std::vector<int>> index_;
    std::set<PredicateKey> user_state_;
    std::map<std::string, std::string> types_;
    int next_id_ = 0;
};

std::uint64_t fnv1a64(std::string_view text);

}  // namespace corgi::logic
