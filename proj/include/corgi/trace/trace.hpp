#pragma once

#include "corgi/logic/errors.hpp"
#include "corgi/logic/knowledge_base.hpp"
#include "corgi/logic/proof.hpp"
#include "corgi/logic/search.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace corgi::trace {

class GenerationExhausted : public Error {
public:
    using Error::Error;
};

class InconsistentTree : public Error {
public:
    using Error::Error;
};

class CorpusError : public Error {
public:
    using Error::Error;
};

/// Bidirectional symbol <-> id map. Ids are dense and assigned in insertion order.
class SymbolTable {
public:
    SymbolTable() = default;
    explicit SymbolTable(const std::vector<std::string>& symbols);

    int add(const std::string& symbol);
    /// -1 when absent.
    int find(const std::string& symbol) const;
    int at(const std::string& symbol) const;  // throws CorpusError when absent
    const std::string& name(int id) const;
    bool contains(const std::string& symbol) const { return find(symbol) >= 0; }
    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& symbols() const noexcept { return names_; }
    std::uint64_t hash() const;

    friend bool operator==(const SymbolTable& a, const SymbolTable& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> ids_;
};

/// Symbol for an argument term: atoms and numbers print as themselves,
/// variables by their source name (renaming dropped, `_` for anonymous).
std::string symbol_of(const logic::Term& arg);

/// KB atoms, numbers and variable names, in sorted groups.
SymbolTable symbols_for(const logic::KnowledgeBase& kb);

struct TraceStep {
    int t = 0;
    std::string query_name;
    std::vector<int> query_args;
    int parent_rule_id = -1;
    int left_sister_rule_id = -1;
    int target_rule_id = -1;  // -1 for builtin evaluation steps
    std::vector<int> target_args;
    bool terminate = false;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Trace = std::vector<TraceStep>;

/// One step per proof node in t order. Query arguments are the goal as posed;
/// target arguments are the goal under the bindings accumulated through that
/// step. Builtin steps carry no arguments. New symbols are added to `symbols`.
Trace tree_to_trace(const logic::ProofTree& proof, const logic::KnowledgeBase& kb, SymbolTable& symbols);

/// Forces each step's target rule inside exact search.
logic::SearchResult replay_trace(const logic::KnowledgeBase& kb, const logic::Term& goal, const Trace& trace,
                                 logic::SearchLimits limits = {});

/// Clause heads with each variable left free (p = 0.5) or replaced by an atom
/// of a compatible type; only provable queries are kept.
std::vector<logic::Term> generate_queries(const logic::KnowledgeBase& kb, std::size_t count, std::uint64_t seed,
                                          logic::SearchLimits limits = {});

struct TraceCorpus {
    std::uint64_t kb_fingerprint = 0;
    SymbolTable symbols;
    std::vector<std::string> queries;  // the query each trace proves
    std::vector<Trace> traces;

    /// Header line, then one trace per line.
    std::string serialize() const;
    static TraceCorpus parse(const std::string& text);

    /// Throws CorpusError when a rule id or symbol id is out of range or the
    /// fingerprint does not match.
    void validate(const logic::KnowledgeBase& kb) const;
};

TraceCorpus build_corpus(const logic::KnowledgeBase& kb, std::size_t count, std::uint64_t seed,
                         logic::SearchLimits limits = {});

}  // namespace corgi::trace
