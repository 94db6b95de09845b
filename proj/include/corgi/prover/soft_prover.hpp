#pragma once

#include "corgi/logic/search.hpp"
#include "corgi/nn/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace corgi::prover {

class UnknownSymbol : public Error {
public:
    using Error::Error;
};

class ModelMismatch : public Error {
public:
    using Error::Error;
};

struct SoftProveConfig {
    int k = 5;
    double T1 = 0.9;
    double T2 = 0.5;
    logic::SearchLimits limits;

    /// Throws nn::ConfigError unless 1 <= k <= n1, 0 < T1 <= 1, 0 < T2 < 1.
    void validate(int n1) const;
};

/// Symbol embeddings seen by soft unification: the model's M_var rows plus a
/// local overlay (session symbols, hand-built test rows).
class EmbeddingView {
public:
    EmbeddingView() = default;
    EmbeddingView(const nn::Mat& M_var, const trace::SymbolTable& symbols) : base_(&M_var), symbols_(&symbols) {}

    /// Overlay row; replaces any existing row for the symbol.
    void set(const std::string& symbol, nn::Vec row) { overlay_[symbol] = std::move(row); }
    /// Adds a deterministic pseudo-random row when the symbol has none.
    void ensure(const std::string& symbol);
    /// Runs `ensure` over every atom in `t`, functors included.
    void ensure_all(const logic::Term& t);

    bool has(const std::string& symbol) const { return row_copy(symbol).has_value(); }
    std::optional<double> cosine(const std::string& a, const std::string& b) const;
    int width() const;

private:
    std::optional<nn::Vec> row_copy(const std::string& symbol) const;

    const nn::Mat* base_ = nullptr;
    const trace::SymbolTable* symbols_ = nullptr;
    std::map<std::string, nn::Vec> overlay_;
};

struct SoftMatch {
    logic::Substitution bindings;
    bool soft = false;  // some distinct symbols were accepted by similarity
    std::vector<std::pair<std::string, std::string>> matched;  // (query symbol, head symbol)
};

/// Structural unification where distinct atoms (functors included) match when
/// their embedding cosine exceeds T1. Identical symbols always match, numbers
/// only equal numbers, and variables bind without a similarity test. Distinct
/// argument atoms without an embedding row raise UnknownSymbol; distinct
/// functors without rows simply do not match.
std::optional<SoftMatch> soft_unify(const logic::Term& query, const logic::Term& head, const EmbeddingView& view,
                                    double T1, const logic::Substitution& s = {});

struct RuleChoice {
    int t = 0;
    int clause_id = -1;
    int rank = -1;
    friend bool operator==(const RuleChoice&, const RuleChoice&) = default;
};

struct SoftProofResult {
    logic::SearchOutcome outcome = logic::SearchOutcome::exhausted;
    std::optional<logic::ProofTree> proof;
    logic::Substitution bindings;
    std::vector<RuleChoice> rule_choices;  // resolution nodes only
    std::vector<bool> used_soft_match;     // per node, by t
    std::vector<double> termination;       // c_t per node (NaN in oracle mode)
    std::size_t steps = 0;

    bool ok() const noexcept { return outcome == logic::SearchOutcome::success; }
};

/// Model-guided search: at each node the model's rule distribution picks the
/// top-k base clauses, followed by session clauses for the same predicate.
/// Candidates are tried in rank order with soft head matching (or exact
/// matching when `exact` is set) and full backtracking.
SoftProofResult soft_prove(const logic::KnowledgeBase& kb, const nn::NeuralProverModel& model,
                           const logic::Term& goal, const SoftProveConfig& cfg, const EmbeddingView& view,
                           bool exact = false);

/// Convenience overload: embeddings straight from the model, with rows added
/// for symbols of the goal and the KB that the model has never seen.
SoftProofResult soft_prove(const logic::KnowledgeBase& kb, const nn::NeuralProverModel& model,
                           const logic::Term& goal, const SoftProveConfig& cfg);

/// Exact unification, clauses in program order.
SoftProofResult oracle_prove(const logic::KnowledgeBase& kb, const logic::Term& goal, const SoftProveConfig& cfg = {});

/// Re-runs the recorded rule choices under soft matching; the result must
/// equal the original tree and bindings.
SoftProofResult replay_choices(const logic::KnowledgeBase& kb, const logic::Term& goal, const SoftProofResult& result,
                               const EmbeddingView& view, double T1, logic::SearchLimits limits = {});

/// Replay check for a proof that may contain soft matches.
bool soft_replays(const logic::ProofTree& proof, const logic::KnowledgeBase& kb, const logic::Substitution& bindings,
                  const EmbeddingView& view, double T1);

}  // namespace corgi::prover
