#pragma once

#include "corgi/nl/parser.hpp"
#include "corgi/prover/soft_prover.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace corgi::dialog {

/// An answer arrived for a session that is no longer waiting for one.
class StateError : public Error {
public:
    using Error::Error;
};

enum class Status { awaiting_user, succeeded, failed };
enum class ActionType { ask, succeed, fail };
enum class Speaker { user, system };

std::string to_string(Status s);
std::string to_string(ActionType a);

struct Presumption {
    enum class Kind { state_constraint, user_fact };

    int node_t = 0;
    logic::Term form;
    Kind kind = Kind::user_fact;
    std::string rendered;

    nlohmann::json to_json() const;
};

std::string to_string(Presumption::Kind k);

struct SystemAction {
    ActionType type = ActionType::ask;
    std::string text;
    std::string reason;  // fail only
    std::optional<logic::ProofTree> proof;
    std::string proof_text;
    nlohmann::json proof_record;  // nested {goal, clause_id, t, children}
    std::vector<Presumption> presumptions;
    bool clarification = false;  // re-ask after an answer that did not parse

    nlohmann::json to_json() const;
};

struct TranscriptLine {
    Speaker speaker;
    std::string text;
};

struct DialogConfig {
    enum class Prover { soft, oracle };

    int n = 3;              // feedback-loop bound
    bool feedback = true;   // false: a goal outside the KB fails at once
    Prover prover = Prover::soft;
    prover::SoftProveConfig prove;

    void validate(int n1) const;
};

struct DialogSession {
    std::string id;
    logic::KnowledgeBase kb_view;  // private copy of the base KB plus session clauses
    nl::CommandParts parts;
    nl::LogicalForm S, A, G;
    std::string goal_text;          // the command's goal as shown to the user
    std::string current_goal_text;  // the goal being asked about
    std::vector<nl::LogicalForm> goal_stack;
    int i = 0;
    int n = 3;
    std::vector<int> pending_rule_ids;
    std::vector<TranscriptLine> transcript;
    Status status = Status::awaiting_user;
    bool clarified = false;  // the single clarification prompt has been used

    std::optional<prover::SoftProofResult> result;
    std::optional<logic::KnowledgeBase> proof_kb;  // kb_view plus the proof's hypothesis clauses
    std::vector<Presumption> presumptions;
    prover::EmbeddingView view;
    int asks = 0;
};

using MatchFn = std::function<bool(const logic::Term& goal, const logic::Term& form)>;

/// Exact unifiability.
bool exact_match(const logic::Term& goal, const logic::Term& form);

/// Leaves of the proof that the command left unsaid:
///  - comparison builtins sharing a variable with a node about the state
///    (a node whose goal matches S or mentions S's predicate or a non-pronoun
///    argument of S), kind state_constraint;
///  - fact leaves from user-state predicates or session clauses that match
///    neither S nor A, kind user_fact.
/// Results are in t order.
std::vector<Presumption> extract_presumptions(const logic::ProofTree& proof, const logic::Substitution& bindings,
                                              const logic::KnowledgeBase& kb, const logic::Term& S,
                                              const logic::Term& A, const MatchFn& matches = exact_match);

/// Wire form of a proof: nested {goal, clause_id, t, children} records with
/// goals resolved under `bindings`; clause_id is null for builtin steps.
nlohmann::json proof_to_json(const logic::ProofTree& proof, const logic::Substitution& bindings);

/// Plain-text transcript: user lines verbatim, system lines indented by four
/// spaces.
std::string export_transcript(const DialogSession& session);

class DialogEngine {
public:
    /// `model` may be null when cfg.prover is oracle. All references must
    /// outlive the engine and every session it creates.
    DialogEngine(const logic::KnowledgeBase& base, const nn::NeuralProverModel* model, const nl::Lexicon& lexicon,
                 DialogConfig cfg);

    /// Parses the command, then either proves right away (goal predicate in
    /// the KB), asks about the goal, or fails when feedback is disabled.
    /// Throws nl::ParseFailure without creating a session.
    std::pair<DialogSession, SystemAction> start_session(const std::string& command, std::string id = {}) const;

    SystemAction user_answer(DialogSession& session, const std::string& text) const;

    /// Adds the command's context as hypotheses (A :- S and S), proves G,
    /// checks that the proof covers S and A, and rolls back the rules of the
    /// update loop on failure.
    SystemAction prove_phase(DialogSession& session) const;

    const DialogConfig& config() const noexcept { return cfg_; }
    const logic::KnowledgeBase& base() const noexcept { return base_; }

private:
    SystemAction ask(DialogSession& s, const std::string& text) const;
    SystemAction fail(DialogSession& s, const std::string& reason, const std::string& text) const;
    nl::LogicalForm parse(const std::string& text, const logic::KnowledgeBase& kb, nl::Role role) const;
    MatchFn matcher(const DialogSession& s) const;

    const logic::KnowledgeBase& base_;
    const nn::NeuralProverModel* model_;
    const nl::Lexicon& lexicon_;
    DialogConfig cfg_;
};

}  // namespace corgi::dialog
