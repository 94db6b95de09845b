#pragma once

#include "corgi/logic/builtins.hpp"
#include "corgi/logic/knowledge_base.hpp"
#include "corgi/logic/proof.hpp"
#include "corgi/logic/term.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace corgi::logic {

struct SearchLimits {
    int max_depth = 20;
    std::size_t max_steps = 100'000;
};

enum class SearchOutcome { success, exhausted, limit };

std::string to_string(SearchOutcome o);

/// What a policy sees when asked to rank clauses for a node.
struct NodeContext {
    int t = 0;
    int parent_t = -1;
    int parent_clause = -1;       // clause id at the parent node, -1 at the root
    int left_sister_clause = -1;  // clause id at the nearest left sibling, -1 if none
    int depth = 0;
};

struct Candidate {
    int clause_id = -1;
    int rank = 0;
};

struct Ranking {
    std::vector<Candidate> candidates;
    double termination = std::numeric_limits<double>::quiet_NaN();
};

struct HeadMatch {
    Substitution bindings;
    bool soft = false;
};

/// Per-node record in creation order; index == t.
struct SearchNode {
    Term goal;
    std::optional<int> clause_id;
    Substitution bindings;
    int parent = -1;
    int depth = 0;
    int rank = -1;
    bool soft = false;
    double termination = std::numeric_limits<double>::quiet_NaN();
};

struct SearchResult {
    SearchOutcome outcome = SearchOutcome::exhausted;
    std::optional<ProofTree> proof;
    Substitution bindings;
    std::vector<SearchNode> nodes;  // the successful derivation, by t
    std::size_t steps = 0;

    bool ok() const noexcept { return outcome == SearchOutcome::success; }
};

ProofTree build_proof_tree(const std::vector<SearchNode>& nodes);

/// Depth-first, left-to-right resolution with chronological backtracking.
///
/// Policy supplies:
///   using State = ...;   threaded along the depth-first visit order
///   Ranking rank(const Term& resolved_goal, const NodeContext&, State&);
///   double on_builtin(const Term& resolved_goal, const NodeContext&, State&);
///   std::optional<HeadMatch> match(const Term& goal, const Term& head, const Substitution&);
template <class Policy>
class DepthFirstSearch {
public:
    using State = typename Policy::State;

    DepthFirstSearch(const KnowledgeBase& kb, Policy& policy, SearchLimits limits)
        : kb_(kb), policy_(policy), limits_(limits) {}

    SearchResult run(const Term& goal, State initial) {
        SearchResult result;
        auto pending = std::make_shared<const Pending>(Pending{goal, -1, 0, nullptr});
        Substitution empty;
        bool found = false;
        try {
            found = expand(pending, empty, std::move(initial), result);
        } catch (const StepLimit&) {
            found = false;
            step_limit_hit_ = true;
        }
        result.steps = steps_;
        if (found) {
            result.outcome = SearchOutcome::success;
            result.proof = build_proof_tree(result.nodes);
        } else {
            result.nodes.clear();
            result.outcome = (step_limit_hit_ || depth_pruned_) ? SearchOutcome::limit : SearchOutcome::exhausted;
        }
        return result;
    }

private:
    struct Pending {
        Term goal;
        int parent;
        int depth;
        std::shared_ptr<const Pending> next;
    };
    using PendingPtr = std::shared_ptr<const Pending>;
    struct StepLimit {};

    NodeContext context_for(const Pending& p) const {
        NodeContext ctx;
        ctx.t = static_cast<int>(arena_.size());
        ctx.parent_t = p.parent;
        ctx.depth = p.depth;
        if (p.parent >= 0) {
            const auto& parent = arena_[static_cast<std::size_t>(p.parent)];
            ctx.parent_clause = parent.clause_id.value_or(-1);
            for (auto i = static_cast<int>(arena_.size()) - 1; i > p.parent; --i) {
                const auto& n = arena_[static_cast<std::size_t>(i)];
                if (n.parent == p.parent) {
                    ctx.left_sister_clause = n.clause_id.value_or(-1);
                    break;
                }
            }
        }
        return ctx;
    }

    bool expand(const PendingPtr& pending, const Substitution& s, State state, SearchResult& result) {
        if (!pending) {
            result.bindings = s;
            result.nodes = arena_;
            return true;
        }
        if (++steps_ > limits_.max_steps) throw StepLimit{};
        const Pending& p = *pending;
        if (p.depth > limits_.max_depth) {
            depth_pruned_ = true;
            return false;
        }
        const NodeContext ctx = context_for(p);
        const Term resolved = s.resolve(p.goal);
        const std::size_t mark = arena_.size();

        if (is_builtin(p.goal)) {
            State next_state = state;
            const double term = policy_.on_builtin(resolved, ctx, next_state);
            auto r = eval_builtin(p.goal, s);
            if (!r) return false;
            SearchNode node;
            node.goal = p.goal;
            node.bindings = r->delta_since(s);
            node.parent = p.parent;
            node.depth = p.depth;
            node.termination = term;
            arena_.push_back(std::move(node));
            if (expand(p.next, *r, std::move(next_state), result)) return true;
            arena_.resize(mark);
            return false;
        }

        State next_state = state;
        Ranking ranking = policy_.rank(resolved, ctx, next_state);
        for (const auto& cand : ranking.candidates) {
            const Clause* clause = kb_.find(cand.clause_id);
            if (!clause) continue;
            const std::uint32_t gen = ++generation_;
            const Term head = clause->head.renamed(gen);
            auto m = policy_.match(p.goal, head, s);
            if (!m) continue;
            SearchNode node;
            node.goal = p.goal;
            node.clause_id = clause->id;
            node.bindings = m->bindings.delta_since(s);
            node.parent = p.parent;
            node.depth = p.depth;
            node.rank = cand.rank;
            node.soft = m->soft;
            node.termination = ranking.termination;
            const int me = static_cast<int>(arena_.size());
            arena_.push_back(std::move(node));

            PendingPtr rest = p.next;
            for (auto it = clause->body.rbegin(); it != clause->body.rend(); ++it) {
                rest = std::make_shared<const Pending>(Pending{it->renamed(gen), me, p.depth + 1, rest});
            }
            if (expand(rest, m->bindings, next_state, result)) return true;
            arena_.resize(mark);
        }
        return false;
    }

    const KnowledgeBase& kb_;
    Policy& policy_;
    SearchLimits limits_;
    std::vector<SearchNode> arena_;
    std::size_t steps_ = 0;
    std::uint32_t generation_ = 0;
    bool depth_pruned_ = false;
    bool step_limit_hit_ = false;
};

}  // namespace corgi::logic
