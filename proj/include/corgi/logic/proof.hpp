#pragma once

#include "corgi/logic/term.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace corgi::logic {

class KnowledgeBase;

/// One resolution step. `goal` is the goal as posed (variables renamed,
/// before substitution); children are the instantiated body goals.
struct ProofTree {
    Term goal;
    std::optional<int> clause_id;  // absent for builtin nodes
    Substitution bindings;         // bindings introduced by this step
    std::vector<ProofTree> children;
    int t = 0;

    bool is_builtin_node() const noexcept { return !clause_id.has_value(); }
    bool is_leaf() const noexcept { return children.empty(); }
    std::size_t node_count() const;

    /// Nodes in depth-first preorder (that is, by t).
    std::vector<const ProofTree*> preorder() const;
    std::vector<const ProofTree*> leaves() const;
    int depth_of(int t) const;
    const ProofTree* find(int t) const;
};

/// Indented text form: one node per line, two spaces per depth level,
/// `t=<n>  <resolved goal>` followed by the clause id for resolution steps.
std::string render_proof(const ProofTree& proof, const Substitution& final_bindings);

/// Checks that t-indices are 0..N-1 in preorder.
bool has_preorder_indices(const ProofTree& proof);

/// Re-unifies every node with its clause head (renamed) under the final
/// bindings, re-evaluates builtin nodes, and checks body lengths.
/// `match` defaults to exact unification.
using HeadMatcher = std::function<bool(const Term& goal, const Term& head, Substitution& s)>;
bool replays(const ProofTree& proof, const KnowledgeBase& kb, const Substitution& final_bindings,
             const HeadMatcher& match = {});

/// Shape equality: same clause ids and goal functors at every position.
bool isomorphic(const ProofTree& a, const ProofTree& b);

}  // namespace corgi::logic
