#include "corgi/logic/solve.hpp"

namespace corgi::logic {

std::string to_string(SearchOutcome o) {
    switch (o) {
        case SearchOutcome::success:
            return "success";
        case SearchOutcome::exhausted:
            return "exhausted";
        case SearchOutcome::limit:
            return "limit";
    }
    return "unknown";
}

ProofTree build_proof_tree(const std::vector<SearchNode>& nodes) {
    std::vector<ProofTree> built(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        built[i].goal = nodes[i].goal;
        built[i].clause_id = nodes[i].clause_id;
        built[i].bindings = nodes[i].bindings;
        built[i].t = static_cast<int>(i);
    }
    // Children appear after their parent, so attach from the back.
    std::vector<std::vector<std::size_t>> kids(nodes.size());
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        kids[static_cast<std::size_t>(nodes[i].parent)].push_back(i);
    }
    for (std::size_t i = nodes.size(); i-- > 0;) {
        for (std::size_t k : kids[i]) built[i].children.push_back(std::move(built[k]));
    }
    return nodes.empty() ? ProofTree{} : std::move(built[0]);
}

namespace {

struct ExactPolicy {
    struct State {};

    const KnowledgeBase& kb;
    const ClauseOrder& order;

    Ranking rank(const Term& goal, const NodeContext& ctx, State&) const {
        Ranking r;
        const std::vector<int> ids = order ? order(goal, ctx) : kb.candidates(predicate_key(goal));
        int rank = 0;
        for (int id : ids) r.candidates.push_back({id, rank++});
        return r;
    }

    double on_builtin(const Term&, const NodeContext&, State&) const { return 0.0; }

    std::optional<HeadMatch> match(const Term& goal, const Term& head, const Substitution& s) const {
        auto u = unify(goal, head, s);
        if (!u) return std::nullopt;
        return HeadMatch{std::move(*u), false};
    }
};

}  // namespace

SearchResult solve(const KnowledgeBase& kb, const Term& goal, SearchLimits limits, const ClauseOrder& order) {
    ExactPolicy policy{kb, order};
    DepthFirstSearch<ExactPolicy> search(kb, policy, limits);
    return search.run(goal, {});
}

SearchResult solve_forced(const KnowledgeBase& kb, const Term& goal, const std::vector<int>& choices,
                          SearchLimits limits) {
    ClauseOrder order = [&](const Term&, const NodeContext& ctx) -> std::vector<int> {
        const auto t = static_cast<std::size_t>(ctx.t);
        if (t >= choices.size() || choices[t] < 0) return {};
        return {choices[t]};
    };
    return solve(kb, goal, limits, order);
}

}  // namespace corgi::logic
