#pragma once

#include "corgi/logic/search.hpp"

#include <functional>

namespace corgi::logic {

/// Optional override of clause order: given the resolved goal and node
/// context, return the clause ids to try (in order).
using ClauseOrder = std::function<std::vector<int>(const Term& goal, const NodeContext& ctx)>;

/// Classical backward chaining: clauses in program order, exact unification.
SearchResult solve(const KnowledgeBase& kb, const Term& goal, SearchLimits limits = {},
                   const ClauseOrder& order = {});

/// Forces the clause used at each resolution node, in t order. Builtin
/// nodes consume an entry of -1 (or may be skipped by passing -1).
SearchResult solve_forced(const KnowledgeBase& kb, const Term& goal, const std::vector<int>& choices,
                          SearchLimits limits = {});

}  // namespace corgi::logic
