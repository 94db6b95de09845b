#include "corgi/prover/soft_prover.hpp"

#include "corgi/logic/solve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace corgi::prover {

using logic::Substitution;
using logic::Term;
using logic::TermKind;

void SoftProveConfig::validate(int n1) const {
    if (k < 1 || k > std::max(1, n1)) throw nn::ConfigError("k must lie in [1, n1]");
    if (!(T1 > 0 && T1 <= 1)) throw nn::ConfigError("T1 must lie in (0, 1]");
    if (!(T2 > 0 && T2 < 1)) throw nn::ConfigError("T2 must lie in (0, 1)");
    if (limits.max_depth < 1 || limits.max_steps < 1) throw nn::ConfigError("search limits must be positive");
}

int EmbeddingView::width() const {
    if (base_) return static_cast<int>(base_->cols());
    if (!overlay_.empty()) return static_cast<int>(overlay_.begin()->second.size());
    return 16;
}

std::optional<nn::Vec> EmbeddingView::row_copy(const std::string& symbol) const {
    auto it = overlay_.find(symbol);
    if (it != overlay_.end()) return it->second;
    if (base_ && symbols_) {
        const int id = symbols_->find(symbol);
        if (id >= 0 && id < base_->rows()) return nn::Vec(base_->row(id).transpose());
    }
    return std::nullopt;
}

void EmbeddingView::ensure(const std::string& symbol) {
    if (row_copy(symbol)) return;
    std::mt19937_64 rng(logic::fnv1a64(symbol));
    std::normal_distribution<double> d(0.0, 0.1);
    nn::Vec v(width());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = d(rng);
    overlay_[symbol] = std::move(v);
}

void EmbeddingView::ensure_all(const Term& t) {
    if (t.is_atom() || t.is_compound()) ensure(t.name());
    for (const auto& a : t.args()) ensure_all(a);
}

std::optional<double> EmbeddingView::cosine(const std::string& a, const std::string& b) const {
    auto ra = row_copy(a);
    auto rb = row_copy(b);
    if (!ra || !rb) return std::nullopt;
    const double na = ra->norm();
    const double nb = rb->norm();
    if (na == 0 || nb == 0) return 0.0;
    return ra->dot(*rb) / (na * nb);
}

namespace {

struct SoftUnifier {
    const EmbeddingView& view;
    double T1;
    SoftMatch& out;

    // Distinct symbol names: accept by similarity. `functor` controls whether a
    // missing row is an error or a plain mismatch.
    bool similar(const std::string& q, const std::string& h, bool functor) {
        if (q == h) return true;
        auto c = view.cosine(q, h);
        if (!c) {
            if (functor) return false;
            throw UnknownSymbol("no embedding for '" + (view.has(q) ? h : q) + "'");
        }
        if (*c > T1) {
            out.soft = true;
            out.matched.emplace_back(q, h);
            return true;
        }
        return false;
    }

    bool run(const Term& a, const Term& b, Substitution& s, bool top) {
        const Term& x = s.walk(a);
        const Term& y = s.walk(b);
        if (x.is_variable() && y.is_variable() && x.var_key() == y.var_key()) return true;
        if (x.is_variable()) {
            if (logic::occurs_in(x.var_key(), y, s)) return false;
            s.bind(x.var_key(), y);
            return true;
        }
        if (y.is_variable()) {
            if (logic::occurs_in(y.var_key(), x, s)) return false;
            s.bind(y.var_key(), x);
            return true;
        }
        if (x.is_number() || y.is_number()) return x.is_number() && y.is_number() && x.value() == y.value();
        if (x.arity() != y.arity()) return false;
        if (!similar(x.name(), y.name(), top || x.is_compound())) return false;
        for (std::size_t i = 0; i < x.arity(); ++i) {
            if (!run(x.args()[i], y.args()[i], s, false)) return false;
        }
        return true;
    }
};

}  // namespace

std::optional<SoftMatch> soft_unify(const Term& query, const Term& head, const EmbeddingView& view, double T1,
                                    const Substitution& s) {
    if (query.arity() != head.arity()) return std::nullopt;
    SoftMatch m;
    m.bindings = s;
    SoftUnifier u{view, T1, m};
    if (!u.run(query, head, m.bindings, true)) return std::nullopt;
    return m;
}

namespace {

SoftProofResult from_search(const logic::SearchResult& r) {
    SoftProofResult out;
    out.outcome = r.outcome;
    out.proof = r.proof;
    out.bindings = r.bindings;
    out.steps = r.steps;
    for (std::size_t t = 0; t < r.nodes.size(); ++t) {
        const auto& n = r.nodes[t];
        if (n.clause_id) out.rule_choices.push_back({static_cast<int>(t), *n.clause_id, n.rank});
        out.used_soft_match.push_back(n.soft);
        out.termination.push_back(n.termination);
    }
    return out;
}

struct ModelPolicy {
    using State = nn::StepState;

    const logic::KnowledgeBase& kb;
    const nn::NeuralProverModel& model;
    const SoftProveConfig& cfg;
    const EmbeddingView& view;
    bool exact;

    int rule_input(int id) const {
        if (id < 0 || id >= model.n1()) return -1;
        const logic::Clause* c = kb.find(id);
        return c && c->provenance == logic::Provenance::builtin ? id : -1;
    }

    nn::StepOutput run_model(const Term& goal, const logic::NodeContext& ctx, State& state) const {
        auto out = model.step(state, goal.name(), rule_input(ctx.parent_clause), rule_input(ctx.left_sister_clause), {});
        state = out.next;
        return out;
    }

    logic::Ranking rank(const Term& goal, const logic::NodeContext& ctx, State& state) const {
        const auto out = run_model(goal, ctx, state);
        logic::Ranking r;
        r.termination = out.c_t;
        std::vector<int> ids(static_cast<std::size_t>(model.n1()));
        std::iota(ids.begin(), ids.end(), 0);
        std::stable_sort(ids.begin(), ids.end(),
                         [&](int a, int b) { return out.rule_dist(a) > out.rule_dist(b); });
        int rank = 0;
        for (int id : ids) {
            if (rank >= cfg.k) break;
            r.candidates.push_back({id, rank++});
        }
        // Clauses learned in the session have no embedding row; they are
        // offered after the model's picks when the predicate matches.
        for (int id : kb.candidates(logic::predicate_key(goal))) {
            if (rule_input(id) < 0) r.candidates.push_back({id, rank++});
        }
        return r;
    }

    double on_builtin(const Term& goal, const logic::NodeContext& ctx, State& state) const {
        return run_model(goal, ctx, state).c_t;
    }

    std::optional<logic::HeadMatch> match(const Term& goal, const Term& head, const Substitution& s) const {
        if (exact) {
            auto u = logic::unify(goal, head, s);
            if (!u) return std::nullopt;
            return logic::HeadMatch{std::move(*u), false};
        }
        auto m = soft_unify(goal, head, view, cfg.T1, s);
        if (!m) return std::nullopt;
        return logic::HeadMatch{std::move(m->bindings), m->soft};
    }
};

struct ForcedPolicy {
    struct State {};

    const logic::KnowledgeBase& kb;
    const std::map<int, RuleChoice>& choices;
    const EmbeddingView& view;
    double T1;

    logic::Ranking rank(const Term&, const logic::NodeContext& ctx, State&) const {
        logic::Ranking r;
        auto it = choices.find(ctx.t);
        if (it != choices.end()) r.candidates.push_back({it->second.clause_id, it->second.rank});
        return r;
    }
    double on_builtin(const Term&, const logic::NodeContext&, State&) const { return std::nan(""); }
    std::optional<logic::HeadMatch> match(const Term& goal, const Term& head, const Substitution& s) const {
        auto m = soft_unify(goal, head, view, T1, s);
        if (!m) return std::nullopt;
        return logic::HeadMatch{std::move(m->bindings), m->soft};
    }
};

}  // namespace

SoftProofResult soft_prove(const logic::KnowledgeBase& kb, const nn::NeuralProverModel& model, const Term& goal,
                           const SoftProveConfig& cfg, const EmbeddingView& view, bool exact) {
    cfg.validate(model.n1());
    if (model.kb_fingerprint() != kb.fingerprint()) {
        throw ModelMismatch("model was trained against a different knowledge base");
    }
    if (!goal.is_callable()) throw nn::ConfigError("goal must be an atom or compound term");
    ModelPolicy policy{kb, model, cfg, view, exact};
    logic::DepthFirstSearch<ModelPolicy> search(kb, policy, cfg.limits);
    return from_search(search.run(goal, model.initial_state()));
}

SoftProofResult soft_prove(const logic::KnowledgeBase& kb, const nn::NeuralProverModel& model, const Term& goal,
                           const SoftProveConfig& cfg) {
    EmbeddingView view(model.params().M_var, model.symbols());
    view.ensure_all(goal);
    for (const auto& c : kb.clauses()) {
        view.ensure_all(c.head);
        for (const auto& b : c.body) view.ensure_all(b);
    }
    return soft_prove(kb, model, goal, cfg, view);
}

SoftProofResult oracle_prove(const logic::KnowledgeBase& kb, const Term& goal, const SoftProveConfig& cfg) {
    return from_search(logic::solve(kb, goal, cfg.limits));
}

SoftProofResult replay_choices(const logic::KnowledgeBase& kb, const Term& goal, const SoftProofResult& result,
                               const EmbeddingView& view, double T1, logic::SearchLimits limits) {
    std::map<int, RuleChoice> choices;
    for (const auto& c : result.rule_choices) choices[c.t] = c;
    ForcedPolicy policy{kb, choices, view, T1};
    logic::DepthFirstSearch<ForcedPolicy> search(kb, policy, limits);
    return from_search(search.run(goal, {}));
}

bool soft_replays(const logic::ProofTree& proof, const logic::KnowledgeBase& kb, const Substitution& bindings,
                  const EmbeddingView& view, double T1) {
    logic::HeadMatcher m = [&](const Term& goal, const Term& head, Substitution& s) {
        auto r = soft_unify(goal, head, view, T1, s);
        if (!r) return false;
        s = std::move(r->bindings);
        return true;
    };
    return logic::replays(proof, kb, bindings, m);
}

}  // namespace corgi::prover
