#pragma once

// Shared helpers for the prover tests and the acceptance runner.

#include "corgi/logic/parser.hpp"
#include "corgi/prover/soft_prover.hpp"
#include "oracles.hpp"

#include <random>
#include <set>
#include <string>
#include <vector>

namespace fixtures {

using namespace corgi;

inline logic::KnowledgeBase load_kb(const std::string& file, bool with_types = true) {
    auto kb = logic::parse_program(oracle::read_file(oracle::data_path(file)));
    if (with_types) kb.load_types(oracle::read_file(oracle::data_path("types.tsv")));
    return kb;
}

inline void collect_symbols(const logic::Term& t, std::set<std::string>& out) {
    if (t.is_atom() || t.is_compound()) out.insert(t.name());
    for (const auto& a : t.args()) collect_symbols(a, out);
}

/// One-hot rows: every symbol gets its own axis, so distinct symbols have
/// cosine 0 and identical ones cosine 1.
inline prover::EmbeddingView one_hot_view(const std::set<std::string>& symbols) {
    prover::EmbeddingView view;
    const auto n = static_cast<Eigen::Index>(symbols.size());
    Eigen::Index i = 0;
    for (const auto& s : symbols) {
        nn::Vec v = nn::Vec::Zero(n);
        v(i++) = 1.0;
        view.set(s, v);
    }
    return view;
}

inline std::set<std::string> kb_symbols(const logic::KnowledgeBase& kb, const std::vector<logic::Term>& extra = {}) {
    std::set<std::string> out;
    for (const auto& c : kb.clauses()) {
        collect_symbols(c.head, out);
        for (const auto& b : c.body) collect_symbols(b, out);
    }
    for (const auto& t : extra) collect_symbols(t, out);
    return out;
}

inline nn::ModelConfig tiny_model(std::uint64_t seed) {
    nn::ModelConfig c;
    c.m1 = 6;
    c.m2 = 6;
    c.hidden = 6;
    c.char_hidden = 5;
    c.enc_out = 5;
    c.ffn_hidden = 6;
    c.seed = seed;
    return c;
}

inline nn::NeuralProverModel model_for(const logic::KnowledgeBase& kb, nn::ModelConfig cfg) {
    return nn::NeuralProverModel(cfg, static_cast<int>(kb.builtin_count()), trace::symbols_for(kb), kb.fingerprint());
}

/// Random term over a small universe of atoms, variables and numbers.
inline logic::Term fuzz_term(std::mt19937_64& rng, int depth) {
    static const std::vector<std::string> atoms = {"a", "b", "c", "me", "i"};
    static const std::vector<std::string> vars = {"X", "Y", "Z"};
    static const std::vector<std::string> functors = {"f", "g", "wake"};
    const auto kind = rng() % (depth > 0 ? 4u : 3u);
    if (kind == 0) return logic::Term::atom(atoms[rng() % atoms.size()]);
    if (kind == 1) return logic::Term::variable(vars[rng() % vars.size()]);
    if (kind == 2) return logic::Term::number(static_cast<std::int64_t>(rng() % 3));
    std::vector<logic::Term> args;
    const std::size_t n = 1 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i) args.push_back(fuzz_term(rng, depth - 1));
    return logic::Term::compound(functors[rng() % functors.size()], std::move(args));
}

/// A callable pair: same or different functor and arity, sharing variables.
inline std::pair<logic::Term, logic::Term> fuzz_pair(std::mt19937_64& rng) {
    auto callable = [&]() {
        logic::Term t = fuzz_term(rng, 3);
        while (!t.is_callable()) t = fuzz_term(rng, 3);
        return t;
    };
    logic::Term a = callable();
    logic::Term b = (rng() % 3 == 0) ? a : callable();
    // Perturb a copy of `a` half of the time so that near-misses are common.
    if (rng() % 2 == 0 && a.is_compound()) {
        std::vector<logic::Term> args = a.args();
        args[rng() % args.size()] = fuzz_term(rng, 1);
        b = logic::Term::compound(a.name(), std::move(args));
    }
    return {a, b};
}

inline std::set<std::string> fuzz_universe() { return {"a", "b", "c", "me", "i", "f", "g", "wake"}; }

}  // namespace fixtures
