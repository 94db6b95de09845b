#include "corgi/logic/solve.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace corgi;
using logic::parse_term;

namespace {

std::string leaf_text(const prover::SoftProofResult& r, std::size_t i) {
    return r.bindings.resolve(r.proof->leaves()[i]->goal).to_string();
}

}  // namespace

TEST_CASE("soft unify basics") {
    const auto view = fixtures::one_hot_view({"a", "b", "status", "i", "dry", "tuesday"});
    auto same = prover::soft_unify(parse_term("status(i, dry, tuesday)"), parse_term("status(i, dry, tuesday)"), view, 1.0);
    REQUIRE(same);
    CHECK_FALSE(same->soft);
    CHECK_FALSE(prover::soft_unify(parse_term("f(a, b)"), parse_term("f(a, b, c)"), view, 0.5));
    auto bound = prover::soft_unify(parse_term("status(i, dry, tuesday)"), parse_term("status(Person1, dry, Date1)"), view, 0.9);
    REQUIRE(bound);
    CHECK(bound->bindings.resolve(parse_term("Person1")) == parse_term("i"));
    CHECK_FALSE(prover::soft_unify(parse_term("p(a)"), parse_term("p(b)"), view, 0.9));
    CHECK(prover::soft_unify(parse_term("p(3)"), parse_term("p(3)"), view, 0.9));
    CHECK_FALSE(prover::soft_unify(parse_term("p(3)"), parse_term("p(4)"), view, 0.9));
    CHECK_FALSE(prover::soft_unify(parse_term("p(3)"), parse_term("p(a)"), view, 0.9));
    CHECK_THROWS_AS(prover::soft_unify(parse_term("p(zzz)"), parse_term("p(a)"), view, 0.9), prover::UnknownSymbol);
    // Functors without rows just fail to match.
    CHECK_FALSE(prover::soft_unify(parse_term("p(a)"), parse_term("q(a)"), view, 0.9));
}

TEST_CASE("wake and awake match when embedded alike") {
    nn::Vec person(3), early(3), verb(3);
    person << 1, 0, 0;
    early << 0, 1, 0;
    verb << 0, 0, 1;
    prover::EmbeddingView alike;
    alike.set("me", person);
    alike.set("i", person);
    alike.set("early_morning", early);
    alike.set("wake", verb);
    alike.set("awake", verb);
    auto m = prover::soft_unify(parse_term("wake(me, early_morning)"), parse_term("awake(i, early_morning)"), alike, 0.9);
    REQUIRE(m);
    CHECK(m->soft);
    CHECK(m->matched.size() == 2);

    const auto apart = fixtures::one_hot_view({"me", "i", "early_morning", "wake", "awake"});
    CHECK_FALSE(prover::soft_unify(parse_term("wake(me, early_morning)"), parse_term("awake(i, early_morning)"), apart, 0.9));
}

TEST_CASE("one-hot soft unification reduces to exact unification") {
    const auto view = fixtures::one_hot_view(fixtures::fuzz_universe());
    std::mt19937_64 rng(5);
    int agree = 0, successes = 0;
    for (int i = 0; i < 2000; ++i) {
        auto [a, b] = fixtures::fuzz_pair(rng);
        const auto exact = logic::unify(a, b);
        const auto soft = prover::soft_unify(a, b, view, 0.99);
        if (exact.has_value() == soft.has_value()) ++agree;
        if (exact && soft) {
            ++successes;
            CHECK(soft->bindings.resolve(a) == exact->resolve(a));
        }
    }
    CHECK(agree == 2000);
    CHECK(successes > 200);
}

TEST_CASE("status proof under oracle embeddings") {
    auto kb = fixtures::load_kb("table6.pl");
    auto model = fixtures::model_for(kb, fixtures::tiny_model(4));
    const auto goal = parse_term("status(i, dry, tuesday)");
    const auto view = fixtures::one_hot_view(fixtures::kb_symbols(kb, {goal}));
    prover::SoftProveConfig cfg;
    cfg.k = model.n1();
    auto r = prover::soft_prove(kb, model, goal, cfg, view);
    REQUIRE(r.ok());
    CHECK(r.proof->node_count() == 3);
    CHECK(r.proof->clause_id == 1);
    CHECK(leaf_text(r, 0) == "isInside(i, home, tuesday)");
    CHECK(leaf_text(r, 1) == "building(home)");
    CHECK(r.rule_choices.size() == 3);
    CHECK(r.termination.size() == 3);
    for (double c : r.termination) CHECK((c >= 0.0 && c <= 1.0));
    CHECK(prover::soft_replays(*r.proof, kb, r.bindings, view, cfg.T1));

    auto oracle = prover::oracle_prove(kb, goal);
    REQUIRE(oracle.ok());
    CHECK(logic::isomorphic(*oracle.proof, *r.proof));
}

TEST_CASE("trained model finds the status proof with k = 5") {
    auto kb = fixtures::load_kb("table6.pl");
    auto corpus = trace::build_corpus(kb, 60, 2);
    nn::NeuralProverModel model(fixtures::tiny_model(8), static_cast<int>(kb.builtin_count()), corpus.symbols,
                                kb.fingerprint());
    nn::TrainConfig tc;
    tc.epochs = 150;
    tc.learning_rate = 0.1;
    nn::train(model, corpus.traces, tc);
    auto r = prover::soft_prove(kb, model, parse_term("status(i, dry, tuesday)"), prover::SoftProveConfig{});
    REQUIRE(r.ok());
    CHECK(r.proof->clause_id == 1);
    CHECK(r.proof->node_count() == 3);
}

TEST_CASE("absent predicate fails") {
    auto kb = fixtures::load_kb("table6.pl");
    auto model = fixtures::model_for(kb, fixtures::tiny_model(4));
    const auto goal = parse_term("isAfter(wednesday, thursday)");
    auto r = prover::soft_prove(kb, model, goal, prover::SoftProveConfig{});
    CHECK(r.outcome == logic::SearchOutcome::exhausted);
    CHECK_FALSE(prover::oracle_prove(kb, goal).ok());
}

TEST_CASE("model and config guards") {
    auto kb = fixtures::load_kb("table6.pl");
    auto other = fixtures::load_kb("commute_demo.pl");
    auto model = fixtures::model_for(kb, fixtures::tiny_model(4));
    CHECK_THROWS_AS(prover::soft_prove(other, model, parse_term("get(i, work, on_time)"), prover::SoftProveConfig{}),
                    prover::ModelMismatch);
    prover::SoftProveConfig bad;
    bad.k = 0;
    CHECK_THROWS_AS(bad.validate(8), nn::ConfigError);
    bad.k = 9;
    CHECK_THROWS_AS(bad.validate(8), nn::ConfigError);
    bad = {};
    bad.T1 = 0;
    CHECK_THROWS_AS(bad.validate(8), nn::ConfigError);
    bad = {};
    bad.T2 = 1;
    CHECK_THROWS_AS(bad.validate(8), nn::ConfigError);
    CHECK_NOTHROW(prover::SoftProveConfig{}.validate(8));
}

TEST_CASE("commute goal under the oracle prover") {
    auto kb = fixtures::load_kb("commute_demo.pl");
    auto r = prover::oracle_prove(kb, parse_term("get(i, work, on_time)"));
    REQUIRE(r.ok());
    CHECK(r.proof->node_count() == 15);
    std::vector<std::string> leaves;
    for (std::size_t i = 0; i < r.proof->leaves().size(); ++i) leaves.push_back(leaf_text(r, i));
    for (const char* want : {"alarm(i, 8)", "commute(i, home, work, car, 1)", "calendarEntry(i, work, 9)"}) {
        CHECK(std::find(leaves.begin(), leaves.end(), want) != leaves.end());
    }
}

TEST_CASE("soft search with T1 = 1 matches exact search in model order") {
    std::mt19937 rng(77);
    int provable = 0;
    for (int round = 0; round < 20; ++round) {
        const auto prog = oracle::random_program(rng);
        const auto kb = logic::parse_program(prog.text());
        auto model = fixtures::model_for(kb, fixtures::tiny_model(static_cast<std::uint64_t>(round)));
        const auto queries = oracle::ground_queries(prog);
        std::vector<logic::Term> goals;
        for (const auto& q : queries) goals.push_back(parse_term(oracle::fact_text(q)));
        const auto view = fixtures::one_hot_view(fixtures::kb_symbols(kb, goals));
        prover::SoftProveConfig cfg;
        cfg.T1 = 1.0;
        cfg.k = std::min(3, model.n1());
        for (const auto& goal : goals) {
            const auto soft = prover::soft_prove(kb, model, goal, cfg, view, false);
            const auto exact = prover::soft_prove(kb, model, goal, cfg, view, true);
            REQUIRE(soft.outcome == exact.outcome);
            CHECK(soft.rule_choices == exact.rule_choices);
            CHECK(soft.bindings == exact.bindings);
            if (soft.ok()) {
                ++provable;
                CHECK(logic::isomorphic(*soft.proof, *exact.proof));
                CHECK(logic::solve(kb, goal).ok());
            }
        }
    }
    CHECK(provable > 0);
}

TEST_CASE("success sets grow with k and stay inside the oracle's") {
    std::mt19937 rng(123);
    for (int round = 0; round < 20; ++round) {
        const auto prog = oracle::random_program(rng);
        const auto kb = logic::parse_program(prog.text());
        auto model = fixtures::model_for(kb, fixtures::tiny_model(static_cast<std::uint64_t>(round + 50)));
        std::vector<logic::Term> goals;
        for (const auto& q : oracle::ground_queries(prog)) goals.push_back(parse_term(oracle::fact_text(q)));
        const auto view = fixtures::one_hot_view(fixtures::kb_symbols(kb, goals));
        prover::SoftProveConfig k1, k5;
        k1.k = 1;
        k5.k = std::min(5, model.n1());
        k1.T1 = k5.T1 = 0.99;
        for (const auto& goal : goals) {
            const auto one = prover::soft_prove(kb, model, goal, k1, view);
            const auto five = prover::soft_prove(kb, model, goal, k5, view);
            if (one.ok()) CHECK(five.ok());
            if (five.ok()) CHECK(prover::oracle_prove(kb, goal).ok());
        }
    }
}

TEST_CASE("recorded choices replay to the same proof") {
    auto kb = fixtures::load_kb("commute_demo.pl");
    auto model = fixtures::model_for(kb, fixtures::tiny_model(6));
    const auto goal = parse_term("get(i, work, on_time)");
    const auto view = fixtures::one_hot_view(fixtures::kb_symbols(kb, {goal}));
    prover::SoftProveConfig cfg;
    cfg.k = model.n1();
    auto r = prover::soft_prove(kb, model, goal, cfg, view);
    REQUIRE(r.ok());
    CHECK(r.proof->node_count() == 15);
    auto again = prover::replay_choices(kb, goal, r, view, cfg.T1);
    REQUIRE(again.ok());
    // Failed attempts consume fresh variable ids, so compare resolved terms.
    CHECK(again.bindings.resolve(goal) == r.bindings.resolve(goal));
    CHECK(again.rule_choices == r.rule_choices);
    CHECK(logic::isomorphic(*again.proof, *r.proof));
}

TEST_CASE("soft matches widen the search") {
    auto kb = logic::parse_program("awake(i, early_morning).\nalarm(i, 8).\n");
    auto model = fixtures::model_for(kb, fixtures::tiny_model(2));
    nn::Vec person(3), early(3), verb(3);
    person << 1, 0, 0;
    early << 0, 1, 0;
    verb << 0, 0, 1;
    prover::EmbeddingView view;
    view.set("me", person);
    view.set("i", person);
    view.set("early_morning", early);
    view.set("wake", verb);
    view.set("awake", verb);
    nn::Vec other(3);
    other << 0.5, 0.5, 0.7;
    view.set("alarm", other);
    view.set("8", other);
    prover::SoftProveConfig cfg;
    cfg.k = 2;
    auto r = prover::soft_prove(kb, model, parse_term("wake(me, early_morning)"), cfg, view);
    REQUIRE(r.ok());
    CHECK(r.used_soft_match[0]);
    CHECK(r.proof->clause_id == 0);
    CHECK(prover::soft_replays(*r.proof, kb, r.bindings, view, cfg.T1));
    CHECK_FALSE(logic::solve(kb, parse_term("wake(me, early_morning)")).ok());
}

TEST_CASE("session clauses are offered after the model's picks") {
    auto kb = fixtures::load_kb("table6.pl");
    auto model = fixtures::model_for(kb, fixtures::tiny_model(4));
    auto session = kb;
    session.add_clause(parse_term("status(i, dry, friday)"), {}, logic::Provenance::user_session);
    const auto goal = parse_term("status(i, dry, friday)");
    prover::SoftProveConfig cfg;
    cfg.k = 1;
    auto r = prover::soft_prove(session, model, goal, cfg);
    REQUIRE(r.ok());
    CHECK(r.proof->clause_id == 8);
    CHECK(r.rule_choices[0].rank >= 1);
}
