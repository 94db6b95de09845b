#include "corgi/logic/builtins.hpp"
#include "corgi/logic/errors.hpp"
#include "corgi/logic/parser.hpp"
#include "corgi/logic/solve.hpp"
#include "doctest.h"
#include "oracles.hpp"

#include <random>

using namespace corgi::logic;

namespace {

KnowledgeBase load(const std::string& file) { return parse_program(oracle::read_file(oracle::data_path(file))); }

Term T(const std::string& text) { return parse_term(text); }

std::vector<std::string> resolved_leaves(const SearchResult& r) {
    std::vector<std::string> out;
    for (const auto* n : r.proof->leaves()) out.push_back(r.bindings.resolve(n->goal).to_string());
    return out;
}

}  // namespace

TEST_CASE("parse single fact") {
    auto kb = parse_program("isBefore(monday, tuesday).");
    REQUIRE(kb.size() == 1);
    CHECK(kb.clauses()[0].is_fact());
    CHECK(kb.clauses()[0].id == 0);
    CHECK(kb.has_predicate({"isBefore", 2}));
}

TEST_CASE("parse rule with two body goals") {
    auto kb = parse_program(
        "status(Person1, dry, Date1) :- isInside(Person1, Building1, Date1), building(Building1).");
    REQUIRE(kb.size() == 1);
    CHECK(kb.clauses()[0].body.size() == 2);
    CHECK(kb.clauses()[0].head.to_string() == "status(Person1, dry, Date1)");
}

TEST_CASE("empty program and comments") {
    CHECK(parse_program("").empty());
    CHECK(parse_program("% only a comment\n\n").empty());
}

TEST_CASE("syntax errors carry line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            parse_program(text);
        } catch (const SyntaxError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("a.\nb(c") == 2);
    CHECK(line_of("a.\n\nb(c, d :- e.") == 3);
    CHECK(line_of("f(X)) .") == 1);
    CHECK(line_of("p(1abc).") == 1);
    CHECK(line_of("p(a)\nq(b).") >= 1);
    CHECK_THROWS_AS(parse_program("p(a) :- q(b)"), SyntaxError);
    CHECK_THROWS_AS(parse_program("p()."), SyntaxError);
}

TEST_CASE("sample program loads in program order") {
    auto kb = load("table6.pl");
    REQUIRE(kb.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(kb.clauses()[static_cast<std::size_t>(i)].id == i);
    CHECK(kb.candidates({"status", 3}) == std::vector<int>{1, 2});
    CHECK(kb.index_consistent());
}

TEST_CASE("variable type from name") {
    CHECK(variable_type("Person1") == "person");
    CHECK(variable_type("Date12") == "date");
    CHECK(variable_type("ToPlace") == "toplace");
    CHECK(T("Person1").is_variable());
    CHECK(T("monday").is_atom());
}

TEST_CASE("unify examples") {
    auto s = unify(T("status(i, dry, tuesday)"), T("status(Person1, dry, Date1)"));
    REQUIRE(s);
    CHECK(s->resolve(T("Person1")) == T("i"));
    CHECK(s->resolve(T("Date1")) == T("tuesday"));
    CHECK(s->size() == 2);

    auto same = unify(T("a"), T("a"));
    REQUIRE(same);
    CHECK(same->empty());

    CHECK_FALSE(unify(T("f(X)"), T("g(X)")));
    CHECK_FALSE(unify(T("f(X)"), T("f(X, Y)")));
}

TEST_CASE("variable aliasing leaves both unbound to ground") {
    auto s = unify(T("f(X)"), T("f(Y)"));
    REQUIRE(s);
    CHECK_FALSE(s->resolve(T("X")).is_ground());
    CHECK(s->resolve(T("X")) == s->resolve(T("Y")));
}

TEST_CASE("occurs check") {
    CHECK_FALSE(unify(T("X"), T("f(X)")));
    CHECK_FALSE(unify(T("f(X, Y)"), T("f(Y, g(X))")));
}

TEST_CASE("apply_substitution") {
    Substitution s;
    s.bind({"Person", 0}, T("i"));
    s.bind({"ToPlace", 0}, T("work"));
    CHECK(apply_substitution(T("get(Person, ToPlace, on_time)"), s).to_string() == "get(i, work, on_time)");
    CHECK(apply_substitution(T("X"), Substitution{}) == T("X"));

    Substitution chain;
    chain.bind({"X", 0}, T("g(Y)"));
    chain.bind({"Y", 0}, T("a"));
    const Term once = apply_substitution(T("f(X)"), chain);
    CHECK(once.to_string() == "f(g(a))");
    CHECK(apply_substitution(once, chain) == once);
}

namespace {

// Random terms over a small universe, sharing variables across sides.
Term random_term(std::mt19937& rng, int depth) {
    static const std::vector<std::string> atoms = {"a", "b", "c"};
    static const std::vector<std::string> vars = {"X", "Y", "Z"};
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 3 : 2);
    switch (kind(rng)) {
        case 0:
            return Term::atom(atoms[rng() % atoms.size()]);
        case 1:
            return Term::variable(vars[rng() % vars.size()]);
        case 2:
            return Term::number(static_cast<std::int64_t>(rng() % 3));
        default: {
            std::vector<Term> args;
            const std::size_t n = 1 + rng() % 2;
            for (std::size_t i = 0; i < n; ++i) args.push_back(random_term(rng, depth - 1));
            return Term::compound(rng() % 2 ? "f" : "g", std::move(args));
        }
    }
}

}  // namespace

TEST_CASE("unification is symmetric and yields a unifier") {
    std::mt19937 rng(11);
    int successes = 0;
    for (int i = 0; i < 3000; ++i) {
        const Term a = random_term(rng, 3);
        const Term b = random_term(rng, 3);
        auto ab = unify(a, b);
        auto ba = unify(b, a);
        REQUIRE(ab.has_value() == ba.has_value());
        if (!ab) continue;
        ++successes;
        // Both unifiers make the terms identical.
        CHECK(ab->resolve(a) == ab->resolve(b));
        CHECK(ba->resolve(a) == ba->resolve(b));
        // Equal up to variable orientation: each one's image is an instance of the other's.
        CHECK(unify(ab->resolve(a), ba->resolve(a)).has_value());
        // Idempotent application.
        CHECK(ab->resolve(ab->resolve(a)) == ab->resolve(a));
        // No variable is bound to a term that still contains it.
        for (const auto& [k, v] : ab->bindings()) CHECK_FALSE(ab->resolve(v).contains_variable(k));
    }
    CHECK(successes > 100);
}

TEST_CASE("arithmetic builtins") {
    Substitution s;
    s.bind({"Time", 0}, Term::number(8));
    s.bind({"PrepTime", 0}, Term::number(1));
    auto r = eval_builtin(T("LeaveAt = Time + PrepTime"), s);
    REQUIRE(r);
    CHECK(r->resolve(T("LeaveAt")) == Term::number(9));

    Substitution p;
    p.bind({"Precipitation", 0}, Term::number(3));
    CHECK(eval_builtin(T("Precipitation >= 2"), p).has_value());
    CHECK_FALSE(eval_builtin(T("Precipitation < 2"), p).has_value());
    CHECK_THROWS_AS(eval_builtin(T("Precipitation >= 2"), Substitution{}), InstantiationError);
    CHECK_THROWS_AS(eval_builtin(T("X = a + 1"), Substitution{}), TypeError);
}

TEST_CASE("rational arithmetic and structural equality") {
    auto r = eval_builtin(T("X = 1 / 3 + 1 / 6"), {});
    REQUIRE(r);
    CHECK(r->resolve(T("X")).to_string() == "1/2");
    CHECK(eval_builtin(T("0.1 + 0.2 == 0.3"), {}).has_value());
    CHECK(eval_builtin(T("2 * 3 - 1 =< 5"), {}).has_value());
    CHECK(eval_builtin(T("f(a) == f(a)"), {}).has_value());
    CHECK_FALSE(eval_builtin(T("f(a) == f(b)"), {}).has_value());
    CHECK(eval_builtin(T("X = -1"), {})->resolve(T("X")) == Term::number(-1));
}

TEST_CASE("solve reproduces the status proof") {
    auto kb = load("table6.pl");
    auto r = solve(kb, T("status(i, dry, tuesday)"));
    REQUIRE(r.ok());
    const ProofTree& p = *r.proof;
    CHECK(p.node_count() == 3);
    CHECK(p.clause_id == 1);
    REQUIRE(p.children.size() == 2);
    CHECK(kb.at(*p.children[0].clause_id).head.to_string() == "isInside(i, home, tuesday)");
    CHECK(kb.at(*p.children[1].clause_id).head.to_string() == "building(home)");
    CHECK(resolved_leaves(r) == std::vector<std::string>{"isInside(i, home, tuesday)", "building(home)"});
    CHECK(has_preorder_indices(p));
    CHECK(replays(p, kb, r.bindings));
    const std::string text = render_proof(p, r.bindings);
    CHECK(text ==
          "t=0  status(i, dry, tuesday)  [clause 1]\n"
          "  t=1  isInside(i, home, tuesday)  [clause 6]\n"
          "  t=2  building(home)  [clause 7]\n");
}

TEST_CASE("facts and failures on the sample program") {
    auto kb = load("table6.pl");
    auto fact = solve(kb, T("isBefore(monday, tuesday)"));
    REQUIRE(fact.ok());
    CHECK(fact.proof->node_count() == 1);
    CHECK(fact.proof->clause_id == 4);

    CHECK(solve(kb, T("status(i, dry, wednesday)")).outcome == SearchOutcome::exhausted);
    CHECK(solve(kb, T("isAfter(wednesday, thursday)")).outcome == SearchOutcome::exhausted);
}

TEST_CASE("wednesday query agrees with the fixpoint of the sample program") {
    // The same eight clauses written for the ground oracle. Row 3 needs
    // predicates with no facts, so it contributes nothing.
    oracle::Program p;
    p.constants = {"i", "dry", "tuesday", "wednesday", "monday", "home", "house", "window", "umbrella", "corgi"};
    p.rules = {
        {{"isEarlierThan", {"T1", "T2"}}, {{"isBefore", {"T1", "T3"}}, {"isEarlierThan", {"T3", "T2"}}}},
        {{"status", {"P", "dry", "D"}}, {{"isInside", {"P", "B", "D"}}, {"building", {"B"}}}},
        {{"status", {"P", "dry", "D"}},
         {{"weatherBad", {"D", "W"}}, {"carry", {"P", "umbrella", "D"}}, {"isOutside", {"P", "D"}}}},
        {{"notify", {"P", "corgi", "A"}}, {{"email", {"P", "A"}}}},
        {{"isBefore", {"monday", "tuesday"}}, {}},
        {{"has", {"house", "window"}}, {}},
        {{"isInside", {"i", "home", "tuesday"}}, {}},
        {{"building", {"home"}}, {}},
    };
    const auto facts = oracle::fixpoint(p);
    CHECK(facts.count({"status", {"i", "dry", "tuesday"}}) == 1);
    CHECK(facts.count({"status", {"i", "dry", "wednesday"}}) == 0);
    auto kb = load("table6.pl");
    CHECK(solve(kb, T("status(i, dry, wednesday)")).ok() == false);
}

TEST_CASE("commute demo proof has fifteen nodes") {
    auto kb = load("commute_demo.pl");
    auto r = solve(kb, T("get(i, work, on_time)"));
    REQUIRE(r.ok());
    CHECK(r.proof->node_count() == 15);
    CHECK(has_preorder_indices(*r.proof));
    CHECK(replays(*r.proof, kb, r.bindings));
    const auto leaves = resolved_leaves(r);
    auto has = [&](const std::string& s) { return std::find(leaves.begin(), leaves.end(), s) != leaves.end(); };
    CHECK(has("alarm(i, 8)"));
    CHECK(has("commute(i, home, work, car, 1)"));
    CHECK(has("calendarEntry(i, work, 9)"));
    CHECK(has("3 >= 2"));
    // Indices of the labelled nodes.
    const ProofTree* t10 = r.proof->find(10);
    REQUIRE(t10);
    CHECK(t10->goal.to_string() == "Precipitation >= 2");
    CHECK(r.bindings.resolve(r.proof->find(14)->goal).to_string() == "calendarEntry(i, work, 9)");
    CHECK(r.bindings.resolve(r.proof->find(4)->goal).to_string() == "alarm(i, 8)");
    CHECK(r.bindings.resolve(r.proof->find(7)->goal).to_string() == "commute(i, home, work, car, 1)");
}

TEST_CASE("left recursion stops at the depth limit") {
    auto kb = parse_program("loop(X) :- loop(X).\n");
    auto r = solve(kb, T("loop(a)"), SearchLimits{8, 100000});
    CHECK(r.outcome == SearchOutcome::limit);
    auto steps = solve(parse_program("p(X) :- p(X).\np(X) :- p(X).\n"), T("p(a)"), SearchLimits{30, 500});
    CHECK(steps.outcome == SearchOutcome::limit);
    CHECK(steps.steps <= 501);
}

TEST_CASE("recursive earlier-than chain") {
    auto kb = load("table6.pl");
    add_program(kb, "isEarlierThan(T, T2) :- isBefore(T, T2).\nisBefore(tuesday, wednesday).\n",
                Provenance::user_session);
    auto r = solve(kb, T("isEarlierThan(monday, wednesday)"));
    REQUIRE(r.ok());
    CHECK(has_preorder_indices(*r.proof));
    CHECK(replays(*r.proof, kb, r.bindings));
}

TEST_CASE("forced choices rebuild the same tree") {
    auto kb = load("commute_demo.pl");
    auto r = solve(kb, T("get(i, work, on_time)"));
    REQUIRE(r.ok());
    std::vector<int> choices;
    for (const auto& n : r.nodes) choices.push_back(n.clause_id.value_or(-1));
    auto again = solve_forced(kb, T("get(i, work, on_time)"), choices);
    REQUIRE(again.ok());
    CHECK(isomorphic(*again.proof, *r.proof));
}

TEST_CASE("knowledge base ids and index") {
    auto kb = load("table6.pl");
    const int added = kb.add_clause(T("building(office)"), {}, Provenance::user_session);
    CHECK(added == 8);
    CHECK(kb.index_consistent());
    CHECK(kb.remove_clause(added));
    CHECK_FALSE(kb.remove_clause(added));
    CHECK(kb.index_consistent());
    CHECK(kb.add_clause(T("building(office)"), {}) == 9);
    CHECK(kb.remove_clause(3));
    CHECK(kb.index_consistent());
    CHECK(kb.candidates({"notify", 3}).empty());
    CHECK(kb.builtin_count() == 8);
}

TEST_CASE("fingerprint ignores session clauses") {
    auto kb = load("table6.pl");
    const auto before = kb.fingerprint();
    kb.add_clause(T("building(office)"), {}, Provenance::user_session);
    CHECK(kb.fingerprint() == before);
    kb.add_clause(T("building(shed)"), {});
    CHECK(kb.fingerprint() != before);
}

TEST_CASE("directives and types") {
    auto kb = load("commute_demo.pl");
    CHECK(kb.is_user_state({"calendarEntry", 3}));
    CHECK_FALSE(kb.is_user_state({"alarm", 2}));
    const Clause& alarm = kb.at(kb.candidates({"alarm", 2}).front());
    CHECK(alarm.domain == "restricted");
    CHECK(kb.at(0).domain == "everyday");
    kb.load_types(oracle::read_file(oracle::data_path("types.tsv")));
    CHECK(kb.type_of("work") == "place");
    CHECK(kb.type_of("zebra") == "thing");
    CHECK_THROWS_AS(kb.load_types("no tab here\n"), SyntaxError);
}

TEST_CASE("solve agrees with the ground fixpoint on random programs") {
    std::mt19937 rng(2024);
    for (int round = 0; round < 40; ++round) {
        const auto prog = oracle::random_program(rng);
        const auto facts = oracle::fixpoint(prog);
        const auto kb = parse_program(prog.text());
        for (const auto& q : oracle::ground_queries(prog)) {
            const auto r = solve(kb, parse_term(oracle::fact_text(q)));
            REQUIRE(r.outcome != SearchOutcome::limit);
            INFO(prog.text() << "query " << oracle::fact_text(q));
            CHECK(r.ok() == (facts.count(q) > 0));
            if (r.ok()) {
                CHECK(has_preorder_indices(*r.proof));
                CHECK(replays(*r.proof, kb, r.bindings));
            }
        }
    }
}
