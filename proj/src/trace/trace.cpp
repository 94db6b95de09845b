#include "corgi/trace/trace.hpp"

#include "corgi/logic/builtins.hpp"
#include "corgi/logic/parser.hpp"
#include "corgi/logic/solve.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <random>
#include <sstream>

namespace corgi::trace {

using logic::Term;
using nlohmann::json;

SymbolTable::SymbolTable(const std::vector<std::string>& symbols) {
    for (const auto& s : symbols) add(s);
}

int SymbolTable::add(const std::string& symbol) {
    auto [it, inserted] = ids_.emplace(symbol, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(symbol);
    return it->second;
}

int SymbolTable::find(const std::string& symbol) const {
    auto it = ids_.find(symbol);
    return it == ids_.end() ? -1 : it->second;
}

int SymbolTable::at(const std::string& symbol) const {
    const int id = find(symbol);
    if (id < 0) throw CorpusError("unknown symbol '" + symbol + "'");
    return id;
}

const std::string& SymbolTable::name(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
        throw CorpusError("symbol id " + std::to_string(id) + " out of range");
    }
    return names_[static_cast<std::size_t>(id)];
}

std::uint64_t SymbolTable::hash() const {
    std::string joined;
    for (const auto& n : names_) {
        joined += n;
        joined += '\n';
    }
    return logic::fnv1a64(joined);
}

std::string symbol_of(const Term& arg) {
    if (arg.is_variable()) return arg.name()[0] == '_' ? "_" : arg.name();
    if (arg.is_number()) return logic::format_number(arg.value());
    if (arg.is_atom()) return arg.name();
    // Compound arguments are rare in this KB; keep their source text.
    return Term(arg).renamed(0).to_string();
}

namespace {

void collect_numbers(const Term& t, std::set<std::string>& out) {
    if (t.is_number()) out.insert(logic::format_number(t.value()));
    for (const auto& a : t.args()) collect_numbers(a, out);
}

struct Walk {
    const logic::KnowledgeBase& kb;
    SymbolTable& symbols;
    logic::Substitution acc;
    Trace out;

    std::vector<int> ids_for(const Term& goal, const logic::Substitution& s) {
        std::vector<int> ids;
        for (const auto& a : goal.args()) ids.push_back(symbols.add(symbol_of(s.resolve(a))));
        return ids;
    }

    void visit(const logic::ProofTree& n, int parent_rule, int left_sister) {
        TraceStep step;
        step.t = n.t;
        step.query_name = n.goal.name();
        step.parent_rule_id = parent_rule;
        step.left_sister_rule_id = left_sister;
        const logic::Substitution before = acc;
        for (const auto& [k, v] : n.bindings.bindings()) {
            if (!acc.is_bound(k)) acc.bind(k, v);
        }
        if (n.is_builtin_node()) {
            if (!n.children.empty()) throw InconsistentTree("builtin node with children at t=" + std::to_string(n.t));
        } else {
            const logic::Clause* c = kb.find(*n.clause_id);
            if (!c) throw InconsistentTree("unknown clause " + std::to_string(*n.clause_id));
            if (c->body.size() != n.children.size()) {
                throw InconsistentTree("node t=" + std::to_string(n.t) + " has " + std::to_string(n.children.size()) +
                                       " children, clause " + std::to_string(c->id) + " has " +
                                       std::to_string(c->body.size()) + " body goals");
            }
            step.target_rule_id = c->id;
            step.query_args = ids_for(n.goal, before);
            step.target_args = ids_for(n.goal, acc);
        }
        out.push_back(std::move(step));
        const int here = n.clause_id.value_or(-1);
        int sister = -1;
        for (const auto& child : n.children) {
            visit(child, here, sister);
            sister = child.clause_id.value_or(-1);
        }
    }
};

}  // namespace

SymbolTable symbols_for(const logic::KnowledgeBase& kb) {
    SymbolTable table;
    for (const auto& a : kb.atoms()) table.add(a);
    std::set<std::string> numbers;
    for (const auto& c : kb.clauses()) {
        collect_numbers(c.head, numbers);
        for (const auto& g : c.body) collect_numbers(g, numbers);
    }
    for (const auto& n : numbers) table.add(n);
    for (const auto& v : kb.variable_names()) table.add(v);
    table.add("_");
    return table;
}

Trace tree_to_trace(const logic::ProofTree& proof, const logic::KnowledgeBase& kb, SymbolTable& symbols) {
    Walk w{kb, symbols, {}, {}};
    w.visit(proof, -1, -1);
    for (std::size_t i = 0; i < w.out.size(); ++i) {
        if (w.out[i].t != static_cast<int>(i)) throw InconsistentTree("t indices are not in preorder");
    }
    if (!w.out.empty()) w.out.back().terminate = true;
    return w.out;
}

logic::SearchResult replay_trace(const logic::KnowledgeBase& kb, const Term& goal, const Trace& trace,
                                 logic::SearchLimits limits) {
    std::vector<int> choices;
    for (const auto& s : trace) choices.push_back(s.target_rule_id);
    return logic::solve_forced(kb, goal, choices, limits);
}

namespace {

bool type_compatible(const std::string& var_type, const std::string& atom_type) {
    if (atom_type == "thing") return false;
    if (var_type == atom_type) return true;
    return var_type.size() > atom_type.size() &&
           var_type.compare(var_type.size() - atom_type.size(), atom_type.size(), atom_type) == 0;
}

// Ground values a variable may take: atoms whose dictionary type fits the
// variable's name, plus whatever ground symbols sit at the same argument
// position of some head with the same predicate.
std::vector<Term> pool_for(const logic::KnowledgeBase& kb, const logic::PredicateKey& key, std::size_t pos,
                           const std::string& var_name) {
    std::set<Term> pool;
    const std::string vt = logic::variable_type(var_name);
    for (const auto& atom : kb.atoms()) {
        if (type_compatible(vt, kb.type_of(atom))) pool.insert(Term::atom(atom));
    }
    for (int id : kb.candidates(key)) {
        const Term& arg = kb.at(id).head.args()[pos];
        if (arg.is_ground() && !arg.is_compound()) pool.insert(arg);
    }
    return {pool.begin(), pool.end()};
}

}  // namespace

std::vector<Term> generate_queries(const logic::KnowledgeBase& kb, std::size_t count, std::uint64_t seed,
                                   logic::SearchLimits limits) {
    std::vector<Term> out;
    if (count == 0) return out;
    if (kb.empty()) throw GenerationExhausted("no clauses to draw queries from");
    std::mt19937_64 rng(seed);
    const std::size_t budget = 100 * count;
    for (std::size_t attempt = 0; attempt < budget && out.size() < count; ++attempt) {
        const logic::Clause& c = kb.clauses()[rng() % kb.size()];
        const Term& head = c.head;
        logic::Substitution s;
        for (std::size_t pos = 0; pos < head.arity(); ++pos) {
            const Term& arg = head.args()[pos];
            if (!arg.is_variable() || s.is_bound(arg.var_key())) continue;
            const bool free = (rng() & 1u) == 0;
            if (free) continue;
            const auto pool = pool_for(kb, logic::predicate_key(head), pos, arg.name());
            if (pool.empty()) continue;
            s.bind(arg.var_key(), pool[rng() % pool.size()]);
        }
        Term query = s.resolve(head);
        if (logic::is_builtin(query)) continue;
        const auto r = logic::solve(kb, query, limits);
        if (r.ok()) out.push_back(std::move(query));
    }
    if (out.size() < count) {
        throw GenerationExhausted("only " + std::to_string(out.size()) + " provable queries after " +
                                  std::to_string(budget) + " attempts");
    }
    return out;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json step_json(const TraceStep& s) {
    return json{{"t", s.t},
                {"query_name", s.query_name},
                {"query_args", s.query_args},
                {"parent_rule_id", s.parent_rule_id},
                {"left_sister_rule_id", s.left_sister_rule_id},
                {"target_rule_id", s.target_rule_id},
                {"target_args", s.target_args},
                {"terminate", s.terminate}};
}

TraceStep step_from(const json& j) {
    TraceStep s;
    s.t = j.at("t").get<int>();
    s.query_name = j.at("query_name").get<std::string>();
    s.query_args = j.at("query_args").get<std::vector<int>>();
    s.parent_rule_id = j.at("parent_rule_id").get<int>();
    s.left_sister_rule_id = j.at("left_sister_rule_id").get<int>();
    s.target_rule_id = j.at("target_rule_id").get<int>();
    s.target_args = j.at("target_args").get<std::vector<int>>();
    s.terminate = j.at("terminate").get<bool>();
    return s;
}

}  // namespace

std::string TraceCorpus::serialize() const {
    std::string out = json{{"kb_fingerprint", hex64(kb_fingerprint)}, {"symbol_table", symbols.symbols()}}.dump();
    out += '\n';
    for (std::size_t i = 0; i < traces.size(); ++i) {
        json steps = json::array();
        for (const auto& s : traces[i]) steps.push_back(step_json(s));
        out += json{{"query", i < queries.size() ? queries[i] : std::string()}, {"steps", steps}}.dump();
        out += '\n';
    }
    return out;
}

TraceCorpus TraceCorpus::parse(const std::string& text) {
    TraceCorpus c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            if (header) {
                c.kb_fingerprint = std::stoull(j.at("kb_fingerprint").get<std::string>(), nullptr, 16);
                c.symbols = SymbolTable(j.at("symbol_table").get<std::vector<std::string>>());
                header = false;
                continue;
            }
            Trace t;
            for (const auto& s : j.at("steps")) t.push_back(step_from(s));
            c.queries.push_back(j.value("query", std::string()));
            c.traces.push_back(std::move(t));
        } catch (const json::exception& e) {
            throw CorpusError("corpus line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (header) throw CorpusError("corpus has no header line");
    return c;
}

void TraceCorpus::validate(const logic::KnowledgeBase& kb) const {
    if (kb.fingerprint() != kb_fingerprint) throw CorpusError("corpus was generated for a different knowledge base");
    auto rule_ok = [&](int id) { return id == -1 || (kb.find(id) && kb.at(id).provenance == logic::Provenance::builtin); };
    auto sym_ok = [&](int id) { return id >= 0 && static_cast<std::size_t>(id) < symbols.size(); };
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const Trace& tr = traces[i];
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const TraceStep& s = tr[k];
            const std::string where = "trace " + std::to_string(i) + " step " + std::to_string(k);
            if (!rule_ok(s.target_rule_id) || !rule_ok(s.parent_rule_id) || !rule_ok(s.left_sister_rule_id)) {
                throw CorpusError(where + ": rule id out of range");
            }
            for (int a : s.query_args) {
                if (!sym_ok(a)) throw CorpusError(where + ": symbol id out of range");
            }
            for (int a : s.target_args) {
                if (!sym_ok(a)) throw CorpusError(where + ": symbol id out of range");
            }
            if (s.t != static_cast<int>(k)) throw CorpusError(where + ": t out of order");
            if (s.terminate != (k + 1 == tr.size())) throw CorpusError(where + ": terminate flag misplaced");
        }
    }
}

TraceCorpus build_corpus(const logic::KnowledgeBase& kb, std::size_t count, std::uint64_t seed,
                         logic::SearchLimits limits) {
    TraceCorpus c;
    c.kb_fingerprint = kb.fingerprint();
    c.symbols = symbols_for(kb);
    for (const auto& q : generate_queries(kb, count, seed, limits)) {
        const auto r = logic::solve(kb, q, limits);
        c.queries.push_back(q.to_string());
        c.traces.push_back(tree_to_trace(*r.proof, kb, c.symbols));
    }
    return c;
}

}  // namespace corgi::trace
