#pragma once

// Test-only reference implementations. Nothing here calls into the
// resolution engine; the fixpoint works on plain strings and tuples.

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(CORGI_DATA_DIR) + "/" + name; }

/// A literal over constants and variables. Variables start uppercase.
struct Atom {
    std::string pred;
    std::vector<std::string> args;
};

struct Rule {
    Atom head;
    std::vector<Atom> body;
};

struct Program {
    std::vector<Rule> rules;  // facts have empty bodies
    std::vector<std::string> constants;
    std::map<std::string, std::size_t> arities;

    std::string text() const {
        std::string out;
        auto lit = [](const Atom& a) {
            std::string s = a.pred + "(";
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                if (i) s += ", ";
                s += a.args[i];
            }
            return s + ")";
        };
        for (const auto& r : rules) {
            out += lit(r.head);
            for (std::size_t i = 0; i < r.body.size(); ++i) {
                out += i ? ", " : " :- ";
                out += lit(r.body[i]);
            }
            out += ".\n";
        }
        return out;
    }
};

inline bool is_var(const std::string& s) { return !s.empty() && (std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_'); }

using Fact = std::pair<std::string, std::vector<std::string>>;

/// Least fixpoint of ground consequences by naive bottom-up evaluation:
/// every rule is instantiated with every assignment of its variables.
inline std::set<Fact> fixpoint(const Program& p) {
    std::set<Fact> facts;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : p.rules) {
            std::vector<std::string> vars;
            auto note = [&](const Atom& a) {
                for (const auto& x : a.args) {
                    if (is_var(x) && std::find(vars.begin(), vars.end(), x) == vars.end()) vars.push_back(x);
                }
            };
            note(r.head);
            for (const auto& b : r.body) note(b);
            std::vector<std::size_t> idx(vars.size(), 0);
            const std::size_t nc = p.constants.size();
            while (true) {
                std::map<std::string, std::string> env;
                for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = p.constants[idx[i]];
                auto ground = [&](const Atom& a) {
                    Fact f{a.pred, {}};
                    for (const auto& x : a.args) f.second.push_back(is_var(x) ? env[x] : x);
                    return f;
                };
                bool body_ok = true;
                for (const auto& b : r.body) {
                    if (!facts.count(ground(b))) {
                        body_ok = false;
                        break;
                    }
                }
                if (body_ok && facts.insert(ground(r.head)).second) changed = true;
                std::size_t k = 0;
                while (k < idx.size() && ++idx[k] == nc) idx[k++] = 0;
                if (k == idx.size()) break;
            }
        }
    }
    return facts;
}

/// All ground atoms over the program's predicates and constants.
inline std::vector<Fact> ground_queries(const Program& p) {
    std::vector<Fact> out;
    for (const auto& [pred, arity] : p.arities) {
        std::vector<std::size_t> idx(arity, 0);
        while (true) {
            Fact f{pred, {}};
            for (auto i : idx) f.second.push_back(p.constants[i]);
            out.push_back(f);
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == p.constants.size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    return out;
}

inline std::string fact_text(const Fact& f) {
    std::string s = f.first + "(";
    for (std::size_t i = 0; i < f.second.size(); ++i) {
        if (i) s += ", ";
        s += f.second[i];
    }
    return s + ")";
}

/// Random stratified, range-restricted program: <= max_clauses clauses,
/// arity <= 3, predicates arranged in up to `levels` strata so derivations
/// stay within depth `levels`.
inline Program random_program(std::mt19937& rng, std::size_t max_clauses = 12, int levels = 6) {
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    Program p;
    p.constants = {"a", "b", "c"};
    const int nlevels = 1 + static_cast<int>(pick(static_cast<std::size_t>(levels)));
    std::vector<std::vector<std::string>> strata(static_cast<std::size_t>(nlevels));
    int counter = 0;
    for (int l = 0; l < nlevels; ++l) {
        const std::size_t n = 1 + pick(2);
        for (std::size_t k = 0; k < n; ++k) {
            std::string name = "p" + std::to_string(counter++);
            p.arities[name] = 1 + pick(3);
            strata[static_cast<std::size_t>(l)].push_back(name);
        }
    }
    const std::vector<std::string> pool = {"X", "Y", "Z", "W"};
    const std::size_t nclauses = 1 + pick(max_clauses);
    for (std::size_t c = 0; c < nclauses; ++c) {
        const std::size_t level = pick(strata.size());
        const std::string& pred = strata[level][pick(strata[level].size())];
        Rule r;
        r.head.pred = pred;
        if (level == 0 || pick(4) == 0) {
            for (std::size_t i = 0; i < p.arities[pred]; ++i) r.head.args.push_back(p.constants[pick(3)]);
        } else {
            const std::size_t nbody = 1 + pick(2);
            std::vector<std::string> bound;
            for (std::size_t b = 0; b < nbody; ++b) {
                const std::size_t bl = pick(level);
                const std::string& bp = strata[bl][pick(strata[bl].size())];
                Atom a{bp, {}};
                for (std::size_t i = 0; i < p.arities[bp]; ++i) {
                    if (pick(4) == 0) {
                        a.args.push_back(p.constants[pick(3)]);
                    } else {
                        a.args.push_back(pool[pick(pool.size())]);
                        bound.push_back(a.args.back());
                    }
                }
                r.body.push_back(a);
            }
            for (std::size_t i = 0; i < p.arities[pred]; ++i) {
                if (!bound.empty() && pick(3) != 0) {
                    r.head.args.push_back(bound[pick(bound.size())]);
                } else {
                    r.head.args.push_back(p.constants[pick(3)]);
                }
            }
        }
        p.rules.push_back(r);
    }
    return p;
}

}  // namespace oracle
