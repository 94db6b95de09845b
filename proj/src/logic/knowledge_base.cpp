#include "corgi/logic/knowledge_base.hpp"

#include "corgi/logic/errors.hpp"

#include <algorithm>
#include <sstream>

namespace corgi::logic {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::builtin:
            return "builtin";
        case Provenance::user_session:
            return "user-session";
        case Provenance::hypothesis:
            return "hypothesis";
    }
    return "unknown";
}

std::string Clause::to_string() const {
    std::string out = head.to_string();
    if (!body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (i) out += ", ";
            out += body[i].to_string();
        }
    }
    out += '.';
    return out;
}

PredicateKey predicate_key(const Term& callable) { return {callable.name(), callable.arity()}; }

int KnowledgeBase::add_clause(Term head, std::vector<Term> body, Provenance provenance, std::string domain) {
    if (!head.is_callable()) {
        throw Error("clause head must be an atom or compound: " + head.to_string());
    }
    Clause c;
    c.head = std::move(head);
    c.body = std::move(body);
    c.id = next_id_++;
    c.provenance = provenance;
    c.domain = std::move(domain);
    index_[predicate_key(c.head)].push_back(c.id);
    position_[c.id] = clauses_.size();
    clauses_.push_back(std::move(c));
    return clauses_.back().id;
}

bool KnowledgeBase::remove_clause(int id) {
    auto it = position_.find(id);
    if (it == position_.end()) return false;
    const std::size_t pos = it->second;
    auto key = predicate_key(clauses_[pos].head);
    auto& bucket = index_[key];
    bucket.erase(std::remove(bucket.begin(), bucket.end(), id), bucket.end());
    if (bucket.empty()) index_.erase(key);
    clauses_.erase(clauses_.begin() + static_cast<std::ptrdiff_t>(pos));
    position_.erase(it);
    for (auto& [cid, p] : position_) {
        if (p > pos) --p;
    }
    return true;
}

const Clause* KnowledgeBase::find(int id) const {
    auto it = position_.find(id);
    return it == position_.end() ? nullptr : &clauses_[it->second];
}

const Clause& KnowledgeBase::at(int id) const {
    const Clause* c = find(id);
    if (!c) throw Error("unknown clause id " + std::to_string(id));
    return *c;
}

const std::vector<int>& KnowledgeBase::candidates(const PredicateKey& key) const {
    static const std::vector<int> none;
    auto it = index_.find(key);
    return it == index_.end() ? none : it->second;
}

std::vector<PredicateKey> KnowledgeBase::predicates() const {
    std::vector<PredicateKey> out;
    for (const auto& [k, ids] : index_) out.push_back(k);
    return out;
}

std::size_t KnowledgeBase::builtin_count() const {
    return static_cast<std::size_t>(std::count_if(clauses_.begin(), clauses_.end(), [](const Clause& c) {
        return c.provenance == Provenance::builtin;
    }));
}

std::string KnowledgeBase::type_of(const std::string& noun) const {
    auto it = types_.find(noun);
    return it == types_.end() ? "thing" : it->second;
}

void KnowledgeBase::load_types(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw SyntaxError(lineno, "types line must be noun<TAB>type");
        }
        types_[line.substr(0, tab)] = line.substr(tab + 1);
    }
}

namespace {

void collect_atoms(const Term& t, std::set<std::string>& atoms, std::set<std::string>& vars, bool top) {
    switch (t.kind()) {
        case TermKind::atom:
            if (!top) atoms.insert(t.name());
            break;
        case TermKind::variable:
            if (t.name()[0] != '_') vars.insert(t.name());
            break;
        case TermKind::number:
            break;
        case TermKind::compound:
            for (const auto& a : t.args()) collect_atoms(a, atoms, vars, false);
            break;
    }
}

}  // namespace

std::set<std::string> KnowledgeBase::atoms() const {
    std::set<std::string> atoms, vars;
    for (const auto& c : clauses_) {
        collect_atoms(c.head, atoms, vars, true);
        for (const auto& g : c.body) collect_atoms(g, atoms, vars, true);
    }
    return atoms;
}

std::set<std::string> KnowledgeBase::variable_names() const {
    std::set<std::string> atoms, vars;
    for (const auto& c : clauses_) {
        collect_atoms(c.head, atoms, vars, true);
        for (const auto& g : c.body) collect_atoms(g, atoms, vars, true);
    }
    return vars;
}

std::string KnowledgeBase::to_text() const {
    std::string out;
    for (const auto& c : clauses_) {
        out += c.to_string();
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t KnowledgeBase::fingerprint() const {
    std::string text;
    for (const auto& c : clauses_) {
        if (c.provenance != Provenance::builtin) continue;
        text += c.to_string();
        text += '\n';
    }
    return fnv1a64(text);
}

bool KnowledgeBase::index_consistent() const {
    std::map<PredicateKey, std::vector<int>> rebuilt;
    for (const auto& c : clauses_) rebuilt[predicate_key(c.head)].push_back(c.id);
    if (rebuilt != index_) return false;
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
        auto it = position_.find(clauses_[i].id);
        if (it == position_.end() || it->second != i) return false;
    }
    return position_.size() == clauses_.size();
}

}  // namespace corgi::logic
