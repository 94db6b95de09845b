#include "corgi/nl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>

namespace corgi::nl {

using logic::Term;

namespace {

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '_';
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim_clause(const std::string& s) {
    static const std::string junk = " \t\r\n.,;:!?\"";
    const auto b = s.find_first_not_of(junk);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(junk);
    return s.substr(b, e - b + 1);
}

// Position of `word` as a whole word in `text` at or after `from`.
std::size_t find_word(const std::string& text, const std::string& word, std::size_t from) {
    const std::string low = lower(text);
    for (auto pos = low.find(word, from); pos != std::string::npos; pos = low.find(word, pos + 1)) {
        const bool left_ok = pos == 0 || !word_char(low[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right_ok = end == low.size() || !word_char(low[end]);
        if (left_ok && right_ok) return pos;
    }
    return std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim_clause(lower(line));
        if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_pronoun_atom(const std::string& t) { return t == "i" || t == "me" || t == "corgi"; }

std::string normalize_pronoun(const std::string& t) {
    if (t == "i" || t == "myself" || t == "i'm" || t == "i'd" || t == "i'll" || t == "i've") return "i";
    if (t == "you" || t == "yourself" || t == "you're" || t == "you'll") return "corgi";
    return t;
}

Term token_term(const std::string& t) {
    if (!t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        return Term::number(static_cast<std::int64_t>(std::stoll(t)));
    }
    return Term::atom(t);
}

const std::vector<std::vector<std::string>>& lead_ins() {
    static const std::vector<std::vector<std::string>> phrases = {
        {"would", "like", "to"}, {"want", "to"}, {"wants", "to"}, {"like", "to"},
        {"need", "to"},          {"needs", "to"}, {"going", "to"}, {"gonna"},
    };
    return phrases;
}

bool starts_with_at(const std::vector<std::string>& tokens, std::size_t i, const std::vector<std::string>& phrase) {
    if (i + phrase.size() > tokens.size()) return false;
    return std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i));
}

}  // namespace

std::string CommandParts::join() const {
    return "if " + state_text + " then " + action_text + " because " + goal_text;
}

CommandParts split_command(const std::string& text) {
    const auto p_if = find_word(text, "if", 0);
    if (p_if == std::string::npos) throw MissingClause("if");
    const auto p_then = find_word(text, "then", p_if + 2);
    if (p_then == std::string::npos) throw MissingClause("then");
    const auto p_because = find_word(text, "because", p_then + 4);
    if (p_because == std::string::npos) throw MissingClause("because");
    CommandParts parts;
    parts.raw = text;
    parts.state_text = trim_clause(text.substr(p_if + 2, p_then - p_if - 2));
    parts.action_text = trim_clause(text.substr(p_then + 4, p_because - p_then - 4));
    parts.goal_text = trim_clause(text.substr(p_because + 7));
    return parts;
}

Lexicon Lexicon::from_text(const std::string& verbs, const std::string& stopwords, const std::string& multiwords) {
    Lexicon lex;
    for (auto& v : lines_of(verbs)) lex.verbs.insert(v);
    for (auto& s : lines_of(stopwords)) lex.stopwords.insert(s);
    for (auto& m : lines_of(multiwords)) {
        auto words = tokenize(m);
        if (words.size() > 1) lex.multiwords.push_back(std::move(words));
    }
    std::stable_sort(lex.multiwords.begin(), lex.multiwords.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return lex;
}

Lexicon Lexicon::load(const std::string& dir) {
    return from_text(read_text(dir + "/verbs.txt"), read_text(dir + "/stopwords.txt"),
                     read_text(dir + "/multiwords.txt"));
}

std::string Lexicon::verb_base(const std::string& token) const {
    if (verbs.count(token)) return token;
    auto try_base = [&](std::size_t cut, const std::string& add) -> std::string {
        if (token.size() <= cut + 1) return {};
        std::string base = token.substr(0, token.size() - cut) + add;
        return verbs.count(base) ? base : std::string{};
    };
    auto ends = [&](const std::string& suffix) {
        return token.size() > suffix.size() && token.compare(token.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    std::string b;
    if (ends("ies") && !(b = try_base(3, "y")).empty()) return b;
    if (ends("es") && !(b = try_base(2, "")).empty()) return b;
    if (ends("s") && !(b = try_base(1, "")).empty()) return b;
    if (ends("ing")) {
        if (!(b = try_base(3, "")).empty() || !(b = try_base(3, "e")).empty()) return b;
        if (token.size() > 5 && token[token.size() - 4] == token[token.size() - 5] && !(b = try_base(4, "")).empty()) return b;
    }
    if (ends("ied") && !(b = try_base(3, "y")).empty()) return b;
    if (ends("ed")) {
        if (!(b = try_base(2, "")).empty() || !(b = try_base(1, "")).empty()) return b;
        if (token.size() > 4 && token[token.size() - 3] == token[token.size() - 4] && !(b = try_base(3, "")).empty()) return b;
    }
    return {};
}

Term LogicalForm::term() const {
    if (args.empty()) return Term::atom(predicate);
    return Term::compound(predicate, args);
}

std::vector<std::string> tokenize(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    // Typographic apostrophe (U+2019) folds to ASCII.
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.compare(i, 3, "\xE2\x80\x99") == 0) {
            s.push_back('\'');
            i += 2;
        } else {
            s.push_back(text[i]);
        }
    }
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&]() {
        while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
        while (!cur.empty() && cur.back() == '\'') cur.pop_back();
        if (!cur.empty()) out.push_back(lower(cur));
        cur.clear();
    };
    for (char c : s) {
        if (word_char(c)) {
            cur.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string strip_lead_in(const std::string& clause) {
    static const std::regex lead(R"(\b(would like|wants?|needs?|going) to\s+)", std::regex::icase);
    return std::regex_replace(clause, lead, "", std::regex_constants::format_first_only);
}

std::string answer_clause(const std::string& answer) {
    std::string s = trim_clause(answer);
    if (find_word(s, "if", 0) == 0) s = trim_clause(s.substr(2));
    return s;
}

LogicalForm to_logical_form(const std::string& clause_text, const Lexicon& lexicon, Role role) {
    const auto raw = tokenize(clause_text);
    if (raw.empty()) throw EmptyClause("empty clause: '" + clause_text + "'");

    std::vector<std::string> merged;
    for (std::size_t i = 0; i < raw.size();) {
        bool hit = false;
        for (const auto& m : lexicon.multiwords) {
            if (starts_with_at(raw, i, m)) {
                std::string joined;
                for (const auto& w : m) joined += (joined.empty() ? "" : "_") + w;
                merged.push_back(joined);
                i += m.size();
                hit = true;
                break;
            }
        }
        if (!hit) merged.push_back(raw[i++]);
    }

    std::vector<std::string> words;
    for (std::size_t i = 0; i < merged.size();) {
        bool lead = false;
        for (const auto& p : lead_ins()) {
            if (starts_with_at(merged, i, p)) {
                i += p.size();
                lead = true;
                break;
            }
        }
        if (lead) continue;
        std::string w = normalize_pronoun(merged[i++]);
        if (lexicon.stopwords.count(w)) continue;
        w.erase(std::remove(w.begin(), w.end(), '\''), w.end());
        if (!w.empty()) words.push_back(w);
    }

    LogicalForm lf;
    lf.source_text = clause_text;
    std::size_t verb_at = words.size();
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (is_pronoun_atom(words[i])) continue;
        const auto base = lexicon.verb_base(words[i]);
        if (!base.empty()) {
            lf.predicate = base;
            verb_at = i;
            break;
        }
    }
    if (verb_at == words.size()) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (!is_pronoun_atom(words[i])) {
                lf.predicate = words[i];
                verb_at = i;
                lf.low_confidence = true;
                break;
            }
        }
    }
    if (verb_at == words.size()) throw EmptyClause("no predicate in '" + clause_text + "'");

    const bool spoken_subject = std::any_of(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(verb_at),
                                            [](const std::string& w) { return w == "i" || w == "corgi"; });
    if (role == Role::action && !spoken_subject) lf.args.push_back(Term::atom("corgi"));
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i != verb_at) lf.args.push_back(token_term(words[i]));
    }
    if (lf.args.empty()) {
        lf.args.push_back(Term::atom("i"));
        lf.low_confidence = true;
    }
    return lf;
}

namespace {

std::string stem(const std::string& name, const Lexicon& lexicon) {
    const std::string low = lower(name);
    const auto base = lexicon.verb_base(low);
    return base.empty() ? low : base;
}

bool same_predicate(const std::string& a, const std::string& b, const Lexicon& lexicon) {
    return a == b || lower(a) == lower(b) || stem(a, lexicon) == stem(b, lexicon);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int position_score(const Term& arg, const Term& head_arg, const logic::KnowledgeBase& kb) {
    if (head_arg.is_variable()) {
        if (!arg.is_atom()) return 0;
        const std::string at = kb.type_of(arg.name());
        const std::string vt = logic::variable_type(head_arg.name());
        return at != "thing" && ends_with(vt, at) ? 2 : 0;
    }
    if (head_arg.is_atom() && arg.is_atom()) {
        if (head_arg.name() == arg.name()) return 3;
        const std::string at = kb.type_of(arg.name());
        return at != "thing" && at == kb.type_of(head_arg.name()) ? 1 : -1;
    }
    if (head_arg.is_number() && arg.is_number()) return head_arg.value() == arg.value() ? 3 : -1;
    return head_arg.is_compound() ? 0 : -1;
}

}  // namespace

bool in_kb(const LogicalForm& lf, const logic::KnowledgeBase& kb, const Lexicon& lexicon) {
    for (const auto& [name, arity] : kb.predicates()) {
        if (arity == lf.args.size() && same_predicate(lf.predicate, name, lexicon)) return true;
    }
    return false;
}

LogicalForm align_with_kb(const LogicalForm& lf, const logic::KnowledgeBase& kb, const Lexicon& lexicon) {
    const std::size_t n = lf.args.size();
    struct Best {
        int score;
        std::vector<Term> args;
        std::string predicate;
        std::string head;
    };
    std::vector<Best> per_head;
    for (const auto& c : kb.clauses()) {
        if (c.head.arity() != n || !same_predicate(lf.predicate, c.head.name(), lexicon)) continue;
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Best best{std::numeric_limits<int>::min(), {}, c.head.name(), c.head.to_string()};
        do {
            int score = 0;
            for (std::size_t i = 0; i < n; ++i) score += position_score(lf.args[perm[i]], c.head.args()[i], kb);
            if (score > best.score) {
                best.score = score;
                best.args.clear();
                for (std::size_t i = 0; i < n; ++i) best.args.push_back(lf.args[perm[i]]);
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        per_head.push_back(std::move(best));
    }
    if (per_head.empty()) {
        LogicalForm out = lf;
        out.aligned = false;
        return out;
    }
    const Best* chosen = &per_head.front();
    for (const auto& b : per_head) {
        if (b.score > chosen->score) chosen = &b;
    }
    LogicalForm out = lf;
    for (const auto& b : per_head) {
        if (&b != chosen && b.score == chosen->score && b.args != chosen->args) {
            out.warnings.push_back("ambiguous alignment between " + chosen->head + " and " + b.head +
                                   "; using the earlier clause");
            break;
        }
    }
    out.predicate = chosen->predicate;
    out.args = chosen->args;
    out.aligned = true;
    return out;
}

}  // namespace corgi::nl
