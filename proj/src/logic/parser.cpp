#include "corgi/logic/parser.hpp"

#include "corgi/logic/errors.hpp"

#include <cctype>
#include <set>

namespace corgi::logic {

namespace {

enum class Tok { atom, var, number, lparen, rparen, comma, end, neck, op, eof };

struct Token {
    Tok kind;
    std::string text;
    int line;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '%') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < n && ident_char(src[j])) ++j;
            std::string word(src.substr(i, j - i));
            const bool var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
            out.push_back({var ? Tok::var : Tok::atom, std::move(word), line});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j + 1 < n && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < n && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
                throw SyntaxError(line, "bad identifier starting with a digit");
            }
            out.push_back({Tok::number, std::string(src.substr(i, j - i)), line});
            i = j;
            continue;
        }
        switch (c) {
            case '(':
                out.push_back({Tok::lparen, "(", line});
                ++i;
                continue;
            case ')':
                out.push_back({Tok::rparen, ")", line});
                ++i;
                continue;
            case ',':
                out.push_back({Tok::comma, ",", line});
                ++i;
                continue;
            case '.':
                out.push_back({Tok::end, ".", line});
                ++i;
                continue;
            default:
                break;
        }
        auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
        static const char* const ops[] = {":-", "=<", ">=", "==", "=", ">", "<", "+", "-", "*", "/"};
        bool matched = false;
        for (const char* op : ops) {
            if (starts(op)) {
                const std::string text(op);
                out.push_back({text == ":-" ? Tok::neck : Tok::op, text, line});
                i += text.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw SyntaxError(line, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Tok::eof, "", line});
    return out;
}

Number parse_decimal(const std::string& text, int line) {
    auto dot = text.find('.');
    try {
        if (dot == std::string::npos) return Number(std::stoll(text));
        const std::string whole = text.substr(0, dot);
        const std::string frac = text.substr(dot + 1);
        std::int64_t den = 1;
        for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
        return Number(std::stoll(whole + frac), den);
    } catch (const std::exception&) {
        throw SyntaxError(line, "number out of range: " + text);
    }
}

struct Item {
    bool directive = false;
    ParsedClause clause;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::vector<Item> program() {
        std::vector<Item> items;
        while (peek().kind != Tok::eof) items.push_back(item());
        return items;
    }

    Term single_term() {
        Term t = expr();
        if (peek().kind == Tok::end) next();
        if (peek().kind != Tok::eof) fail("unexpected '" + peek().text + "' after term");
        return t;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    [[noreturn]] void fail(const std::string& why) const { throw SyntaxError(peek().line, why); }

    void expect(Tok kind, const char* what) {
        if (peek().kind == Tok::eof && kind == Tok::end) fail("unterminated clause (missing '.')");
        if (peek().kind != kind) fail(std::string("expected ") + what + ", found '" + peek().text + "'");
        next();
    }

    Item item() {
        anon_ = 0;
        Item it;
        it.clause.line = peek().line;
        if (peek().kind == Tok::neck) {
            next();
            it.directive = true;
            it.clause.head = expr();
            expect(Tok::end, "'.'");
            return it;
        }
        it.clause.head = expr();
        if (!it.clause.head.is_callable()) fail("clause head must be an atom or compound term");
        if (peek().kind == Tok::neck) {
            next();
            it.clause.body.push_back(goal());
            while (peek().kind == Tok::comma) {
                next();
                it.clause.body.push_back(goal());
            }
        }
        expect(Tok::end, "'.'");
        return it;
    }

    Term goal() {
        Term g = expr();
        if (!g.is_callable()) fail("body goal must be callable: " + g.to_string());
        return g;
    }

    Term expr() {
        Term left = arith();
        if (peek().kind == Tok::op) {
            const std::string& op = peek().text;
            if (op == "=" || op == "==" || op == ">=" || op == "=<" || op == ">" || op == "<") {
                std::string f = next().text;
                Term right = arith();
                return Term::compound(std::move(f), {std::move(left), std::move(right)});
            }
        }
        return left;
    }

    Term arith() {
        Term left = product();
        while (peek().kind == Tok::op && (peek().text == "+" || peek().text == "-")) {
            std::string f = next().text;
            Term right = product();
            left = Term::compound(std::move(f), {std::move(left), std::move(right)});
        }
        return left;
    }

    Term product() {
        Term left = primary();
        while (peek().kind == Tok::op && (peek().text == "*" || peek().text == "/")) {
            std::string f = next().text;
            Term right = primary();
            left = Term::compound(std::move(f), {std::move(left), std::move(right)});
        }
        return left;
    }

    Term primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::number: {
                next();
                return Term::number(parse_decimal(t.text, t.line));
            }
            case Tok::op:
                if (t.text == "-" && toks_[pos_ + 1].kind == Tok::number) {
                    next();
                    const Token& num = next();
                    return Term::number(-parse_decimal(num.text, num.line));
                }
                fail("unexpected operator '" + t.text + "'");
            case Tok::var: {
                next();
                if (t.text == "_") return Term::variable("_" + std::to_string(++anon_));
                return Term::variable(t.text);
            }
            case Tok::atom: {
                std::string name = next().text;
                if (peek().kind != Tok::lparen) return Term::atom(std::move(name));
                next();
                std::vector<Term> args;
                if (peek().kind == Tok::rparen) fail("empty argument list");
                args.push_back(expr());
                while (peek().kind == Tok::comma) {
                    next();
                    args.push_back(expr());
                }
                if (peek().kind != Tok::rparen) fail("unbalanced parentheses");
                next();
                return Term::compound(std::move(name), std::move(args));
            }
            case Tok::lparen: {
                next();
                Term inner = expr();
                if (peek().kind != Tok::rparen) fail("unbalanced parentheses");
                next();
                return inner;
            }
            case Tok::rparen:
                fail("unbalanced parentheses");
            case Tok::eof:
                fail("unterminated clause (missing '.')");
            default:
                fail("unexpected '" + t.text + "'");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int anon_ = 0;
};

struct Program {
    std::vector<ParsedClause> clauses;
    std::set<PredicateKey> user_state;
};

Program parse_items(std::string_view text) {
    Parser p(tokenize(text));
    Program prog;
    std::string domain;
    for (auto& it : p.program()) {
        if (!it.directive) {
            it.clause.domain = domain;
            prog.clauses.push_back(std::move(it.clause));
            continue;
        }
        const Term& d = it.clause.head;
        if (d.is_compound() && d.name() == "domain" && d.arity() == 1 && d.args()[0].is_atom()) {
            domain = d.args()[0].name();
        } else if (d.is_compound() && d.name() == "user_state" && d.arity() == 1) {
            const Term& spec = d.args()[0];
            if (!spec.is_compound() || spec.name() != "/" || !spec.args()[0].is_atom() ||
                !spec.args()[1].is_number() || spec.args()[1].value().denominator() != 1) {
                throw SyntaxError(it.clause.line, "user_state expects name/arity");
            }
            prog.user_state.insert(
                {spec.args()[0].name(), static_cast<std::size_t>(spec.args()[1].value().numerator())});
        } else {
            throw SyntaxError(it.clause.line, "unknown directive " + d.to_string());
        }
    }
    return prog;
}

}  // namespace

std::vector<ParsedClause> parse_clauses(std::string_view text) { return parse_items(text).clauses; }

KnowledgeBase parse_program(std::string_view text) {
    KnowledgeBase kb;
    add_program(kb, text, Provenance::builtin);
    return kb;
}

std::vector<int> add_program(KnowledgeBase& kb, std::string_view text, Provenance provenance) {
    Program prog = parse_items(text);
    for (const auto& key : prog.user_state) kb.declare_user_state(key);
    std::vector<int> ids;
    for (auto& c : prog.clauses) {
        ids.push_back(kb.add_clause(std::move(c.head), std::move(c.body), provenance, std::move(c.domain)));
    }
    return ids;
}

Term parse_term(std::string_view text) {
    Parser p(tokenize(text));
    return p.single_term();
}

}  // namespace corgi::logic
