#include "corgi/logic/term.hpp"

#include <cctype>
#include <sstream>

namespace corgi::logic {

namespace {

bool is_infix(const Term& t) {
    if (!t.is_compound() || t.arity() != 2) {
        return false;
    }
    const auto& f = t.name();
    return f == "=" || f == "==" || f == ">=" || f == "=<" || f == ">" || f == "<" || f == "+" ||
           f == "-" || f == "*" || f == "/";
}

int precedence(const std::string& op) {
    if (op == "*" || op == "/") return 2;
    if (op == "+" || op == "-") return 1;
    return 0;
}

void render(const Term& t, std::ostringstream& os) {
    switch (t.kind()) {
        case TermKind::atom:
            os << t.name();
            return;
        case TermKind::variable:
            if (!t.name().empty() && t.name()[0] == '_') {
                os << '_';
            } else {
                os << t.name();
            }
            return;
        case TermKind::number:
            os << format_number(t.value());
            return;
        case TermKind::compound:
            break;
    }
    if (is_infix(t)) {
        const int p = precedence(t.name());
        auto side = [&](const Term& arg, bool right) {
            const bool wrap = is_infix(arg) && p > 0 &&
                              (precedence(arg.name()) < p || (right && precedence(arg.name()) == p));
            if (wrap) os << '(';
            render(arg, os);
            if (wrap) os << ')';
        };
        side(t.args()[0], false);
        os << ' ' << t.name() << ' ';
        side(t.args()[1], true);
        return;
    }
    os << t.name() << '(';
    for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) os << ", ";
        render(t.args()[i], os);
    }
    os << ')';
}

int kind_rank(TermKind k) { return static_cast<int>(k); }

}  // namespace

std::string format_number(const Number& n) {
    if (n.denominator() == 1) {
        return std::to_string(n.numerator());
    }
    return std::to_string(n.numerator()) + "/" + std::to_string(n.denominator());
}

std::string variable_type(std::string_view name) {
    std::size_t end = name.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(name[end - 1]))) {
        --end;
    }
    std::string out;
    out.reserve(end);
    for (std::size_t i = 0; i < end; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(name[i]))));
    }
    return out;
}

Term Term::atom(std::string name) {
    Term t;
    t.kind_ = TermKind::atom;
    t.name_ = std::move(name);
    return t;
}

Term Term::variable(std::string name, std::uint32_t id) {
    Term t;
    t.kind_ = TermKind::variable;
    t.name_ = std::move(name);
    t.var_id_ = id;
    return t;
}

Term Term::number(Number value) {
    Term t;
    t.kind_ = TermKind::number;
    t.number_ = value;
    return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) {
        return atom(std::move(functor));
    }
    Term t;
    t.kind_ = TermKind::compound;
    t.name_ = std::move(functor);
    t.args_ = std::move(args);
    return t;
}

bool Term::is_ground() const {
    if (kind_ == TermKind::variable) return false;
    for (const auto& a : args_) {
        if (!a.is_ground()) return false;
    }
    return true;
}

void Term::collect_variables(std::set<VarKey>& out) const {
    if (kind_ == TermKind::variable) {
        out.insert(var_key());
        return;
    }
    for (const auto& a : args_) a.collect_variables(out);
}

bool Term::contains_variable(const VarKey& key) const {
    if (kind_ == TermKind::variable) return name_ == key.name && var_id_ == key.id;
    for (const auto& a : args_) {
        if (a.contains_variable(key)) return true;
    }
    return false;
}

Term Term::renamed(std::uint32_t id) const {
    if (kind_ == TermKind::variable) return variable(name_, id);
    if (kind_ != TermKind::compound) return *this;
    std::vector<Term> args;
    args.reserve(args_.size());
    for (const auto& a : args_) args.push_back(a.renamed(id));
    return compound(name_, std::move(args));
}

std::string Term::to_string() const {
    std::ostringstream os;
    render(*this, os);
    return os.str();
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case TermKind::atom:
            return a.name_ == b.name_;
        case TermKind::variable:
            return a.name_ == b.name_ && a.var_id_ == b.var_id_;
        case TermKind::number:
            return a.number_ == b.number_;
        case TermKind::compound:
            return a.name_ == b.name_ && a.args_ == b.args_;
    }
    return false;
}

bool operator<(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return kind_rank(a.kind_) < kind_rank(b.kind_);
    switch (a.kind_) {
        case TermKind::atom:
            return a.name_ < b.name_;
        case TermKind::variable:
            return std::tie(a.name_, a.var_id_) < std::tie(b.name_, b.var_id_);
        case TermKind::number:
            return a.number_ < b.number_;
        case TermKind::compound:
            if (a.args_.size() != b.args_.size()) return a.args_.size() < b.args_.size();
            if (a.name_ != b.name_) return a.name_ < b.name_;
            return a.args_ < b.args_;
    }
    return false;
}

const Term* Substitution::lookup(const VarKey& key) const {
    auto it = bindings_.find(key);
    return it == bindings_.end() ? nullptr : &it->second;
}

void Substitution::bind(const VarKey& key, Term value) { bindings_.insert_or_assign(key, std::move(value)); }

const Term& Substitution::walk(const Term& t) const {
    const Term* cur = &t;
    while (cur->is_variable()) {
        const Term* next = lookup(cur->var_key());
        if (!next) break;
        cur = next;
    }
    return *cur;
}

Term Substitution::resolve(const Term& t) const {
    const Term& w = walk(t);
    if (!w.is_compound()) return w;
    std::vector<Term> args;
    args.reserve(w.arity());
    for (const auto& a : w.args()) args.push_back(resolve(a));
    return Term::compound(w.name(), std::move(args));
}

Substitution Substitution::delta_since(const Substitution& before) const {
    Substitution out;
    for (const auto& [k, v] : bindings_) {
        if (!before.is_bound(k)) out.bind(k, v);
    }
    return out;
}

std::string Substitution::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& [k, v] : bindings_) {
        if (!first) os << ", ";
        first = false;
        os << k.name << " -> " << resolve(v).to_string();
    }
    os << '}';
    return os.str();
}

Term apply_substitution(const Term& t, const Substitution& s) { return s.resolve(t); }

bool occurs_in(const VarKey& v, const Term& t, const Substitution& s) {
    const Term& w = s.walk(t);
    if (w.is_variable()) return w.var_key() == v;
    for (const auto& a : w.args()) {
        if (occurs_in(v, a, s)) return true;
    }
    return false;
}

bool unify_into(const Term& a, const Term& b, Substitution& s) {
    const Term& x = s.walk(a);
    const Term& y = s.walk(b);
    if (x.is_variable() && y.is_variable() && x.var_key() == y.var_key()) return true;
    if (x.is_variable()) {
        if (occurs_in(x.var_key(), y, s)) return false;
        s.bind(x.var_key(), y);
        return true;
    }
    if (y.is_variable()) {
        if (occurs_in(y.var_key(), x, s)) return false;
        s.bind(y.var_key(), x);
        return true;
    }
    if (x.kind() != y.kind()) return false;
    switch (x.kind()) {
        case TermKind::atom:
            return x.name() == y.name();
        case TermKind::number:
            return x.value() == y.value();
        case TermKind::compound: {
            if (x.name() != y.name() || x.arity() != y.arity()) return false;
            // Copy: binding may invalidate references into `s`.
            const Term xc = x;
            const Term yc = y;
            for (std::size_t i = 0; i < xc.arity(); ++i) {
                if (!unify_into(xc.args()[i], yc.args()[i], s)) return false;
            }
            return true;
        }
        case TermKind::variable:
            break;
    }
    return false;
}

std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& s) {
    Substitution out = s;
    if (!unify_into(a, b, out)) return std::nullopt;
    return out;
}

}  // namespace corgi::logic
