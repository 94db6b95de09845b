#pragma once

#include "corgi/logic/errors.hpp"
#include "corgi/logic/knowledge_base.hpp"

#include <set>
#include <string>
#include <vector>

namespace corgi::nl {

class ParseFailure : public Error {
public:
    using Error::Error;
};

/// A keyword of the if-then-because frame is missing.
class MissingClause : public ParseFailure {
public:
    explicit MissingClause(std::string which)
        : ParseFailure("missing '" + which + "' clause"), which_(std::move(which)) {}
    const std::string& which() const noexcept { return which_; }

private:
    std::string which_;
};

/// Nothing but stopwords and punctuation.
class EmptyClause : public ParseFailure {
public:
    using ParseFailure::ParseFailure;
};

struct CommandParts {
    std::string state_text;
    std::string action_text;
    std::string goal_text;
    std::string raw;

    /// "if <state> then <action> because <goal>"
    std::string join() const;
};

/// Splits on the first "if", the first "then" after it and the first
/// "because" after that (case-insensitive, whole words). Parts are trimmed of
/// surrounding whitespace and punctuation.
CommandParts split_command(const std::string& text);

/// Word lists driving the shallow parser.
struct Lexicon {
    std::set<std::string> verbs;
    std::set<std::string> stopwords;
    std::vector<std::vector<std::string>> multiwords;  // longest first

    static Lexicon from_text(const std::string& verbs, const std::string& stopwords, const std::string& multiwords);
    /// Reads verbs.txt, stopwords.txt and multiwords.txt from `dir`.
    static Lexicon load(const std::string& dir);

    /// Base form if the token is a known verb or a regular inflection of one.
    std::string verb_base(const std::string& token) const;
};

/// Which part of a command a clause came from. Actions are performed by the
/// agent, so they get the implicit subject `corgi` when none is spoken.
enum class Role { state, action, goal };

struct LogicalForm {
    std::string predicate;
    std::vector<logic::Term> args;
    std::string source_text;
    bool aligned = false;
    bool low_confidence = false;  // no verb found or the subject was defaulted
    std::vector<std::string> warnings;

    logic::Term term() const;
    friend bool operator==(const LogicalForm& a, const LogicalForm& b) {
        return a.predicate == b.predicate && a.args == b.args;
    }
};

/// Lowercased word tokens; apostrophes and underscores stay inside words.
std::vector<std::string> tokenize(const std::string& text);

/// Removes a leading first-person lead-in such as "I want to", keeping the
/// subject: "I want to remain dry" -> "I remain dry".
std::string strip_lead_in(const std::string& clause);

/// Clause text of a dialog answer: a leading "if" and trailing punctuation
/// are dropped.
std::string answer_clause(const std::string& answer);

LogicalForm to_logical_form(const std::string& clause_text, const Lexicon& lexicon, Role role = Role::goal);

/// Same predicate name or stem and equal arity.
bool in_kb(const LogicalForm& lf, const logic::KnowledgeBase& kb, const Lexicon& lexicon);

/// Re-orders arguments to fit the best-typed KB head with the same predicate
/// name (or stem) and arity. Returns the form unchanged and unaligned when no
/// such head exists. Ties between differently ordered heads are resolved by
/// program order and reported in `warnings`.
LogicalForm align_with_kb(const LogicalForm& lf, const logic::KnowledgeBase& kb, const Lexicon& lexicon);

}  // namespace corgi::nl
