#pragma once

#include "corgi/logic/knowledge_base.hpp"
#include "corgi/logic/term.hpp"

#include <string_view>
#include <vector>

namespace corgi::logic {

/// A clause as read from source, before it is placed in a knowledge base.
struct ParsedClause {
    Term head;
    std::vector<Term> body;
    std::string domain;
    int line = 0;
};

/// Parses program text:
///
///     head :- goal1, goal2.     rule
///     fact.                     fact
///     X >= 2, Y = A + B         builtins inside bodies
///     % comment                 to end of line
///     :- user_state(f/3).       marks f/3 facts as user-state facts
///     :- domain(restricted).    tags following clauses with a domain bucket
///
/// Each `_` is a fresh anonymous variable. Throws SyntaxError.
KnowledgeBase parse_program(std::string_view text);

/// Appends the clauses of `text` to `kb` with the given provenance.
std::vector<int> add_program(KnowledgeBase& kb, std::string_view text, Provenance provenance);

std::vector<ParsedClause> parse_clauses(std::string_view text);

/// Parses a single term; a trailing '.' is optional.
Term parse_term(std::string_view text);

}  // namespace corgi::logic
