#include "corgi/dialog/dialog.hpp"

#include "corgi/logic/builtins.hpp"

#include <algorithm>
#include <set>

namespace corgi::dialog {

using logic::Term;

std::string to_string(Status s) {
    switch (s) {
        case Status::awaiting_user: return "awaiting_user";
        case Status::succeeded: return "succeeded";
        case Status::failed: return "failed";
    }
    return "unknown";
}

std::string to_string(ActionType a) {
    switch (a) {
        case ActionType::ask: return "ask";
        case ActionType::succeed: return "succeed";
        case ActionType::fail: return "fail";
    }
    return "unknown";
}

std::string to_string(Presumption::Kind k) {
    return k == Presumption::Kind::state_constraint ? "state_constraint" : "user_fact";
}

nlohmann::json Presumption::to_json() const {
    return {{"node_t", node_t}, {"form", form.to_string()}, {"kind", to_string(kind)}, {"rendered", rendered}};
}

nlohmann::json SystemAction::to_json() const {
    nlohmann::json j = {{"type", to_string(type)}, {"text", text}};
    if (!reason.empty()) j["reason"] = reason;
    if (clarification) j["clarification"] = true;
    if (proof) {
        j["proof"] = proof_record;
        j["proof_text"] = proof_text;
        j["proof_nodes"] = proof->node_count();
    }
    if (type == ActionType::succeed) {
        j["presumptions"] = nlohmann::json::array();
        for (const auto& p : presumptions) j["presumptions"].push_back(p.to_json());
    }
    return j;
}

void DialogConfig::validate(int n1) const {
    if (n < 0) throw nn::ConfigError("feedback bound n must be non-negative");
    if (prover == Prover::soft) prove.validate(n1);
}

bool exact_match(const Term& goal, const Term& form) { return logic::unify(goal, form).has_value(); }

namespace {

bool is_pronoun(const std::string& s) { return s == "i" || s == "me" || s == "corgi" || s == "you"; }

void symbols_of(const Term& t, std::set<std::string>& out) {
    if (t.is_atom() || t.is_compound()) out.insert(t.name());
    for (const auto& a : t.args()) symbols_of(a, out);
}

std::set<std::string> state_symbols(const Term& S) {
    std::set<std::string> out;
    if (S.is_callable()) out.insert(S.name());
    for (const auto& a : S.args()) {
        if (a.is_atom() && !is_pronoun(a.name())) out.insert(a.name());
    }
    return out;
}

std::set<logic::VarKey> variables(const Term& t) {
    std::set<logic::VarKey> out;
    t.collect_variables(out);
    return out;
}

}  // namespace

std::vector<Presumption> extract_presumptions(const logic::ProofTree& proof, const logic::Substitution& bindings,
                                              const logic::KnowledgeBase& kb, const Term& S, const Term& A,
                                              const MatchFn& matches) {
    const auto nodes = proof.preorder();
    const auto s_symbols = state_symbols(S);

    std::set<logic::VarKey> state_vars;
    for (const auto* n : nodes) {
        if (n->is_builtin_node()) continue;
        const Term resolved = bindings.resolve(n->goal);
        std::set<std::string> mentioned;
        symbols_of(resolved, mentioned);
        const bool about_state = matches(resolved, S) ||
                                 std::any_of(s_symbols.begin(), s_symbols.end(),
                                             [&](const std::string& s) { return mentioned.count(s) > 0; });
        if (about_state) {
            const auto vs = variables(n->goal);
            state_vars.insert(vs.begin(), vs.end());
        }
    }

    std::vector<Presumption> out;
    for (const auto* n : nodes) {
        if (!n->is_leaf()) continue;
        if (n->is_builtin_node()) {
            if (!logic::is_comparison(n->goal)) continue;
            const auto vs = variables(n->goal);
            const bool linked = std::any_of(vs.begin(), vs.end(), [&](const auto& v) { return state_vars.count(v) > 0; });
            if (linked) out.push_back({n->t, n->goal, Presumption::Kind::state_constraint, n->goal.to_string()});
            continue;
        }
        const logic::Clause* c = kb.find(*n->clause_id);
        if (!c || !c->is_fact()) continue;
        const bool from_user = c->provenance == logic::Provenance::user_session ||
                               kb.is_user_state(logic::predicate_key(c->head));
        if (!from_user) continue;
        const Term resolved = bindings.resolve(n->goal);
        if (matches(resolved, S) || matches(resolved, A)) continue;
        out.push_back({n->t, resolved, Presumption::Kind::user_fact, resolved.to_string()});
    }
    return out;
}

nlohmann::json proof_to_json(const logic::ProofTree& proof, const logic::Substitution& bindings) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : proof.children) children.push_back(proof_to_json(c, bindings));
    return {{"goal", bindings.resolve(proof.goal).to_string()},
            {"clause_id", proof.clause_id ? nlohmann::json(*proof.clause_id) : nlohmann::json(nullptr)},
            {"t", proof.t},
            {"children", children}};
}

std::string export_transcript(const DialogSession& session) {
    std::string out;
    for (const auto& line : session.transcript) {
        if (line.speaker == Speaker::system) out += "    ";
        out += line.text;
        out += '\n';
    }
    return out;
}

DialogEngine::DialogEngine(const logic::KnowledgeBase& base, const nn::NeuralProverModel* model,
                           const nl::Lexicon& lexicon, DialogConfig cfg)
    : base_(base), model_(model), lexicon_(lexicon), cfg_(std::move(cfg)) {
    if (cfg_.prover == DialogConfig::Prover::soft) {
        if (!model_) throw nn::ConfigError("soft proving needs a model");
        if (model_->kb_fingerprint() != base_.fingerprint()) {
            throw prover::ModelMismatch("model was trained against a different knowledge base");
        }
        cfg_.validate(model_->n1());
    } else {
        cfg_.validate(0);
    }
}

nl::LogicalForm DialogEngine::parse(const std::string& text, const logic::KnowledgeBase& kb, nl::Role role) const {
    return nl::align_with_kb(nl::to_logical_form(text, lexicon_, role), kb, lexicon_);
}

SystemAction DialogEngine::ask(DialogSession& s, const std::string& text) const {
    SystemAction a;
    a.type = ActionType::ask;
    a.text = "How do I know if ``" + text + "''?";
    s.status = Status::awaiting_user;
    s.current_goal_text = text;
    s.transcript.push_back({Speaker::system, a.text});
    ++s.asks;
    return a;
}

SystemAction DialogEngine::fail(DialogSession& s, const std::string& reason, const std::string& text) const {
    SystemAction a;
    a.type = ActionType::fail;
    a.reason = reason;
    a.text = text;
    s.status = Status::failed;
    s.transcript.push_back({Speaker::system, a.text});
    return a;
}

std::pair<DialogSession, SystemAction> DialogEngine::start_session(const std::string& command, std::string id) const {
    DialogSession s;
    s.id = std::move(id);
    s.parts = nl::split_command(command);
    s.kb_view = base_;
    s.n = cfg_.n;
    s.S = parse(s.parts.state_text, s.kb_view, nl::Role::state);
    s.A = parse(s.parts.action_text, s.kb_view, nl::Role::action);
    s.G = parse(s.parts.goal_text, s.kb_view, nl::Role::goal);
    s.goal_text = nl::strip_lead_in(s.parts.goal_text);
    s.current_goal_text = s.goal_text;
    if (model_) s.view = prover::EmbeddingView(model_->params().M_var, model_->symbols());
    s.transcript.push_back({Speaker::user, command});

    if (nl::in_kb(s.G, s.kb_view, lexicon_)) {
        auto action = prove_phase(s);
        return {std::move(s), std::move(action)};
    }
    if (!cfg_.feedback) {
        auto action = fail(s, "no_feedback", "I do not know how to achieve ``" + s.goal_text + "''.");
        return {std::move(s), std::move(action)};
    }
    auto action = ask(s, s.goal_text);
    return {std::move(s), std::move(action)};
}

SystemAction DialogEngine::user_answer(DialogSession& s, const std::string& text) const {
    if (s.status != Status::awaiting_user) throw StateError("session " + s.id + " is " + to_string(s.status));
    s.transcript.push_back({Speaker::user, text});

    const std::string clause = nl::answer_clause(text);
    nl::LogicalForm next;
    try {
        next = parse(clause, s.kb_view, nl::Role::goal);
    } catch (const nl::ParseFailure&) {
        if (s.clarified) return fail(s, "parse_failure", "Sorry, I still could not understand that.");
        s.clarified = true;
        SystemAction a;
        a.type = ActionType::ask;
        a.text = "Sorry, I did not understand. How do I know if ``" + s.current_goal_text + "''?";
        a.clarification = true;
        s.transcript.push_back({Speaker::system, a.text});
        return a;
    }

    ++s.i;
    s.goal_stack.push_back(s.G);
    s.G = next;
    if (nl::in_kb(s.G, s.kb_view, lexicon_)) {
        // Each answer explains the goal asked before it.
        while (!s.goal_stack.empty()) {
            const int id = s.kb_view.add_clause(s.goal_stack.back().term(), {s.G.term()},
                                                logic::Provenance::user_session);
            s.pending_rule_ids.push_back(id);
            s.G = s.goal_stack.back();
            s.goal_stack.pop_back();
        }
        return prove_phase(s);
    }
    if (s.i > s.n) return fail(s, "feedback_limit", "Sorry, I could not learn how to achieve ``" + s.goal_text + "''.");
    return ask(s, clause);
}

MatchFn DialogEngine::matcher(const DialogSession& s) const {
    if (cfg_.prover == DialogConfig::Prover::oracle) return exact_match;
    const prover::EmbeddingView* view = &s.view;
    const double T1 = cfg_.prove.T1;
    return [view, T1](const Term& goal, const Term& form) {
        try {
            return prover::soft_unify(goal, form, *view, T1).has_value();
        } catch (const prover::UnknownSymbol&) {
            return false;
        }
    };
}

SystemAction DialogEngine::prove_phase(DialogSession& s) const {
    // Rules from this update loop are the ones a failure must take back.
    const std::vector<int> loop_rules = s.pending_rule_ids;
    auto rollback = [&]() {
        for (int id : loop_rules) s.kb_view.remove_clause(id);
        s.pending_rule_ids.clear();
    };

    logic::KnowledgeBase proof_kb = s.kb_view;
    proof_kb.add_clause(s.A.term(), {s.S.term()}, logic::Provenance::hypothesis);
    proof_kb.add_clause(s.S.term(), {}, logic::Provenance::hypothesis);
    const Term goal = s.G.term();

    prover::SoftProofResult result;
    try {
        if (cfg_.prover == DialogConfig::Prover::oracle) {
            result = prover::oracle_prove(proof_kb, goal, cfg_.prove);
        } else {
            s.view.ensure_all(goal);
            s.view.ensure_all(s.S.term());
            s.view.ensure_all(s.A.term());
            for (const auto& c : proof_kb.clauses()) {
                s.view.ensure_all(c.head);
                for (const auto& b : c.body) s.view.ensure_all(b);
            }
            result = prover::soft_prove(proof_kb, *model_, goal, cfg_.prove, s.view);
        }
    } catch (const Error& e) {
        rollback();
        return fail(s, "engine_error", std::string("Sorry, something went wrong: ") + e.what());
    }

    if (!result.ok()) {
        rollback();
        return fail(s, "no_proof", "Sorry, I could not find a way to achieve ``" + s.goal_text + "''.");
    }
    const auto match = matcher(s);
    bool has_state = false, has_action = false;
    for (const auto* n : result.proof->preorder()) {
        const Term resolved = result.bindings.resolve(n->goal);
        has_state = has_state || match(resolved, s.S.term());
        has_action = has_action || match(resolved, s.A.term());
    }
    if (!has_state || !has_action) {
        rollback();
        return fail(s, has_action ? "state_not_covered" : "action_not_covered",
                    "Sorry, my reasoning for ``" + s.goal_text + "'' does not involve ``" +
                        (has_action ? s.parts.state_text : s.parts.action_text) + "''.");
    }

    SystemAction a;
    a.type = ActionType::succeed;
    a.text = "Okay, I will perform ``" + s.parts.action_text + "'' in order to achieve ``" + s.goal_text + "''.";
    a.proof = result.proof;
    a.proof_text = logic::render_proof(*result.proof, result.bindings);
    a.proof_record = proof_to_json(*result.proof, result.bindings);
    a.presumptions = extract_presumptions(*result.proof, result.bindings, proof_kb, s.S.term(), s.A.term(), match);
    s.presumptions = a.presumptions;
    s.result = std::move(result);
    s.proof_kb = std::move(proof_kb);
    s.status = Status::succeeded;
    s.transcript.push_back({Speaker::system, a.text});
    return a;
}

}  // namespace corgi::dialog
