#include "corgi/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace corgi::data {

namespace {

const std::set<std::string> kDomains = {"restricted", "everyday"};
const std::set<std::string> kBecauseTypes = {"goal", "anti-goal", "modifier", "conjunction"};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename F>
void for_each_record(const std::string& text, F&& f) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(lineno, "json", e.what());
        }
        if (!j.is_object()) throw ValidationError(lineno, "json", "expected an object");
        if (j.contains("meta")) continue;
        f(j, lineno);
    }
}

std::string string_field(const nlohmann::json& j, const char* name, int record) {
    if (!j.contains(name) || !j[name].is_string()) throw ValidationError(record, name, "missing or not a string");
    return j[name].get<std::string>();
}

}  // namespace

nlohmann::json CommandRecord::to_json() const {
    nlohmann::json ps = nlohmann::json::array();
    for (const auto& p : presumptions) ps.push_back({{"index", p.index}, {"text", p.text}});
    return {{"command", command},
            {"domain", domain},
            {"because_type", because_type},
            {"template", template_id},
            {"presumptions", ps}};
}

std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

CommandRecord parse_record(const nlohmann::json& j, int record) {
    CommandRecord r;
    r.command = string_field(j, "command", record);
    if (words_of(r.command).empty()) throw ValidationError(record, "command", "empty command");
    r.domain = string_field(j, "domain", record);
    if (!kDomains.count(r.domain)) throw ValidationError(record, "domain", "unknown domain '" + r.domain + "'");
    r.because_type = string_field(j, "because_type", record);
    if (!kBecauseTypes.count(r.because_type)) {
        throw ValidationError(record, "because_type", "unknown tag '" + r.because_type + "'");
    }
    if (!j.contains("template") || !j["template"].is_number_integer()) {
        throw ValidationError(record, "template", "missing or not an integer");
    }
    r.template_id = j["template"].get<int>();
    if (r.template_id < 1 || r.template_id > 5) throw ValidationError(record, "template", "must lie in 1..5");

    const auto n_words = static_cast<int>(words_of(r.command).size());
    if (j.contains("presumptions")) {
        if (!j["presumptions"].is_array()) throw ValidationError(record, "presumptions", "not an array");
        for (const auto& p : j["presumptions"]) {
            if (!p.is_object() || !p.contains("index") || !p["index"].is_number_integer() || !p.contains("text") ||
                !p["text"].is_string()) {
                throw ValidationError(record, "presumptions", "entries need an integer index and a text");
            }
            PresumptionNote note{p["index"].get<int>(), p["text"].get<std::string>()};
            if (note.index < 0 || note.index > n_words) {
                throw ValidationError(record, "presumptions",
                                      "index " + std::to_string(note.index) + " outside [0, " +
                                          std::to_string(n_words) + "]");
            }
            if (words_of(note.text).empty()) throw ValidationError(record, "presumptions", "empty text");
            r.presumptions.push_back(std::move(note));
        }
    }
    return r;
}

std::vector<CommandRecord> parse_dataset(const std::string& text) {
    std::vector<CommandRecord> out;
    for_each_record(text, [&](const nlohmann::json& j, int lineno) { out.push_back(parse_record(j, lineno)); });
    return out;
}

std::vector<CommandRecord> load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

std::string serialize_dataset(const std::vector<CommandRecord>& records) {
    std::string out;
    for (const auto& r : records) out += r.to_json().dump() + "\n";
    return out;
}

std::map<std::string, int> dataset_counts(const std::vector<CommandRecord>& records) {
    std::map<std::string, int> out;
    for (const auto& r : records) ++out[r.domain + "/" + r.because_type];
    return out;
}

std::string insert_presumptions(const CommandRecord& record) {
    std::vector<std::string> words = words_of(record.command);
    std::vector<std::size_t> order(record.presumptions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Highest index first; among equal indices the last-listed goes in first
    // so the listed order survives.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int ia = record.presumptions[a].index;
        const int ib = record.presumptions[b].index;
        return ia != ib ? ia > ib : a > b;
    });
    for (std::size_t k : order) {
        const auto& p = record.presumptions[k];
        words.insert(words.begin() + p.index, p.text);
    }
    std::string out;
    for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
    return out;
}

nlohmann::json ReplayScript::to_json() const {
    return {{"task_id", task_id}, {"command", command}, {"turns", turns}, {"expected", expected}};
}

std::vector<ReplayScript> parse_scripts(const std::string& text, int n) {
    std::vector<ReplayScript> out;
    for_each_record(text, [&](const nlohmann::json& j, int lineno) {
        ReplayScript s;
        s.task_id = string_field(j, "task_id", lineno);
        s.command = string_field(j, "command", lineno);
        s.expected = string_field(j, "expected", lineno);
        if (s.expected != "succeed" && s.expected != "fail") {
            throw ValidationError(lineno, "expected", "must be succeed or fail");
        }
        if (!j.contains("turns") || !j["turns"].is_array()) throw ValidationError(lineno, "turns", "not an array");
        for (const auto& t : j["turns"]) {
            if (!t.is_string()) throw ValidationError(lineno, "turns", "turns must be strings");
            s.turns.push_back(t.get<std::string>());
        }
        if (static_cast<int>(s.turns.size()) > n + 1) {
            throw ValidationError(lineno, "turns", "more than n + 1 = " + std::to_string(n + 1) + " turns");
        }
        out.push_back(std::move(s));
    });
    return out;
}

std::vector<ReplayScript> load_scripts(const std::string& path, int n) { return parse_scripts(read_file(path), n); }

nlohmann::json EvalReport::to_json() const {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& o : outcomes) {
        tasks.push_back({{"task_id", o.task_id},
                         {"expected", o.expected},
                         {"outcome", o.outcome},
                         {"reason", o.reason},
                         {"turns_used", o.turns_used},
                         {"asks", o.asks},
                         {"rules", o.rules}});
    }
    return {{"success_rate", success_rate},
            {"tasks", tasks},
            {"rules_contributed", rules_contributed},
            {"unique_rules", unique_rules},
            {"matched_expected", matched_expected},
            {"warnings", warnings}};
}

EvalReport evaluate(const std::vector<ReplayScript>& tasks, const dialog::DialogEngine& engine) {
    EvalReport report;
    if (tasks.empty()) {
        report.warnings.push_back("no tasks; success rate reported as 0");
        return report;
    }
    std::set<std::string> unique;
    int successes = 0;
    for (const auto& task : tasks) {
        TaskOutcome o;
        o.task_id = task.task_id;
        o.expected = task.expected;
        try {
            auto [session, action] = engine.start_session(task.command, task.task_id);
            std::size_t next = 0;
            while (action.type == dialog::ActionType::ask) {
                ++o.asks;
                if (next >= task.turns.size()) break;
                action = engine.user_answer(session, task.turns[next++]);
            }
            o.turns_used = static_cast<int>(next);
            if (action.type == dialog::ActionType::succeed) {
                o.outcome = "succeed";
                for (int id : session.pending_rule_ids) o.rules.push_back(session.kb_view.at(id).to_string());
            } else {
                o.outcome = "fail";
                o.reason = action.type == dialog::ActionType::ask ? "script_exhausted" : action.reason;
            }
            o.transcript = dialog::export_transcript(session);
        } catch (const nl::ParseFailure& e) {
            o.outcome = "fail";
            o.reason = std::string("parse_failure: ") + e.what();
        }
        if (o.outcome == "succeed") ++successes;
        if (o.outcome == o.expected) ++report.matched_expected;
        report.rules_contributed += static_cast<int>(o.rules.size());
        unique.insert(o.rules.begin(), o.rules.end());
        report.outcomes.push_back(std::move(o));
    }
    report.success_rate = static_cast<double>(successes) / static_cast<double>(tasks.size());
    report.unique_rules = static_cast<int>(unique.size());
    return report;
}

}  // namespace corgi::data
