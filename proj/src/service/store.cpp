#include "corgi/service/store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace corgi::service {

namespace {

std::string speaker_name(dialog::Speaker s) { return s == dialog::Speaker::user ? "user" : "system"; }

}  // namespace

nlohmann::json SessionRecord::to_json() const {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : transcript) lines.push_back({{"speaker", speaker_name(l.speaker)}, {"text", l.text}});
    return {{"id", id},
            {"command", command},
            {"answers", answers},
            {"transcript", lines},
            {"status", status},
            {"learned_rules", learned_rules},
            {"created_at", created_at},
            {"updated_at", updated_at}};
}

SessionRecord SessionRecord::from_json(const nlohmann::json& j) {
    SessionRecord r;
    r.id = j.at("id").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.answers = j.at("answers").get<std::vector<std::string>>();
    for (const auto& l : j.at("transcript")) {
        const auto sp = l.at("speaker").get<std::string>();
        if (sp != "user" && sp != "system") throw Error("bad speaker '" + sp + "'");
        r.transcript.push_back({sp == "user" ? dialog::Speaker::user : dialog::Speaker::system,
                                l.at("text").get<std::string>()});
    }
    r.status = j.at("status").get<std::string>();
    r.learned_rules = j.at("learned_rules").get<std::vector<std::string>>();
    r.created_at = j.at("created_at").get<std::string>();
    r.updated_at = j.at("updated_at").get<std::string>();
    return r;
}

bool operator==(const SessionRecord& a, const SessionRecord& b) { return a.to_json() == b.to_json(); }

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SessionRecord record_of(const dialog::DialogSession& s, const std::string& created_at) {
    SessionRecord r;
    r.id = s.id;
    r.command = s.parts.raw;
    r.transcript = s.transcript;
    bool first = true;
    for (const auto& l : s.transcript) {
        if (l.speaker != dialog::Speaker::user) continue;
        if (!first) r.answers.push_back(l.text);
        first = false;
    }
    r.status = dialog::to_string(s.status);
    if (s.status == dialog::Status::succeeded) {
        for (int id : s.pending_rule_ids) r.learned_rules.push_back(s.kb_view.at(id).to_string());
    }
    r.created_at = created_at;
    r.updated_at = now_iso8601();
    return r;
}

std::pair<dialog::DialogSession, std::vector<dialog::SystemAction>> replay_record(const SessionRecord& record,
                                                                                 const dialog::DialogEngine& engine) {
    auto [session, first] = engine.start_session(record.command, record.id);
    std::vector<dialog::SystemAction> actions{first};
    for (const auto& answer : record.answers) {
        if (session.status != dialog::Status::awaiting_user) break;
        actions.push_back(engine.user_answer(session, answer));
    }
    return {std::move(session), std::move(actions)};
}

void SessionStore::append(const SessionRecord& record) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot write session store " + path_);
    out << record.to_json().dump() << '\n';
    out.flush();
    if (!out) throw Error("write to session store " + path_ + " failed");
}

LoadResult SessionStore::load(bool strict) const {
    std::lock_guard<std::mutex> lock(mutex_);
    LoadResult result;
    std::ifstream in(path_);
    if (!in) return result;  // nothing stored yet
    std::map<std::string, std::size_t> slot;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto rec = SessionRecord::from_json(nlohmann::json::parse(line));
            auto it = slot.find(rec.id);
            if (it == slot.end()) {
                slot[rec.id] = result.records.size();
                result.records.push_back(std::move(rec));
            } else {
                result.records[it->second] = std::move(rec);
            }
        } catch (const std::exception& e) {
            if (strict) throw StoreCorrupt(lineno, e.what());
            result.warnings.push_back("skipped line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return result;
}

}  // namespace corgi::service
