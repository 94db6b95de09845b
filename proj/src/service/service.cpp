#include "corgi/service/service.hpp"

#include "corgi/service/app.hpp"

#include <httplib.h>

#include <cstdio>

namespace corgi::service {

namespace {

const char* kCommandPrompt = "Please phrase the command as: if <state> then <action> because <goal>.";

Response error(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", code}, {"message", message}}};
}

}  // namespace

SessionService::SessionService(const dialog::DialogEngine& engine, SessionStore* store, std::uint64_t seed)
    : engine_(engine), store_(store), rng_(seed) {}

std::string SessionService::next_id() {
    for (;;) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_()));
        if (!sessions_.count(buf)) return buf;
    }
}

nlohmann::json SessionService::session_json(const Entry& e) const {
    const auto& s = e.session;
    const auto rec = record_of(s, e.created_at);
    nlohmann::json j = {{"session_id", s.id},
                        {"status", dialog::to_string(s.status)},
                        {"transcript", rec.to_json()["transcript"]},
                        {"transcript_text", dialog::export_transcript(s)},
                        {"learned_rules", rec.learned_rules},
                        {"i", s.i},
                        {"n", s.n},
                        {"proof", nullptr},
                        {"presumptions", nlohmann::json::array()}};
    if (s.result && s.result->proof) {
        j["proof"] = dialog::proof_to_json(*s.result->proof, s.result->bindings);
        for (const auto& p : s.presumptions) j["presumptions"].push_back(p.to_json());
    }
    return j;
}

void SessionService::persist(const Entry& e) {
    if (store_) store_->append(record_of(e.session, e.created_at));
}

Response SessionService::create(const nlohmann::json& request) {
    if (!request.is_object() || !request.contains("command") || !request["command"].is_string()) {
        return error(400, "bad_request", "body must be {\"command\": string}");
    }
    std::string id;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        id = next_id();
    }
    auto entry = std::make_unique<Entry>();
    dialog::SystemAction action;
    try {
        auto [session, first] = engine_.start_session(request["command"].get<std::string>(), id);
        entry->session = std::move(session);
        action = std::move(first);
    } catch (const nl::ParseFailure& e) {
        Response r = error(400, "parse_failure", e.what());
        r.body["prompt"] = kCommandPrompt;
        return r;
    }
    entry->created_at = now_iso8601();
    persist(*entry);
    const std::string status = dialog::to_string(entry->session.status);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        sessions_[id] = std::move(entry);
    }
    return {201, {{"session_id", id}, {"status", status}, {"action", action.to_json()}}};
}

Response SessionService::answer(const std::string& id, const nlohmann::json& request) {
    if (!request.is_object() || !request.contains("text") || !request["text"].is_string()) {
        return error(400, "bad_request", "body must be {\"text\": string}");
    }
    Entry* e = nullptr;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return error(404, "unknown_session", "no session " + id);
        e = it->second.get();
    }
    std::unique_lock<std::mutex> busy(e->busy, std::try_to_lock);
    if (!busy.owns_lock()) return error(409, "busy", "another answer for this session is in flight");
    if (e->session.status != dialog::Status::awaiting_user) {
        return error(409, "not_awaiting_user", "session is " + dialog::to_string(e->session.status));
    }
    const auto action = engine_.user_answer(e->session, request["text"].get<std::string>());
    persist(*e);
    nlohmann::json body = {{"session_id", id},
                           {"status", dialog::to_string(e->session.status)},
                           {"action", action.to_json()}};
    if (action.clarification) {
        body["error"] = "parse_failure";
        body["prompt"] = action.text;
        return {400, body};
    }
    return {200, body};
}

Response SessionService::get(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return error(404, "unknown_session", "no session " + id);
    std::lock_guard<std::mutex> busy(it->second->busy);
    return {200, session_json(*it->second)};
}

Response SessionService::kb_stats() const { return {200, service::kb_stats(engine_.base())}; }

int SessionService::restore(std::vector<std::string>& warnings) {
    if (!store_) return 0;
    auto loaded = store_->load();
    warnings.insert(warnings.end(), loaded.warnings.begin(), loaded.warnings.end());
    int restored = 0;
    for (const auto& rec : loaded.records) {
        try {
            auto entry = std::make_unique<Entry>();
            entry->session = replay_record(rec, engine_).first;
            entry->created_at = rec.created_at;
            if (dialog::to_string(entry->session.status) != rec.status) {
                warnings.push_back("session " + rec.id + " replays to " + dialog::to_string(entry->session.status) +
                                   ", stored as " + rec.status);
            }
            std::lock_guard<std::mutex> lock(mutex_);
            sessions_[rec.id] = std::move(entry);
            ++restored;
        } catch (const Error& e) {
            warnings.push_back("session " + rec.id + " not restored: " + e.what());
        }
    }
    return restored;
}

void install_routes(httplib::Server& server, SessionService& service) {
    auto reply = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto body_of = [](const httplib::Request& req, nlohmann::json& out) {
        try {
            out = nlohmann::json::parse(req.body);
            return true;
        } catch (const nlohmann::json::parse_error&) {
            return false;
        }
    };
    server.Post("/v1/sessions", [&service, reply, body_of](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        if (!body_of(req, body)) return reply(res, error(400, "bad_json", "request body is not JSON"));
        reply(res, service.create(body));
    });
    server.Post(R"(/v1/sessions/([0-9a-zA-Z_-]+)/answers)",
                [&service, reply, body_of](const httplib::Request& req, httplib::Response& res) {
                    nlohmann::json body;
                    if (!body_of(req, body)) return reply(res, error(400, "bad_json", "request body is not JSON"));
                    reply(res, service.answer(req.matches[1], body));
                });
    server.Get(R"(/v1/sessions/([0-9a-zA-Z_-]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.get(req.matches[1]));
    });
    server.Get("/v1/kb/stats", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.kb_stats());
    });
    server.Get("/v1/health", [reply](const httplib::Request&, httplib::Response& res) {
        reply(res, {200, {{"ok", true}}});
    });
    server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            reply(res, error(500, "internal", e.what()));
        }
    });
}

}  // namespace corgi::service
