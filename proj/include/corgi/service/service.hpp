#pragma once

#include "corgi/service/store.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

namespace httplib {
class Server;
}

namespace corgi::service {

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// Session bookkeeping behind the HTTP API. Every method is safe to call
/// from several threads; answers to one session are serialized and a
/// concurrent second answer is rejected with 409.
class SessionService {
public:
    /// `store` may be null (no persistence).
    SessionService(const dialog::DialogEngine& engine, SessionStore* store, std::uint64_t seed = 1);

    /// {"command": text} -> 201 {session_id, status, action}
    Response create(const nlohmann::json& request);
    /// {"text": answer} -> 200 {session_id, status, action}
    Response answer(const std::string& id, const nlohmann::json& request);
    /// 200 {session_id, status, transcript, proof, presumptions, learned_rules, i, n}
    Response get(const std::string& id) const;
    Response kb_stats() const;

    /// Rebuilds stored sessions from the store, each in its own overlay.
    /// Returns the number restored; failures are reported in `warnings`.
    int restore(std::vector<std::string>& warnings);

private:
    struct Entry {
        dialog::DialogSession session;
        std::string created_at;
        std::mutex busy;
    };

    std::string next_id();
    nlohmann::json session_json(const Entry& e) const;
    void persist(const Entry& e);

    const dialog::DialogEngine& engine_;
    SessionStore* store_;
    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<Entry>> sessions_;
    std::mt19937_64 rng_;
};

/// Routes under /v1:
///   POST /v1/sessions               create a session from a command
///   POST /v1/sessions/{id}/answers  answer the pending question
///   GET  /v1/sessions/{id}          status, transcript, proof, presumptions
///   GET  /v1/kb/stats               clause counts of the base KB
///   GET  /v1/health
void install_routes(httplib::Server& server, SessionService& service);

}  // namespace corgi::service
