#pragma once

#include "corgi/dialog/dialog.hpp"

#include <nlohmann/json.hpp>

#include <mutex>
#include <string>
#include <vector>

namespace corgi::service {

class StoreCorrupt : public Error {
public:
    StoreCorrupt(int line, const std::string& reason)
        : Error("session store line " + std::to_string(line) + ": " + reason), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct SessionRecord {
    std::string id;
    std::string command;
    std::vector<std::string> answers;  // user turns after the command
    std::vector<dialog::TranscriptLine> transcript;
    std::string status;
    std::vector<std::string> learned_rules;  // clause text, kept only on success
    std::string created_at;
    std::string updated_at;

    nlohmann::json to_json() const;
    static SessionRecord from_json(const nlohmann::json& j);
    friend bool operator==(const SessionRecord& a, const SessionRecord& b);
};

/// Snapshot of a live session; answers are read back from the transcript.
SessionRecord record_of(const dialog::DialogSession& s, const std::string& created_at);

/// UTC time, ISO 8601 to the second.
std::string now_iso8601();

/// Rebuilds a session by replaying its command and answers. The learned
/// rules come back inside the rebuilt session only; the base KB is untouched.
std::pair<dialog::DialogSession, std::vector<dialog::SystemAction>> replay_record(const SessionRecord& record,
                                                                                 const dialog::DialogEngine& engine);

struct LoadResult {
    std::vector<SessionRecord> records;  // latest snapshot per session, first-seen order
    std::vector<std::string> warnings;   // one per skipped line
};

/// Append-only log, one JSON record per line. Each update appends a full
/// snapshot; loading keeps the newest snapshot of every session.
class SessionStore {
public:
    explicit SessionStore(std::string path) : path_(std::move(path)) {}

    void append(const SessionRecord& record);
    /// Unreadable lines are skipped with a warning; `strict` raises
    /// StoreCorrupt instead.
    LoadResult load(bool strict = false) const;
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    mutable std::mutex mutex_;
};

}  // namespace corgi::service
