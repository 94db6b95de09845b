#pragma once

#include "corgi/dialog/dialog.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace corgi::data {

class ValidationError : public Error {
public:
    ValidationError(int record, std::string field, const std::string& reason)
        : Error("record " + std::to_string(record) + ", field '" + field + "': " + reason),
          record_(record),
          field_(std::move(field)) {}

    int record() const noexcept { return record_; }
    const std::string& field() const noexcept { return field_; }

private:
    int record_;
    std::string field_;
};

struct PresumptionNote {
    int index = 0;  // word position in the original command
    std::string text;
    friend bool operator==(const PresumptionNote&, const PresumptionNote&) = default;
};

struct CommandRecord {
    std::string command;
    std::string domain;        // restricted | everyday
    std::string because_type;  // goal | anti-goal | modifier | conjunction
    int template_id = 5;       // 1..5, 5 = other
    std::vector<PresumptionNote> presumptions;

    nlohmann::json to_json() const;
    friend bool operator==(const CommandRecord&, const CommandRecord&) = default;
};

/// Whitespace-separated words.
std::vector<std::string> words_of(const std::string& text);

/// Throws ValidationError naming `record` (1-based line) and the bad field.
CommandRecord parse_record(const nlohmann::json& j, int record);

/// One JSON object per line. Blank lines and lines holding a "meta" object
/// are skipped.
std::vector<CommandRecord> parse_dataset(const std::string& text);
std::vector<CommandRecord> load_dataset(const std::string& path);
std::string serialize_dataset(const std::vector<CommandRecord>& records);

/// Count per "domain/because_type".
std::map<std::string, int> dataset_counts(const std::vector<CommandRecord>& records);

/// The command with every presumption inserted before the word at its index,
/// applied from the highest index down. Presumptions sharing an index keep
/// their listed order.
std::string insert_presumptions(const CommandRecord& record);

struct ReplayScript {
    std::string task_id;
    std::string command;
    std::vector<std::string> turns;
    std::string expected;  // succeed | fail

    nlohmann::json to_json() const;
};

std::vector<ReplayScript> parse_scripts(const std::string& text, int n = 3);
std::vector<ReplayScript> load_scripts(const std::string& path, int n = 3);

struct TaskOutcome {
    std::string task_id;
    std::string expected;
    std::string outcome;  // succeed | fail
    std::string reason;   // empty on success
    int turns_used = 0;
    int asks = 0;
    std::vector<std::string> rules;  // clauses learned and kept
    std::string transcript;
};

struct EvalReport {
    double success_rate = 0.0;
    std::vector<TaskOutcome> outcomes;
    int rules_contributed = 0;
    int unique_rules = 0;
    int matched_expected = 0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// Runs each script through a fresh session, feeding the turns in order. A
/// task succeeds iff the engine emits Succeed; running out of turns while
/// the engine is still asking counts as a failure.
EvalReport evaluate(const std::vector<ReplayScript>& tasks, const dialog::DialogEngine& engine);

}  // namespace corgi::data
