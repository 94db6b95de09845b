#pragma once

#include "corgi/dialog/dialog.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace corgi::service {

/// Effective settings. Layering: defaults, then a JSON config file, then
/// command-line flags; each layer only overrides the keys it names.
struct AppConfig {
    std::string kb_path;
    std::string types_path;
    std::string lexicon_path;  // directory with verbs.txt, stopwords.txt, multiwords.txt
    std::string embeddings_path;
    std::string model_path;
    std::string prover = "auto";  // auto | soft | oracle; auto picks soft iff a model is given
    bool feedback = true;
    int n = 3;
    int k = 5;
    double T1 = 0.9;
    double T2 = 0.5;
    int max_depth = 20;
    std::string listen_address = "127.0.0.1:8080";
    std::string session_store_path;
    std::uint64_t seed = 1;

    /// Paths point into the bundled data directory.
    static AppConfig defaults();

    /// Overrides the keys present in `j`. Unknown keys throw nn::ConfigError.
    void apply(const nlohmann::json& j);
    void apply_file(const std::string& path);
    nlohmann::json to_json() const;

    /// Thresholds inside the prover's bounds and every named path readable.
    void validate() const;

    dialog::DialogConfig dialog_config() const;
    /// "host:port" split; throws nn::ConfigError on a malformed address.
    std::pair<std::string, int> host_port() const;
};

std::string read_text_file(const std::string& path);

/// Knowledge base with its types dictionary loaded.
logic::KnowledgeBase load_kb(const std::string& kb_path, const std::string& types_path);

/// Clause counts by provenance and domain, plus predicate and user-state
/// declarations.
nlohmann::json kb_stats(const logic::KnowledgeBase& kb);

/// Everything a dialog needs, loaded once and immutable afterwards.
class Runtime {
public:
    explicit Runtime(const AppConfig& cfg);
    Runtime(const Runtime&) = delete;  // the engine holds references into this object
    Runtime& operator=(const Runtime&) = delete;

    const AppConfig& config() const noexcept { return cfg_; }
    const logic::KnowledgeBase& kb() const noexcept { return kb_; }
    const nl::Lexicon& lexicon() const noexcept { return lexicon_; }
    const nn::NeuralProverModel* model() const noexcept { return model_ ? &*model_ : nullptr; }
    const dialog::DialogEngine& engine() const noexcept { return *engine_; }

private:
    AppConfig cfg_;
    logic::KnowledgeBase kb_;
    nl::Lexicon lexicon_;
    std::optional<nn::NeuralProverModel> model_;
    std::unique_ptr<dialog::DialogEngine> engine_;
};

}  // namespace corgi::service
