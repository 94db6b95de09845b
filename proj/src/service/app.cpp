#include "corgi/service/app.hpp"

#include "corgi/logic/parser.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace corgi::service {

AppConfig AppConfig::defaults() {
    AppConfig c;
    const std::string data = CORGI_DEFAULT_DATA_DIR;
    c.kb_path = data + "/umbrella.pl";
    c.types_path = data + "/types.tsv";
    c.lexicon_path = data;
    return c;
}

void AppConfig::apply(const nlohmann::json& j) {
    if (!j.is_object()) throw nn::ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "kb_path") kb_path = value.get<std::string>();
            else if (key == "types_path") types_path = value.get<std::string>();
            else if (key == "lexicon_path") lexicon_path = value.get<std::string>();
            else if (key == "embeddings_path") embeddings_path = value.get<std::string>();
            else if (key == "model_path") model_path = value.get<std::string>();
            else if (key == "prover") prover = value.get<std::string>();
            else if (key == "feedback") feedback = value.get<bool>();
            else if (key == "n") n = value.get<int>();
            else if (key == "k") k = value.get<int>();
            else if (key == "T1") T1 = value.get<double>();
            else if (key == "T2") T2 = value.get<double>();
            else if (key == "max_depth") max_depth = value.get<int>();
            else if (key == "listen_address") listen_address = value.get<std::string>();
            else if (key == "session_store_path") session_store_path = value.get<std::string>();
            else if (key == "seed") seed = value.get<std::uint64_t>();
            else throw nn::ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::type_error&) {
            throw nn::ConfigError("config key '" + key + "' has the wrong type");
        }
    }
}

void AppConfig::apply_file(const std::string& path) {
    try {
        apply(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw nn::ConfigError("config file " + path + ": " + e.what());
    }
}

nlohmann::json AppConfig::to_json() const {
    return {{"kb_path", kb_path},
            {"types_path", types_path},
            {"lexicon_path", lexicon_path},
            {"embeddings_path", embeddings_path},
            {"model_path", model_path},
            {"prover", prover},
            {"feedback", feedback},
            {"n", n},
            {"k", k},
            {"T1", T1},
            {"T2", T2},
            {"max_depth", max_depth},
            {"listen_address", listen_address},
            {"session_store_path", session_store_path},
            {"seed", seed}};
}

void AppConfig::validate() const {
    if (n < 0) throw nn::ConfigError("n must be non-negative");
    if (k < 1) throw nn::ConfigError("k must be at least 1");
    if (!(T1 > 0 && T1 <= 1)) throw nn::ConfigError("T1 must lie in (0, 1]");
    if (!(T2 > 0 && T2 < 1)) throw nn::ConfigError("T2 must lie in (0, 1)");
    if (max_depth < 1) throw nn::ConfigError("max_depth must be positive");
    if (prover != "auto" && prover != "soft" && prover != "oracle") {
        throw nn::ConfigError("prover must be auto, soft or oracle");
    }
    if (prover == "soft" && model_path.empty()) throw nn::ConfigError("soft proving needs model_path");
    namespace fs = std::filesystem;
    auto need = [](const std::string& what, const std::string& p, bool dir) {
        if (p.empty()) return;
        if (dir ? !fs::is_directory(p) : !fs::is_regular_file(p)) {
            throw nn::ConfigError(what + " not found: " + p);
        }
    };
    if (kb_path.empty()) throw nn::ConfigError("kb_path is required");
    need("kb_path", kb_path, false);
    need("types_path", types_path, false);
    need("lexicon_path", lexicon_path, true);
    need("embeddings_path", embeddings_path, false);
    need("model_path", model_path, false);
    host_port();
}

dialog::DialogConfig AppConfig::dialog_config() const {
    dialog::DialogConfig d;
    d.n = n;
    d.feedback = feedback;
    const bool soft = prover == "soft" || (prover == "auto" && !model_path.empty());
    d.prover = soft ? dialog::DialogConfig::Prover::soft : dialog::DialogConfig::Prover::oracle;
    d.prove.k = k;
    d.prove.T1 = T1;
    d.prove.T2 = T2;
    d.prove.limits.max_depth = max_depth;
    return d;
}

std::pair<std::string, int> AppConfig::host_port() const {
    const auto colon = listen_address.rfind(':');
    if (colon == std::string::npos || colon == 0) throw nn::ConfigError("listen_address must be host:port");
    try {
        std::size_t used = 0;
        const std::string port_text = listen_address.substr(colon + 1);
        const int port = std::stoi(port_text, &used);
        if (used != port_text.size() || port < 0 || port > 65535) throw std::invalid_argument("port");
        return {listen_address.substr(0, colon), port};
    } catch (const std::logic_error&) {
        throw nn::ConfigError("listen_address has a bad port: " + listen_address);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

logic::KnowledgeBase load_kb(const std::string& kb_path, const std::string& types_path) {
    auto kb = logic::parse_program(read_text_file(kb_path));
    if (!types_path.empty()) kb.load_types(read_text_file(types_path));
    return kb;
}

nlohmann::json kb_stats(const logic::KnowledgeBase& kb) {
    nlohmann::json by_provenance = nlohmann::json::object();
    nlohmann::json by_domain = nlohmann::json::object();
    int facts = 0;
    for (const auto& c : kb.clauses()) {
        by_provenance[logic::to_string(c.provenance)] = by_provenance.value(logic::to_string(c.provenance), 0) + 1;
        const std::string d = c.domain.empty() ? "untagged" : c.domain;
        by_domain[d] = by_domain.value(d, 0) + 1;
        if (c.is_fact()) ++facts;
    }
    nlohmann::json user_state = nlohmann::json::array();
    for (const auto& [name, arity] : kb.user_state_predicates()) user_state.push_back(name + "/" + std::to_string(arity));
    return {{"clauses", kb.size()},
            {"facts", facts},
            {"rules", static_cast<int>(kb.size()) - facts},
            {"predicates", kb.predicates().size()},
            {"by_provenance", by_provenance},
            {"by_domain", by_domain},
            {"user_state", user_state},
            {"fingerprint", kb.fingerprint()}};
}

Runtime::Runtime(const AppConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    kb_ = load_kb(cfg_.kb_path, cfg_.types_path);
    lexicon_ = nl::Lexicon::load(cfg_.lexicon_path);
    if (!cfg_.model_path.empty()) {
        model_ = nn::NeuralProverModel::load(cfg_.model_path, kb_.fingerprint());
        if (!cfg_.embeddings_path.empty()) nn::load_pretrained_vectors(*model_, cfg_.embeddings_path, cfg_.seed);
    }
    engine_ = std::make_unique<dialog::DialogEngine>(kb_, model(), lexicon_, cfg_.dialog_config());
}

}  // namespace corgi::service
