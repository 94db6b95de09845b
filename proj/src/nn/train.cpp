#include "corgi/nn/model.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace corgi::nn {

using nlohmann::json;

double mean_loss(const NeuralProverModel& model, const std::vector<trace::Trace>& traces) {
    if (traces.empty()) return 0.0;
    double sum = 0;
    for (const auto& t : traces) sum += model.loss(t);
    return sum / static_cast<double>(traces.size());
}

double rule_accuracy(const NeuralProverModel& model, const std::vector<trace::Trace>& traces) {
    std::size_t correct = 0, total = 0;
    for (const auto& t : traces) {
        auto [c, n] = model.rule_accuracy(t);
        correct += c;
        total += n;
    }
    return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TrainReport train(NeuralProverModel& model, const std::vector<trace::Trace>& traces, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
    if (!(cfg.learning_rate > 0)) throw ConfigError("learning_rate must be positive");
    if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(cfg.gradient_clip > 0)) throw ConfigError("gradient_clip must be positive");
    if (traces.empty()) throw ConfigError("no training traces");

    TrainReport report;
    if (!cfg.embedding_init.empty()) {
        report.pretrained_rows = load_pretrained_vectors(model, cfg.embedding_init, cfg.seed);
    }
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(traces.size());
    std::iota(order.begin(), order.end(), 0);
    const auto start = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the raw engine keeps the shuffle identical across
        // standard libraries.
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
        double epoch_loss = 0;
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
            Params grad = model.params().zeros_like();
            for (std::size_t k = b; k < end; ++k) epoch_loss += model.loss(traces[order[k]], &grad);
            grad.scale(1.0 / static_cast<double>(end - b));
            const double norm = std::sqrt(grad.squared_norm());
            if (!std::isfinite(norm)) throw DivergenceError("gradient became non-finite in epoch " + std::to_string(epoch));
            if (norm > cfg.gradient_clip) grad.scale(cfg.gradient_clip / norm);
            model.params().add_scaled(grad, -cfg.learning_rate);
        }
        epoch_loss /= static_cast<double>(traces.size());
        if (!std::isfinite(epoch_loss)) throw DivergenceError("loss became non-finite in epoch " + std::to_string(epoch));
        report.epoch_loss.push_back(epoch_loss);
        report.epochs_run = epoch + 1;
        if (on_epoch) on_epoch(epoch, epoch_loss);
        if (cfg.target_accuracy > 0 && rule_accuracy(model, traces) >= cfg.target_accuracy) break;
        if (cfg.time_budget_seconds > 0) {
            const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
            if (spent.count() > cfg.time_budget_seconds) break;
        }
    }
    report.final_loss = mean_loss(model, traces);
    if (!std::isfinite(report.final_loss)) throw DivergenceError("final loss is non-finite");
    report.accuracy = rule_accuracy(model, traces);
    return report;
}

int load_pretrained_vectors_text(NeuralProverModel& model, const std::string& text, std::uint64_t seed) {
    Mat& M = model.params().M_var;
    const int width = model.config().m2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 0.1);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = d(rng);

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<bool> covered(static_cast<std::size_t>(model.n2()), false);
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;
        std::vector<double> values;
        std::string field;
        while (ls >> field) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw FormatError("line " + std::to_string(lineno) + ": bad number '" + field + "'");
            }
        }
        if (static_cast<int>(values.size()) != width) {
            throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                              " values, found " + std::to_string(values.size()));
        }
        const int id = model.symbols().find(token);
        if (id < 0) continue;
        for (int k = 0; k < width; ++k) M(id, k) = values[static_cast<std::size_t>(k)];
        covered[static_cast<std::size_t>(id)] = true;
    }
    return static_cast<int>(std::count(covered.begin(), covered.end(), true));
}

int load_pretrained_vectors(NeuralProverModel& model, const std::string& path, std::uint64_t seed) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return load_pretrained_vectors_text(model, ss.str(), seed);
}

namespace {

constexpr int kCheckpointVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t unhex(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

std::string NeuralProverModel::to_json() const {
    json j;
    j["format"] = "corgi-model";
    j["version"] = kCheckpointVersion;
    j["config"] = {{"m1", cfg_.m1},         {"m2", cfg_.m2},           {"hidden", cfg_.hidden},
                   {"char_hidden", cfg_.char_hidden}, {"enc_out", cfg_.enc_out}, {"ffn_hidden", cfg_.ffn_hidden},
                   {"seed", cfg_.seed}};
    j["n1"] = n1_;
    j["n2"] = n2();
    j["kb_fingerprint"] = hex64(kb_fingerprint_);
    j["symbol_hash"] = hex64(symbols_.hash());
    j["symbols"] = symbols_.symbols();
    json tensors = json::object();
    params_.for_each([&](const char* name, const Mat& m) {
        std::vector<double> data(m.data(), m.data() + m.size());
        tensors[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
    });
    j["params"] = std::move(tensors);
    return j.dump();
}

NeuralProverModel NeuralProverModel::from_json(const std::string& text) {
    NeuralProverModel m;
    try {
        const json j = json::parse(text);
        if (j.at("format") != "corgi-model") throw CheckpointError("not a model checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw CheckpointError("unsupported checkpoint version " + j.at("version").dump());
        }
        const json& c = j.at("config");
        m.cfg_.m1 = c.at("m1");
        m.cfg_.m2 = c.at("m2");
        m.cfg_.hidden = c.at("hidden");
        m.cfg_.char_hidden = c.at("char_hidden");
        m.cfg_.enc_out = c.at("enc_out");
        m.cfg_.ffn_hidden = c.at("ffn_hidden");
        m.cfg_.seed = c.at("seed");
        m.n1_ = j.at("n1");
        m.kb_fingerprint_ = unhex(j.at("kb_fingerprint"));
        m.symbols_ = trace::SymbolTable(j.at("symbols").get<std::vector<std::string>>());
        if (hex64(m.symbols_.hash()) != j.at("symbol_hash")) throw CheckpointError("symbol table hash mismatch");
        const json& tensors = j.at("params");
        m.params_.for_each([&](const char* name, Mat& t) {
            const json& e = tensors.at(name);
            const auto rows = e.at("rows").get<Eigen::Index>();
            const auto cols = e.at("cols").get<Eigen::Index>();
            const auto data = e.at("data").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
                throw CheckpointError(std::string("tensor ") + name + " has the wrong element count");
            }
            t = Eigen::Map<const Mat>(data.data(), rows, cols);
        });
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
    }
    m.check_shapes();
    return m;
}

void NeuralProverModel::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw CheckpointError("cannot write " + path);
    f << to_json();
}

NeuralProverModel NeuralProverModel::load(const std::string& path, std::uint64_t expected_fingerprint) {
    std::ifstream f(path);
    if (!f) throw CheckpointError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    NeuralProverModel m = from_json(ss.str());
    if (m.kb_fingerprint() != expected_fingerprint) {
        throw CheckpointError("checkpoint was trained against a different knowledge base (fingerprint " +
                              hex64(m.kb_fingerprint()) + ", expected " + hex64(expected_fingerprint) + ")");
    }
    return m;
}

}  // namespace corgi::nn
