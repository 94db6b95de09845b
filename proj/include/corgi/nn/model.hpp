#pragma once

#include "corgi/logic/errors.hpp"
#include "corgi/trace/trace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace corgi::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class ShapeError : public Error {
public:
    using Error::Error;
};
class IndexError : public Error {
public:
    using Error::Error;
};
class UnknownCharacter : public Error {
public:
    using Error::Error;
};
class DivergenceError : public Error {
public:
    using Error::Error;
};
class FormatError : public Error {
public:
    using Error::Error;
};
class CheckpointError : public Error {
public:
    using Error::Error;
};
class ConfigError : public Error {
public:
    using Error::Error;
};

struct ModelConfig {
    int m1 = 256;          // rule embedding width
    int m2 = 300;          // symbol embedding width
    int hidden = 128;      // recurrent core
    int char_hidden = 64;  // character encoder output
    int enc_out = 128;     // width of s_t
    int ffn_hidden = 128;  // hidden width of every two-layer head
    std::uint64_t seed = 1;
};

/// All trainable tensors. Vectors are stored as one-column matrices so that
/// every tensor can be visited uniformly.
struct Params {
    Mat M_rule, M_var;
    Mat char_Wx, char_Wh, char_b;
    Mat enc_W1, enc_b1, enc_W2, enc_b2;
    Mat lstm_W, lstm_b;
    Mat end_W1, end_b1, end_W2, end_b2;
    Mat rule_W1, rule_b1, rule_W2, rule_b2;
    Mat var_W1, var_b1, var_W2, var_b2;

    template <class F>
    void for_each(F&& f) {
        visit(*this, f);
    }
    template <class F>
    void for_each(F&& f) const {
        visit(*this, f);
    }

    /// Same shapes, all zeros.
    Params zeros_like() const;
    std::size_t count() const;
    double squared_norm() const;
    void add_scaled(const Params& other, double scale);
    void scale(double factor);

private:
    template <class P, class F>
    static void visit(P& p, F& f) {
        f("M_rule", p.M_rule);
        f("M_var", p.M_var);
        f("char_Wx", p.char_Wx);
        f("char_Wh", p.char_Wh);
        f("char_b", p.char_b);
        f("enc_W1", p.enc_W1);
        f("enc_b1", p.enc_b1);
        f("enc_W2", p.enc_W2);
        f("enc_b2", p.enc_b2);
        f("lstm_W", p.lstm_W);
        f("lstm_b", p.lstm_b);
        f("end_W1", p.end_W1);
        f("end_b1", p.end_b1);
        f("end_W2", p.end_W2);
        f("end_b2", p.end_b2);
        f("rule_W1", p.rule_W1);
        f("rule_b1", p.rule_b1);
        f("rule_W2", p.rule_W2);
        f("rule_b2", p.rule_b2);
        f("var_W1", p.var_W1);
        f("var_b1", p.var_b1);
        f("var_W2", p.var_W2);
        f("var_b2", p.var_b2);
    }
};

struct StepState {
    Vec h;
    Vec c;
    int t = 0;
};

struct StepOutput {
    double c_t = 0.0;
    Vec rule_dist;
    std::vector<Vec> arg_dists;
    StepState next;
};

/// Character vocabulary: a-z, 0-9 and underscore. Upper case folds to lower
/// case; builtin operators are spelled as short identifiers (`>=` is "ge").
constexpr int kCharVocab = 37;
int char_index(char c);
std::string encoder_name(const std::string& predicate);

class NeuralProverModel {
public:
    NeuralProverModel() = default;
    /// n1 = number of builtin clauses, symbols = the trace symbol table.
    NeuralProverModel(ModelConfig cfg, int n1, trace::SymbolTable symbols, std::uint64_t kb_fingerprint);

    const ModelConfig& config() const noexcept { return cfg_; }
    int n1() const noexcept { return n1_; }
    int n2() const noexcept { return static_cast<int>(symbols_.size()); }
    const trace::SymbolTable& symbols() const noexcept { return symbols_; }
    std::uint64_t kb_fingerprint() const noexcept { return kb_fingerprint_; }

    Params& params() noexcept { return params_; }
    const Params& params() const noexcept { return params_; }

    StepState initial_state() const;

    /// s_t for a predicate name. Throws UnknownCharacter (also for "").
    Vec encode_query(const std::string& name) const;

    /// One model step. Rule ids may be -1 (zero embedding). `args` are symbol
    /// ids; one distribution is returned per argument.
    StepOutput step(const StepState& state, const Vec& s, int parent_rule, int left_rule,
                    const std::vector<int>& args) const;
    StepOutput step(const StepState& state, const std::string& name, int parent_rule, int left_rule,
                    const std::vector<int>& args) const {
        return step(state, encode_query(name), parent_rule, left_rule, args);
    }

    /// Negative log-likelihood of one trace, optionally accumulating the
    /// gradient into `grad` (which must have the parameter shapes).
    double loss(const trace::Trace& trace, Params* grad = nullptr) const;

    /// Teacher-forced top-1 rule predictions: (correct, total) over steps
    /// that select a clause.
    std::pair<std::size_t, std::size_t> rule_accuracy(const trace::Trace& trace) const;

    /// Checks shapes against n1, n2 and the config. Throws ShapeError.
    void check_shapes() const;

    /// Versioned JSON container.
    std::string to_json() const;
    static NeuralProverModel from_json(const std::string& text);
    void save(const std::string& path) const;
    /// Refuses a checkpoint whose KB fingerprint differs from `expected`.
    static NeuralProverModel load(const std::string& path, std::uint64_t expected_fingerprint);

private:
    ModelConfig cfg_;
    int n1_ = 0;
    trace::SymbolTable symbols_;
    std::uint64_t kb_fingerprint_ = 0;
    Params params_;
};

/// Central differences on a random 1% sample of parameters (at least a
/// few dozen). Returns the largest |a - n| / max(1e-7, |a| + |n|).
double gradient_check(const NeuralProverModel& model, const trace::Trace& trace, double epsilon,
                      std::uint64_t seed = 0);

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    int batch_size = 4;
    std::uint64_t seed = 1;
    double gradient_clip = 5.0;
    std::string embedding_init;  // empty = random, otherwise a pretrained vector file
    double time_budget_seconds = 0;  // 0 = no limit
    /// Stops early once teacher-forced rule accuracy reaches this (0 = never).
    double target_accuracy = 0;
};

struct TrainReport {
    std::vector<double> epoch_loss;  // mean loss per epoch, before that epoch's updates
    double final_loss = 0;
    double accuracy = 0;
    int epochs_run = 0;
    int pretrained_rows = 0;
};

/// Plain SGD over mini-batches with gradient-norm clipping. Deterministic
/// under cfg.seed. Throws ConfigError on bad settings and DivergenceError
/// when the loss stops being finite.
TrainReport train(NeuralProverModel& model, const std::vector<trace::Trace>& traces, const TrainConfig& cfg,
                  const std::function<void(int epoch, double loss)>& on_epoch = {});

double mean_loss(const NeuralProverModel& model, const std::vector<trace::Trace>& traces);
double rule_accuracy(const NeuralProverModel& model, const std::vector<trace::Trace>& traces);

/// Reads `token v1 ... vm2` lines into M_var rows for known symbols; other
/// rows are redrawn from N(0, 0.1^2) with `seed`. Returns the rows covered.
int load_pretrained_vectors(NeuralProverModel& model, const std::string& path, std::uint64_t seed);
int load_pretrained_vectors_text(NeuralProverModel& model, const std::string& text, std::uint64_t seed);

}  // namespace corgi::nn
