#include "corgi/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace corgi::nn {

namespace {

Vec relu(const Vec& z) { return z.cwiseMax(0.0); }
Vec relu_mask(const Vec& z) { return (z.array() > 0.0).cast<double>().matrix(); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
Vec sigmoid(const Vec& z) { return z.unaryExpr([](double x) { return sigmoid(x); }); }

// log of the softmax, stable.
Vec log_softmax(const Vec& z) {
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    return z.array() - lse;
}

// -log sigmoid(x) for target 1, -log(1 - sigmoid(x)) for target 0.
double bce_with_logit(double x, bool target) {
    const double softplus = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    return target ? softplus - x : softplus;
}

void fill_normal(Mat& m, std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> d(0.0, sigma);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
}

Mat dense(std::mt19937_64& rng, int rows, int cols) {
    Mat m(rows, cols);
    fill_normal(m, rng, 1.0 / std::sqrt(static_cast<double>(cols)));
    return m;
}

Mat zero_col(int rows) { return Mat::Zero(rows, 1); }

// Two affine layers with a rectifier between.
struct Ffn {
    const Mat& W1;
    const Mat& b1;
    const Mat& W2;
    const Mat& b2;
};

struct FfnCache {
    Vec in, z1, a1, out;
};

FfnCache ffn_forward(const Ffn& f, const Vec& in) {
    FfnCache c;
    c.in = in;
    c.z1 = f.W1 * in + f.b1.col(0);
    c.a1 = relu(c.z1);
    c.out = f.W2 * c.a1 + f.b2.col(0);
    return c;
}

// Accumulates parameter gradients and returns d(in).
Vec ffn_backward(const Ffn& f, const FfnCache& c, const Vec& dout, Mat& gW1, Mat& gb1, Mat& gW2, Mat& gb2) {
    gW2.noalias() += dout * c.a1.transpose();
    gb2.col(0) += dout;
    const Vec dz1 = (f.W2.transpose() * dout).cwiseProduct(relu_mask(c.z1));
    gW1.noalias() += dz1 * c.in.transpose();
    gb1.col(0) += dz1;
    return f.W1.transpose() * dz1;
}

std::string alias_for(const std::string& op) {
    if (op == "=") return "is";
    if (op == "==") return "eq";
    if (op == ">=") return "ge";
    if (op == "=<") return "le";
    if (op == ">") return "gt";
    if (op == "<") return "lt";
    return op;
}

}  // namespace

int char_index(char c) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'z') return c - 'a';
    if (c >= '0' && c <= '9') return 26 + (c - '0');
    if (c == '_') return 36;
    return -1;
}

std::string encoder_name(const std::string& predicate) { return alias_for(predicate); }

Params Params::zeros_like() const {
    Params z = *this;
    z.for_each([](const char*, Mat& m) { m.setZero(); });
    return z;
}

std::size_t Params::count() const {
    std::size_t n = 0;
    for_each([&](const char*, const Mat& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

double Params::squared_norm() const {
    double s = 0;
    for_each([&](const char*, const Mat& m) { s += m.squaredNorm(); });
    return s;
}

void Params::add_scaled(const Params& other, double scale) {
    std::vector<const Mat*> src;
    other.for_each([&](const char*, const Mat& m) { src.push_back(&m); });
    std::size_t i = 0;
    for_each([&](const char*, Mat& m) { m += scale * *src[i++]; });
}

void Params::scale(double factor) {
    for_each([&](const char*, Mat& m) { m *= factor; });
}

NeuralProverModel::NeuralProverModel(ModelConfig cfg, int n1, trace::SymbolTable symbols,
                                     std::uint64_t kb_fingerprint)
    : cfg_(cfg), n1_(n1), symbols_(std::move(symbols)), kb_fingerprint_(kb_fingerprint) {
    if (n1 <= 0 || symbols_.size() == 0) throw ConfigError("model needs at least one clause and one symbol");
    if (cfg.m1 <= 0 || cfg.m2 <= 0 || cfg.hidden <= 0 || cfg.char_hidden <= 0 || cfg.enc_out <= 0 ||
        cfg.ffn_hidden <= 0) {
        throw ConfigError("model dimensions must be positive");
    }
    std::mt19937_64 rng(cfg.seed);
    const int n2 = static_cast<int>(symbols_.size());
    const int h = cfg.hidden;
    const int f = cfg.ffn_hidden;
    auto& p = params_;
    p.M_rule = Mat(n1, cfg.m1);
    fill_normal(p.M_rule, rng, 0.1);
    p.M_var = Mat(n2, cfg.m2);
    fill_normal(p.M_var, rng, 0.1);
    p.char_Wx = dense(rng, cfg.char_hidden, kCharVocab);
    p.char_Wh = dense(rng, cfg.char_hidden, cfg.char_hidden);
    p.char_b = zero_col(cfg.char_hidden);
    p.enc_W1 = dense(rng, f, cfg.char_hidden);
    p.enc_b1 = zero_col(f);
    p.enc_W2 = dense(rng, cfg.enc_out, f);
    p.enc_b2 = zero_col(cfg.enc_out);
    const int in = cfg.enc_out + 2 * cfg.m1;
    p.lstm_W = dense(rng, 4 * h, in + h);
    p.lstm_b = zero_col(4 * h);
    p.lstm_b.block(h, 0, h, 1).setOnes();  // forget gate starts open
    p.end_W1 = dense(rng, f, h);
    p.end_b1 = zero_col(f);
    p.end_W2 = dense(rng, 1, f);
    p.end_b2 = zero_col(1);
    p.rule_W1 = dense(rng, f, h);
    p.rule_b1 = zero_col(f);
    p.rule_W2 = dense(rng, n1, f);
    p.rule_b2 = zero_col(n1);
    p.var_W1 = dense(rng, f, cfg.m2);
    p.var_b1 = zero_col(f);
    p.var_W2 = dense(rng, n2, f);
    p.var_b2 = zero_col(n2);
}

void NeuralProverModel::check_shapes() const {
    const int n2 = this->n2();
    const int h = cfg_.hidden;
    const int f = cfg_.ffn_hidden;
    const int in = cfg_.enc_out + 2 * cfg_.m1;
    auto expect = [](const char* name, const Mat& m, Eigen::Index r, Eigen::Index c) {
        if (m.rows() != r || m.cols() != c) {
            throw ShapeError(std::string(name) + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             ", expected " + std::to_string(r) + "x" + std::to_string(c));
        }
    };
    const auto& p = params_;
    expect("M_rule", p.M_rule, n1_, cfg_.m1);
    expect("M_var", p.M_var, n2, cfg_.m2);
    expect("char_Wx", p.char_Wx, cfg_.char_hidden, kCharVocab);
    expect("char_Wh", p.char_Wh, cfg_.char_hidden, cfg_.char_hidden);
    expect("char_b", p.char_b, cfg_.char_hidden, 1);
    expect("enc_W1", p.enc_W1, f, cfg_.char_hidden);
    expect("enc_b1", p.enc_b1, f, 1);
    expect("enc_W2", p.enc_W2, cfg_.enc_out, f);
    expect("enc_b2", p.enc_b2, cfg_.enc_out, 1);
    expect("lstm_W", p.lstm_W, 4 * h, in + h);
    expect("lstm_b", p.lstm_b, 4 * h, 1);
    expect("end_W1", p.end_W1, f, h);
    expect("end_b1", p.end_b1, f, 1);
    expect("end_W2", p.end_W2, 1, f);
    expect("end_b2", p.end_b2, 1, 1);
    expect("rule_W1", p.rule_W1, f, h);
    expect("rule_b1", p.rule_b1, f, 1);
    expect("rule_W2", p.rule_W2, n1_, f);
    expect("rule_b2", p.rule_b2, n1_, 1);
    expect("var_W1", p.var_W1, f, cfg_.m2);
    expect("var_b1", p.var_b1, f, 1);
    expect("var_W2", p.var_W2, n2, f);
    expect("var_b2", p.var_b2, n2, 1);
}

StepState NeuralProverModel::initial_state() const {
    return StepState{Vec::Zero(cfg_.hidden), Vec::Zero(cfg_.hidden), 0};
}

namespace {

struct CharCache {
    std::vector<int> chars;
    std::vector<Vec> hs;  // hs[0] is the zero state, hs[k+1] after char k
};

struct StepCache {
    CharCache chars;
    FfnCache enc;
    Vec xh;  // [s; r_parent; r_left; h_prev]
    Vec i, f, o, g, c_prev, c, tanh_c, h;
    int parent = -1, left = -1;
    FfnCache end, rule;
    std::vector<FfnCache> vars;
    std::vector<int> args;
};

}  // namespace

namespace detail {

// Forward pieces shared by step() and loss().
struct Forward {
    const NeuralProverModel& m;
    const Params& p;

    CharCache chars(const std::string& raw) const {
        const std::string name = encoder_name(raw);
        if (name.empty()) throw UnknownCharacter("empty predicate name");
        CharCache c;
        c.hs.push_back(Vec::Zero(m.config().char_hidden));
        for (char ch : name) {
            const int k = char_index(ch);
            if (k < 0) throw UnknownCharacter(std::string("character '") + ch + "' in predicate '" + raw + "'");
            c.chars.push_back(k);
            Vec pre = p.char_Wx.col(k) + p.char_Wh * c.hs.back() + p.char_b.col(0);
            c.hs.push_back(pre.array().tanh().matrix());
        }
        return c;
    }

    FfnCache encode(const CharCache& c) const {
        return ffn_forward({p.enc_W1, p.enc_b1, p.enc_W2, p.enc_b2}, c.hs.back());
    }

    void check_rule(int id) const {
        if (id < -1 || id >= m.n1()) throw IndexError("rule id " + std::to_string(id) + " out of range");
    }
    void check_symbol(int id) const {
        if (id < 0 || id >= m.n2()) throw IndexError("symbol id " + std::to_string(id) + " out of range");
    }

    void core(StepCache& sc, const Vec& s, const StepState& state) const {
        const auto& cfg = m.config();
        if (s.size() != cfg.enc_out) throw ShapeError("query vector has the wrong width");
        if (state.h.size() != cfg.hidden || state.c.size() != cfg.hidden) throw ShapeError("state has the wrong width");
        check_rule(sc.parent);
        check_rule(sc.left);
        const int h = cfg.hidden;
        sc.xh = Vec::Zero(cfg.enc_out + 2 * cfg.m1 + h);
        sc.xh.head(cfg.enc_out) = s;
        if (sc.parent >= 0) sc.xh.segment(cfg.enc_out, cfg.m1) = p.M_rule.row(sc.parent).transpose();
        if (sc.left >= 0) sc.xh.segment(cfg.enc_out + cfg.m1, cfg.m1) = p.M_rule.row(sc.left).transpose();
        sc.xh.tail(h) = state.h;
        const Vec z = p.lstm_W * sc.xh + p.lstm_b.col(0);
        sc.i = sigmoid(Vec(z.segment(0, h)));
        sc.f = sigmoid(Vec(z.segment(h, h)));
        sc.o = sigmoid(Vec(z.segment(2 * h, h)));
        sc.g = z.segment(3 * h, h).array().tanh().matrix();
        sc.c_prev = state.c;
        sc.c = sc.f.cwiseProduct(state.c) + sc.i.cwiseProduct(sc.g);
        sc.tanh_c = sc.c.array().tanh().matrix();
        sc.h = sc.o.cwiseProduct(sc.tanh_c);
        sc.end = ffn_forward({p.end_W1, p.end_b1, p.end_W2, p.end_b2}, sc.h);
        sc.rule = ffn_forward({p.rule_W1, p.rule_b1, p.rule_W2, p.rule_b2}, sc.h);
        for (int a : sc.args) {
            check_symbol(a);
            sc.vars.push_back(ffn_forward({p.var_W1, p.var_b1, p.var_W2, p.var_b2}, p.M_var.row(a).transpose()));
        }
    }
};

}  // namespace detail

Vec NeuralProverModel::encode_query(const std::string& name) const {
    detail::Forward fw{*this, params_};
    return fw.encode(fw.chars(name)).out;
}

StepOutput NeuralProverModel::step(const StepState& state, const Vec& s, int parent_rule, int left_rule,
                                   const std::vector<int>& args) const {
    detail::Forward fw{*this, params_};
    StepCache sc;
    sc.parent = parent_rule;
    sc.left = left_rule;
    sc.args = args;
    fw.core(sc, s, state);
    StepOutput out;
    out.c_t = sigmoid(sc.end.out(0));
    out.rule_dist = log_softmax(sc.rule.out).array().exp();
    for (const auto& v : sc.vars) out.arg_dists.push_back(log_softmax(v.out).array().exp());
    out.next = StepState{sc.h, sc.c, state.t + 1};
    return out;
}

double NeuralProverModel::loss(const trace::Trace& trace, Params* grad) const {
    if (trace.empty()) return 0.0;
    detail::Forward fw{*this, params_};
    const auto& cfg = cfg_;
    const int h = cfg.hidden;
    std::vector<StepCache> caches(trace.size());
    StepState state = initial_state();
    double total = 0.0;

    for (std::size_t t = 0; t < trace.size(); ++t) {
        const auto& step = trace[t];
        StepCache& sc = caches[t];
        sc.chars = fw.chars(step.query_name);
        sc.enc = fw.encode(sc.chars);
        sc.parent = step.parent_rule_id;
        sc.left = step.left_sister_rule_id;
        if (step.target_args.size() != step.query_args.size()) {
            throw IndexError("step " + std::to_string(t) + " has mismatched argument lists");
        }
        sc.args = step.query_args;
        fw.core(sc, sc.enc.out, state);
        total += bce_with_logit(sc.end.out(0), step.terminate);
        if (step.target_rule_id >= 0) {
            fw.check_rule(step.target_rule_id);
            total -= log_softmax(sc.rule.out)(step.target_rule_id);
        }
        for (std::size_t a = 0; a < sc.vars.size(); ++a) {
            fw.check_symbol(step.target_args[a]);
            total -= log_softmax(sc.vars[a].out)(step.target_args[a]);
        }
        state = StepState{sc.h, sc.c, state.t + 1};
    }
    if (!grad) return total;

    Params& g = *grad;
    const auto& p = params_;
    const Ffn end{p.end_W1, p.end_b1, p.end_W2, p.end_b2};
    const Ffn rule{p.rule_W1, p.rule_b1, p.rule_W2, p.rule_b2};
    const Ffn var{p.var_W1, p.var_b1, p.var_W2, p.var_b2};
    const Ffn enc{p.enc_W1, p.enc_b1, p.enc_W2, p.enc_b2};
    Vec dh_next = Vec::Zero(h);
    Vec dc_next = Vec::Zero(h);

    for (std::size_t t = trace.size(); t-- > 0;) {
        const auto& step = trace[t];
        const StepCache& sc = caches[t];
        Vec dh = dh_next;

        Vec dend(1);
        dend(0) = sigmoid(sc.end.out(0)) - (step.terminate ? 1.0 : 0.0);
        dh += ffn_backward(end, sc.end, dend, g.end_W1, g.end_b1, g.end_W2, g.end_b2);

        if (step.target_rule_id >= 0) {
            Vec d = log_softmax(sc.rule.out).array().exp();
            d(step.target_rule_id) -= 1.0;
            dh += ffn_backward(rule, sc.rule, d, g.rule_W1, g.rule_b1, g.rule_W2, g.rule_b2);
        }
        for (std::size_t a = 0; a < sc.vars.size(); ++a) {
            Vec d = log_softmax(sc.vars[a].out).array().exp();
            d(step.target_args[a]) -= 1.0;
            const Vec dv = ffn_backward(var, sc.vars[a], d, g.var_W1, g.var_b1, g.var_W2, g.var_b2);
            g.M_var.row(sc.args[a]) += dv.transpose();
        }

        // LSTM cell.
        Vec dc = dc_next + dh.cwiseProduct(sc.o).cwiseProduct((1.0 - sc.tanh_c.array().square()).matrix());
        const Vec d_o = dh.cwiseProduct(sc.tanh_c);
        const Vec d_i = dc.cwiseProduct(sc.g);
        const Vec d_g = dc.cwiseProduct(sc.i);
        const Vec d_f = dc.cwiseProduct(sc.c_prev);
        Vec dz(4 * h);
        dz.segment(0, h) = d_i.array() * sc.i.array() * (1.0 - sc.i.array());
        dz.segment(h, h) = d_f.array() * sc.f.array() * (1.0 - sc.f.array());
        dz.segment(2 * h, h) = d_o.array() * sc.o.array() * (1.0 - sc.o.array());
        dz.segment(3 * h, h) = d_g.array() * (1.0 - sc.g.array().square());
        g.lstm_W.noalias() += dz * sc.xh.transpose();
        g.lstm_b.col(0) += dz;
        const Vec dxh = p.lstm_W.transpose() * dz;
        dh_next = dxh.tail(h);
        dc_next = dc.cwiseProduct(sc.f);
        if (sc.parent >= 0) g.M_rule.row(sc.parent) += dxh.segment(cfg.enc_out, cfg.m1).transpose();
        if (sc.left >= 0) g.M_rule.row(sc.left) += dxh.segment(cfg.enc_out + cfg.m1, cfg.m1).transpose();

        // Query encoder and character RNN.
        Vec dq = ffn_backward(enc, sc.enc, dxh.head(cfg.enc_out), g.enc_W1, g.enc_b1, g.enc_W2, g.enc_b2);
        for (std::size_t k = sc.chars.chars.size(); k-- > 0;) {
            const Vec& hk = sc.chars.hs[k + 1];
            const Vec dpre = dq.array() * (1.0 - hk.array().square());
            g.char_Wx.col(sc.chars.chars[k]) += dpre;
            g.char_Wh.noalias() += dpre * sc.chars.hs[k].transpose();
            g.char_b.col(0) += dpre;
            dq = p.char_Wh.transpose() * dpre;
        }
    }
    return total;
}

std::pair<std::size_t, std::size_t> NeuralProverModel::rule_accuracy(const trace::Trace& trace) const {
    std::size_t correct = 0, total = 0;
    StepState state = initial_state();
    for (const auto& step : trace) {
        const auto out = this->step(state, step.query_name, step.parent_rule_id, step.left_sister_rule_id, {});
        if (step.target_rule_id >= 0) {
            ++total;
            Eigen::Index best = 0;
            out.rule_dist.maxCoeff(&best);
            if (best == step.target_rule_id) ++correct;
        }
        state = out.next;
    }
    return {correct, total};
}

double gradient_check(const NeuralProverModel& model, const trace::Trace& trace, double epsilon, std::uint64_t seed) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) throw ConfigError("epsilon must lie in [1e-6, 1e-3]");
    if (trace.empty()) return 0.0;
    NeuralProverModel probe = model;
    Params grad = model.params().zeros_like();
    model.loss(trace, &grad);

    std::vector<Mat*> tensors;
    std::vector<const Mat*> grads;
    probe.params().for_each([&](const char*, Mat& m) { tensors.push_back(&m); });
    grad.for_each([&](const char*, const Mat& m) { grads.push_back(&m); });
    const std::size_t total = probe.params().count();
    const std::size_t samples = std::max<std::size_t>(total / 100, 50);

    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t flat = rng() % total;
        std::size_t which = 0;
        while (flat >= static_cast<std::size_t>(tensors[which]->size())) flat -= static_cast<std::size_t>(tensors[which++]->size());
        double& x = tensors[which]->data()[flat];
        const double saved = x;
        x = saved + epsilon;
        const double up = probe.loss(trace);
        x = saved - epsilon;
        const double down = probe.loss(trace);
        x = saved;
        const double numeric = (up - down) / (2 * epsilon);
        const double analytic = grads[which]->data()[flat];
        const double rel = std::abs(analytic - numeric) / std::max(1e-7, std::abs(analytic) + std::abs(numeric));
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace corgi::nn
