// Command-line front end: prove, gen-traces, train, eval, serve, kb-stats, repl.
#include "corgi/data/dataset.hpp"
#include "corgi/logic/parser.hpp"
#include "corgi/logic/proof.hpp"
#include "corgi/logic/search.hpp"
#include "corgi/prover/soft_prover.hpp"
#include "corgi/service/app.hpp"
#include "corgi/service/service.hpp"
#include "corgi/trace/trace.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>

using namespace corgi;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kTaskFailed = 1;
constexpr int kUsage = 2;

struct UsageError : Error {
    using Error::Error;
};

// Flags shared by every verb; only the ones given on the command line
// reach the config.
struct CommonFlags {
    std::string config_file;
    bool print_config = false;
    std::string kb, types, lexicon, embeddings, model, prover, listen, store;
    int n = 0, k = 0, max_depth = 0;
    double t1 = 0, t2 = 0;
    std::uint64_t seed = 0;
    bool no_feedback = false;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "JSON config file");
        app.add_flag("--print-config", print_config, "Print the effective config and exit");
        app.add_option("--kb", kb, "Knowledge base program");
        app.add_option("--types", types, "Types dictionary (TSV)");
        app.add_option("--lexicon", lexicon, "Directory with verbs.txt, stopwords.txt, multiwords.txt");
        app.add_option("--embeddings", embeddings, "Pretrained symbol vectors");
        app.add_option("--model", model, "Model checkpoint");
        app.add_option("--prover", prover, "auto, soft or oracle");
        app.add_option("--listen", listen, "host:port for serve");
        app.add_option("--store", store, "Session store (JSONL)");
        app.add_option("--n", n, "Feedback loop bound");
        app.add_option("--k", k, "Rules tried per step");
        app.add_option("--t1", t1, "Soft unification threshold");
        app.add_option("--t2", t2, "Termination threshold");
        app.add_option("--max-depth", max_depth, "Proof depth limit");
        app.add_option("--seed", seed, "Random seed");
        app.add_flag("--no-feedback", no_feedback, "Disable the feedback loop");
    }

    service::AppConfig resolve(const CLI::App& app) const {
        auto cfg = service::AppConfig::defaults();
        if (!config_file.empty()) cfg.apply_file(config_file);
        json flags = json::object();
        auto given = [&](const char* name) { return app.count(name) > 0; };
        if (given("--kb")) flags["kb_path"] = kb;
        if (given("--types")) flags["types_path"] = types;
        if (given("--lexicon")) flags["lexicon_path"] = lexicon;
        if (given("--embeddings")) flags["embeddings_path"] = embeddings;
        if (given("--model")) flags["model_path"] = model;
        if (given("--prover")) flags["prover"] = prover;
        if (given("--listen")) flags["listen_address"] = listen;
        if (given("--store")) flags["session_store_path"] = store;
        if (given("--n")) flags["n"] = n;
        if (given("--k")) flags["k"] = k;
        if (given("--t1")) flags["T1"] = t1;
        if (given("--t2")) flags["T2"] = t2;
        if (given("--max-depth")) flags["max_depth"] = max_depth;
        if (given("--seed")) flags["seed"] = seed;
        if (no_feedback) flags["feedback"] = false;
        cfg.apply(flags);
        cfg.validate();
        return cfg;
    }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write to " + path + " failed");
}

logic::KnowledgeBase kb_of(const service::AppConfig& cfg) { return service::load_kb(cfg.kb_path, cfg.types_path); }

int run_prove(const service::AppConfig& cfg, const std::string& query, bool oracle) {
    const auto kb = kb_of(cfg);
    const auto goal = logic::parse_term(query);
    prover::SoftProveConfig pc;
    pc.k = cfg.k;
    pc.T1 = cfg.T1;
    pc.T2 = cfg.T2;
    pc.limits.max_depth = cfg.max_depth;
    prover::SoftProofResult result;
    if (oracle || cfg.model_path.empty()) {
        if (!oracle) std::cerr << "no model given; using the oracle prover\n";
        result = prover::oracle_prove(kb, goal, pc);
    } else {
        auto model = nn::NeuralProverModel::load(cfg.model_path, kb.fingerprint());
        if (!cfg.embeddings_path.empty()) nn::load_pretrained_vectors(model, cfg.embeddings_path, cfg.seed);
        pc.validate(model.n1());
        result = prover::soft_prove(kb, model, goal, pc);
    }
    if (!result.ok()) {
        std::cout << "no proof for " << goal.to_string() << " (" << logic::to_string(result.outcome) << ")\n";
        return kTaskFailed;
    }
    std::cout << logic::render_proof(*result.proof, result.bindings);
    return kOk;
}

int run_gen_traces(const service::AppConfig& cfg, std::size_t count, const std::string& out) {
    const auto kb = kb_of(cfg);
    logic::SearchLimits limits;
    limits.max_depth = cfg.max_depth;
    const auto corpus = trace::build_corpus(kb, count, cfg.seed, limits);
    write_file(out, corpus.serialize());
    std::cout << "wrote " << corpus.traces.size() << " traces to " << out << "\n";
    return corpus.traces.empty() ? kTaskFailed : kOk;
}

struct TrainFlags {
    std::string traces, out;
    nn::ModelConfig model;
    nn::TrainConfig train;
};

int run_train(const service::AppConfig& cfg, TrainFlags f) {
    const auto kb = kb_of(cfg);
    const auto corpus = trace::TraceCorpus::parse(service::read_text_file(f.traces));
    corpus.validate(kb);
    f.model.seed = cfg.seed;
    f.train.seed = cfg.seed;
    f.train.embedding_init = cfg.embeddings_path;
    nn::NeuralProverModel model(f.model, static_cast<int>(kb.builtin_count()), corpus.symbols, kb.fingerprint());
    const auto report = nn::train(model, corpus.traces, f.train, [](int epoch, double loss) {
        if (epoch % 10 == 0) std::cerr << "epoch " << epoch << " loss " << loss << "\n";
    });
    model.save(f.out);
    std::cout << json{{"epochs", report.epochs_run},
                      {"final_loss", report.final_loss},
                      {"accuracy", report.accuracy},
                      {"pretrained_rows", report.pretrained_rows},
                      {"model", f.out}}
                     .dump(2)
              << "\n";
    return kOk;
}

int run_eval(service::AppConfig cfg, const std::string& tasks, const std::string& scripts, const std::string& mode,
             const std::string& report_path) {
    if (mode == "soft") {
        cfg.prover = "soft";
    } else if (mode == "oracle") {
        cfg.prover = "oracle";
    } else if (mode == "nofeedback") {
        cfg.feedback = false;
    } else {
        throw UsageError("--mode must be soft, oracle or nofeedback");
    }
    json report;
    if (!tasks.empty()) {
        const auto records = data::load_dataset(tasks);
        report["dataset"] = {{"path", tasks}, {"records", records.size()}, {"counts", data::dataset_counts(records)}};
    }
    if (!scripts.empty()) {
        service::Runtime runtime(cfg);
        const auto replay = data::load_scripts(scripts, cfg.n);
        report["replay"] = data::evaluate(replay, runtime.engine()).to_json();
    }
    if (report.is_null()) throw UsageError("eval needs --tasks or --scripts");
    report["mode"] = mode;
    if (!report_path.empty()) write_file(report_path, report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return kOk;
}

int run_serve(const service::AppConfig& cfg) {
    service::Runtime runtime(cfg);
    std::unique_ptr<service::SessionStore> store;
    if (!cfg.session_store_path.empty()) store = std::make_unique<service::SessionStore>(cfg.session_store_path);
    service::SessionService sessions(runtime.engine(), store.get(), cfg.seed);
    std::vector<std::string> warnings;
    const int restored = sessions.restore(warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (restored) std::cerr << "restored " << restored << " sessions\n";
    httplib::Server server;
    service::install_routes(server, sessions);
    const auto [host, port] = cfg.host_port();
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) throw Error("cannot listen on " + cfg.listen_address);
    return kOk;
}

int run_kb_stats(const service::AppConfig& cfg) {
    std::cout << service::kb_stats(kb_of(cfg)).dump(2) << "\n";
    return kOk;
}

// One dialog per command line on stdin; answers follow on later lines.
int run_repl(const service::AppConfig& cfg) {
    service::Runtime runtime(cfg);
    const auto& engine = runtime.engine();
    std::string line;
    int counter = 0;
    bool any_failed = false;
    std::cout << "Enter a command (if ... then ... because ...), or an empty line to quit.\n";
    while (std::cout << "> " << std::flush, std::getline(std::cin, line) && !line.empty()) {
        dialog::DialogSession session;
        dialog::SystemAction action;
        try {
            auto started = engine.start_session(line, "repl-" + std::to_string(++counter));
            session = std::move(started.first);
            action = std::move(started.second);
        } catch (const nl::ParseFailure& e) {
            std::cout << "CORGI: I could not read that command (" << e.what() << ").\n";
            continue;
        }
        std::cout << "CORGI: " << action.text << "\n";
        while (session.status == dialog::Status::awaiting_user) {
            std::cout << "> " << std::flush;
            if (!std::getline(std::cin, line)) return any_failed ? kTaskFailed : kOk;
            action = engine.user_answer(session, line);
            std::cout << "CORGI: " << action.text << "\n";
        }
        if (session.status == dialog::Status::succeeded && session.result && session.result->proof) {
            std::cout << logic::render_proof(*session.result->proof, session.result->bindings);
        }
        any_failed = any_failed || session.status != dialog::Status::succeeded;
    }
    return any_failed ? kTaskFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corgi: interactive commonsense reasoning over if-then-because commands"};
    app.require_subcommand(1);
    CommonFlags common;

    auto* prove = app.add_subcommand("prove", "Prove a query against the knowledge base");
    std::string query;
    bool oracle = false;
    prove->add_option("--query", query, "Goal, e.g. status(i,dry,tuesday)")->required();
    prove->add_flag("--oracle", oracle, "Exact unification, clauses in program order");

    auto* gen = app.add_subcommand("gen-traces", "Generate proof traces for training");
    std::size_t count = 2000;
    std::string traces_out = "traces.txt";
    gen->add_option("--count", count, "Number of queries")->capture_default_str();
    gen->add_option("--out", traces_out, "Output file")->capture_default_str();

    auto* train = app.add_subcommand("train", "Train the proof-guidance model on traces");
    TrainFlags tf;
    tf.out = "model.json";
    train->add_option("--traces", tf.traces, "Trace corpus from gen-traces")->required();
    train->add_option("--out", tf.out, "Checkpoint path")->capture_default_str();
    train->add_option("--epochs", tf.train.epochs)->capture_default_str();
    train->add_option("--lr", tf.train.learning_rate)->capture_default_str();
    train->add_option("--batch-size", tf.train.batch_size)->capture_default_str();
    train->add_option("--clip", tf.train.gradient_clip)->capture_default_str();
    train->add_option("--time-budget", tf.train.time_budget_seconds, "Seconds, 0 = unlimited")->capture_default_str();
    train->add_option("--target-accuracy", tf.train.target_accuracy, "Stop once reached")->capture_default_str();
    train->add_option("--m1", tf.model.m1, "Rule embedding width")->capture_default_str();
    train->add_option("--m2", tf.model.m2, "Symbol embedding width")->capture_default_str();
    train->add_option("--hidden", tf.model.hidden)->capture_default_str();
    train->add_option("--char-hidden", tf.model.char_hidden)->capture_default_str();
    train->add_option("--enc-out", tf.model.enc_out)->capture_default_str();
    train->add_option("--ffn-hidden", tf.model.ffn_hidden)->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Validate a command dataset and replay scripted dialogs");
    std::string tasks, scripts, mode = "oracle", report;
    eval->add_option("--tasks", tasks, "Command dataset (JSONL)");
    eval->add_option("--scripts", scripts, "Replay scripts (JSONL)");
    eval->add_option("--mode", mode, "soft, oracle or nofeedback")->capture_default_str();
    eval->add_option("--report", report, "Write the report here");

    auto* serve = app.add_subcommand("serve", "Run the HTTP session API");
    auto* stats = app.add_subcommand("kb-stats", "Clause counts by provenance and domain");
    auto* repl = app.add_subcommand("repl", "Interactive dialog on the terminal");

    for (auto* sub : {prove, gen, train, eval, serve, stats, repl}) common.attach(*sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kUsage;
    }

    CLI::App* verb = app.get_subcommands().front();
    try {
        const auto cfg = common.resolve(*verb);
        if (common.print_config) {
            std::cout << cfg.to_json().dump(2) << "\n";
            return kOk;
        }
        if (verb == prove) return run_prove(cfg, query, oracle);
        if (verb == gen) return run_gen_traces(cfg, count, traces_out);
        if (verb == train) return run_train(cfg, tf);
        if (verb == eval) return run_eval(cfg, tasks, scripts, mode, report);
        if (verb == serve) return run_serve(cfg);
        if (verb == stats) return run_kb_stats(cfg);
        return run_repl(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << verb->help();
        return kUsage;
    } catch (const nn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTaskFailed;
    }
}
