#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsgnn/error.hpp"
#include "lsgnn/experiment.hpp"
#include "lsgnn/kernels.hpp"
#include "lsgnn/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lsgnn;
using json = nlohmann::json;

namespace {

constexpr const char* kManifestMagic = "lsgnn-manifest 1";

struct Globals {
    std::uint64_t seed = 0;
    std::string config_path;
    std::string config_json;  // set by replay
    std::string out = ".";
    std::size_t threads = 1;
    std::string simd = "auto";
};

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { line(header); }

    template <class... T>
    void row(const T&... v) {
        std::vector<std::string> cells{cell(v)...};
        if (cells.size() != cols_) throw std::logic_error("csv row width mismatch");
        line(cells);
    }

    void write(const fs::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw FormatError("cannot write " + path.string());
        out << buf_.str();
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(std::string_view v) { return std::string(v); }
    static std::string cell(const char* v) { return v; }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
    static std::string cell(I v) { return std::to_string(v); }

    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) buf_ << (i ? "," : "") << cells[i];
        buf_ << '\n';
    }

    std::size_t cols_;
    std::ostringstream buf_;
};

std::vector<std::pair<double, double>> parse_pairs(const std::vector<std::string>& items) {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : items) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw InputError("expected lambda1:lambda2, got '" + s + "'");
        try {
            out.emplace_back(std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1)));
        } catch (const std::logic_error&) {
            throw InputError("expected lambda1:lambda2, got '" + s + "'");
        }
    }
    return out;
}

FsbmMode parse_mode(const std::string& s) {
    if (s == "bernoulli") return FsbmMode::bernoulli;
    if (s == "exact" || s == "expectation_exact") return FsbmMode::expectation_exact;
    throw InputError("unknown FSBM mode '" + s + "'");
}

// Runs one subcommand body and writes the run manifest next to its outputs.
class Runner {
public:
    Runner(const Globals& g, std::vector<std::string> args) : g_(g), args_(std::move(args)) {}

    ExperimentConfig config() const {
        ExperimentConfig cfg;
        if (!g_.config_json.empty()) cfg.apply_json(g_.config_json);
        else if (!g_.config_path.empty()) cfg = ExperimentConfig::from_file(g_.config_path);
        return cfg;
    }

    fs::path out() const { return g_.out; }

    template <class Fn>
    int run(const std::string& command, Fn&& body) {
        if (g_.simd == "scalar") kernels::force(kernels::Level::scalar);
        else if (g_.simd == "avx2") kernels::force(kernels::Level::avx2);
        else if (g_.simd == "neon") kernels::force(kernels::Level::neon);
        else if (g_.simd != "auto") throw InputError("unknown --simd level '" + g_.simd + "'");

        fs::create_directories(out());
        const ExperimentConfig cfg = config();
        const auto start = std::chrono::steady_clock::now();
        body(cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::ofstream man(out() / "manifest.txt", std::ios::binary);
        man << kManifestMagic << '\n'
            << "version " << LSGNN_VERSION << '\n'
            << "command " << command << '\n'
            << "kernels " << kernels::name(kernels::active().level) << '\n'
            << "seed " << g_.seed << '\n'
            << "threads " << g_.threads << '\n'
            << "cwd " << json(fs::current_path().string()).dump() << '\n'
            << "args " << json(args_).dump() << '\n'
            << "config " << cfg.to_json() << '\n';
        if (!man) throw FormatError("cannot write manifest");
        // Wall clock stays out of the report so repeated runs compare byte for byte.
        std::ofstream(out() / "timing.txt") << "seconds " << format_double(secs) << '\n';
        std::cerr << command << ": wrote " << (out() / "report.csv").string() << " in " << secs << " s\n";
        return 0;
    }

private:
    const Globals& g_;
    std::vector<std::string> args_;
};

std::vector<SplitSpec> splits_for(const DatasetBundle& data, std::uint64_t seed, std::size_t count) {
    return make_splits(data.graph.num_nodes(), kDefaultSplitRatios, seed, count);
}

void write_split_report(const MetricsReport& rep, const fs::path& path) {
    Csv csv({"split", "split_seed", "best_epoch", "val_acc", "test_acc"});
    for (const auto& r : rep.per_split) csv.row(r.split, r.split_seed, r.best_epoch, r.val_acc, r.test_acc);
    csv.write(path);
}

void write_summary(const MetricsReport& rep, const fs::path& path) {
    Csv csv({"splits", "mean_val", "mean_test", "std_test"});
    csv.row(rep.per_split.size(), rep.mean_val, rep.mean_test, rep.std_test);
    csv.write(path);
}

struct ManifestData {
    std::string cwd;
    std::vector<std::string> args;
    std::string config;
};

ManifestData read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kManifestMagic) throw FormatError(path.string() + ": not a run manifest");
    ManifestData m;
    bool have_args = false, have_cfg = false;
    while (std::getline(in, line)) {
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string val = sp == std::string::npos ? "" : line.substr(sp + 1);
        try {
            if (key == "args") {
                m.args = json::parse(val).get<std::vector<std::string>>();
                have_args = true;
            } else if (key == "cwd") {
                m.cwd = json::parse(val).get<std::string>();
            } else if (key == "config") {
                m.config = val;
                have_cfg = true;
            }
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ": bad '" + key + "' entry: " + e.what());
        }
    }
    if (!have_args || !have_cfg) throw FormatError(path.string() + ": manifest lacks args or config");
    return m;
}

int dispatch(std::vector<std::string> args);

// Re-executes a recorded run into a new output directory, with the config
// taken from the manifest rather than from the original config file.
int replay(const fs::path& manifest, const fs::path& new_out) {
    const ManifestData m = read_manifest(manifest);
    const fs::path out_abs = fs::absolute(new_out);
    std::vector<std::string> args;
    for (std::size_t i = 0; i < m.args.size(); ++i) {
        const std::string& a = m.args[i];
        if (a == "--config" || a == "--out" || a == "--config-json") {
            ++i;
            continue;
        }
        if (a.rfind("--config=", 0) == 0 || a.rfind("--out=", 0) == 0 || a.rfind("--config-json=", 0) == 0) continue;
        args.push_back(a);
    }
    args.insert(args.end(), {"--config-json", m.config, "--out", out_abs.string()});
    if (!m.cwd.empty()) fs::current_path(m.cwd);
    return dispatch(args);
}

int dispatch(std::vector<std::string> args) {
    CLI::App app{"LocalSim-guided graph neural network experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(LSGNN_VERSION));

    Globals g;
    app.add_option("--seed", g.seed, "Base seed for data generation, splits and search");
    app.add_option("--config", g.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
    app.add_option("--config-json", g.config_json, "Inline JSON config (used by replay)")->group("");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--simd", g.simd, "Kernel level: auto, scalar, avx2, neon");

    std::string data_dir;
    std::size_t splits_override = 0;

    // gen-fsbm
    auto* gen = app.add_subcommand("gen-fsbm", "Generate a featured SBM dataset directory");
    std::size_t gen_n = 1000;
    std::vector<double> gen_lambda{0.9, 0.1};
    double gen_degree = 10.0, gen_sigma = 1.0;
    std::vector<double> gen_mu{1.0, -1.0};
    std::string gen_mode = "bernoulli";
    gen->add_option("--n", gen_n, "Node count");
    gen->add_option("--lambda", gen_lambda, "Homophily of each subgraph")->delimiter(',');
    gen->add_option("--degree", gen_degree, "Expected degree");
    gen->add_option("--sigma", gen_sigma, "Feature noise standard deviation");
    gen->add_option("--mu", gen_mu, "Two community feature means")->delimiter(',');
    gen->add_option("--mode", gen_mode, "bernoulli or exact");

    // precompute
    auto* pre = app.add_subcommand("precompute", "Propagate features and write a bundle");
    pre->add_option("--data", data_dir, "Dataset directory")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train and evaluate over random splits");
    std::string bundle_path;
    bool save_models = false;
    tr->add_option("--data", data_dir, "Dataset directory")->required();
    tr->add_option("--bundle", bundle_path, "Precomputed bundle to reuse");
    tr->add_option("--splits", splits_override, "Number of splits (overrides config)");
    tr->add_flag("--save-models", save_models, "Write one checkpoint per split");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
    std::string ckpt;
    std::size_t eval_split = 0;
    ev->add_option("--data", data_dir, "Dataset directory")->required();
    ev->add_option("--checkpoint", ckpt, "Model checkpoint")->required();
    ev->add_option("--split", eval_split, "Split index");

    // toy
    auto* toy = app.add_subcommand("toy", "Raw vs graph-level vs node-level weighting on FSBM grids");
    std::vector<std::string> toy_pairs{"0.9:0.1", "0.5:0.5"};
    std::size_t toy_seeds = 5;
    ToyOptions toy_opts;
    toy->add_option("--pairs", toy_pairs, "lambda1:lambda2 cells")->delimiter(',');
    toy->add_option("--seeds", toy_seeds, "Seeds per cell");
    toy->add_option("--n", toy_opts.n, "Node count");
    toy->add_option("--hidden", toy_opts.hidden, "Hidden width");
    toy->add_option("--epochs", toy_opts.train.epochs, "Training epochs");

    // theory
    auto* th = app.add_subcommand("theory", "Monte Carlo check of the LocalSim expectation and gap bound");
    std::vector<double> th_lambda{0.2, 0.5, 0.8};
    std::vector<double> th_sigma{1.0};
    std::vector<std::string> th_gap{"0.9:0.1"};
    std::size_t th_trials = 100, th_n = 1000;
    double th_degree = 10.0;
    std::string th_mode = "exact";
    th->add_option("--lambda", th_lambda, "Homophily of the first subgraph (second is 1 - lambda)")->delimiter(',');
    th->add_option("--sigma", th_sigma, "Noise levels")->delimiter(',');
    th->add_option("--gap", th_gap, "lambda1:lambda2 pairs for the gap bound")->delimiter(',');
    th->add_option("--trials", th_trials, "Graphs per setting");
    th->add_option("--n", th_n, "Node count");
    th->add_option("--degree", th_degree, "Expected degree");
    th->add_option("--mode", th_mode, "bernoulli or exact");

    // stats
    auto* st = app.add_subcommand("stats", "Dataset statistics");
    st->add_option("--data", data_dir, "Dataset directory")->required();

    // sweep-depth
    auto* sw = app.add_subcommand("sweep-depth", "Accuracy against propagation depth");
    sw->add_option("--data", data_dir, "Dataset directory")->required();
    sw->add_option("--splits", splits_override, "Number of splits (overrides config)");

    // search
    auto* se = app.add_subcommand("search", "Random hyperparameter search");
    std::size_t budget_override = 0;
    se->add_option("--data", data_dir, "Dataset directory")->required();
    se->add_option("--budget", budget_override, "Trials (overrides config)");
    se->add_option("--splits", splits_override, "Number of splits (overrides config)");

    // replay
    auto* rp = app.add_subcommand("replay", "Repeat a run from its manifest");
    std::string manifest_path;
    rp->add_option("manifest", manifest_path, "manifest.txt of an earlier run")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (rp->parsed()) return replay(manifest_path, g.out);

    Runner runner(g, args);
    const fs::path out = runner.out();
    auto num_splits = [&](const ExperimentConfig& c) { return splits_override ? splits_override : c.num_splits; };

    if (gen->parsed()) {
        return runner.run("gen-fsbm", [&](const ExperimentConfig&) {
            if (gen_mu.size() != 2) throw InputError("--mu takes exactly two community means");
            if (gen_lambda.empty()) throw InputError("--lambda needs at least one value");
            FsbmConfig cfg;
            cfg.n = gen_n;
            cfg.r = 2;
            cfg.t = gen_lambda.size();
            cfg.p.clear();
            cfg.q.clear();
            // communities hold n / 2t nodes, so p + q = 2t degree / n
            for (double l : gen_lambda) {
                auto [p, q] = solve_edge_probs(l, 2 * gen_n / cfg.t, gen_degree);
                cfg.p.push_back(p);
                cfg.q.push_back(q);
            }
            cfg.mu = gen_mu;
            cfg.sigma = gen_sigma;
            cfg.mode = parse_mode(gen_mode);
            const SyntheticDataset ds = generate_fsbm(cfg, g.seed);
            save_dataset(ds.to_bundle(), out);

            const auto h = node_homophily(ds.graph, ds.community);
            Csv csv({"subgraph", "lambda", "nodes", "edges", "mean_degree", "homophily"});
            for (std::size_t k = 0; k < cfg.t; ++k) {
                std::size_t nodes = 0, deg = 0, active = 0;
                double hom = 0.0;
                for (std::size_t i = 0; i < cfg.n; ++i) {
                    if (static_cast<std::size_t>(ds.subgraph_id[i]) != k) continue;
                    ++nodes;
                    deg += ds.graph.degree(i);
                    if (ds.graph.degree(i) > 0) {
                        hom += h.per_node[i];
                        ++active;
                    }
                }
                csv.row(k, cfg.lambda(k), nodes, deg / 2, static_cast<double>(deg) / static_cast<double>(nodes),
                        active ? hom / static_cast<double>(active) : 0.0);
            }
            csv.write(out / "report.csv");
        });
    }

    if (pre->parsed()) {
        return runner.run("precompute", [&](const ExperimentConfig& cfg) {
            const DatasetBundle data = load_dataset(data_dir);
            const PropagationStack stack = precompute_bundle(data.graph, data.features, cfg.propagation);
            save_bundle(stack, out / "bundle.lspb");
            Csv csv({"channel", "layer", "rows", "cols", "frobenius"});
            for (std::size_t k = 0; k < stack.low_layers.size(); ++k)
                csv.row("low", k + 1, stack.low_layers[k].rows(), stack.low_layers[k].cols(),
                        frobenius_norm(stack.low_layers[k]));
            for (std::size_t k = 0; k < stack.high_layers.size(); ++k)
                csv.row("high", k + 1, stack.high_layers[k].rows(), stack.high_layers[k].cols(),
                        frobenius_norm(stack.high_layers[k]));
            csv.write(out / "report.csv");
        });
    }

    if (tr->parsed()) {
        return runner.run("train", [&](const ExperimentConfig& cfg) {
            const DatasetBundle data = load_dataset(data_dir);
            PropagationCache cache;
            if (!bundle_path.empty()) {
                PropagationStack stack = load_bundle(bundle_path, &data.features);
                if (!(stack.config == cfg.propagation)) {
                    throw InputError("bundle was built with a different propagation config");
                }
                cache.insert(data.graph, data.features, std::move(stack));
            }
            const auto splits = splits_for(data, g.seed, num_splits(cfg));
            const MetricsReport rep = run_experiment(data, cfg, splits, &cache, g.threads);
            write_split_report(rep, out / "report.csv");
            write_summary(rep, out / "summary.csv");
            if (save_models) {
                ModelConfig mcfg = cfg.model;
                mcfg.K = cfg.propagation.K;
                mcfg.d = data.features.cols();
                mcfg.C = data.num_classes;
                for (std::size_t s = 0; s < rep.params.size(); ++s)
                    save_checkpoint(mcfg, rep.params[s], out / ("model_split" + std::to_string(s) + ".lspm"));
            }
        });
    }

    if (ev->parsed()) {
        return runner.run("eval", [&](const ExperimentConfig& cfg) {
            const DatasetBundle data = load_dataset(data_dir);
            const auto [mcfg, params] = load_checkpoint(ckpt);
            if (mcfg.K != cfg.propagation.K) throw InputError("checkpoint K differs from the configured K");
            if (mcfg.d != data.features.cols() || mcfg.C != data.num_classes) {
                throw InputError("checkpoint does not fit this dataset");
            }
            const auto splits = splits_for(data, g.seed, eval_split + 1);
            const SplitSpec& sp = splits.back();
            const PropagationStack stack = precompute_bundle(data.graph, data.features, cfg.propagation);
            const ModelInputs inputs = prepare_inputs(data.graph, data.features, stack, mcfg);
            const Matrix probs = forward(params, mcfg, inputs).probs;
            Csv csv({"split", "train_acc", "val_acc", "test_acc"});
            csv.row(eval_split, accuracy(probs, data.labels, sp.train), accuracy(probs, data.labels, sp.val),
                    accuracy(probs, data.labels, sp.test));
            csv.write(out / "report.csv");
        });
    }

    if (toy->parsed()) {
        return runner.run("toy", [&](const ExperimentConfig&) {
            const auto grid = parse_pairs(toy_pairs);
            std::vector<std::uint64_t> seeds;
            for (std::size_t s = 0; s < toy_seeds; ++s) seeds.push_back(g.seed + s);
            const auto rows = toy_study(grid, seeds, toy_opts, g.threads);
            Csv csv({"lambda1", "lambda2", "seed", "raw", "graph_level", "node_level"});
            Csv sum({"lambda1", "lambda2", "seeds", "raw", "graph_level", "node_level"});
            for (const auto& r : rows) {
                for (std::size_t s = 0; s < seeds.size(); ++s)
                    csv.row(r.lambda1, r.lambda2, seeds[s], r.raw_per_seed[s], r.graph_per_seed[s], r.node_per_seed[s]);
                sum.row(r.lambda1, r.lambda2, seeds.size(), r.raw, r.graph_level, r.node_level);
            }
            csv.write(out / "report.csv");
            sum.write(out / "summary.csv");
        });
    }

    if (th->parsed()) {
        return runner.run("theory", [&](const ExperimentConfig&) {
            const FsbmMode mode = parse_mode(th_mode);
            Csv csv({"check", "lambda1", "lambda2", "sigma", "subgraph", "empirical", "reference", "stderr", "pass"});
            for (double sigma : th_sigma)
                for (double l : th_lambda) {
                    const auto cfg = fsbm_two_by_two(th_n, l, 1.0 - l, th_degree, 1.0, -1.0, sigma, mode);
                    const auto rep = theory_check(cfg, th_trials, g.seed, g.threads);
                    for (std::size_t k = 0; k < rep.subgraphs.size(); ++k) {
                        const auto& s = rep.subgraphs[k];
                        csv.row("expectation", l, 1.0 - l, sigma, k, s.empirical, s.analytic, s.stderr_, s.pass);
                    }
                }
            for (const auto& [l1, l2] : parse_pairs(th_gap))
                for (double sigma : th_sigma) {
                    const auto cfg = fsbm_two_by_two(th_n, l1, l2, th_degree, 1.0, -1.0, sigma, mode);
                    const auto rep = l1_gap_check(cfg, th_trials, g.seed, g.threads);
                    csv.row("l1_gap", l1, l2, sigma, "all", rep.empirical, rep.bound, rep.stderr_, rep.pass);
                }
            csv.write(out / "report.csv");
        });
    }

    if (st->parsed()) {
        return runner.run("stats", [&](const ExperimentConfig&) {
            const auto s = dataset_stats(load_dataset(data_dir));
            Csv csv({"nodes", "edges", "classes", "feature_dim", "homophily"});
            csv.row(s.nodes, s.edges, s.classes, s.feature_dim, s.homophily);
            csv.write(out / "report.csv");
        });
    }

    if (sw->parsed()) {
        return runner.run("sweep-depth", [&](const ExperimentConfig& cfg) {
            const DatasetBundle data = load_dataset(data_dir);
            const auto splits = splits_for(data, g.seed, num_splits(cfg));
            const auto rows = depth_sweep(data, cfg, cfg.K_list, splits, g.threads);
            Csv csv({"K", "lsgnn_mean", "lsgnn_std", "sgc_mean", "sgc_std"});
            for (const auto& r : rows) csv.row(r.K, r.lsgnn_mean, r.lsgnn_std, r.sgc_mean, r.sgc_std);
            csv.write(out / "report.csv");
        });
    }

    if (se->parsed()) {
        return runner.run("search", [&](const ExperimentConfig& cfg) {
            const DatasetBundle data = load_dataset(data_dir);
            const auto splits = splits_for(data, g.seed, num_splits(cfg));
            const std::size_t budget = budget_override ? budget_override : cfg.budget;
            const SearchResult res = random_search(data, cfg, SearchSpace{}, budget, splits, g.seed, g.threads);
            Csv csv({"trial", "lr", "weight_decay", "dropout", "beta", "gamma", "sim_kind", "failed", "mean_val",
                     "mean_test"});
            for (std::size_t i = 0; i < res.trials.size(); ++i) {
                const auto& t = res.trials[i];
                csv.row(i, t.sample.lr, t.sample.weight_decay, t.sample.dropout, t.sample.beta, t.sample.gamma,
                        to_string(t.sample.sim_kind), t.failed, t.mean_val, t.mean_test);
            }
            csv.write(out / "report.csv");
            write_split_report(res.best_report, out / "best_splits.csv");
            write_summary(res.best_report, out / "summary.csv");
            std::ofstream(out / "best_config.json") << res.best_config.to_json() << '\n';
        });
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(std::move(args));
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
