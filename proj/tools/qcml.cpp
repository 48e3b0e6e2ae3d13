// qcml: generate data, train matrix configurations, estimate intrinsic
// dimension, run baselines and noise sweeps.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 training diverged.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "params.hpp"
#include "qcml/baselines.hpp"
#include "qcml/data.hpp"
#include "qcml/estimator.hpp"
#include "qcml/model_io.hpp"
#include "qcml/reports.hpp"
#include "qcml/training.hpp"

namespace fs = std::filesystem;
using namespace qcml;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

const std::vector<std::string> kGenerators{"sphere", "circle", "swissroll", "hypercube"};

struct Common {
    std::uint64_t seed = 1;
    std::string out = ".";
    std::size_t threads = 1;
    std::string config;
};

void add_common(cli::ParamSet& ps, CLI::App* app, Common& c) {
    ps.add("seed", c.seed, "Random seed");
    ps.add("out", c.out, "Output directory");
    ps.add("threads", c.threads, "Worker threads (results do not depend on this)");
    app->add_option("--config", c.config, "key = value file; command-line flags take precedence");
}

struct GenOptions {
    std::size_t t = 2500;
    double noise = 0.0;
    int pad = 0;
    int d = 17;
    int ambient = 18;
};

void add_generator_params(cli::ParamSet& ps, GenOptions& g) {
    ps.add("t", g.t, "Number of points");
    ps.add("pad", g.pad, "sphere: extra zero coordinates");
    ps.add("d", g.d, "hypercube: cube dimension");
    ps.add("D", g.ambient, "hypercube: ambient dimension");
}

Dataset generate_named(const std::string& name, const GenOptions& g, double noise, std::uint64_t seed) {
    if (name == "sphere") return gen_sphere(g.t, g.pad, noise, seed);
    if (name == "circle") return gen_circle(g.t, noise, seed);
    if (name == "swissroll") return gen_swiss_roll(g.t, noise, seed);
    if (name == "hypercube") return gen_hypercube(g.d, g.ambient, g.t, noise, seed);
    std::string valid;
    for (const auto& n : kGenerators) valid += (valid.empty() ? "" : ", ") + n;
    throw InvalidInput("unknown generator '" + name + "' (valid generators: " + valid + ")");
}

struct TrainOptions {
    int n = 3;
    double w = 0.0;
    double lr = 1e-2;
    int epochs = 1000;
    std::string batch_size = "auto";
    double degeneracy_floor = 1e-8;
    std::string optimizer = "adam";
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::string init_scale = "auto";
};

void add_train_params(cli::ParamSet& ps, TrainOptions& o) {
    ps.add("n", o.n,
           "Hilbert dimension N. Start small and increase it until the spectral gap in the metric is stable");
    ps.add("w", o.w, "Quantum fluctuation weight in [0, 1]");
    ps.add("lr", o.lr, "Learning rate");
    ps.add("epochs", o.epochs, "Epochs");
    ps.add("batch-size", o.batch_size, "auto (full up to 4096 points, else 1024), full, or a count");
    ps.add("degeneracy-floor", o.degeneracy_floor, "Skip perturbation terms with smaller spectral gaps");
    ps.add("optimizer", o.optimizer, "adam, momentum or gd");
    ps.add("momentum", o.momentum, "momentum: coefficient");
    ps.add("beta1", o.beta1, "adam: first-moment decay");
    ps.add("beta2", o.beta2, "adam: second-moment decay");
    ps.add("eps", o.eps, "adam: epsilon");
    ps.add("init-scale", o.init_scale, "auto, or a scale for the random initial operators");
}

TrainConfig to_train_config(const TrainOptions& o, const Common& c) {
    TrainConfig cfg;
    cfg.hilbert_dim = o.n;
    cfg.fluctuation_weight = o.w;
    cfg.learning_rate = o.lr;
    cfg.epochs = o.epochs;
    if (o.batch_size == "full") {
        cfg.batch_size = 0;
    } else if (o.batch_size != "auto") {
        const auto v = parse_double(o.batch_size);
        if (!v || *v < 1.0 || *v != std::floor(*v))
            throw InvalidInput("batch-size must be auto, full, or a positive integer");
        cfg.batch_size = static_cast<std::size_t>(*v);
    }
    cfg.seed = c.seed;
    cfg.degeneracy_floor = o.degeneracy_floor;
    cfg.optimizer.kind = parse_optimizer(o.optimizer);
    cfg.optimizer.momentum = o.momentum;
    cfg.optimizer.beta1 = o.beta1;
    cfg.optimizer.beta2 = o.beta2;
    cfg.optimizer.epsilon = o.eps;
    if (o.init_scale != "auto") {
        const auto v = parse_double(o.init_scale);
        if (!v) throw InvalidInput("init-scale must be auto or a number");
        cfg.init_scale = *v;
    }
    cfg.threads = c.threads;
    cfg.validate();
    return cfg;
}

struct EstimateOptions {
    std::string method = "ratio";
    std::string aggregation = "mode";
    double ratio_floor = kDefaultRatioFloor;
    double rmt_aspect = 1.0;
    double degeneracy_floor = kDefaultDegeneracyFloor;
};

void add_estimate_params(cli::ParamSet& ps, EstimateOptions& o) {
    ps.add("method", o.method, "Spectral gap detector: ratio or rmt");
    ps.add("aggregation", o.aggregation, "Headline statistic: mode, median or geometric_mean");
    ps.add("ratio-floor", o.ratio_floor, "ratio: lower clamp on eigenvalues in the gap ratio");
    ps.add("rmt-aspect", o.rmt_aspect, "rmt: Marchenko-Pastur aspect ratio in (0, 1]");
    ps.add("metric-degeneracy-floor", o.degeneracy_floor, "Skip points whose ground state gap is smaller");
}

EstimatorParams to_estimator_params(const EstimateOptions& o, const Common& c) {
    EstimatorParams p;
    p.method = parse_gap_method(o.method);
    p.ratio_floor = o.ratio_floor;
    p.rmt_aspect = o.rmt_aspect;
    p.degeneracy_floor = o.degeneracy_floor;
    p.threads = c.threads;
    parse_aggregation(o.aggregation);
    return p;
}

fs::path prepare_out(const Common& c) {
    fs::path out(c.out);
    fs::create_directories(out);
    return out;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw InvalidInput(what + " path is required");
    if (!fs::is_regular_file(path)) throw InvalidInput(what + " file not found: " + path);
}

// Sidecar file for timing; kept out of the reports so they stay reproducible.
void write_timing(const fs::path& out, double seconds) {
    KeyValueDoc doc;
    doc.set("wall_time_seconds", seconds);
    doc.write((out / "timing.txt").string());
}

// ---------------------------------------------------------------- generate

struct GenerateCmd {
    Common common;
    GenOptions gen;
    std::string name;
    cli::ParamSet params;

    explicit GenerateCmd(CLI::App* app) : params(app) {
        params.add_positional("generator", name, "sphere, circle, swissroll or hypercube");
        params.add("noise", gen.noise, "Gaussian noise standard deviation per coordinate");
        add_generator_params(params, gen);
        add_common(params, app, common);
    }

    int run() {
        if (name.empty()) throw CLI::RequiredError("generator");
        const auto ds = generate_named(name, gen, gen.noise, common.seed);
        const auto out = prepare_out(common);
        const auto table = (out / "data.csv").string();
        save_table(ds, table);
        save_metadata(ds, table);
        params.resolved().write((out / "config.ini").string());
        std::cout << "wrote " << table << " (" << ds.points.rows() << " x " << ds.points.cols() << ", true_dim "
                  << (ds.true_dim ? std::to_string(*ds.true_dim) : "unknown") << ")\n";
        return 0;
    }
};

// ---------------------------------------------------------------- train

struct TrainCmd {
    Common common;
    TrainOptions opts;
    std::string data;
    cli::ParamSet params;

    explicit TrainCmd(CLI::App* app) : params(app) {
        params.add("data", data, "Dataset table");
        add_train_params(params, opts);
        add_common(params, app, common);
    }

    int run() {
        require_file(data, "dataset");
        const auto cfg = to_train_config(opts, common);
        const auto ds = load_table(data);
        const auto out = prepare_out(common);
        const auto resolved = params.resolved();
        resolved.write((out / "config.ini").string());
        try {
            const auto res = train(ds.points, cfg);
            save_model(res.config, (out / "model.qcm").string(), resolved.str());
            training_report_doc(res.report).write((out / "train_report.txt").string());
            write_file((out / "loss_history.csv").string(), loss_history_csv(res.report));
            write_timing(out, res.report.wall_time_seconds);
            std::cout << "initial_loss = " << format_double(res.report.initial_loss) << "\n"
                      << "final_loss = " << format_double(res.report.final_loss) << "\n"
                      << "wrote " << (out / "model.qcm").string() << "\n";
            return 0;
        } catch (const TrainingDiverged& e) {
            save_model(e.last_finite_state(), (out / "diverged.qcm").string(), resolved.str());
            std::cerr << "error: " << e.what() << "; last finite state in "
                      << (out / "diverged.qcm").string() << "\n";
            return kExitDiverged;
        }
    }
};

// ---------------------------------------------------------------- estimate

struct EstimateCmd {
    Common common;
    EstimateOptions opts;
    std::string model, data;
    cli::ParamSet params;

    explicit EstimateCmd(CLI::App* app) : params(app) {
        params.add("model", model, "Model file written by train");
        params.add("data", data, "Dataset table");
        add_estimate_params(params, opts);
        add_common(params, app, common);
    }

    int run() {
        require_file(model, "model");
        require_file(data, "dataset");
        const auto ep = to_estimator_params(opts, common);
        const auto m = load_model(model);
        const auto ds = load_table(data);
        if (ds.points.cols() != m.config.feature_dim())
            throw InvalidInput("dataset has " + std::to_string(ds.points.cols()) + " columns but the model has D = " +
                               std::to_string(m.config.feature_dim()));
        const auto rep = estimate_dimensions(m.config, ds.points, ep);
        const auto out = prepare_out(common);
        params.resolved().write((out / "config.ini").string());
        write_file((out / "local_dims.csv").string(), local_dims_csv(rep));
        write_file((out / "spectra.csv").string(), spectra_csv(rep, m.config.feature_dim()));
        write_file((out / "cloud.csv").string(), cloud_csv(rep.cloud));
        const auto summary = summary_doc(rep, parse_aggregation(opts.aggregation));
        summary.write((out / "summary.txt").string());
        std::cout << summary.str();
        return 0;
    }
};

// ---------------------------------------------------------------- baseline

struct BaselineOptions {
    std::string method = "twonn";
    int k = 10;
    double discard = 0.1;
};

void add_baseline_params(cli::ParamSet& ps, BaselineOptions& o) {
    ps.add("k", o.k, "mle: neighbours");
    ps.add("discard", o.discard, "twonn: fraction of largest ratios discarded");
}

BaselineResult run_baseline(BaselineMethod m, const RMatrix& x, const BaselineOptions& o, std::size_t threads) {
    return m == BaselineMethod::twonn ? twonn(x, o.discard, threads) : mle_dimension(x, o.k, threads);
}

KeyValueDoc baseline_doc(const BaselineResult& r) {
    KeyValueDoc doc;
    doc.set("method", to_string(r.method));
    doc.set("estimate", r.estimate);
    if (r.method == BaselineMethod::mle)
        doc.set("k", r.k);
    else
        doc.set("discard_fraction", r.discard_fraction);
    doc.set("points_used", static_cast<unsigned long>(r.points_used));
    doc.set("duplicates_dropped", static_cast<unsigned long>(r.duplicates_dropped));
    return doc;
}

struct BaselineCmd {
    Common common;
    BaselineOptions opts;
    std::string data;
    cli::ParamSet params;

    explicit BaselineCmd(CLI::App* app) : params(app) {
        params.add("data", data, "Dataset table");
        params.add("method", opts.method, "twonn or mle");
        add_baseline_params(params, opts);
        add_common(params, app, common);
    }

    int run() {
        require_file(data, "dataset");
        const auto method = parse_baseline(opts.method);
        const auto ds = load_table(data);
        const auto res = run_baseline(method, ds.points, opts, common.threads);
        const auto out = prepare_out(common);
        params.resolved().write((out / "config.ini").string());
        const auto doc = baseline_doc(res);
        doc.write((out / "baseline.txt").string());
        std::cout << doc.str();
        return 0;
    }
};

// ---------------------------------------------------------------- sweep

const std::string kSweepHeader = "level,noise,method,estimate,mode,median,geometric_mean,mean_local_dim,skipped_count,final_loss";

struct SweepCmd {
    Common common;
    GenOptions gen;
    TrainOptions train_opts;
    EstimateOptions est_opts;
    BaselineOptions base_opts;
    std::string manifold = "sphere";
    std::string data;
    std::string scale = "none";
    double noise_min = 0.0, noise_max = 0.2, noise_step = 0.05;
    std::vector<std::string> methods{"qcml", "twonn", "mle"};
    cli::ParamSet params;

    explicit SweepCmd(CLI::App* app) : params(app) {
        params.add("manifold", manifold, "sphere, circle, swissroll, hypercube, or file (feature-scaled noise)");
        params.add("data", data, "file: dataset table");
        params.add("scale", scale, "file: none, zscore or minmax before adding noise");
        params.add("noise-min", noise_min, "First noise level");
        params.add("noise-max", noise_max, "Last noise level");
        params.add("noise-step", noise_step, "Noise level spacing");
        params.add("methods", methods, "Comma-separated subset of qcml, twonn, mle");
        add_generator_params(params, gen);
        add_train_params(params, train_opts);
        add_estimate_params(params, est_opts);
        add_baseline_params(params, base_opts);
        add_common(params, app, common);
    }

    std::vector<double> levels() const {
        if (!(noise_step > 0.0) || !(noise_max >= noise_min) || noise_min < 0.0)
            throw InvalidInput("noise grid needs 0 <= noise-min <= noise-max and noise-step > 0");
        const auto count = static_cast<std::size_t>(std::floor((noise_max - noise_min) / noise_step + 1e-9)) + 1;
        std::vector<double> v;
        // Snap to the decimal grid so 0.05 * 3 is written as 0.15.
        for (std::size_t i = 0; i < count; ++i)
            v.push_back(std::round((noise_min + static_cast<double>(i) * noise_step) * 1e12) / 1e12);
        return v;
    }

    Dataset dataset_at(double noise, const Dataset* base) const {
        if (manifold == "file") return add_feature_scaled_noise(*base, noise, common.seed);
        return generate_named(manifold, gen, noise, common.seed);
    }

    // Settings that affect results; out and threads are free to change on resume.
    static KeyValueDoc comparable(const KeyValueDoc& d) {
        KeyValueDoc out;
        for (const auto& [k, v] : d.entries())
            if (k != "out" && k != "threads") out.set(k, v);
        return out;
    }

    int run() {
        for (const auto& m : methods)
            if (m != "qcml" && m != "twonn" && m != "mle")
                throw InvalidInput("unknown sweep method '" + m + "' (expected qcml, twonn, mle)");
        if (methods.empty()) throw InvalidInput("no sweep methods given");
        const auto grid = levels();
        const auto tcfg = to_train_config(train_opts, common);
        const auto ep = to_estimator_params(est_opts, common);
        const auto headline = parse_aggregation(est_opts.aggregation);

        Dataset base;
        if (manifold == "file") {
            require_file(data, "dataset");
            base = standardize(load_table(data), parse_scale_mode(scale)).first;
        } else if (std::find(kGenerators.begin(), kGenerators.end(), manifold) == kGenerators.end()) {
            throw InvalidInput("unknown manifold '" + manifold + "' (expected sphere, circle, swissroll, hypercube, file)");
        }

        const auto out = prepare_out(common);
        const auto table_path = (out / "sweep.csv").string();
        const auto config_path = (out / "config.ini").string();
        const auto resolved = params.resolved();

        std::set<std::pair<std::size_t, std::string>> done;
        std::string kept = kSweepHeader + "\n";
        if (fs::exists(table_path)) {
            if (!fs::exists(config_path) || comparable(KeyValueDoc::read(config_path)).str() != comparable(resolved).str())
                throw InvalidInput("existing " + table_path +
                                   " was produced with different settings; use another --out to start fresh");
            std::istringstream in(read_file(table_path));
            std::string line;
            std::getline(in, line);
            if (trim(line) != kSweepHeader) throw InvalidInput("existing " + table_path + " has an unexpected header");
            while (std::getline(in, line)) {
                if (in.eof()) break;  // unterminated final line from an interrupted run
                const auto cells = split_csv_line(line);
                if (cells.size() != 10) continue;
                done.insert({static_cast<std::size_t>(std::stoul(cells[0])), cells[2]});
                kept += line + "\n";
            }
        }
        resolved.write(config_path);
        write_file(table_path, kept);
        std::ofstream table(table_path, std::ios::app | std::ios::binary);

        for (std::size_t li = 0; li < grid.size(); ++li) {
            const double noise = grid[li];
            bool pending = false;
            for (const auto& m : methods) pending |= !done.count({li, m});
            if (!pending) continue;
            const auto ds = dataset_at(noise, &base);
            for (const auto& m : methods) {
                if (done.count({li, m})) continue;
                std::string row = std::to_string(li) + "," + format_double(noise) + "," + m + ",";
                if (m == "qcml") {
                    const auto tr = train(ds.points, tcfg);
                    const auto rep = estimate_dimensions(tr.config, ds.points, ep);
                    row += format_double(headline_estimate(rep, headline)) + "," + std::to_string(rep.global_mode) +
                           "," + format_double(rep.global_median) + "," + format_double(rep.global_geometric_mean) +
                           "," + format_double(rep.mean_local_dim) + "," + std::to_string(rep.skipped_count) + "," +
                           format_double(tr.report.final_loss);
                } else {
                    const auto r = run_baseline(parse_baseline(m), ds.points, base_opts, common.threads);
                    row += format_double(r.estimate) + ",,,,,,";
                }
                table << row << "\n" << std::flush;
                std::cerr << "level " << li << " noise " << format_double(noise) << " " << m << " done\n";
            }
        }
        std::cout << "wrote " << table_path << "\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum cognition machine learning: intrinsic dimension estimation"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto* gen_app = app.add_subcommand("generate", "Write a synthetic dataset");
    auto* train_app = app.add_subcommand("train", "Fit a matrix configuration to a dataset");
    auto* est_app = app.add_subcommand("estimate", "Estimate local and global intrinsic dimension");
    auto* base_app = app.add_subcommand("baseline", "Run TwoNN or MLE on a dataset");
    auto* sweep_app = app.add_subcommand("sweep", "Estimate dimension across a grid of noise levels");

    GenerateCmd gen(gen_app);
    TrainCmd tr(train_app);
    EstimateCmd est(est_app);
    BaselineCmd base(base_app);
    SweepCmd sweep(sweep_app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        auto with_config = [](auto& cmd) {
            if (!cmd.common.config.empty()) cmd.params.merge_config(cmd.common.config);
            return cmd.run();
        };
        if (gen_app->parsed()) return with_config(gen);
        if (train_app->parsed()) return with_config(tr);
        if (est_app->parsed()) return with_config(est);
        if (base_app->parsed()) return with_config(base);
        if (sweep_app->parsed()) return with_config(sweep);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
