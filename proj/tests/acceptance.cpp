// Acceptance benchmarks. Prints one PASS/FAIL/SKIP line per criterion and
// exits nonzero when any blocking criterion fails.
//
//   acceptance [output-dir]
//
// The 17-dimensional hypercube benchmark is non-blocking; set
// QCML_ACCEPTANCE_SKIP_SLOW=1 to leave it out.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qcml/baselines.hpp"
#include "qcml/data.hpp"
#include "qcml/estimator.hpp"
#include "qcml/reports.hpp"
#include "qcml/training.hpp"
#include "test_support.hpp"

using namespace qcml;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string id;
    bool pass;
    bool blocking;
};

std::vector<Criterion> results;

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void report(const std::string& id, bool pass, const std::string& what, bool blocking = true) {
    results.push_back({id, pass, blocking});
    std::cout << (pass ? "PASS" : "FAIL") << "  " << id << "  " << what << (blocking ? "" : "  [non-blocking]")
              << std::endl;
}

void skip(const std::string& id, const std::string& what) { std::cout << "SKIP  " << id << "  " << what << std::endl; }

// ------------------------------------------------------------------ 1, 2

void formula_suite() {
    std::mt19937_64 rng(20240601);
    double decomposition = 0.0, hessian = 0.0, min_eig = 0.0, gradient = 0.0;
    int rank_violations = 0, accepted = 0, rejected = 0;
    while (accepted < 100) {
        const Eigen::Index d = 2 + accepted % 3, n = 2 + (accepted / 3) % 4;
        const auto a = fixtures::random_config(d, n, rng);
        const RVector x = fixtures::random_point(d, rng, 1.5);
        const auto q = quasi_coherent(a, x);
        // Everything below assumes a nondegenerate ground state.
        if (q.ground_gap() < 0.02) {
            ++rejected;
            continue;
        }
        ++accepted;

        const auto dec = energy_decomposition(a, x);
        decomposition = std::max(decomposition, std::abs(dec.energy - (0.5 * dec.bias_sq + 0.5 * dec.fluctuation)));

        hessian = std::max(hessian, (hessian_energy(a, x) - fixtures::richardson_hessian(a, x)).cwiseAbs().maxCoeff());

        const auto g = quantum_metric(a, x);
        min_eig = std::min(min_eig, g.eigenvalues.minCoeff());
        const auto big = (g.eigenvalues.array() > 0.5).count();
        if (big > 2 * (n - 1)) ++rank_violations;

        std::uniform_real_distribution<double> uw(0.0, 1.0);
        const double w = uw(rng);
        const RMatrix batch = x.transpose();
        const auto lg = loss_gradient(a, batch, w);
        gradient = std::max(gradient, fixtures::relative_gradient_error(
                                          lg.gradient, fixtures::finite_difference_gradient(a, batch, w)));
    }
    const std::string n_str = " over " + std::to_string(accepted) + " instances (" + std::to_string(rejected) +
                              " near-degenerate draws with gap < 0.02 redrawn)";
    report("1a", decomposition < 1e-9, "energy decomposition residual " + fmt(decomposition) + " < 1e-9" + n_str);
    report("1b", hessian < 1e-5, "Hessian vs finite differences " + fmt(hessian) + " < 1e-5");
    report("1c", min_eig >= -1e-8, "metric min eigenvalue " + fmt(min_eig) + " >= -1e-8");
    report("1d", gradient < 1e-4, "loss gradient relative error " + fmt(gradient) + " < 1e-4");
    report("1e", rank_violations == 0,
           "eigenvalues > 0.5 at most 2(N-1): " + std::to_string(rank_violations) + " violations");
}

void pauli_oracle() {
    RVector y(3);
    y << 0, 0, 1;
    const auto g = quantum_metric(pauli_configuration(), y);
    RMatrix expected = RMatrix::Zero(3, 3);
    expected(0, 0) = expected(1, 1) = 1.0;
    const double err = (g.entries - expected).cwiseAbs().maxCoeff();
    const auto gap = spectral_gap_ratio(g.eigenvalues);
    report("2", err < 1e-10 && gap.local_dim == 2,
           "Pauli metric at (0,0,1): |g - diag(1,1,0)| = " + fmt(err) + ", local_dim = " +
               std::to_string(gap.local_dim));
}

// ------------------------------------------------------------------ 3-7

struct Fit {
    TrainResult train;
    std::optional<DimensionReport> dims;
};

TrainConfig train_config(Eigen::Index n, double w, int epochs, std::size_t threads) {
    TrainConfig cfg;
    cfg.hilbert_dim = n;
    cfg.fluctuation_weight = w;
    cfg.epochs = epochs;
    cfg.seed = 1;
    cfg.threads = threads;
    return cfg;
}

// Trains, optionally estimates, and writes the report files into dir.
Fit fit(const fs::path& dir, const RMatrix& data, const TrainConfig& cfg, bool estimate) {
    fs::create_directories(dir);
    Fit f{train(data, cfg), std::nullopt};
    training_report_doc(f.train.report).write((dir / "train_report.txt").string());
    write_file((dir / "loss_history.csv").string(), loss_history_csv(f.train.report));
    if (estimate) {
        EstimatorParams ep;
        ep.threads = cfg.threads;
        f.dims = estimate_dimensions(f.train.config, data, ep);
        write_file((dir / "local_dims.csv").string(), local_dims_csv(*f.dims));
        write_file((dir / "spectra.csv").string(), spectra_csv(*f.dims, data.cols()));
        summary_doc(*f.dims, Aggregation::mode).write((dir / "summary.txt").string());
        write_file((dir / "cloud.csv").string(), cloud_csv(f.dims->cloud));
    } else {
        write_file((dir / "cloud.csv").string(), cloud_csv(point_cloud(f.train.config, data, cfg.threads)));
    }
    return f;
}

double fraction_with_dim(const DimensionReport& r, int d) {
    std::size_t c = 0;
    for (const auto& l : r.local_dims)
        if (!l.skipped && l.local_dim == d) ++c;
    return static_cast<double>(c) / static_cast<double>(r.local_dims.size());
}

void fuzzy_sphere(const fs::path& out, std::size_t threads, bool check) {
    const auto clean = fit(out / "sphere_noise0", gen_sphere(500, 0, 0.0, 1).points, train_config(3, 0, 1000, threads), true);
    const auto noisy = fit(out / "sphere_noise0.2", gen_sphere(500, 0, 0.2, 1).points, train_config(3, 0, 1000, threads), true);
    if (!check) return;
    const double frac = fraction_with_dim(*clean.dims, 2);
    const double mean = noisy.dims->mean_local_dim;
    report("3a", frac >= 0.95, "sphere T=500 N=3 noise 0: local_dim 2 at " + fmt(100 * frac) + "% of points (>= 95%)");
    report("3b", mean >= 1.90 && mean <= 2.00,
           "sphere T=500 N=3 noise 0.2: mean local_dim " + fmt(mean, 6) + " in [1.90, 2.00]");
}

void noise_contrast(const fs::path& out, std::size_t threads, bool check) {
    const std::vector<double> levels{0.0, 0.05, 0.1, 0.15, 0.2};
    std::string table = "noise,qcml_mode,qcml_mean,twonn,mle\n";
    std::vector<int> modes;
    std::vector<double> tn, ml;
    for (double noise : levels) {
        const auto data = gen_sphere(500, 0, noise, 1).points;
        const auto f = fit(out / ("sweep_noise" + format_double(noise)), data, train_config(3, 0, 1000, threads), true);
        modes.push_back(f.dims->global_mode);
        tn.push_back(twonn(data, 0.1, threads).estimate);
        ml.push_back(mle_dimension(data, 10, threads).estimate);
        table += format_double(noise) + "," + std::to_string(modes.back()) + "," +
                 format_double(f.dims->mean_local_dim) + "," + format_double(tn.back()) + "," +
                 format_double(ml.back()) + "\n";
    }
    write_file((out / "sweep.csv").string(), table);
    if (!check) return;
    std::string mode_list;
    for (int m : modes) mode_list += std::to_string(m) + " ";
    report("4a", std::all_of(modes.begin(), modes.end(), [](int m) { return m == 2; }),
           "sphere sweep T=500: QCML mode per level = " + mode_list + "(all 2)");
    report("4b", tn.back() - tn.front() >= 0.5,
           "TwoNN " + fmt(tn.front()) + " -> " + fmt(tn.back()) + " rises by " + fmt(tn.back() - tn.front()) + " >= 0.5");
    report("4c", ml.back() - ml.front() >= 0.5,
           "MLE " + fmt(ml.front()) + " -> " + fmt(ml.back()) + " rises by " + fmt(ml.back() - ml.front()) + " >= 0.5");
}

void swiss_roll(const fs::path& out, std::size_t threads, bool check) {
    const auto data = gen_swiss_roll(1000, 0.0, 1).points;
    const auto n3 = fit(out / "swissroll_n3", data, train_config(3, 0, 1000, threads), true);
    const auto n4 = fit(out / "swissroll_n4", data, train_config(4, 0, 1000, threads), true);
    if (!check) return;
    const double f3 = fraction_with_dim(*n3.dims, 2);
    const double f41 = fraction_with_dim(*n4.dims, 1), f42 = fraction_with_dim(*n4.dims, 2);
    report("5a", f3 >= 0.99, "Swiss roll T=1000 N=3: local_dim 2 at " + fmt(100 * f3) + "% of points (>= 99%)");
    report("5b", f41 > 0 && f42 > 0,
           "Swiss roll T=1000 N=4: d=1 at " + fmt(100 * f41) + "%, d=2 at " + fmt(100 * f42) + "% (both present)");
}

struct CloudStats {
    double distance_to_data = 0.0;
    double radial_error = 0.0;  // mean | |p| - 1 |
    double radial_spread = 0.0; // mean | |p| - mean |p| |
    double mean_radius = 0.0;
};

CloudStats circle_stats(const PointCloud& cloud, const RMatrix& data) {
    CloudStats s;
    const auto t = static_cast<double>(cloud.size());
    for (const auto& c : cloud) s.mean_radius += c.position.norm() / t;
    for (const auto& c : cloud) {
        const RVector x = data.row(static_cast<Eigen::Index>(c.source_index)).transpose();
        s.distance_to_data += (c.position - x).norm() / t;
        s.radial_error += std::abs(c.position.norm() - 1.0) / t;
        s.radial_spread += std::abs(c.position.norm() - s.mean_radius) / t;
    }
    return s;
}

// Greedy clustering: a position joins the first cluster whose seed is within tol.
std::size_t distinct_positions(const PointCloud& cloud, double tol) {
    std::vector<RVector> seeds;
    for (const auto& c : cloud) {
        bool found = false;
        for (const auto& s : seeds)
            if ((s - c.position).norm() <= tol) {
                found = true;
                break;
            }
        if (!found) seeds.push_back(c.position);
    }
    return seeds.size();
}

void circle_sweep(const fs::path& out, std::size_t threads, bool check) {
    const auto data = gen_circle(1000, 0.1, 1).points;
    const auto w0 = fit(out / "circle_w0", data, train_config(4, 0.0, 1000, threads), false);
    const auto w05 = fit(out / "circle_w0.5", data, train_config(4, 0.5, 1000, threads), false);
    const auto w1 = fit(out / "circle_w1", data, train_config(4, 1.0, 2000, threads), false);
    if (!check) return;
    const auto s0 = circle_stats(point_cloud(w0.train.config, data, threads), data);
    const auto s05 = circle_stats(point_cloud(w05.train.config, data, threads), data);
    const auto clusters = distinct_positions(point_cloud(w1.train.config, data, threads), 0.05);
    report("6a", s0.distance_to_data < s05.distance_to_data,
           "circle T=1000 N=4: mean distance to data, w=0 " + fmt(s0.distance_to_data) + " < w=0.5 " +
               fmt(s05.distance_to_data));
    report("6b", s05.radial_error < s0.radial_error,
           "circle: mean | |p| - 1 |, w=0.5 " + fmt(s05.radial_error) + " < w=0 " + fmt(s0.radial_error) +
               "  (mean radius w=0 " + fmt(s0.mean_radius) + ", w=0.5 " + fmt(s05.mean_radius) +
               "; spread about mean radius w=0 " + fmt(s0.radial_spread) + ", w=0.5 " + fmt(s05.radial_spread) + ")");
    report("6c", clusters <= 4, "circle w=1, 2000 epochs: " + std::to_string(clusters) + " distinct positions (<= 4)");
}

void rmt_detector(const fs::path& out, bool check) {
    fs::create_directories(out);
    std::string table = "D,r,trial,local_dim,tau,sigma\n";
    std::map<std::pair<int, int>, int> hits;
    for (int d : {40, 72})
        for (int r : {3, 10}) {
            std::mt19937_64 rng(1000 + 100 * d + r);
            for (int trial = 0; trial < 100; ++trial) {
                const RVector eigs = fixtures::planted_spectrum(d, r, 0.1, 1.0, rng);
                const auto est = spectral_gap_rmt(eigs);
                if (est.local_dim == r) ++hits[{d, r}];
                table += std::to_string(d) + "," + std::to_string(r) + "," + std::to_string(trial) + "," +
                         std::to_string(est.local_dim) + "," + format_double(*est.threshold) + "," +
                         format_double(*est.noise_sigma) + "\n";
            }
        }
    write_file((out / "rmt_trials.csv").string(), table);
    if (!check) return;
    char sub = 'a';
    for (const auto& [key, count] : hits)
        report(std::string("7") + sub++, count >= 95,
               "RMT planted D=" + std::to_string(key.first) + " r=" + std::to_string(key.second) +
                   " (bulk sigma 0.1, signal 1.0): recovered in " + std::to_string(count) + "/100 trials (>= 95)");
}

void hypercube(const fs::path& out, std::size_t threads) {
    const auto data = gen_hypercube(17, 18, 2500, 0.0, 1).points;
    const auto f = fit(out / "hypercube_n10", data, train_config(10, 0, 1000, threads), true);
    RVector mean = RVector::Zero(18);
    std::size_t used = 0;
    for (const auto& s : f.dims->spectra)
        if (s.size() == 18) {
            mean += s;
            ++used;
        }
    mean /= static_cast<double>(std::max<std::size_t>(used, 1));
    const auto gap = spectral_gap_ratio(mean);
    const double med = f.dims->global_median;
    report("8", med >= 15 && med <= 17,
           "hypercube d=17 D=18 T=2500 N=10: median local_dim " + fmt(med) + " in [15, 17]; mean-spectrum gap ratio " +
               fmt(gap.gap_ratio) + " at d=" + std::to_string(gap.local_dim),
           false);
}

// ------------------------------------------------------------------ 9

std::vector<std::string> files_under(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
    std::sort(out.begin(), out.end());
    return out;
}

void compare_runs(const fs::path& a, const fs::path& b) {
    const auto fa = files_under(a), fb = files_under(b);
    std::size_t differing = 0;
    std::string first;
    for (const auto& f : fa) {
        if (!fs::exists(b / f) || read_file((a / f).string()) != read_file((b / f).string())) {
            if (first.empty()) first = f;
            ++differing;
        }
    }
    report("9", fa == fb && differing == 0,
           "rerun of 3-7 with identical seeds: " + std::to_string(fa.size()) + " report files, " +
               std::to_string(differing) + " differ" + (first.empty() ? "" : " (first: " + first + ")"));
}

template <class F>
void timed(const std::string& label, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "      (" << label << ": " << fmt(s, 3) << " s)" << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::remove_all(out);
    const std::size_t threads = std::max(2u, std::thread::hardware_concurrency());
    const bool slow = std::getenv("QCML_ACCEPTANCE_SKIP_SLOW") == nullptr;

    try {
        timed("1", formula_suite);
        timed("2", pauli_oracle);
        timed("3", [&] { fuzzy_sphere(out / "run1", threads, true); });
        timed("4", [&] { noise_contrast(out / "run1", threads, true); });
        timed("5", [&] { swiss_roll(out / "run1", threads, true); });
        timed("6", [&] { circle_sweep(out / "run1", threads, true); });
        timed("7", [&] { rmt_detector(out / "run1", true); });
        if (slow)
            timed("8", [&] { hypercube(out / "slow", threads); });
        else
            skip("8", "hypercube d=17 D=18 N=10 (QCML_ACCEPTANCE_SKIP_SLOW is set)");
        // The rerun uses one worker so it also checks thread-count independence.
        timed("9", [&] {
            fuzzy_sphere(out / "run2", 1, false);
            noise_contrast(out / "run2", 1, false);
            swiss_roll(out / "run2", 1, false);
            circle_sweep(out / "run2", 1, false);
            rmt_detector(out / "run2", false);
            compare_runs(out / "run1", out / "run2");
        });
    } catch (const std::exception& e) {
        std::cout << "FAIL  error: " << e.what() << std::endl;
        return 1;
    }

    int blocking_failures = 0, passed = 0;
    for (const auto& r : results) {
        if (r.pass) ++passed;
        if (!r.pass && r.blocking) ++blocking_failures;
    }
    std::cout << passed << "/" << results.size() << " checks passed, " << blocking_failures
              << " blocking failure(s)" << std::endl;
    return blocking_failures == 0 ? 0 : 1;
}
