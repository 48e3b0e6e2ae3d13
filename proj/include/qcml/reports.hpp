#pragma once

// Plain-text report files shared by the command-line tool and the benchmarks.
// Everything here is a pure function of its inputs, so reruns with the same
// seed produce byte-identical files. Wall-clock time is never written here.

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qcml/estimator.hpp"
#include "qcml/kv.hpp"
#include "qcml/training.hpp"

namespace qcml {

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
    if (!f) throw Error("write failed for '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline KeyValueDoc training_report_doc(const TrainingReport& r) {
    KeyValueDoc doc;
    doc.set("epochs_run", static_cast<unsigned long>(r.loss_history.size()));
    doc.set("initial_loss", r.initial_loss);
    doc.set("final_loss", r.final_loss);
    doc.set("final_mean_energy", r.final_mean_energy);
    doc.set("degenerate_ground_count", static_cast<unsigned long>(r.degenerate_ground_count));
    return doc;
}

inline std::string loss_history_csv(const TrainingReport& r) {
    std::string out = "epoch,loss\n";
    for (std::size_t i = 0; i < r.loss_history.size(); ++i)
        out += std::to_string(i + 1) + "," + format_double(r.loss_history[i]) + "\n";
    return out;
}

inline std::string local_dims_csv(const DimensionReport& rep) {
    std::string out = "index,local_dim,gap_ratio,status,skipped,threshold,noise_sigma\n";
    for (const auto& l : rep.local_dims) {
        out += std::to_string(l.source_index) + "," + std::to_string(l.local_dim) + "," + format_double(l.gap_ratio) +
               "," + to_string(l.status) + "," + (l.skipped ? "1" : "0") + ",";
        if (l.threshold) out += format_double(*l.threshold);
        out += ",";
        if (l.noise_sigma) out += format_double(*l.noise_sigma);
        out += "\n";
    }
    return out;
}

// One row per point of ascending metric eigenvalues; skipped degenerate points
// leave the eigenvalue cells empty.
inline std::string spectra_csv(const DimensionReport& rep, Eigen::Index d) {
    std::string out = "index";
    for (Eigen::Index k = 1; k <= d; ++k) out += ",g" + std::to_string(k);
    out += "\n";
    for (std::size_t i = 0; i < rep.spectra.size(); ++i) {
        out += std::to_string(rep.local_dims[i].source_index);
        const RVector& s = rep.spectra[i];
        for (Eigen::Index k = 0; k < d; ++k) {
            out += ",";
            if (s.size() == d) out += format_double(s[k]);
        }
        out += "\n";
    }
    return out;
}

inline std::string cloud_csv(const PointCloud& cloud) {
    if (cloud.empty()) return "index\n";
    const auto d = cloud.front().position.size();
    std::string out = "index";
    for (Eigen::Index k = 1; k <= d; ++k) out += ",p" + std::to_string(k);
    out += ",energy,fluctuation\n";
    for (const auto& c : cloud) {
        out += std::to_string(c.source_index);
        for (Eigen::Index k = 0; k < d; ++k) out += "," + format_double(c.position[k]);
        out += "," + format_double(c.energy) + "," + format_double(c.fluctuation) + "\n";
    }
    return out;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double headline_estimate(const DimensionReport& rep, Aggregation how) {
    switch (how) {
        case Aggregation::mode: return rep.global_mode;
        case Aggregation::median: return rep.global_median;
        case Aggregation::geometric_mean: return rep.global_geometric_mean;
    }
    return 0.0;
}

inline KeyValueDoc summary_doc(const DimensionReport& rep, Aggregation headline) {
    KeyValueDoc doc;
    doc.set("method", to_string(rep.method));
    doc.set("points", static_cast<unsigned long>(rep.local_dims.size()));
    doc.set("skipped_count", static_cast<unsigned long>(rep.skipped_count));
    doc.set("aggregation", to_string(headline));
    doc.set("estimate", headline_estimate(rep, headline));
    doc.set("global_mode", rep.global_mode);
    doc.set("global_median", rep.global_median);
    doc.set("global_geometric_mean", rep.global_geometric_mean);
    doc.set("mean_local_dim", rep.mean_local_dim);
    std::size_t unreliable = 0;
    std::vector<double> taus, sigmas;
    std::map<int, std::size_t> hist;
    for (const auto& l : rep.local_dims) {
        if (l.status == PointStatus::unreliable_threshold) ++unreliable;
        if (l.skipped) continue;
        ++hist[l.local_dim];
        if (l.threshold) taus.push_back(*l.threshold);
        if (l.noise_sigma) sigmas.push_back(*l.noise_sigma);
    }
    if (rep.method == GapMethod::rmt) {
        // Per-point values are in local_dims.csv; these are medians over points.
        doc.set("tau_hat", median_of(taus));
        doc.set("sigma_hat", median_of(sigmas));
        doc.set("unreliable_threshold_count", static_cast<unsigned long>(unreliable));
    }
    for (const auto& [d, c] : hist) doc.set("count_d" + std::to_string(d), static_cast<unsigned long>(c));
    return doc;
}

}  // namespace qcml
