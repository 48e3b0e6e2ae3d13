#pragma once

// Per-point local intrinsic dimension: psi_0(x) -> y = A(psi_0(x)) -> g(y) ->
// spectral gap, plus mode / median / geometric-mean aggregation.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcml/geometry.hpp"

namespace qcml {

enum class Aggregation { mode, median, geometric_mean };

inline std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::mode: return "mode";
        case Aggregation::median: return "median";
        case Aggregation::geometric_mean: return "geometric_mean";
    }
    return "?";
}

inline Aggregation parse_aggregation(const std::string& s) {
    if (s == "mode") return Aggregation::mode;
    if (s == "median") return Aggregation::median;
    if (s == "geometric_mean" || s == "geomean") return Aggregation::geometric_mean;
    throw InvalidInput("unknown aggregation '" + s + "' (expected mode, median, geometric_mean)");
}

// Mode ties go to the smaller value; even-length median is the lower median.
inline double aggregate(const std::vector<int>& dims, Aggregation how) {
    if (dims.empty()) throw InvalidInput("aggregate: no dimensions to aggregate");
    switch (how) {
        case Aggregation::mode: {
            std::map<int, std::size_t> counts;
            for (int d : dims) ++counts[d];
            int best = counts.begin()->first;
            std::size_t best_count = 0;
            for (const auto& [d, c] : counts)
                if (c > best_count) {
                    best = d;
                    best_count = c;
                }
            return best;
        }
        case Aggregation::median: {
            std::vector<int> s = dims;
            std::sort(s.begin(), s.end());
            return s[(s.size() - 1) / 2];
        }
        case Aggregation::geometric_mean: {
            double log_sum = 0.0;
            for (int d : dims) {
                if (d <= 0) return 0.0;
                log_sum += std::log(static_cast<double>(d));
            }
            return std::exp(log_sum / static_cast<double>(dims.size()));
        }
    }
    return 0.0;
}

enum class PointStatus { ok, degenerate, no_gap, unreliable_threshold };

inline std::string to_string(PointStatus s) {
    switch (s) {
        case PointStatus::ok: return "ok";
        case PointStatus::degenerate: return "degenerate";
        case PointStatus::no_gap: return "no_gap";
        case PointStatus::unreliable_threshold: return "unreliable_threshold";
    }
    return "?";
}

struct LocalDimension {
    std::size_t source_index = 0;
    int local_dim = 0;
    double gap_ratio = 0.0;
    bool skipped = false;
    PointStatus status = PointStatus::ok;
    std::optional<double> threshold;
    std::optional<double> noise_sigma;
};

struct EstimatorParams {
    GapMethod method = GapMethod::ratio;
    double ratio_floor = kDefaultRatioFloor;
    double rmt_aspect = 1.0;
    double degeneracy_floor = kDefaultDegeneracyFloor;
    std::size_t threads = 1;
};

struct DimensionReport {
    std::vector<LocalDimension> local_dims;
    std::vector<RVector> spectra;  // metric eigenvalues per point; empty when skipped
    PointCloud cloud;
    int global_mode = 0;
    double global_median = 0.0;
    double global_geometric_mean = 0.0;
    double mean_local_dim = 0.0;
    std::size_t skipped_count = 0;
    GapMethod method = GapMethod::ratio;

    std::vector<int> included_dims() const {
        std::vector<int> d;
        for (const auto& l : local_dims)
            if (!l.skipped) d.push_back(l.local_dim);
        return d;
    }
};

inline DimensionReport estimate_dimensions(const MatrixConfiguration& a, const RMatrix& data,
                                           const EstimatorParams& params = {}) {
    if (data.rows() == 0) throw InvalidInput("estimate_dimensions: empty data");
    if (data.cols() != a.feature_dim()) throw InvalidInput("estimate_dimensions: data width differs from D");
    const auto t = static_cast<std::size_t>(data.rows());

    DimensionReport rep;
    rep.method = params.method;
    rep.local_dims.resize(t);
    rep.spectra.resize(t);
    rep.cloud.resize(t);

    parallel_for(t, params.threads, [&](std::size_t i) {
        const DataPoint x = data.row(static_cast<Eigen::Index>(i)).transpose();
        const auto q = quasi_coherent(a, x);
        const RVector y = position(a, q.state);
        rep.cloud[i] = {i, y, q.energy, quantum_fluctuation(a, q.state)};

        LocalDimension& ld = rep.local_dims[i];
        ld.source_index = i;
        QuantumMetric g;
        try {
            g = quantum_metric(a, y, params.degeneracy_floor);
        } catch (const DegenerateGroundState&) {
            ld.skipped = true;
            ld.status = PointStatus::degenerate;
            return;
        }
        rep.spectra[i] = g.eigenvalues;
        const GapEstimate est = params.method == GapMethod::ratio ? spectral_gap_ratio(g.eigenvalues, params.ratio_floor)
                                                                  : spectral_gap_rmt(g.eigenvalues, params.rmt_aspect);
        ld.local_dim = est.local_dim;
        ld.gap_ratio = est.gap_ratio;
        ld.threshold = est.threshold;
        ld.noise_sigma = est.noise_sigma;
        if (est.no_gap) {
            ld.skipped = true;
            ld.status = PointStatus::no_gap;
        } else if (est.unreliable_threshold) {
            ld.status = PointStatus::unreliable_threshold;
        }
    });

    for (const auto& l : rep.local_dims)
        if (l.skipped) ++rep.skipped_count;
    const auto dims = rep.included_dims();
    if (dims.empty()) throw EstimationFailed("estimate_dimensions: every point was skipped");
    rep.global_mode = static_cast<int>(aggregate(dims, Aggregation::mode));
    rep.global_median = aggregate(dims, Aggregation::median);
    rep.global_geometric_mean = aggregate(dims, Aggregation::geometric_mean);
    double sum = 0.0;
    for (int d : dims) sum += d;
    rep.mean_local_dim = sum / static_cast<double>(dims.size());
    return rep;
}

}  // namespace qcml
