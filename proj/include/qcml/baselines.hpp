#pragma once

// Two classical local intrinsic-dimension estimators over exact brute-force
// neighbour search: TwoNN (second/first neighbour ratio) and Levina-Bickel
// MLE.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qcml/data.hpp"
#include "qcml/parallel.hpp"

namespace qcml {

enum class BaselineMethod { twonn, mle };

inline std::string to_string(BaselineMethod m) { return m == BaselineMethod::twonn ? "twonn" : "mle"; }

inline BaselineMethod parse_baseline(const std::string& s) {
    if (s == "twonn") return BaselineMethod::twonn;
    if (s == "mle") return BaselineMethod::mle;
    throw InvalidInput("unknown baseline '" + s + "' (expected twonn or mle)");
}

struct BaselineResult {
    BaselineMethod method = BaselineMethod::twonn;
    double estimate = 0.0;
    int k = 0;                      // mle
    double discard_fraction = 0.0;  // twonn
    std::size_t points_used = 0;
    std::size_t duplicates_dropped = 0;
};

// Removes exact duplicate rows, keeping the first occurrence.
inline RMatrix drop_duplicates(const RMatrix& x, std::size_t& dropped) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    auto row_less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            if (x(a, k) < x(b, k)) return true;
            if (x(a, k) > x(b, k)) return false;
        }
        return a < b;
    };
    std::sort(idx.begin(), idx.end(), row_less);
    std::vector<bool> keep(static_cast<std::size_t>(x.rows()), true);
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (x.row(idx[i]) == x.row(idx[i - 1])) keep[static_cast<std::size_t>(idx[i])] = false;
    dropped = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), false));
    RMatrix out(x.rows() - static_cast<Eigen::Index>(dropped), x.cols());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (keep[static_cast<std::size_t>(i)]) out.row(r++) = x.row(i);
    return out;
}

// Sorted distances from each point to its k nearest other points.
inline std::vector<std::vector<double>> nearest_distances(const RMatrix& x, std::size_t k, std::size_t threads) {
    const auto t = static_cast<std::size_t>(x.rows());
    std::vector<std::vector<double>> out(t);
    parallel_for(t, threads, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<double> d;
        d.reserve(t - 1);
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            if (j == ii) continue;
            d.push_back(std::sqrt((x.row(ii) - x.row(j)).squaredNorm()));
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        d.resize(k);
        out[i] = std::move(d);
    });
    return out;
}

// Regression of -log(1 - F(mu)) on log(mu) through the origin, after dropping
// the largest discard_fraction of the ratios mu = r2 / r1.
inline BaselineResult twonn(const RMatrix& data, double discard_fraction = 0.1, std::size_t threads = 1) {
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
        throw InvalidInput("twonn: discard_fraction must lie in [0, 1)");
    BaselineResult res;
    res.method = BaselineMethod::twonn;
    res.discard_fraction = discard_fraction;
    const RMatrix x = drop_duplicates(data, res.duplicates_dropped);
    if (x.rows() < 3) throw InvalidInput("twonn: need at least three distinct points");

    const auto nn = nearest_distances(x, 2, threads);
    std::vector<double> mu;
    mu.reserve(nn.size());
    for (const auto& d : nn) mu.push_back(d[1] / d[0]);
    std::sort(mu.begin(), mu.end());
    const std::size_t n = mu.size();
    const auto kept = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - discard_fraction))));
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < std::min(kept, n - 1); ++i) {
        const double f = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lx = std::log(mu[i]);
        const double ly = -std::log(1.0 - f);
        sxy += lx * ly;
        sxx += lx * lx;
    }
    if (!(sxx > 0.0)) throw InvalidInput("twonn: neighbour ratios are degenerate");
    res.estimate = sxy / sxx;
    res.points_used = static_cast<std::size_t>(x.rows());
    return res;
}

// Levina-Bickel. Per point, s(x) = (1/(k-1)) sum_{j<k} log(r_k / r_j) estimates
// 1/d. The per-point inverses are pooled before inverting (MacKay-Ghahramani);
// averaging 1/s(x) directly is biased upward by (k-1)/(k-2).
inline BaselineResult mle_dimension(const RMatrix& data, int k = 10, std::size_t threads = 1) {
    if (k < 2) throw InvalidInput("mle_dimension: k must be >= 2");
    BaselineResult res;
    res.method = BaselineMethod::mle;
    res.k = k;
    const RMatrix x = drop_duplicates(data, res.duplicates_dropped);
    if (x.rows() <= k) throw InvalidInput("mle_dimension: need more than k distinct points");

    const auto nn = nearest_distances(x, static_cast<std::size_t>(k), threads);
    double sum = 0.0;
    for (const auto& r : nn) {
        double s = 0.0;
        for (int j = 0; j < k - 1; ++j) s += std::log(r[static_cast<std::size_t>(k - 1)] / r[static_cast<std::size_t>(j)]);
        sum += s / static_cast<double>(k - 1);
    }
    res.estimate = static_cast<double>(nn.size()) / sum;
    res.points_used = static_cast<std::size_t>(x.rows());
    return res;
}

}  // namespace qcml
