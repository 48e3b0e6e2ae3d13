#pragma once

// Point cloud X_A, quantum metric
//   g_{mu nu}(y) = 2 sum_{n>=1} Re[<0|A_mu|n><n|A_nu|0>] / (E_n - E_0),
// the energy Hessian I - g, and the two spectral-gap detectors.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qcml/marchenko_pastur.hpp"
#include "qcml/matrix_config.hpp"
#include "qcml/parallel.hpp"

namespace qcml {

struct CloudPoint {
    std::size_t source_index = 0;
    RVector position;
    double energy = 0.0;
    double fluctuation = 0.0;
};

using PointCloud = std::vector<CloudPoint>;

inline PointCloud point_cloud(const MatrixConfiguration& a, const RMatrix& data, std::size_t threads = 1) {
    if (data.rows() == 0) throw InvalidInput("point_cloud: empty data");
    if (data.cols() != a.feature_dim()) throw InvalidInput("point_cloud: data width differs from D");
    PointCloud cloud(static_cast<std::size_t>(data.rows()));
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        const DataPoint x = data.row(static_cast<Eigen::Index>(i)).transpose();
        const auto q = quasi_coherent(a, x);
        cloud[i] = {i, position(a, q.state), q.energy, quantum_fluctuation(a, q.state)};
    });
    return cloud;
}

inline RMatrix cloud_positions(const PointCloud& cloud) {
    if (cloud.empty()) return {};
    RMatrix p(static_cast<Eigen::Index>(cloud.size()), cloud.front().position.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = cloud[i].position.transpose();
    return p;
}

struct QuantumMetric {
    RMatrix entries;
    RVector eigenvalues;  // ascending
};

inline constexpr double kDefaultDegeneracyFloor = 1e-8;

// Metric from a precomputed spectrum of H(y).
inline QuantumMetric quantum_metric_from_spectrum(const MatrixConfiguration& a, const EigenSystem& es,
                                                  double degeneracy_floor = kDefaultDegeneracyFloor) {
    const auto n = a.hilbert_dim();
    const auto d = a.feature_dim();
    const double e0 = es.values[0];
    if (es.values[1] - e0 < degeneracy_floor)
        throw DegenerateGroundState("quantum_metric: ground state of H(y) is degenerate");

    // m(mu, n-1) = <0|A_mu|n> / sqrt(E_n - E_0); g = 2 Re(m m^dagger).
    const CVector psi0 = es.vectors.col(0);
    const CMatrix excited = es.vectors.rightCols(n - 1);
    CMatrix m(d, n - 1);
    RVector inv_sqrt_gap(n - 1);
    for (Eigen::Index j = 1; j < n; ++j) inv_sqrt_gap[j - 1] = 1.0 / std::sqrt(es.values[j] - e0);
    for (Eigen::Index mu = 0; mu < d; ++mu) {
        const CVector row = excited.adjoint() * (a.op(mu).matrix() * psi0);  // <n|A_mu|0>
        m.row(mu) = (row.conjugate().array() * inv_sqrt_gap.array().cast<cdouble>()).transpose();
    }
    QuantumMetric g;
    g.entries = 2.0 * (m * m.adjoint()).real();
    g.entries = 0.5 * (g.entries + g.entries.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(g.entries, Eigen::EigenvaluesOnly);
    g.eigenvalues = solver.eigenvalues();
    if (g.eigenvalues.size() > 0 && g.eigenvalues[0] < -1e-8 * (1.0 + g.eigenvalues[d - 1]))
        throw Error("quantum_metric: metric is not positive semi-definite");
    return g;
}

inline QuantumMetric quantum_metric(const MatrixConfiguration& a, const DataPoint& y,
                                    double degeneracy_floor = kDefaultDegeneracyFloor) {
    return quantum_metric_from_spectrum(a, eig_hermitian(error_hamiltonian(a, y)), degeneracy_floor);
}

inline RMatrix hessian_energy(const MatrixConfiguration& a, const DataPoint& y,
                              double degeneracy_floor = kDefaultDegeneracyFloor) {
    const auto g = quantum_metric(a, y, degeneracy_floor);
    return RMatrix::Identity(a.feature_dim(), a.feature_dim()) - g.entries;
}

enum class GapMethod { ratio, rmt };

inline std::string to_string(GapMethod m) { return m == GapMethod::ratio ? "ratio" : "rmt"; }

inline GapMethod parse_gap_method(const std::string& s) {
    if (s == "ratio") return GapMethod::ratio;
    if (s == "rmt") return GapMethod::rmt;
    throw InvalidInput("unknown gap method '" + s + "' (expected ratio or rmt)");
}

struct GapEstimate {
    int local_dim = 0;
    int gap_index = 0;
    double gap_ratio = 0.0;
    GapMethod method = GapMethod::ratio;
    std::optional<double> threshold;  // RMT tau
    std::optional<double> noise_sigma;  // RMT sigma
    bool no_gap = false;               // ratio: every eigenvalue below the floor
    bool unreliable_threshold = false; // rmt: local_dim is 0 or D
};

inline constexpr double kDefaultRatioFloor = 1e-12;

inline void check_ascending(const RVector& eigs) {
    for (Eigen::Index i = 1; i < eigs.size(); ++i)
        if (eigs[i] < eigs[i - 1]) throw InvalidInput("eigenvalues must be sorted ascending");
    if (!eigs.allFinite()) throw InvalidInput("eigenvalues must be finite");
}

// gamma = argmax_{i=1..D-1} e_i / max(e_{i-1}, floor), smallest i on ties;
// local_dim = D - gamma.
inline GapEstimate spectral_gap_ratio(const RVector& eigs, double floor = kDefaultRatioFloor) {
    const auto d = eigs.size();
    if (d < 2) throw InvalidInput("spectral_gap_ratio: need at least two eigenvalues");
    if (!(floor > 0.0)) throw InvalidInput("spectral_gap_ratio: floor must be positive");
    check_ascending(eigs);
    GapEstimate est;
    est.method = GapMethod::ratio;
    est.gap_index = 1;
    est.gap_ratio = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < d; ++i) {
        const double r = eigs[i] / std::max(eigs[i - 1], floor);
        if (r > est.gap_ratio) {
            est.gap_ratio = r;
            est.gap_index = static_cast<int>(i);
        }
    }
    est.local_dim = static_cast<int>(d) - est.gap_index;
    est.no_gap = eigs[d - 1] < floor;
    return est;
}

// Hard threshold tau = (4/sqrt(3)) sigma with sigma = median(eigs) /
// sqrt(median of Marchenko-Pastur(beta)); local_dim counts eigenvalues above tau.
inline GapEstimate spectral_gap_rmt(const RVector& eigs, double aspect = 1.0) {
    const auto d = eigs.size();
    if (d < 4) throw InvalidInput("spectral_gap_rmt: need at least four eigenvalues");
    check_ascending(eigs);
    const auto mid = static_cast<Eigen::Index>(d / 2);
    const double med = d % 2 == 1 ? eigs[mid] : 0.5 * (eigs[mid - 1] + eigs[mid]);
    const double sigma = med / std::sqrt(mp::median(aspect));
    const double tau = 4.0 / std::sqrt(3.0) * sigma;

    GapEstimate est;
    est.method = GapMethod::rmt;
    est.noise_sigma = sigma;
    est.threshold = tau;
    int above = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        if (eigs[i] > tau) ++above;
    est.local_dim = above;
    est.gap_index = static_cast<int>(d) - above;
    if (est.gap_index >= 1 && est.gap_index < d)
        est.gap_ratio = eigs[est.gap_index] / std::max(eigs[est.gap_index - 1], kDefaultRatioFloor);
    est.unreliable_threshold = above == 0 || above == static_cast<int>(d);
    return est;
}

}  // namespace qcml
