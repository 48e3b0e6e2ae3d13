#pragma once

// Matrix configurations A = {A_1, ..., A_D}, the error Hamiltonian
// H(x) = 1/2 sum_k (A_k - x_k I)^2, quasi-coherent states and the
// position / fluctuation observables built from them.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qcml/hermitian.hpp"

namespace qcml {

using DataPoint = RVector;

struct ConfigMetadata {
    std::uint64_t seed = 0;
    double fluctuation_weight = 0.0;

    friend bool operator==(const ConfigMetadata&, const ConfigMetadata&) = default;
};

class MatrixConfiguration {
public:
    MatrixConfiguration() = default;

    explicit MatrixConfiguration(std::vector<HermitianOperator> ops, ConfigMetadata meta = {})
        : ops_(std::move(ops)), meta_(meta) {
        if (ops_.empty()) throw InvalidInput("MatrixConfiguration: need at least one operator");
        const auto n = ops_.front().dim();
        if (n < 2) throw InvalidInput("MatrixConfiguration: hilbert dimension must be >= 2");
        for (const auto& op : ops_)
            if (op.dim() != n) throw InvalidInput("MatrixConfiguration: operators differ in dimension");
        sum_sq_ = CMatrix::Zero(n, n);
        for (const auto& op : ops_) sum_sq_ += op.matrix() * op.matrix();
        sum_sq_ = HermitianOperator(sum_sq_).matrix();
    }

    Eigen::Index feature_dim() const noexcept { return static_cast<Eigen::Index>(ops_.size()); }
    Eigen::Index hilbert_dim() const noexcept { return ops_.empty() ? 0 : ops_.front().dim(); }
    const std::vector<HermitianOperator>& operators() const noexcept { return ops_; }
    const HermitianOperator& op(Eigen::Index k) const { return ops_.at(static_cast<std::size_t>(k)); }
    const ConfigMetadata& metadata() const noexcept { return meta_; }
    void set_metadata(ConfigMetadata m) { meta_ = m; }

    // sum_k A_k^2, cached at construction.
    const CMatrix& sum_of_squares() const noexcept { return sum_sq_; }

    friend bool operator==(const MatrixConfiguration& a, const MatrixConfiguration& b) {
        return a.ops_ == b.ops_ && a.meta_ == b.meta_;
    }

private:
    std::vector<HermitianOperator> ops_;
    ConfigMetadata meta_;
    CMatrix sum_sq_;
};

// Pauli matrices sigma_1, sigma_2, sigma_3 as a D = 3, N = 2 configuration.
inline MatrixConfiguration pauli_configuration() {
    using namespace std::complex_literals;
    CMatrix s1(2, 2), s2(2, 2), s3(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, -1i, 1i, 0;
    s3 << 1, 0, 0, -1;
    return MatrixConfiguration({HermitianOperator(s1), HermitianOperator(s2), HermitianOperator(s3)});
}

inline void check_point(const MatrixConfiguration& a, const DataPoint& x) {
    if (x.size() != a.feature_dim()) throw InvalidInput("data point dimension does not match configuration");
    if (!x.allFinite()) throw InvalidInput("data point has non-finite coordinates");
}

// H(x) = 1/2 sum_k A_k^2 - sum_k x_k A_k + 1/2 |x|^2 I, expanded form of
// 1/2 sum_k (A_k - x_k I)^2.
inline HermitianOperator error_hamiltonian(const MatrixConfiguration& a, const DataPoint& x) {
    check_point(a, x);
    CMatrix h = 0.5 * a.sum_of_squares();
    for (Eigen::Index k = 0; k < a.feature_dim(); ++k) h -= x[k] * a.op(k).matrix();
    h.diagonal().array() += 0.5 * x.squaredNorm();
    return HermitianOperator(h);
}

inline double degeneracy_gap_tolerance(double e1) { return 1e-9 * (1.0 + std::abs(e1)); }

struct QuasiCoherentState {
    CVector state;
    double energy = 0.0;
    EigenSystem spectrum;
    bool degenerate_ground = false;

    // E_1 - E_0.
    double ground_gap() const { return spectrum.values[1] - spectrum.values[0]; }
};

inline QuasiCoherentState quasi_coherent(const MatrixConfiguration& a, const DataPoint& x) {
    QuasiCoherentState q;
    q.spectrum = eig_hermitian(error_hamiltonian(a, x));
    q.state = q.spectrum.vectors.col(0);
    q.energy = q.spectrum.values[0];
    q.degenerate_ground = q.ground_gap() < degeneracy_gap_tolerance(q.spectrum.values[1]);
    return q;
}

template <class Vec>
void check_state(const MatrixConfiguration& a, const Vec& psi) {
    if (psi.size() != a.hilbert_dim()) throw InvalidInput("state dimension does not match configuration");
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvalidInput("state is not normalized");
}

// A(psi)_k = <psi|A_k|psi>.
template <class Vec>
RVector position(const MatrixConfiguration& a, const Vec& psi) {
    check_state(a, psi);
    RVector p(a.feature_dim());
    for (Eigen::Index k = 0; k < a.feature_dim(); ++k) p[k] = psi.dot(a.op(k).matrix() * psi).real();
    return p;
}

// sigma^2(psi) = sum_k <A_k^2> - <A_k>^2, clamped at zero.
template <class Vec>
double quantum_fluctuation(const MatrixConfiguration& a, const Vec& psi) {
    const RVector p = position(a, psi);
    const double v = psi.dot(a.sum_of_squares() * psi).real() - p.squaredNorm();
    return v < 0.0 ? 0.0 : v;
}

struct EnergyDecomposition {
    double bias_sq = 0.0;
    double fluctuation = 0.0;
    double energy = 0.0;
};

inline EnergyDecomposition energy_decomposition(const MatrixConfiguration& a, const DataPoint& x) {
    const auto q = quasi_coherent(a, x);
    return {(position(a, q.state) - x).squaredNorm(), quantum_fluctuation(a, q.state), q.energy};
}

// Popoviciu-type bound sum_k (max eig A_k - min eig A_k)^2 / 4 on sigma^2.
inline double fluctuation_bound(const MatrixConfiguration& a) {
    double bound = 0.0;
    for (const auto& op : a.operators()) {
        const auto es = eig_hermitian(op);
        const double spread = es.values[es.size() - 1] - es.values[0];
        bound += 0.25 * spread * spread;
    }
    return bound;
}

}  // namespace qcml
