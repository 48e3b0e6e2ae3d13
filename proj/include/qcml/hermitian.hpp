#pragma once

// Dense complex Hermitian kernel: construction with projection onto the
// Hermitian subspace, full eigendecomposition with a deterministic phase
// convention, expectation values and matrix elements.

#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "qcml/errors.hpp"

namespace qcml {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline bool all_finite(const CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

// Max-norm of H - H^dagger.
inline double hermiticity_residual(const CMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

class HermitianOperator {
public:
    HermitianOperator() = default;

    // Projects `entries` onto (M + M^dagger)/2; diagonal imaginary parts are
    // zeroed exactly.
    explicit HermitianOperator(const CMatrix& entries) : m_(project(entries)) {}

    static HermitianOperator zero(Eigen::Index n) { return HermitianOperator(CMatrix::Zero(n, n)); }
    static HermitianOperator identity(Eigen::Index n) {
        return HermitianOperator(CMatrix::Identity(n, n));
    }
    static HermitianOperator diagonal(const RVector& d) {
        return HermitianOperator(d.cast<cdouble>().asDiagonal().toDenseMatrix());
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const CMatrix& matrix() const noexcept { return m_; }
    cdouble operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    double max_norm() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

    friend bool operator==(const HermitianOperator& a, const HermitianOperator& b) {
        return a.m_ == b.m_;
    }

private:
    static CMatrix project(const CMatrix& entries) {
        if (entries.rows() != entries.cols())
            throw InvalidInput("HermitianOperator: matrix must be square");
        CMatrix h = 0.5 * (entries + entries.adjoint());
        for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
        return h;
    }

    CMatrix m_;
};

// Eigenpairs in ascending eigenvalue order, column k of `vectors` paired with
// `values[k]`. In every column the entry of largest modulus (first such index
// on ties) is real and nonnegative.
struct EigenSystem {
    RVector values;
    CMatrix vectors;

    Eigen::Index size() const noexcept { return values.size(); }
    auto vector(Eigen::Index k) const { return vectors.col(k); }
};

inline void apply_phase_convention(CMatrix& vectors) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double a = std::abs(vectors(i, k));
            if (a > best) {
                best = a;
                pivot = i;
            }
        }
        if (best <= 0.0) continue;
        const cdouble phase = std::conj(vectors(pivot, k)) / best;
        vectors.col(k) *= phase;
        vectors(pivot, k) = best;
    }
}

inline EigenSystem eig_hermitian(const HermitianOperator& h) {
    if (!all_finite(h.matrix())) throw InvalidInput("eig_hermitian: non-finite entries");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw InvalidInput("eig_hermitian: eigensolver did not converge");
    EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
    apply_phase_convention(es.vectors);
    return es;
}

// <psi|H|psi> for a unit vector psi.
template <class Vec>
double expectation(const HermitianOperator& h, const Vec& psi) {
    if (psi.size() != h.dim()) throw InvalidInput("expectation: dimension mismatch");
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) throw InvalidInput("expectation: state is not normalized");
    const cdouble v = psi.dot(h.matrix() * psi);
    // Hermiticity guarantees a vanishing imaginary part up to round-off.
    if (std::abs(v.imag()) > 1e-10 * (1.0 + h.max_norm())) throw Error("expectation: complex result");
    return v.real();
}

// <phi|H|psi>.
template <class VecA, class VecB>
cdouble matrix_element(const VecA& phi, const HermitianOperator& h, const VecB& psi) {
    if (phi.size() != h.dim() || psi.size() != h.dim())
        throw InvalidInput("matrix_element: dimension mismatch");
    return phi.dot(h.matrix() * psi);
}

}  // namespace qcml
