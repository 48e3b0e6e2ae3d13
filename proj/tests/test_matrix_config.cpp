#include <random>

#include <gtest/gtest.h>

#include "qcml/matrix_config.hpp"
#include "test_support.hpp"

using namespace qcml;

namespace {

MatrixConfiguration two_level() { return fixtures::diagonal_config({Eigen::Vector2d(0.0, 1.0)}); }

RVector vec(std::initializer_list<double> v) {
    RVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

CVector state(std::initializer_list<cdouble> v) {
    CVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (auto d : v) x[i++] = d;
    return x;
}

}  // namespace

TEST(MatrixConfiguration, Invariants) {
    EXPECT_THROW(MatrixConfiguration(std::vector<HermitianOperator>{}), InvalidInput);
    EXPECT_THROW(MatrixConfiguration({HermitianOperator::identity(1)}), InvalidInput);
    EXPECT_THROW(MatrixConfiguration({HermitianOperator::identity(2), HermitianOperator::identity(3)}), InvalidInput);
    const auto p = pauli_configuration();
    EXPECT_EQ(p.feature_dim(), 3);
    EXPECT_EQ(p.hilbert_dim(), 2);
}

TEST(ErrorHamiltonian, TwoLevelDiagonal) {
    const auto h = error_hamiltonian(two_level(), vec({0.2}));
    EXPECT_NEAR(h(0, 0).real(), 0.02, 1e-15);
    EXPECT_NEAR(h(1, 1).real(), 0.32, 1e-15);
    EXPECT_EQ(h(0, 1), cdouble(0.0));
}

TEST(ErrorHamiltonian, PauliExamples) {
    const auto p = pauli_configuration();
    const auto h0 = error_hamiltonian(p, vec({0, 0, 0}));
    EXPECT_LT((h0.matrix() - 1.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    const auto hz = error_hamiltonian(p, vec({0, 0, 1}));
    CMatrix expected(2, 2);
    expected << 1, 0, 0, 3;  // 2I - sigma_3
    EXPECT_LT((hz.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ErrorHamiltonian, MatchesSumOfSquaresAndIsPsd) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = fixtures::random_config(3, 4, rng);
        const RVector x = fixtures::random_point(3, rng, 2.0);
        CMatrix direct = CMatrix::Zero(4, 4);
        for (Eigen::Index k = 0; k < 3; ++k) {
            const CMatrix b = a.op(k).matrix() - x[k] * CMatrix::Identity(4, 4);
            direct += 0.5 * b * b;
        }
        const auto h = error_hamiltonian(a, x);
        EXPECT_LT((h.matrix() - direct).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_GE(eig_hermitian(h).values[0], -1e-10);
    }
}

TEST(ErrorHamiltonian, DimensionMismatch) {
    EXPECT_THROW(error_hamiltonian(pauli_configuration(), vec({1, 2})), InvalidInput);
}

TEST(QuasiCoherent, Examples) {
    const auto q = quasi_coherent(two_level(), vec({0.2}));
    EXPECT_NEAR(q.energy, 0.02, 1e-15);
    EXPECT_NEAR(std::abs(q.state[0] - 1.0), 0.0, 1e-15);
    EXPECT_FALSE(q.degenerate_ground);

    const auto qz = quasi_coherent(pauli_configuration(), vec({0, 0, 1}));
    EXPECT_NEAR(qz.energy, 1.0, 1e-14);
    EXPECT_NEAR(std::abs(qz.state[0] - 1.0), 0.0, 1e-14);
    EXPECT_EQ(qz.energy, qz.spectrum.values[0]);

    EXPECT_TRUE(quasi_coherent(pauli_configuration(), vec({0, 0, 0})).degenerate_ground);
}

TEST(Position, Examples) {
    const auto p = pauli_configuration();
    const RVector up = position(p, state({1, 0}));
    EXPECT_LT((up - vec({0, 0, 1})).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(position(two_level(), state({1, 0}))[0], 0.0);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(position(two_level(), state({r, r}))[0], 0.5, 1e-15);
    EXPECT_THROW(position(p, state({1, 0, 0})), InvalidInput);
    EXPECT_THROW(position(p, state({1, 1})), InvalidInput);
}

TEST(QuantumFluctuation, Examples) {
    EXPECT_EQ(quantum_fluctuation(two_level(), state({1, 0})), 0.0);
    EXPECT_NEAR(quantum_fluctuation(pauli_configuration(), state({1, 0})), 2.0, 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(quantum_fluctuation(two_level(), state({r, r})), 0.25, 1e-15);
}

TEST(EnergyDecomposition, Examples) {
    const auto e = energy_decomposition(pauli_configuration(), vec({0, 0, 1}));
    EXPECT_NEAR(e.bias_sq, 0.0, 1e-14);
    EXPECT_NEAR(e.fluctuation, 2.0, 1e-14);
    EXPECT_NEAR(e.energy, 1.0, 1e-14);

    const auto t = energy_decomposition(two_level(), vec({0.2}));
    EXPECT_NEAR(t.bias_sq, 0.04, 1e-15);
    EXPECT_NEAR(t.fluctuation, 0.0, 1e-15);
    EXPECT_NEAR(t.energy, 0.02, 1e-15);

    const auto c = fixtures::diagonal_config({Eigen::Vector3d(-1, 0, 2), Eigen::Vector3d(0.5, 3, -2)});
    const auto z = energy_decomposition(c, vec({0, 3}));
    EXPECT_NEAR(z.bias_sq, 0.0, 1e-14);
    EXPECT_NEAR(z.fluctuation, 0.0, 1e-14);
    EXPECT_NEAR(z.energy, 0.0, 1e-14);
}

TEST(EnergyDecomposition, IdentityHoldsOnRandomInstances) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 1 + trial % 4, n = 2 + trial % 4;
        const auto a = fixtures::random_config(d, n, rng);
        const RVector x = fixtures::random_point(d, rng, 1.5);
        const auto e = energy_decomposition(a, x);
        EXPECT_NEAR(e.energy, 0.5 * e.bias_sq + 0.5 * e.fluctuation, 1e-9);
    }
}

TEST(FluctuationBound, Examples) {
    EXPECT_NEAR(fluctuation_bound(two_level()), 0.25, 1e-15);
    EXPECT_NEAR(fluctuation_bound(pauli_configuration()), 3.0, 1e-14);
    const auto c = MatrixConfiguration({HermitianOperator(2.0 * CMatrix::Identity(3, 3)),
                                        HermitianOperator(-1.0 * CMatrix::Identity(3, 3))});
    EXPECT_NEAR(fluctuation_bound(c), 0.0, 1e-15);
}

TEST(FluctuationBound, BoundsRandomStates) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = fixtures::random_config(1 + trial % 3, 2 + trial % 5, rng);
        const double bound = fluctuation_bound(a);
        for (int s = 0; s < 10; ++s)
            EXPECT_LE(quantum_fluctuation(a, fixtures::random_state(a.hilbert_dim(), rng)), bound + 1e-9);
    }
}

TEST(CommutingConfiguration, GroundStatesAreBasisVectors) {
    const auto c = fixtures::diagonal_config({Eigen::Vector3d(-1, 0, 2), Eigen::Vector3d(0.5, 3, -2)});
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const RVector x = fixtures::random_point(2, rng, 2.0);
        const auto q = quasi_coherent(c, x);
        Eigen::Index pivot;
        const double top = q.state.cwiseAbs().maxCoeff(&pivot);
        EXPECT_NEAR(top, 1.0, 1e-12);
        EXPECT_NEAR(quantum_fluctuation(c, q.state), 0.0, 1e-12);
    }
}

TEST(PhaseInvariance, PositionAndFluctuation) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = fixtures::random_config(3, 4, rng);
        const CVector psi = fixtures::random_state(4, rng);
        const CVector rotated = psi * std::polar(1.0, 0.37 * trial);
        EXPECT_LT((position(a, psi) - position(a, rotated)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(quantum_fluctuation(a, psi), quantum_fluctuation(a, rotated), 1e-12);
    }
}
