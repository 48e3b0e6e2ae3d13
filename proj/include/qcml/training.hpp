#pragma once

// Gradient-descent training of a matrix configuration on the loss
//   L(A) = sum_x |A(psi_0(x)) - x|^2 + w * sigma^2(psi_0(x)).
//
// Gradient convention: for each A_k the returned Hermitian G_k satisfies
// dL = tr(G_k dA_k) for every Hermitian perturbation dA_k, i.e. G_k is the
// Frobenius gradient on the real vector space of Hermitian matrices. In terms
// of real coordinates, dL/d(A_k)_ii = (G_k)_ii, dL/dRe(A_k)_ij = 2 Re(G_k)_ij
// and dL/dIm(A_k)_ij = 2 Im(G_k)_ij for i < j.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qcml/matrix_config.hpp"
#include "qcml/parallel.hpp"

namespace qcml {

enum class OptimizerKind { plain_gd, momentum, adaptive_moments };

inline std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::plain_gd: return "plain_gd";
        case OptimizerKind::momentum: return "momentum";
        case OptimizerKind::adaptive_moments: return "adaptive_moments";
    }
    return "?";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "plain_gd" || s == "gd") return OptimizerKind::plain_gd;
    if (s == "momentum") return OptimizerKind::momentum;
    if (s == "adaptive_moments" || s == "adam") return OptimizerKind::adaptive_moments;
    throw InvalidInput("unknown optimizer '" + s + "' (expected plain_gd, momentum, adaptive_moments)");
}

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adaptive_moments;
    double momentum = 0.9;  // beta for the momentum optimizer
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    Eigen::Index hilbert_dim = 3;
    double fluctuation_weight = 0.0;
    double learning_rate = 1e-2;
    int epochs = 1000;
    // nullopt: full batch for up to 4096 points, else 1024. 0: full batch.
    std::optional<std::size_t> batch_size;
    std::uint64_t seed = 0;
    double degeneracy_floor = 1e-8;
    OptimizerConfig optimizer;
    // nullopt: "auto" (eigenvalue range of A_k mapped to mean_k +- 2 std_k).
    std::optional<double> init_scale;
    std::size_t threads = 1;

    void validate() const {
        if (hilbert_dim < 2) throw InvalidInput("hilbert_dim must be >= 2");
        if (!(fluctuation_weight >= 0.0 && fluctuation_weight <= 1.0))
            throw InvalidInput("fluctuation weight w must lie in [0, 1]");
        if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
        if (epochs <= 0) throw InvalidInput("epochs must be positive");
        if (!(degeneracy_floor > 0.0)) throw InvalidInput("degeneracy_floor must be positive");
        if (init_scale && !(*init_scale > 0.0)) throw InvalidInput("init_scale must be positive");
    }
};

inline std::size_t resolve_batch_size(const std::optional<std::size_t>& requested, std::size_t t) {
    if (!requested) return t <= 4096 ? t : 1024;
    if (*requested == 0 || *requested >= t) return t;
    return *requested;
}

struct TrainingReport {
    std::vector<double> loss_history;  // full-data loss after each epoch
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double final_mean_energy = 0.0;
    std::size_t degenerate_ground_count = 0;
    double wall_time_seconds = 0.0;
};

class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, MatrixConfiguration last_finite, int epoch)
        : Error(what), last_(std::move(last_finite)), epoch_(epoch) {}
    const MatrixConfiguration& last_finite_state() const noexcept { return last_; }
    int epoch() const noexcept { return epoch_; }

private:
    MatrixConfiguration last_;
    int epoch_;
};

// Gaussian Hermitian matrix: real N(0,1) diagonal, off-diagonal real and
// imaginary parts N(0,1/2).
inline CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const double s = std::sqrt(0.5);
    CMatrix m = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = g(rng);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double re = s * g(rng);
            const double im = s * g(rng);
            m(i, j) = cdouble(re, im);
            m(j, i) = cdouble(re, -im);
        }
    }
    return m;
}

// Per-feature mean and population standard deviation of the rows of x.
inline std::pair<RVector, RVector> column_moments(const RMatrix& x) {
    const RVector mean = x.colwise().mean().transpose();
    RVector sd(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k)
        sd[k] = std::sqrt((x.col(k).array() - mean[k]).square().mean());
    return {mean, sd};
}

inline MatrixConfiguration init_config(Eigen::Index d, Eigen::Index n, const RMatrix& data, std::uint64_t seed,
                                       std::optional<double> init_scale = std::nullopt) {
    if (n < 2) throw InvalidInput("init_config: hilbert dimension must be >= 2");
    if (d < 1) throw InvalidInput("init_config: feature dimension must be >= 1");
    if (data.rows() > 0 && data.cols() != d) throw InvalidInput("init_config: data width differs from D");
    if (!init_scale && data.rows() == 0) throw InvalidInput("init_config: auto scale needs data");

    std::mt19937_64 rng(seed);
    RVector mean = RVector::Zero(d), sd = RVector::Ones(d);
    if (data.rows() > 0) std::tie(mean, sd) = column_moments(data);

    std::vector<HermitianOperator> ops;
    ops.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
        CMatrix g = random_hermitian(n, rng);
        CMatrix a;
        if (init_scale) {
            a = *init_scale * g;
            a.diagonal().array() += mean[k];
        } else {
            const auto es = eig_hermitian(HermitianOperator(g));
            const double lo = es.values[0], hi = es.values[n - 1];
            const double scale = hi > lo ? 4.0 * sd[k] / (hi - lo) : 0.0;
            a = scale * g;
            a.diagonal().array() += mean[k] - 2.0 * sd[k] - scale * lo;
        }
        ops.emplace_back(a);
    }
    return MatrixConfiguration(std::move(ops), ConfigMetadata{seed, 0.0});
}

struct LossEvaluation {
    double loss = 0.0;
    double energy_sum = 0.0;
    std::size_t degenerate_count = 0;
};

struct LossGradient {
    double loss = 0.0;
    std::vector<CMatrix> gradient;  // one Hermitian matrix per feature
    std::size_t degenerate_count = 0;
};

namespace detail {

inline bool ground_degenerate(const EigenSystem& es, double floor) { return es.values[1] - es.values[0] < floor; }

// Per-point loss term and, optionally, the block accumulators of the gradient.
struct GradientAccumulator {
    CMatrix sum_q, sum_p;
    std::vector<CMatrix> x_weighted_q, c_weighted_p;
    double loss = 0.0;
    std::size_t degenerate = 0;

    GradientAccumulator(Eigen::Index d, Eigen::Index n)
        : sum_q(CMatrix::Zero(n, n)),
          sum_p(CMatrix::Zero(n, n)),
          x_weighted_q(static_cast<std::size_t>(d), CMatrix::Zero(n, n)),
          c_weighted_p(static_cast<std::size_t>(d), CMatrix::Zero(n, n)) {}

    void add(const GradientAccumulator& o) {
        sum_q += o.sum_q;
        sum_p += o.sum_p;
        for (std::size_t k = 0; k < x_weighted_q.size(); ++k) {
            x_weighted_q[k] += o.x_weighted_q[k];
            c_weighted_p[k] += o.c_weighted_p[k];
        }
        loss += o.loss;
        degenerate += o.degenerate;
    }
};

// Adds the contribution of point x. With P = psi0 psi0^dagger and
// c_k = 2(1-w) p_k - 2 x_k, the explicit part of dL/dA_k is
// c_k P + w (P A_k + A_k P). The implicit part comes from
// d psi0 = sum_{n>0} psi_n <psi_n|dH|psi0> / (E0 - En) with
// dH = 1/2 (B_k dA_k + dA_k B_k), B_k = A_k - x_k I; it equals
// 1/2 (Q B_k + B_k Q) with Q = R + R^dagger and
// R = sum_{n>0} psi_n <psi_n|K|psi0> psi0^dagger / (E0 - En),
// K = sum_k c_k A_k + w sum_k A_k^2.
inline void accumulate_point(const MatrixConfiguration& a, const DataPoint& x, double w, double floor,
                             GradientAccumulator& acc) {
    const auto es = eig_hermitian(error_hamiltonian(a, x));
    const auto n = a.hilbert_dim();
    const auto d = a.feature_dim();
    const CVector psi = es.vectors.col(0);
    const double e0 = es.values[0];

    RVector p(d);
    for (Eigen::Index k = 0; k < d; ++k) p[k] = psi.dot(a.op(k).matrix() * psi).real();
    const double fluct = std::max(0.0, psi.dot(a.sum_of_squares() * psi).real() - p.squaredNorm());
    acc.loss += (p - x).squaredNorm() + w * fluct;
    if (ground_degenerate(es, floor)) ++acc.degenerate;

    const RVector c = 2.0 * (1.0 - w) * p - 2.0 * x;
    CMatrix kop = w * a.sum_of_squares();
    for (Eigen::Index k = 0; k < d; ++k) kop += c[k] * a.op(k).matrix();
    const CVector k_psi = kop * psi;

    CVector weights = CVector::Zero(n);
    for (Eigen::Index m = 1; m < n; ++m) {
        const double gap = es.values[m] - e0;
        if (gap < floor) continue;
        weights[m] = es.vectors.col(m).dot(k_psi) / (-gap);
    }
    const CVector r_col = es.vectors * weights;  // R = r_col psi^dagger
    const CMatrix r = r_col * psi.adjoint();
    const CMatrix q = r + r.adjoint();
    const CMatrix proj = psi * psi.adjoint();

    acc.sum_q += q;
    acc.sum_p += proj;
    for (Eigen::Index k = 0; k < d; ++k) {
        acc.x_weighted_q[static_cast<std::size_t>(k)] += x[k] * q;
        acc.c_weighted_p[static_cast<std::size_t>(k)] += c[k] * proj;
    }
}

}  // namespace detail

// Loss summed over the rows of `batch`, plus the ground-energy sum.
inline LossEvaluation evaluate_loss(const MatrixConfiguration& a, const RMatrix& batch, double w,
                                    double degeneracy_floor = 1e-8, std::size_t threads = 1) {
    if (batch.rows() == 0) throw InvalidInput("loss: empty batch");
    if (batch.cols() != a.feature_dim()) throw InvalidInput("loss: data width differs from D");
    const auto t = static_cast<std::size_t>(batch.rows());
    std::vector<LossEvaluation> blocks(block_count(t));
    parallel_for(blocks.size(), threads, [&](std::size_t b) {
        LossEvaluation acc;
        const std::size_t end = std::min(t, (b + 1) * kReductionBlock);
        for (std::size_t i = b * kReductionBlock; i < end; ++i) {
            const DataPoint x = batch.row(static_cast<Eigen::Index>(i)).transpose();
            const auto es = eig_hermitian(error_hamiltonian(a, x));
            const CVector psi = es.vectors.col(0);
            const RVector p = position(a, psi);
            const double fluct = std::max(0.0, psi.dot(a.sum_of_squares() * psi).real() - p.squaredNorm());
            acc.loss += (p - x).squaredNorm() + w * fluct;
            acc.energy_sum += es.values[0];
            if (detail::ground_degenerate(es, degeneracy_floor)) ++acc.degenerate_count;
        }
        blocks[b] = acc;
    });
    LossEvaluation total;
    for (const auto& b : blocks) {
        total.loss += b.loss;
        total.energy_sum += b.energy_sum;
        total.degenerate_count += b.degenerate_count;
    }
    return total;
}

inline double loss(const MatrixConfiguration& a, const RMatrix& batch, double w) {
    return evaluate_loss(a, batch, w).loss;
}

inline LossGradient loss_gradient(const MatrixConfiguration& a, const RMatrix& batch, double w,
                                  double degeneracy_floor = 1e-8, std::size_t threads = 1) {
    if (batch.rows() == 0) throw InvalidInput("loss_gradient: empty batch");
    if (batch.cols() != a.feature_dim()) throw InvalidInput("loss_gradient: data width differs from D");
    const auto d = a.feature_dim();
    const auto n = a.hilbert_dim();
    const auto t = static_cast<std::size_t>(batch.rows());

    std::vector<detail::GradientAccumulator> blocks(block_count(t), detail::GradientAccumulator(d, n));
    parallel_for(blocks.size(), threads, [&](std::size_t b) {
        const std::size_t end = std::min(t, (b + 1) * kReductionBlock);
        for (std::size_t i = b * kReductionBlock; i < end; ++i)
            detail::accumulate_point(a, batch.row(static_cast<Eigen::Index>(i)).transpose(), w, degeneracy_floor,
                                     blocks[b]);
    });
    detail::GradientAccumulator total(d, n);
    for (const auto& b : blocks) total.add(b);
    if (total.degenerate == t)
        throw DegenerateBatch("loss_gradient: every batch point has a degenerate ground state");

    LossGradient out;
    out.loss = total.loss;
    out.degenerate_count = total.degenerate;
    out.gradient.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
        const CMatrix& ak = a.op(k).matrix();
        const auto ks = static_cast<std::size_t>(k);
        CMatrix g = 0.5 * (total.sum_q * ak + ak * total.sum_q) - total.x_weighted_q[ks] + total.c_weighted_p[ks] +
                    w * (total.sum_p * ak + ak * total.sum_p);
        out.gradient.push_back(HermitianOperator(g).matrix());
    }
    return out;
}

// First-order optimizers over a tuple of Hermitian matrices. Adaptive moments
// treat real and imaginary parts as independent coordinates, which keeps the
// update Hermitian.
class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, double lr) : cfg_(cfg), lr_(lr) {}

    void step(std::vector<CMatrix>& params, const std::vector<CMatrix>& grads) {
        if (first_.empty()) {
            for (const auto& p : params) {
                first_.push_back(CMatrix::Zero(p.rows(), p.cols()));
                second_re_.push_back(RMatrix::Zero(p.rows(), p.cols()));
                second_im_.push_back(RMatrix::Zero(p.rows(), p.cols()));
            }
        }
        ++t_;
        for (std::size_t k = 0; k < params.size(); ++k) {
            const CMatrix& g = grads[k];
            switch (cfg_.kind) {
                case OptimizerKind::plain_gd: params[k] -= lr_ * g; break;
                case OptimizerKind::momentum:
                    first_[k] = cfg_.momentum * first_[k] + g;
                    params[k] -= lr_ * first_[k];
                    break;
                case OptimizerKind::adaptive_moments: {
                    first_[k] = cfg_.beta1 * first_[k] + (1.0 - cfg_.beta1) * g;
                    second_re_[k] = cfg_.beta2 * second_re_[k] + (1.0 - cfg_.beta2) * g.real().cwiseAbs2();
                    second_im_[k] = cfg_.beta2 * second_im_[k] + (1.0 - cfg_.beta2) * g.imag().cwiseAbs2();
                    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
                    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
                    const RMatrix step_re =
                        (first_[k].real() / c1).array() / ((second_re_[k] / c2).array().sqrt() + cfg_.epsilon);
                    const RMatrix step_im =
                        (first_[k].imag() / c1).array() / ((second_im_[k] / c2).array().sqrt() + cfg_.epsilon);
                    params[k].real() -= lr_ * step_re;
                    params[k].imag() -= lr_ * step_im;
                    break;
                }
            }
        }
    }

private:
    OptimizerConfig cfg_;
    double lr_;
    long t_ = 0;
    std::vector<CMatrix> first_;
    std::vector<RMatrix> second_re_, second_im_;
};

struct TrainResult {
    MatrixConfiguration config;
    TrainingReport report;
};

// Runs cfg.epochs epochs starting from `initial`. Each optimizer step takes
// the batch-mean gradient; losses are reported as sums over the data.
inline TrainResult train_from(const RMatrix& data, const TrainConfig& cfg, MatrixConfiguration initial) {
    cfg.validate();
    if (data.rows() == 0) throw InvalidInput("train: empty data");
    if (!data.allFinite()) throw InvalidInput("train: data contains non-finite values");
    if (initial.feature_dim() != data.cols()) throw InvalidInput("train: configuration D differs from data");

    const auto start = std::chrono::steady_clock::now();
    const double w = cfg.fluctuation_weight;
    const auto t = static_cast<std::size_t>(data.rows());
    const std::size_t batch = resolve_batch_size(cfg.batch_size, t);
    const bool full_batch = batch == t;
    const ConfigMetadata meta{cfg.seed, w};

    std::vector<CMatrix> params;
    for (const auto& op : initial.operators()) params.push_back(op.matrix());
    MatrixConfiguration current(initial.operators(), meta);
    MatrixConfiguration last_finite = current;

    Optimizer opt(cfg.optimizer, cfg.learning_rate);
    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Eigen::Index> order(t);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    TrainingReport report;
    report.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

    auto diverged = [&](int epoch) {
        throw TrainingDiverged("training diverged (non-finite values) at epoch " + std::to_string(epoch), last_finite,
                               epoch);
    };
    auto apply = [&](const std::vector<CMatrix>& grads, double scale, int epoch) {
        std::vector<CMatrix> g;
        g.reserve(grads.size());
        for (const auto& gk : grads) g.push_back(gk * scale);
        opt.step(params, g);
        for (const auto& p : params)
            if (!all_finite(p)) diverged(epoch);
        std::vector<HermitianOperator> ops;
        for (auto& p : params) {
            ops.emplace_back(p);
            p = ops.back().matrix();
        }
        current = MatrixConfiguration(std::move(ops), meta);
        if (!all_finite(current.sum_of_squares())) diverged(epoch);
    };

    report.initial_loss = evaluate_loss(current, data, w, cfg.degeneracy_floor, cfg.threads).loss;
    if (!std::isfinite(report.initial_loss)) diverged(0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (full_batch) {
            const auto lg = loss_gradient(current, data, w, cfg.degeneracy_floor, cfg.threads);
            if (!std::isfinite(lg.loss)) diverged(epoch);
            if (epoch > 0) report.loss_history.push_back(lg.loss);
            last_finite = current;
            apply(lg.gradient, 1.0 / static_cast<double>(t), epoch);
        } else {
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            for (std::size_t off = 0; off < t; off += batch) {
                const std::size_t m = std::min(batch, t - off);
                RMatrix sub(static_cast<Eigen::Index>(m), data.cols());
                for (std::size_t i = 0; i < m; ++i) sub.row(static_cast<Eigen::Index>(i)) = data.row(order[off + i]);
                const auto lg = loss_gradient(current, sub, w, cfg.degeneracy_floor, cfg.threads);
                if (!std::isfinite(lg.loss)) diverged(epoch);
                last_finite = current;
                apply(lg.gradient, 1.0 / static_cast<double>(m), epoch);
            }
            const double l = evaluate_loss(current, data, w, cfg.degeneracy_floor, cfg.threads).loss;
            if (!std::isfinite(l)) diverged(epoch);
            report.loss_history.push_back(l);
        }
    }

    const auto final_eval = evaluate_loss(current, data, w, cfg.degeneracy_floor, cfg.threads);
    if (!std::isfinite(final_eval.loss)) diverged(cfg.epochs);
    if (full_batch) report.loss_history.push_back(final_eval.loss);
    report.final_loss = final_eval.loss;
    report.final_mean_energy = final_eval.energy_sum / static_cast<double>(t);
    report.degenerate_ground_count = final_eval.degenerate_count;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(current), std::move(report)};
}

inline TrainResult train(const RMatrix& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.rows() == 0) throw InvalidInput("train: empty data");
    return train_from(data, cfg, init_config(data.cols(), cfg.hilbert_dim, data, cfg.seed, cfg.init_scale));
}

}  // namespace qcml
