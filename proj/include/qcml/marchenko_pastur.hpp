#pragma once

// Marchenko-Pastur law with ratio beta in (0, 1] and unit variance:
// density sqrt((b - x)(x - a)) / (2 pi beta x) on [a, b],
// a = (1 - sqrt(beta))^2, b = (1 + sqrt(beta))^2.

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "qcml/errors.hpp"

namespace qcml::mp {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
template <std::size_t Order>
struct GaussLegendre {
    std::array<double, Order> nodes{};
    std::array<double, Order> weights{};

    GaussLegendre() {
        constexpr double pi = std::numbers::pi;
        for (std::size_t i = 0; i < Order; ++i) {
            double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(Order) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= Order; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = pk;
                }
                dp = static_cast<double>(Order) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline std::pair<double, double> support(double beta) {
    const double s = std::sqrt(beta);
    return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

// CDF evaluated through x = c - r cos(phi), which removes the square-root
// endpoint behaviour: F = int_0^phi r^2 sin^2 / (2 pi beta (c - r cos)).
inline double cdf_angle(double beta, double phi) {
    static const GaussLegendre<64> gl;
    const auto [a, b] = support(beta);
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = 0.5 * phi * (gl.nodes[i] + 1.0);
        const double s = std::sin(t);
        sum += gl.weights[i] * r * r * s * s / (c - r * std::cos(t));
    }
    return 0.5 * phi * sum / (2.0 * std::numbers::pi * beta);
}

inline double cdf(double beta, double x) {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("Marchenko-Pastur ratio must lie in (0, 1]");
    const auto [a, b] = support(beta);
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    return cdf_angle(beta, std::acos((c - x) / r));
}

// Median by bisection on the angular CDF.
inline double median(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("Marchenko-Pastur ratio must lie in (0, 1]");
    double lo = 0.0, hi = std::numbers::pi;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf_angle(beta, mid) < 0.5 ? lo : hi) = mid;
    }
    const auto [a, b] = support(beta);
    return 0.5 * (a + b) - 0.5 * (b - a) * std::cos(0.5 * (lo + hi));
}

}  // namespace qcml::mp
