#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tforge {

struct quadrature_rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [a, b], exact for polynomials of degree 2n-1.
inline quadrature_rule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    quadrature_rule q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.nodes[static_cast<std::size_t>(i)] = mid - half * x;
        q.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * x;
        q.weights[static_cast<std::size_t>(i)] = q.weights[static_cast<std::size_t>(n - 1 - i)] = w * half;
    }
    return q;
}

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
inline quadrature_rule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
    quadrature_rule q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    double z = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2) z = 1.86 * z - 0.86 * q.nodes[0];
        else if (i == 3) z = 1.91 * z - 0.91 * q.nodes[1];
        else z = 2.0 * z - q.nodes[static_cast<std::size_t>(i - 2)];
        double pp = 0.0;
        for (int it = 0; it < 200; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        q.nodes[static_cast<std::size_t>(i)] = z;
        q.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
        q.weights[static_cast<std::size_t>(i)] = q.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / (pp * pp);
    }
    return q;
}

}  // namespace tforge
