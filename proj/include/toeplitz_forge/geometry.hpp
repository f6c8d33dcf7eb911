#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"
#include "series.hpp"

namespace tforge {

enum class geometry_kind { bargmann_plane, round_sphere };

struct phase_point {
    cplx x, y, wbar, zbar;
};

struct bergman_value {
    cplx value;
    double truncation_error = 0.0;
    int degree = 0;  // basis cutoff actually used
};

/// Weighted nodes for integrals against e^{-2N phi} dmu.
struct surface_quadrature {
    std::vector<cplx> z;
    std::vector<double> w;
};

inline constexpr double kBranchGuard = 1e-9;

/// Bargmann plane: phi = |z|^2/2, measure dA/pi. Round sphere in a stereographic chart:
/// phi = log(1+|z|^2)/2, measure normalized to total volume 1. Hermitian weight e^{-2N phi}.
class model_geometry {
public:
    static model_geometry bargmann() { return model_geometry(geometry_kind::bargmann_plane); }
    static model_geometry sphere() { return model_geometry(geometry_kind::round_sphere); }

    geometry_kind kind() const { return kind_; }
    bool is_sphere() const { return kind_ == geometry_kind::round_sphere; }
    int complex_dim() const { return 1; }
    std::string name() const { return is_sphere() ? "sphere" : "bargmann"; }
    /// Kernels read Psi^N N^d sum N^{-k} a_k; Bergman symbol leading term is 1 with these volumes.
    double volume_normalization() const { return 1.0; }

    double phi(cplx x) const {
        const double t = std::norm(x);
        return is_sphere() ? 0.5 * std::log1p(t) : 0.5 * t;
    }

    /// Holomorphic extension with phi_tilde(x, conj x) = phi(x).
    cplx phi_tilde(cplx x, cplx wbar) const {
        if (!is_sphere()) return 0.5 * x * wbar;
        const cplx u = 1.0 + x * wbar;
        if (std::abs(u) < kBranchGuard) throw std::domain_error("phi_tilde: too close to the branch locus 1 + x wbar = 0");
        return 0.5 * std::log(u);
    }

    template <class S>
    S phi_tilde_s(const S& x, const S& wbar, const S& one) const {
        if (!is_sphere()) return (x * wbar) * cplx(0.5);
        return log(one + x * wbar) * cplx(0.5);
    }

    cplx phase_phi1(const phase_point& p) const {
        return 2.0 * (phi_tilde(p.x, p.wbar) - phi_tilde(p.y, p.wbar) + phi_tilde(p.y, p.zbar) - phi_tilde(p.x, p.zbar));
    }

    template <class S>
    S phase_phi1_s(const S& x, const S& y, const S& wbar, const S& zbar, const S& one) const {
        return (phi_tilde_s(x, wbar, one) - phi_tilde_s(y, wbar, one) + phi_tilde_s(y, zbar, one) - phi_tilde_s(x, zbar, one)) *
               cplx(2.0);
    }

    /// Phi_1 around (y, wbar) = (x, zbar) in the variables (v, vbar) = (y - x, wbar - zbar).
    series phase_phi1_series(cplx x, cplx zbar, int order) const {
        if (is_sphere() && std::abs(1.0 + x * zbar) < kBranchGuard) throw std::domain_error("phase_phi1_series: branch locus");
        const auto one = series::constant(2, order, 1.0);
        const auto X = series::constant(2, order, x), Z = series::constant(2, order, zbar);
        const auto Y = series::variable(2, 0, order, x), W = series::variable(2, 1, order, zbar);
        auto s = phase_phi1_s(X, Y, W, Z, one);
        // exact cancellation of the constant and linear parts
        s.set(multi_index{0, 0}, 0.0);
        s.set(multi_index{1, 0}, 0.0);
        s.set(multi_index{0, 1}, 0.0);
        const cplx hess = s.coeff(multi_index{1, 1});
        if (std::abs(hess) < 1e-14) throw std::runtime_error("phase_phi1_series: degenerate Hessian");
        return s;
    }

    /// Riemannian distance for which |Psi|_h = exp(-dist^2/2 + O(dist^3)).
    double dist(cplx x, cplx y) const {
        if (!is_sphere()) return std::abs(x - y);
        return std::atan2(std::abs(x - y), std::abs(1.0 + x * std::conj(y)));
    }

    /// |Psi^N(x,y)|_h = exp(N Re(phi~(x, conj y) + phi~(y, conj x) - phi(x) - phi(y))).
    double psi_pointwise_norm(int N, cplx x, cplx y) const {
        const double e = std::real(phi_tilde(x, std::conj(y)) + phi_tilde(y, std::conj(x))) - phi(x) - phi(y);
        return std::exp(N * e);
    }

    /// Psi^N(x,y) in the standard frame: its holomorphic factor exp(2 N phi~(x, ybar)).
    cplx psi_frame(int N, cplx x, cplx ybar) const {
        if (!is_sphere()) return std::exp(static_cast<double>(N) * x * ybar);
        return std::pow(1.0 + x * ybar, N);
    }

    /// |z^j|^2 in L^2(e^{-2N phi} dmu).
    double monomial_norm_sq(int N, int j) const {
        if (is_sphere()) {
            if (j < 0 || j > N) throw std::invalid_argument("monomial_norm_sq: j outside 0..N");
            return std::exp(std::lgamma(j + 1.0) + std::lgamma(N - j + 1.0) - std::lgamma(N + 2.0));
        }
        return std::exp(std::lgamma(j + 1.0) - (j + 1.0) * std::log(static_cast<double>(N)));
    }

    int basis_size(int N) const { return is_sphere() ? N + 1 : -1; }

    /// sum_j z^j conj(y)^j / |z^j|^2. On the plane the basis is cut at degree D
    /// (default: first degree where terms fall below 1e-17 of the running sum).
    bergman_value exact_bergman(int N, cplx x, cplx ybar, int D = -1) const {
        bergman_value out;
        const cplx u = x * ybar;
        if (is_sphere()) {
            for (int j = N; j >= 0; --j) out.value = out.value * u + 1.0 / monomial_norm_sq(N, j);
            out.degree = N;
            return out;
        }
        const double Nd = N;
        cplx term = Nd, sum = 0.0;
        const int cap = D >= 0 ? D : 100000;
        int j = 0;
        for (;; ++j) {
            sum += term;
            const cplx next = term * Nd * u / static_cast<double>(j + 1);
            if (j >= cap || (D < 0 && j > Nd * std::abs(u) && std::abs(next) < 1e-17 * std::abs(sum))) {
                // geometric majorant of the remaining terms
                const double q = Nd * std::abs(u) / (j + 2.0);
                out.truncation_error = q < 1.0 ? std::abs(next) / (1.0 - q) : std::numeric_limits<double>::infinity();
                break;
            }
            term = next;
        }
        out.value = sum;
        out.degree = j;
        return out;
    }

    /// 2 d_x d_zbar phi~: the metric density in the lambda = (x, zbar) chart.
    template <class S>
    S metric_density_s(const S& x, const S& zbar, const S& one) const {
        if (!is_sphere()) return one;
        return reciprocal((one + x * zbar) * (one + x * zbar));
    }

    /// Nodes z and weights w with sum w f(z) ~ int f e^{-2N phi} dmu.
    /// Sphere: Gauss-Legendre in s = t/(1+t), t = |z|^2, times trapezoid in arg z.
    /// Plane: tensor Gauss-Hermite in (Re z, Im z).
    surface_quadrature weighted_quadrature(int N, int n_radial, int n_angle) const {
        if (N < 1 || n_radial < 1 || n_angle < 1) throw std::invalid_argument("weighted_quadrature: sizes must be positive");
        surface_quadrature q;
        if (is_sphere()) {
            const auto gl = gauss_legendre(n_radial, 0.0, 1.0);
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                const double s = gl.nodes[i], rad = std::sqrt(s / (1.0 - s));
                const double w = gl.weights[i] * std::pow(1.0 - s, N) / n_angle;
                for (int k = 0; k < n_angle; ++k) {
                    q.z.push_back(std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5) / n_angle));
                    q.w.push_back(w);
                }
            }
            return q;
        }
        const auto gh = gauss_hermite(n_radial);
        const double sc = 1.0 / std::sqrt(static_cast<double>(N));
        for (std::size_t i = 0; i < gh.nodes.size(); ++i)
            for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                q.z.emplace_back(gh.nodes[i] * sc, gh.nodes[k] * sc);
                q.w.push_back(gh.weights[i] * gh.weights[k] / (std::numbers::pi * N));
            }
        return q;
    }

    /// Resolution of weighted_quadrature exact for z^a zbar^b with a, b <= deg (sphere).
    static int sphere_radial_nodes(int N, int deg) { return (N + 2 * deg) / 2 + 5; }

private:
    explicit model_geometry(geometry_kind k) : kind_(k) {}
    geometry_kind kind_;
};

/// d_y d_wbar log(Phi_1) at x = z = 0, by exact Taylor coefficients of the closed form.
inline cplx mixed_log_derivative(const model_geometry& g, cplx y = 1.0, cplx wbar = 1.0) {
    const int order = 3;
    const auto one = series::constant(2, order, 1.0), zero = series::constant(2, order, 0.0);
    const auto Y = series::variable(2, 0, order, y), W = series::variable(2, 1, order, wbar);
    const auto phi1 = g.phase_phi1_s(zero, Y, W, zero, one);
    if (std::abs(phi1.constant_term()) < 1e-300) throw std::domain_error("mixed_log_derivative: Phi_1 vanishes at the point");
    return log(phi1).coeff(multi_index{1, 1});
}

/// The closed expression -2/((1+u)L) + 2u(L+1)/((1+u)L)^2, u = y wbar, L = log(1+u),
/// offered as the sphere value of the mixed log derivative.
inline cplx mixed_log_reference_expression(cplx y = 1.0, cplx wbar = 1.0) {
    const cplx u = y * wbar, L = std::log(1.0 + u), D = (1.0 + u) * L;
    return -2.0 / D + 2.0 * u * (L + 1.0) / (D * D);
}

}  // namespace tforge
