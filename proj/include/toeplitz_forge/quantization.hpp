#pragma once

#include <Eigen/Dense>
#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covariant.hpp"
#include "function_spaces.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

namespace tforge {

using cmatrix = Eigen::MatrixXcd;
using cvector = Eigen::VectorXcd;

/// Monomials z^j, j < dim, with their squared norms in L^2(e^{-2N phi} dmu).
struct hardy_basis {
    model_geometry geom = model_geometry::sphere();
    int N = 1;
    int dim = 0;
    std::vector<double> norms;
};

inline double exact_norm_sq(const model_geometry& g, int N, int j) {
    mpz_class a, b, c;
    if (g.is_sphere()) {
        mpz_fac_ui(a.get_mpz_t(), static_cast<unsigned long>(j));
        mpz_fac_ui(b.get_mpz_t(), static_cast<unsigned long>(N - j));
        mpz_fac_ui(c.get_mpz_t(), static_cast<unsigned long>(N + 1));
        return mpq_class(a * b, c).get_d();
    }
    mpz_fac_ui(a.get_mpz_t(), static_cast<unsigned long>(j));
    mpz_ui_pow_ui(c.get_mpz_t(), static_cast<unsigned long>(N), static_cast<unsigned long>(j + 1));
    return mpq_class(a, c).get_d();
}

/// Plane default truncation: degrees up to 4N + 24.
inline int default_bargmann_dim(int N) { return 4 * N + 25; }

inline hardy_basis basis_norms(const model_geometry& g, int N, int plane_dim = -1) {
    if (N < 1) throw std::invalid_argument("basis_norms: N must be positive");
    hardy_basis b;
    b.geom = g;
    b.N = N;
    b.dim = g.is_sphere() ? N + 1 : (plane_dim > 0 ? plane_dim : default_bargmann_dim(N));
    for (int j = 0; j < b.dim; ++j) b.norms.push_back(exact_norm_sq(g, N, j));
    return b;
}

struct operator_matrix {
    cmatrix entries;
    int N = 0;
    std::string label;
    int dim() const { return static_cast<int>(entries.rows()); }
};

// ---------------------------------------------------------------------------
// Polynomials in named variables: x1, x2, x3 on the sphere; z, zb on the plane.

struct polynomial {
    std::vector<std::string> vars;
    std::map<std::vector<int>, cplx> terms;

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms) {
            int s = 0;
            for (int v : e) s += v;
            d = std::max(d, s);
        }
        return d;
    }
    cplx eval(const std::vector<cplx>& x) const {
        cplx acc = 0.0;
        for (const auto& [e, c] : terms) {
            cplx t = c;
            for (std::size_t i = 0; i < e.size(); ++i) t *= std::pow(x[i], e[i]);
            acc += t;
        }
        return acc;
    }
};

inline std::vector<std::string> ambient_vars(const model_geometry& g) {
    return g.is_sphere() ? std::vector<std::string>{"x1", "x2", "x3"} : std::vector<std::string>{"z", "zb"};
}

/// Sum of terms `c*v^k*w*...`, e.g. "x3", "0.5*x1^2 - x3 + 2", "z*zb".
inline polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& vars) {
    polynomial p;
    p.vars = vars;
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw std::invalid_argument("polynomial: empty expression");
    std::size_t i = 0;
    const auto fail = [&](const std::string& why) {
        throw std::invalid_argument("polynomial '" + text + "': " + why + " at position " + std::to_string(i));
    };
    while (i < s.size()) {
        double sign = 1.0;
        if (s[i] == '+' || s[i] == '-') {
            sign = s[i] == '-' ? -1.0 : 1.0;
            ++i;
        } else if (!p.terms.empty() || i > 0) {
            fail("expected + or -");
        }
        cplx coef = sign;
        std::vector<int> e(vars.size(), 0);
        bool any = false;
        for (;;) {
            if (i >= s.size()) fail("dangling operator");
            if (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.') {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(s.substr(i), &used);
                } catch (const std::exception&) {
                    fail("bad number");
                }
                coef *= v;
                i += used;
            } else {
                std::size_t best = 0;
                int which = -1;
                for (std::size_t k = 0; k < vars.size(); ++k)
                    if (s.compare(i, vars[k].size(), vars[k]) == 0 && vars[k].size() > best) {
                        best = vars[k].size();
                        which = static_cast<int>(k);
                    }
                if (which < 0) fail("unknown symbol");
                i += best;
                int pw = 1;
                if (i < s.size() && s[i] == '^') {
                    ++i;
                    std::size_t j = i;
                    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                    if (j == i) fail("missing exponent");
                    pw = std::stoi(s.substr(i, j - i));
                    i = j;
                }
                e[static_cast<std::size_t>(which)] += pw;
            }
            any = true;
            if (i < s.size() && s[i] == '*') {
                ++i;
                continue;
            }
            break;
        }
        if (!any) fail("empty term");
        p.terms[e] += coef;
    }
    return p;
}

/// Holomorphic extension to (x, zbar): x1 = (x+zb)/(1+x zb), x2 = (x-zb)/(i(1+x zb)),
/// x3 = (1-x zb)/(1+x zb); on the plane z = x, zb = zbar.
inline symbol_fn holomorphic_extension(const model_geometry& g, const polynomial& p) {
    const bool sph = g.is_sphere();
    return [p, sph](const series& x, const series& zb) {
        const auto one = series::constant(2, x.order(), 1.0);
        std::vector<series> v;
        if (sph) {
            const auto inv = reciprocal(one + x * zb);
            v = {(x + zb) * inv, (x - zb) * inv * cplx(0.0, -1.0), (one - x * zb) * inv};
        } else {
            v = {x, zb};
        }
        series acc = series::constant(2, x.order(), 0.0);
        for (const auto& [e, c] : p.terms) {
            series t = series::constant(2, x.order(), c);
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int k = 0; k < e[i]; ++k) t = t * v[i];
            acc = acc + t;
        }
        return acc;
    };
}

inline cplx ambient_value(const model_geometry& g, const polynomial& p, cplx z) {
    if (!g.is_sphere()) return p.eval({z, std::conj(z)});
    const double t = std::norm(z);
    const cplx xp = 2.0 * z / (1.0 + t);
    return p.eval({xp.real(), xp.imag(), (1.0 - t) / (1.0 + t)});
}

namespace detail {

inline mpq_class beta_int(long a, long b) {  // int_0^1 s^a (1-s)^b ds
    mpz_class fa, fb, fab;
    mpz_fac_ui(fa.get_mpz_t(), static_cast<unsigned long>(a));
    mpz_fac_ui(fb.get_mpz_t(), static_cast<unsigned long>(b));
    mpz_fac_ui(fab.get_mpz_t(), static_cast<unsigned long>(a + b + 1));
    return mpq_class(fa * fb, fab);
}

inline mpq_class binom_q(long n, long k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return mpq_class(r);
}

}  // namespace detail

/// Matrix of T_N(f) = S_N f in the orthonormal monomial basis, by exact Beta integrals
/// (sphere, f polynomial in x1, x2, x3) or Gaussian moments (plane, f polynomial in z, zb).
inline operator_matrix contravariant_matrix(const model_geometry& g, const polynomial& f, int N, int plane_dim = -1) {
    const auto b = basis_norms(g, N, plane_dim);
    operator_matrix m;
    m.N = N;
    m.label = "contravariant";
    m.entries = cmatrix::Zero(b.dim, b.dim);
    for (const auto& [e, c] : f.terms) {
        if (!g.is_sphere()) {
            // z^p zb^q: <f e_k, e_j> = |z^{k+p}|^2 / sqrt(n_j n_k) when k + p = j + q
            const int p = e[0], q = e[1];
            for (int k = 0; k < b.dim; ++k) {
                const int j = k + p - q;
                if (j < 0 || j >= b.dim) continue;
                const double v = exact_norm_sq(g, N, k + p) / std::sqrt(b.norms[static_cast<std::size_t>(j)] * b.norms[static_cast<std::size_t>(k)]);
                m.entries(j, k) += c * v;
            }
            continue;
        }
        // x1^a x2^b x3^r = sum over X+^p X-^q with x1 = (X+ + X-)/2, x2 = (X+ - X-)/(2i)
        const int a = e[0], bb = e[1], r = e[2];
        for (int i1 = 0; i1 <= a; ++i1)
            for (int i2 = 0; i2 <= bb; ++i2) {
                const int p = i1 + i2, q = (a - i1) + (bb - i2);
                const cplx pref = c * detail::binom_q(a, i1).get_d() * detail::binom_q(bb, i2).get_d() * std::pow(0.5, a) *
                                  std::pow(cplx(0.0, -0.5), bb) * std::pow(-1.0, bb - i2);
                // X+^p X-^q x3^r = 2^{p+q} z^p zb^q (1-t)^r / (1+t)^{p+q+r}
                for (int k = 0; k <= N; ++k) {
                    const int j = k + p - q;
                    if (j < 0 || j > N) continue;
                    // int s^{k+p} (1-2s)^r (1-s)^{N+q-k} ds
                    mpq_class acc = 0;
                    for (int i = 0; i <= r; ++i) {
                        mpq_class t = detail::binom_q(r, i) * detail::beta_int(k + p + i, N + q - k);
                        for (int u = 0; u < i; ++u) t *= -2;
                        acc += t;
                    }
                    const double v = std::ldexp(acc.get_d(), p + q) /
                                     std::sqrt(b.norms[static_cast<std::size_t>(j)] * b.norms[static_cast<std::size_t>(k)]);
                    m.entries(j, k) += pref * v;
                }
            }
    }
    return m;
}

struct quadrature_matrix_result {
    operator_matrix matrix;
    double resolution_gap = 0.0;  // max entry change between two quadrature resolutions
};

/// Quadrature fallback for non-polynomial f: two resolutions, the gap is reported.
inline quadrature_matrix_result contravariant_matrix_quadrature(const model_geometry& g, const std::function<cplx(cplx)>& f, int N,
                                                                int extra_degree = 24, int plane_dim = -1) {
    const auto b = basis_norms(g, N, plane_dim);
    const auto build = [&](int deg) {
        const int nr = g.is_sphere() ? model_geometry::sphere_radial_nodes(N, deg) : b.dim + deg;
        const auto q = g.weighted_quadrature(N, nr, g.is_sphere() ? 2 * (N + deg) + 2 : 1);
        cmatrix E(static_cast<Eigen::Index>(q.z.size()), b.dim), F(static_cast<Eigen::Index>(q.z.size()), b.dim);
        for (std::size_t i = 0; i < q.z.size(); ++i) {
            const cplx fv = f(q.z[i]);
            for (int j = 0; j < b.dim; ++j) {
                const cplx ej = std::pow(q.z[i], j) / std::sqrt(b.norms[static_cast<std::size_t>(j)]);
                E(static_cast<Eigen::Index>(i), j) = std::sqrt(q.w[i]) * ej;
                F(static_cast<Eigen::Index>(i), j) = std::sqrt(q.w[i]) * fv * ej;
            }
        }
        return cmatrix(E.adjoint() * F);
    };
    quadrature_matrix_result r;
    r.matrix.N = N;
    r.matrix.label = "contravariant-quadrature";
    r.matrix.entries = build(extra_degree);
    r.resolution_gap = (build(2 * extra_degree) - r.matrix.entries).cwiseAbs().maxCoeff();
    return r;
}

// ---------------------------------------------------------------------------
// Covariant kernels N Psi^N f(N).

/// Global form of a covariant symbol: f_k = P_k(x, zbar) / (1 + x zbar)^D on the sphere
/// (D = 0 on the plane), with P_k of bidegree <= deg.
struct global_symbol {
    model_geometry geom = model_geometry::sphere();
    int D = 0;
    int deg = 0;
    std::vector<std::vector<std::vector<cplx>>> P;  // P[k][p][q]
    double residual = 0.0;                          // weighted norm of the coefficients outside the bidegree box

    int K() const { return static_cast<int>(P.size()) - 1; }
    cplx value(int k, cplx x, cplx zbar) const {
        cplx acc = 0.0;
        for (int p = 0; p <= deg; ++p)
            for (int q = 0; q <= deg; ++q) acc += P[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] * std::pow(x, p) * std::pow(zbar, q);
        if (geom.is_sphere() && D > 0) acc /= std::pow(1.0 + x * zbar, D);
        return acc;
    }
    /// sum_{k <= K} N^{-k} f_k(x, zbar)
    cplx summed(int N, int K, cplx x, cplx zbar) const {
        cplx acc = 0.0;
        for (int k = 0; k <= std::min(K, this->K()); ++k) acc += value(k, x, zbar) * std::pow(static_cast<double>(N), -k);
        return acc;
    }
};

/// Reads P_k = f_k (1 + x zbar)^D off the series at the base point x = 0; deg defaults to D
/// (sphere). The residual is the kSymbolRadius-weighted norm of the coefficients outside bidegree <= deg.
inline global_symbol global_form(const covariant_symbol& s, int D, int deg = -1, int K = -1) {
    if (deg < 0) deg = D;
    if (K < 0) K = s.K();
    int p0 = -1;
    for (int p = 0; p < s.num_points(); ++p)
        if (std::abs(s.base[static_cast<std::size_t>(p)]) == 0.0) p0 = p;
    if (p0 < 0) throw std::invalid_argument("global_form: symbol has no base point at the origin");
    global_symbol gs;
    gs.geom = s.geom;
    gs.D = s.geom.is_sphere() ? D : 0;
    gs.deg = deg;
    for (int k = 0; k <= K; ++k) {
        series c = s.coeff(p0, k);
        if (c.exact()) c = c.truncated(kCovariantOrder);
        if (c.order() < 2 * deg + 1)
            throw std::invalid_argument("global_form: series order " + std::to_string(c.order()) + " too small for bidegree " +
                                        std::to_string(deg));
        if (gs.D > 0) {
            const auto u = series::variable(2, 0, c.order()) * series::variable(2, 1, c.order());
            c = c * pow(series::constant(2, c.order(), 1.0) + u, static_cast<double>(gs.D));
        }
        std::vector<std::vector<cplx>> P(static_cast<std::size_t>(deg) + 1, std::vector<cplx>(static_cast<std::size_t>(deg) + 1));
        for (const auto& [mu, v] : c.terms()) {
            if (mu[0] <= deg && mu[1] <= deg) P[static_cast<std::size_t>(mu[0])][static_cast<std::size_t>(mu[1])] = v;
            else gs.residual += std::abs(v) * std::pow(kSymbolRadius, mu[0] + mu[1]);
        }
        gs.P.push_back(std::move(P));
    }
    return gs;
}

/// Exact matrix of the kernel N Psi^N sum_{k<=K} N^{-k} f_k (no cutoff) in the orthonormal basis.
inline operator_matrix covariant_matrix(const global_symbol& s, int N, int K, int plane_dim = -1) {
    const auto& g = s.geom;
    const auto b = basis_norms(g, N, plane_dim);
    if (g.is_sphere() && N < s.D) throw std::invalid_argument("covariant_matrix: N below the symbol degree");
    operator_matrix m;
    m.N = N;
    m.label = "covariant";
    m.entries = cmatrix::Zero(b.dim, b.dim);
    const double Nd = N;
    for (int k = 0; k <= std::min(K, s.K()); ++k)
        for (int p = 0; p <= s.deg; ++p)
            for (int q = 0; q <= s.deg; ++q) {
                const cplx c = s.P[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                if (c == 0.0) continue;
                for (int a = p; a < b.dim; ++a) {
                    const int j = a - p, bb = q + j;
                    if (bb >= b.dim) break;
                    // kernel coefficient of x^a zbar^bb
                    double lk;
                    if (g.is_sphere()) {
                        if (j > N - s.D) break;
                        lk = std::lgamma(N - s.D + 1.0) - std::lgamma(j + 1.0) - std::lgamma(N - s.D - j + 1.0);
                    } else {
                        lk = j * std::log(Nd) - std::lgamma(j + 1.0);
                    }
                    const double w = std::exp(lk + (1 - k) * std::log(Nd) +
                                              0.5 * (std::log(b.norms[static_cast<std::size_t>(a)]) + std::log(b.norms[static_cast<std::size_t>(bb)])));
                    m.entries(a, bb) += c * w;
                }
            }
    return m;
}

/// Sphere isometry taking 0 to x0: w -> (w + x0) / (1 - conj(x0) w).
inline cplx sphere_translate(cplx x0, cplx w) { return (w + x0) / (1.0 - std::conj(x0) * w); }

/// Matrix of the kernel 1_{dist < eps} N Psi^N f(N) on the sphere by quadrature: for each outer
/// node x, the inner integral runs over the geodesic cap around x (translated from a cap at 0).
inline operator_matrix covariant_matrix_cutoff(const global_symbol& s, int N, int K, double eps, int extra = 16) {
    const auto& g = s.geom;
    if (!g.is_sphere()) throw std::invalid_argument("covariant_matrix_cutoff: sphere only");
    if (eps <= 0.0 || eps > std::numbers::pi / 2) throw std::invalid_argument("covariant_matrix_cutoff: eps outside (0, pi/2]");
    const auto b = basis_norms(g, N, -1);
    const int dim = b.dim;
    const int deg = N + s.deg + extra;
    // outer nodes: unweighted measure (frames carry the weight)
    const auto outer_s = gauss_legendre(deg / 2 + 8, 0.0, 1.0);
    const int n_ang = 2 * deg + 8;
    // cap {|w| < tan eps}: s_w in [0, sin^2 eps]
    const double smax = std::sin(eps) * std::sin(eps);
    const auto cap_s = gauss_legendre(deg / 2 + 8, 0.0, smax);

    struct node {
        cplx z;
        double w;
    };
    std::vector<node> cap;
    for (std::size_t i = 0; i < cap_s.nodes.size(); ++i) {
        const double sv = cap_s.nodes[i], rad = std::sqrt(sv / (1.0 - sv));
        for (int k = 0; k < n_ang; ++k)
            cap.push_back({std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5) / n_ang), cap_s.weights[i] / n_ang});
    }
    // normalized frame values z^a (1+|z|^2)^{-N/2} / sqrt(n_a), by recurrence in a
    std::vector<double> inv_sqrt_norm(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) inv_sqrt_norm[static_cast<std::size_t>(a)] = 1.0 / std::sqrt(b.norms[static_cast<std::size_t>(a)]);
    const auto frames = [&](cplx z, cvector& out) {
        cplx zp = std::exp(-0.5 * N * std::log1p(std::norm(z)));
        for (int a = 0; a < dim; ++a) {
            out(a) = zp * inv_sqrt_norm[static_cast<std::size_t>(a)];
            zp *= z;
        }
    };
    // rows of the outer sum, one job per radial node
    std::vector<std::future<cmatrix>> jobs;
    for (std::size_t i = 0; i < outer_s.nodes.size(); ++i)
        jobs.push_back(std::async(std::launch::async, [&, i]() {
            cmatrix A = cmatrix::Zero(dim, dim);
            cvector inner(dim), fy(dim);
            const double sv = outer_s.nodes[i], rad = std::sqrt(sv / (1.0 - sv));
            for (int k = 0; k < n_ang; ++k) {
                const cplx x = std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5) / n_ang);
                const double wx = outer_s.weights[i] / n_ang;
                const double tx = std::norm(x);
                inner.setZero();
                for (const auto& c : cap) {
                    const cplx y = sphere_translate(x, c.z);
                    const double ty = std::norm(y);
                    const cplx psi = (1.0 + x * std::conj(y)) / std::sqrt((1.0 + tx) * (1.0 + ty));
                    const cplx kw = static_cast<double>(N) * std::pow(psi, N) * s.summed(N, K, x, std::conj(y)) * c.w;
                    frames(y, fy);
                    inner += kw * fy;
                }
                cvector fx(dim);
                frames(x, fx);
                A.noalias() += wx * fx.conjugate() * inner.transpose();
            }
            return A;
        }));
    cmatrix A = cmatrix::Zero(dim, dim);
    for (auto& j : jobs) A += j.get();
    operator_matrix m;
    m.N = N;
    m.label = "covariant-cutoff";
    m.entries = A;
    return m;
}

/// S_N T^cov(a) for the exact Bergman symbol with cutoff eps equals (1 - cos^{2N+2} eps) I.
inline double cutoff_bergman_scalar(int N, double eps) { return 1.0 - std::pow(std::cos(eps), 2 * N + 2); }

// ---------------------------------------------------------------------------
// Norm bounds, singular values, spectra.

/// Schur bound C sup|amplitude| with C = sup_x int N exp(-N dist^2/2) dmu(y), the Gaussian
/// majorant of |Psi^N|_h (cos d <= exp(-d^2/2)), computed by quadrature.
inline double schur_gaussian_constant(const model_geometry& g, int N) {
    const auto q = gauss_legendre(200, 0.0, g.is_sphere() ? std::numbers::pi / 2 : 12.0 / std::sqrt(static_cast<double>(N)));
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double d = q.nodes[i];
        // sphere: dmu = 2 sin d cos d dd; plane: dA/pi = 2 d dd
        const double dens = g.is_sphere() ? 2.0 * std::sin(d) * std::cos(d) : 2.0 * d;
        acc += q.weights[i] * N * std::exp(-0.5 * N * d * d) * dens;
    }
    return acc;
}

inline double schur_norm_bound(const model_geometry& g, const std::function<cplx(cplx, cplx)>& amplitude, int N,
                               const std::vector<cplx>& samples) {
    double sup = 0.0;
    for (cplx x : samples)
        for (cplx y : samples) sup = std::max(sup, std::abs(amplitude(x, std::conj(y))));
    return schur_gaussian_constant(g, N) * sup;
}

inline double operator_norm(const cmatrix& m) {
    Eigen::JacobiSVD<cmatrix> svd(m);
    return svd.singularValues()(0);
}

inline double invertibility_check(const operator_matrix& m) {
    if (m.entries.rows() != m.entries.cols()) throw std::invalid_argument("invertibility_check: matrix not square");
    Eigen::JacobiSVD<cmatrix> svd(m.entries);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

struct eigenpair {
    double value;
    cvector vector;
};

inline constexpr double kHermitianTolerance = 1e-12;

/// Cyclic Jacobi for Hermitian matrices; stops when the off-diagonal Frobenius norm
/// falls below 1e-13 times the matrix norm.
inline std::vector<eigenpair> eigenpairs(const operator_matrix& m, int max_sweeps = 100) {
    cmatrix A = m.entries;
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("eigenpairs: matrix not square");
    const double scale = std::max(A.norm(), 1e-300);
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance * std::max(1.0, scale))
        throw std::invalid_argument("eigenpairs: matrix is not Hermitian within tolerance");
    A = 0.5 * (A + A.adjoint()).eval();
    cmatrix Q = cmatrix::Identity(n, n);
    const auto off = [&]() {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) s += std::norm(A(i, j));
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < max_sweeps && off() > 1e-13 * scale; ++sweep)
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double r = std::abs(A(p, q));
                if (r < 1e-300) continue;
                const cplx ph = A(p, q) / r;  // e^{i phi}
                const double app = A(p, p).real(), aqq = A(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                // V = diag(1, conj(ph)) * [[c, s], [-s, c]]
                const cplx vpp = c, vpq = s, vqp = -s * std::conj(ph), vqq = c * std::conj(ph);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = akp * vpp + akq * vqp;
                    A(k, q) = akp * vpq + akq * vqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx apk = A(p, k), aqk = A(q, k);
                    A(p, k) = std::conj(vpp) * apk + std::conj(vqp) * aqk;
                    A(q, k) = std::conj(vpq) * apk + std::conj(vqq) * aqk;
                }
                A(p, q) = A(q, p) = 0.0;
                A(p, p) = A(p, p).real();
                A(q, q) = A(q, q).real();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx qkp = Q(k, p), qkq = Q(k, q);
                    Q(k, p) = qkp * vpp + qkq * vqp;
                    Q(k, q) = qkp * vpq + qkq * vqq;
                }
            }
    std::vector<eigenpair> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back({A(i, i).real(), Q.col(i).normalized()});
    std::sort(out.begin(), out.end(), [](const eigenpair& a, const eigenpair& b) { return a.value < b.value; });
    return out;
}

// ---------------------------------------------------------------------------
// Forbidden-region mass and decay fits.

/// Region in ambient coordinates. When `x3_band` is set the region is {lo <= x3 <= hi} and the
/// radial integral is split exactly at the band edges; otherwise the predicate is sampled on nodes.
struct region {
    std::function<bool(const std::vector<double>&)> predicate;
    std::optional<std::pair<double, double>> x3_band;

    static region x3_between(double lo, double hi) {
        region r;
        r.x3_band = std::make_pair(lo, hi);
        r.predicate = [lo, hi](const std::vector<double>& x) { return x[2] >= lo && x[2] <= hi; };
        return r;
    }
    static region everything() { return x3_between(-1.0, 1.0); }
    static region nothing() {
        region r;
        r.predicate = [](const std::vector<double>&) { return false; };
        return r;
    }
};

struct mass_result {
    double mass = 0.0;
    double total = 0.0;  // whole-sphere mass from the same rule, should be 1
    bool consistent = true;
};

/// int_V |u(x)|_h^2 dmu for u = sum_j u_j e_j on the sphere.
inline mass_result forbidden_mass(const model_geometry& g, int N, const cvector& u, const region& V, int n_radial = -1) {
    if (!g.is_sphere()) throw std::invalid_argument("forbidden_mass: sphere only");
    const auto b = basis_norms(g, N);
    if (u.size() != b.dim) throw std::invalid_argument("forbidden_mass: coefficient vector size mismatch");
    if (n_radial < 0) n_radial = N + 16;
    // |u|^2_h integrated over angles: sum_j |u_j|^2 s^j (1-s)^{N-j} / n_j; off-diagonal terms vanish
    const auto radial = [&](double s) {
        double acc = 0.0;
        for (int j = 0; j <= N; ++j) {
            const double lw = j * std::log(s) + (N - j) * std::log1p(-s) - std::log(b.norms[static_cast<std::size_t>(j)]);
            acc += std::norm(u(j)) * std::exp(lw);
        }
        return acc;
    };
    const auto integrate = [&](double s0, double s1) {
        if (s1 <= s0) return 0.0;
        const auto q = gauss_legendre(n_radial, s0, s1);
        double acc = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * radial(q.nodes[i]);
        return acc;
    };
    mass_result r;
    r.total = integrate(0.0, 1.0);
    if (V.x3_band) {
        // x3 = 1 - 2s
        const double s0 = std::clamp((1.0 - V.x3_band->second) / 2.0, 0.0, 1.0);
        const double s1 = std::clamp((1.0 - V.x3_band->first) / 2.0, 0.0, 1.0);
        r.mass = integrate(s0, s1);
    } else {
        // generic predicate: full angular sampling with the cross terms
        const auto q = gauss_legendre(std::max(400, n_radial), 0.0, 1.0);
        const int n_ang = 2 * N + 64;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double s = q.nodes[i], rad = std::sqrt(s / (1.0 - s));
            for (int k = 0; k < n_ang; ++k) {
                const cplx z = std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5) / n_ang);
                const double t = std::norm(z);
                const cplx xp = 2.0 * z / (1.0 + t);
                if (!V.predicate({xp.real(), xp.imag(), (1.0 - t) / (1.0 + t)})) continue;
                cplx val = 0.0;
                for (int j = 0; j <= N; ++j)
                    val += u(j) * std::pow(z, j) / std::sqrt(b.norms[static_cast<std::size_t>(j)]);
                r.mass += q.weights[i] / n_ang * std::norm(val) * std::pow(1.0 - s, N);
            }
        }
    }
    r.consistent = std::abs(r.total - u.squaredNorm()) < 1e-8;
    return r;
}

struct fit_result {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int used = 0;
    int skipped = 0;
};

/// Least-squares line y = intercept + slope x.
inline fit_result linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    fit_result f;
    const auto n = static_cast<double>(x.size());
    f.used = static_cast<int>(x.size());
    if (x.size() < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    f.slope = vx > 0 ? cxy / vx : 0.0;
    f.intercept = (sy - f.slope * sx) / n;
    f.r_squared = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    return f;
}

struct decay_row {
    int N;
    double eigenvalue;
    double target;
    double mass;
};

struct decay_report {
    std::vector<decay_row> rows;
    fit_result fit;  // slope of -log(mass) vs N is the rate c
    double rate() const { return fit.slope; }
};

/// c = slope of -log(mass) against N; rows with mass <= 0 are skipped (counted in `skipped`).
inline fit_result decay_rate_fit(const std::vector<std::pair<int, double>>& rows) {
    std::vector<double> x, y;
    int skipped = 0;
    for (const auto& [N, m] : rows) {
        if (!(m > 0.0)) {
            ++skipped;
            continue;
        }
        x.push_back(N);
        y.push_back(-std::log(m));
    }
    if (x.size() < 4) throw std::invalid_argument("decay_rate_fit: need at least 4 rows with positive mass");
    auto f = linear_fit(x, y);
    f.skipped = skipped;
    return f;
}

/// Eigenvector of T_N(f) with eigenvalue nearest E and its mass in V, over an N-sweep.
inline decay_report decay_experiment(const polynomial& f, double E, const region& V, const std::vector<int>& Ns) {
    const auto g = model_geometry::sphere();
    decay_report rep;
    std::vector<std::pair<int, double>> pts;
    for (int N : Ns) {
        const auto m = contravariant_matrix(g, f, N);
        const auto eig = eigenpairs(m);
        const auto best = std::min_element(eig.begin(), eig.end(), [E](const eigenpair& a, const eigenpair& b) {
            return std::abs(a.value - E) < std::abs(b.value - E);
        });
        const auto mr = forbidden_mass(g, N, best->vector, V);
        rep.rows.push_back({N, best->value, E, mr.mass});
        pts.emplace_back(N, mr.mass);
    }
    rep.fit = decay_rate_fit(pts);
    return rep;
}

// ---------------------------------------------------------------------------
// Sweeps behind the operator-level checks.

struct composition_row {
    int N;
    double error;
};

struct composition_report {
    int K = 0;
    std::vector<composition_row> rows;
    fit_result fit;  // log error vs log N
    double global_residual = 0.0;
};

/// ||T(f) T(g) - T((f#g)_{<=K})||_2 for ambient polynomial symbols on the sphere (no cutoff).
inline composition_report composition_sweep(const polynomial& f, const polynomial& g, int K, const std::vector<int>& Ns) {
    const auto geo = model_geometry::sphere();
    const int Df = f.degree(), Dg = g.degree();
    const std::vector<cplx> base{0.0};
    const auto fs = covariant_from_functions(geo, {holomorphic_extension(geo, f)}, base);
    const auto gs = covariant_from_functions(geo, {holomorphic_extension(geo, g)}, base);
    const auto pad = [K](covariant_symbol s) {
        for (std::size_t p = 0; p < s.at.size(); ++p)
            while (static_cast<int>(s.at[p].size()) <= K) {
                auto z = series::constant(2, kExactOrder, 0.0);
                z.set_base_point({s.base[p], std::conj(s.base[p])});
                s.at[p].push_back(std::move(z));
            }
        return s;
    };
    const auto fg = sharp_product(pad(fs), pad(gs), K);
    const auto Gf = global_form(fs, Df), Gg = global_form(gs, Dg), Gfg = global_form(fg, Df + Dg);
    composition_report rep;
    rep.K = K;
    rep.global_residual = std::max({Gf.residual, Gg.residual, Gfg.residual});
    std::vector<double> lx, ly;
    for (int N : Ns) {
        const cmatrix lhs = covariant_matrix(Gf, N, 0).entries * covariant_matrix(Gg, N, 0).entries;
        const double err = operator_norm(lhs - covariant_matrix(Gfg, N, K).entries);
        rep.rows.push_back({N, err});
        lx.push_back(std::log(static_cast<double>(N)));
        ly.push_back(std::log(err));
    }
    rep.fit = linear_fit(lx, ly);
    return rep;
}

struct bergman_row {
    int N;
    int K_used;
    double sup_error;
};

struct bergman_report {
    std::vector<bergman_row> rows;
    fit_result fit;  // log sup error vs N
    double eps = 0.0;
};

/// sup over sample pairs of |S_N(x,y) - 1_{dist<eps} N Psi^N sum_{k<=K_used} N^{-k} a_k|_h on the
/// sphere, K_used = floor(e N / (3R)) with a_k = 0 beyond the computed coefficients.
inline bergman_report bergman_sweep(const global_symbol& a, double R, const std::vector<int>& Ns, double eps,
                                    const std::vector<std::pair<cplx, cplx>>& samples) {
    const auto geo = a.geom;
    bergman_report rep;
    rep.eps = eps;
    std::vector<double> xs, ys;
    for (int N : Ns) {
        const int K_used = summation_cutoff(N, R);
        double worst = 0.0;
        for (const auto& [x, y] : samples) {
            const double h = std::exp(-N * (geo.phi(x) + geo.phi(y)));
            const cplx exact = geo.exact_bergman(N, x, std::conj(y)).value;
            cplx approx = 0.0;
            if (geo.dist(x, y) < eps) approx = static_cast<double>(N) * geo.psi_frame(N, x, std::conj(y)) * a.summed(N, K_used, x, std::conj(y));
            worst = std::max(worst, std::abs(exact - approx) * h);
        }
        rep.rows.push_back({N, K_used, worst});
        xs.push_back(N);
        ys.push_back(std::log(worst));
    }
    rep.fit = linear_fit(xs, ys);
    return rep;
}

/// Default cutoff: half the injectivity scale pi/2 of dist.
inline constexpr double kCutoffFraction = 0.5;
inline double default_cutoff() { return kCutoffFraction * std::numbers::pi / 2; }

}  // namespace tforge
