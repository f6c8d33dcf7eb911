#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "series.hpp"

namespace tforge {

template <class T>
using matrix_of = std::vector<std::vector<T>>;

namespace detail {

template <class T>
T ring_one() {
    return from_double<T>(1.0);
}

/// Gauss-Jordan over a coefficient ring, pivoting on constant-term modulus.
template <class T>
matrix_of<T> ring_inverse(matrix_of<T> a) {
    const std::size_t n = a.size();
    matrix_of<T> inv(n, std::vector<T>(n, T{}));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = ring_one<T>();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (s_abs0(a[r][c]) > s_abs0(a[piv][c])) piv = r;
        if (s_abs0(a[piv][c]) < 1e-14) throw std::domain_error("stationary phase: singular Hessian");
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        const T p = s_inv(a[c][c]);
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] = a[c][k] * p;
            inv[c][k] = inv[c][k] * p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || is_zero(a[r][c])) continue;
            const T f = a[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] = a[r][k] - f * a[c][k];
                inv[r][k] = inv[r][k] - f * inv[c][k];
            }
        }
    }
    return inv;
}

/// Determinant of a matrix of series whose constant part is invertible without pivoting.
template <class S>
S ring_det(matrix_of<S> a) {
    const std::size_t n = a.size();
    S det = S::constant(a[0][0].num_vars(), a[0][0].order(), from_double<typename S::value_type>(1.0));
    for (std::size_t c = 0; c < n; ++c) {
        det = det * a[c][c];
        const S p = reciprocal(a[c][c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const S f = a[r][c] * p;
            for (std::size_t k = c; k < n; ++k) a[r][k] = a[r][k] - f * a[c][k];
        }
    }
    return det;
}

inline double factorial_d(int n) { return std::tgamma(n + 1.0); }

}  // namespace detail

/// Phase series in m variables with zero constant and linear parts.
template <class T>
struct phase_data {
    basic_series<T> series;
    matrix_of<T> hessian;  // full m x m second-derivative matrix at 0
    basic_series<T> quadratic;
    basic_series<T> remainder;  // series - quadratic, valuation >= 3

    int vars() const { return series.num_vars(); }

    /// v-vbar block when the variables are ordered (v_1..v_n, vbar_1..vbar_n).
    matrix_of<T> hessian_pairing() const {
        const int n = vars() / 2;
        matrix_of<T> b(static_cast<std::size_t>(n), std::vector<T>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + j)];
        return b;
    }

    static phase_data from(const basic_series<T>& s) {
        phase_data p;
        p.series = s;
        const int m = s.num_vars();
        const auto& L = s.lay();
        for (int r = 0; r < L.count_upto(1); ++r)
            if (!detail::is_zero(s.coeff_rank(r)))
                throw std::invalid_argument("phase: constant and linear parts must vanish");
        p.hessian.assign(static_cast<std::size_t>(m), std::vector<T>(static_cast<std::size_t>(m), T{}));
        p.quadratic = homogeneous_part(s, 2);
        for (int r = L.begin(2); r < L.begin(3) && r < static_cast<int>(s.raw().size()); ++r) {
            const auto* ex = L.exps(r);
            int i = -1, j = -1;
            for (int k = 0; k < m; ++k)
                for (int e = 0; e < ex[k]; ++e) (i < 0 ? i : j) = k;
            const T c = s.raw()[static_cast<std::size_t>(r)];
            if (i == j) p.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = c * 2.0;
            else p.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p.hessian[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = c;
        }
        p.remainder = s - p.quadratic;
        (void)detail::ring_inverse(p.hessian);
        return p;
    }
};

/// Gaussian covariance C = (-H)^{-1}: <u_i u_j> = C_ij / N under e^{N Q}.
template <class T>
matrix_of<T> gaussian_covariance(const matrix_of<T>& hessian) {
    matrix_of<T> neg = hessian;
    for (auto& row : neg)
        for (auto& v : row) v = -v;
    return detail::ring_inverse(neg);
}

/// Weights w_mu with <u^mu> = w_mu N^{-|mu|/2} for all |mu| <= max_degree:
/// w_mu = mu! [t^mu] q^{|mu|/2}/(|mu|/2)!, q = t^T C t / 2.
template <class T>
class moment_table {
public:
    moment_table(const matrix_of<T>& covariance, int max_degree) : m_(static_cast<int>(covariance.size())) {
        basic_series<T> q(m_, kExactOrder);
        for (int i = 0; i < m_; ++i)
            for (int j = i; j < m_; ++j) {
                multi_index mu(m_);
                mu[i] += 1;
                mu[j] += 1;
                const T c = covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                q.set(mu, i == j ? c * 0.5 : c);
            }
        const auto& L = q.lay();
        w_.assign(static_cast<std::size_t>(L.count_upto(max_degree)), T{});
        w_[0] = detail::ring_one<T>();
        basic_series<T> pw = basic_series<T>::constant(m_, kExactOrder, detail::ring_one<T>());
        for (int h = 1; 2 * h <= max_degree; ++h) {
            pw = pw * q;
            const double inv_fact = 1.0 / detail::factorial_d(h);
            for (int r = L.begin(2 * h); r < L.begin(2 * h + 1); ++r) {
                const auto* ex = L.exps(r);
                double mf = 1.0;
                for (int k = 0; k < m_; ++k) mf *= detail::factorial_d(ex[k]);
                w_[static_cast<std::size_t>(r)] = pw.coeff_rank(r) * (mf * inv_fact);
            }
        }
        max_deg_ = max_degree;
    }

    int max_degree() const { return max_deg_; }
    const T& weight_rank(int r) const { return w_[static_cast<std::size_t>(r)]; }
    T weight(const multi_index& mu) const {
        if (mu.norm() > max_deg_) throw std::invalid_argument("moment_table: degree beyond the table");
        const auto& L = detail::get_layout(m_);
        std::vector<int> e(mu.entries().begin(), mu.entries().end());
        return w_[static_cast<std::size_t>(L.rank_of(e.data()))];
    }

    /// sum over |mu| = d of f_mu w_mu.
    template <class U>
    auto contract(const basic_series<U>& f, int d) const {
        using R = decltype(std::declval<U>() * std::declval<T>());
        R acc{};
        if (d % 2 || d > f.degree()) return acc;
        const auto& L = f.lay();
        for (int r = L.begin(d); r < L.begin(d + 1); ++r) {
            const U& c = f.raw()[static_cast<std::size_t>(r)];
            if (detail::is_zero(c)) continue;
            acc = acc + c * w_[static_cast<std::size_t>(r)];
        }
        return acc;
    }

private:
    int m_;
    int max_deg_ = 0;
    std::vector<T> w_;
};

/// Normalized moment coefficient: <u^mu> = gaussian_moment * N^{-|mu|/2}.
template <class T>
T gaussian_moment(const matrix_of<T>& hessian, const multi_index& mu) {
    if (mu.norm() % 2) return T{};
    moment_table<T> tab(gaussian_covariance(hessian), mu.norm());
    return tab.weight(mu);
}

template <class T>
struct expansion_result {
    std::vector<T> coeffs;
    std::string normalization =
        "int a e^{N Phi} = (int e^{N Q}) * sum_k N^{-k} T_k; the Gaussian factor (contains N^{-d} and 1/det(-H_pairing)) is divided out";
    int p_max = 0;  // highest power of the remainder used
};

inline int wick_required_amplitude_order(int K) { return 2 * K; }
inline int wick_required_phase_order(int K) { return 2 * K + 2; }

/// T_k = sum_{p <= 2k} (1/p!) <a R^p>_{degree 2(k+p)}.
template <class T>
expansion_result<T> wick_expand(const phase_data<T>& phase, const basic_series<T>& amplitude, int K) {
    if (K < 0) throw std::invalid_argument("wick_expand: K must be non-negative");
    const int m = phase.vars();
    if (amplitude.num_vars() != m) throw std::invalid_argument("wick_expand: amplitude variable count mismatch");
    if (!amplitude.exact() && amplitude.order() < wick_required_amplitude_order(K))
        throw std::invalid_argument("wick_expand: amplitude order " + std::to_string(amplitude.order()) + " below required " +
                                    std::to_string(wick_required_amplitude_order(K)));
    if (!phase.series.exact() && phase.series.order() < wick_required_phase_order(K))
        throw std::invalid_argument("wick_expand: phase order " + std::to_string(phase.series.order()) + " below required " +
                                    std::to_string(wick_required_phase_order(K)));
    const auto& R = phase.remainder;
    // each factor of R has degree >= 3, so p <= 2K: asserted on the data
    if (R.valuation() >= 0 && R.valuation() < 3) throw std::logic_error("wick_expand: remainder has terms of degree <= 2");

    const int top = 2 * (K + 2 * K);
    moment_table<T> tab(gaussian_covariance(phase.hessian), top);
    // polynomial cuts; products are truncated explicitly at the degree each p needs
    const auto Rx = R.truncated(wick_required_phase_order(K)).as_exact();
    const auto Ax = amplitude.truncated(wick_required_amplitude_order(K)).as_exact();

    expansion_result<T> out;
    out.coeffs.assign(static_cast<std::size_t>(K) + 1, T{});
    basic_series<T> Rp = basic_series<T>::constant(m, kExactOrder, detail::ring_one<T>());
    double pf = 1.0;
    for (int p = 0; p <= 2 * K; ++p) {
        if (p > 0) {
            const int ord = 2 * (K + p);
            Rp = (Rp.truncated(ord) * Rx.truncated(ord)).as_exact();
            pf *= p;
            if (Rp.is_zero()) break;
        }
        const auto f = Ax.truncated(2 * (K + p)) * Rp.truncated(2 * (K + p));
        bool used = false;
        for (int k = (p + 1) / 2; k <= K; ++k) {
            const T c = tab.contract(f, 2 * (k + p));
            if (detail::is_zero(c)) continue;
            out.coeffs[static_cast<std::size_t>(k)] = out.coeffs[static_cast<std::size_t>(k)] + c * (1.0 / pf);
            used = true;
        }
        if (used) out.p_max = p;
    }
    return out;
}

/// Change of variables zeta(z) with Phi(z) = zeta^T A zeta / 2, A the Hessian.
template <class T>
struct morse_chart {
    std::vector<basic_series<T>> zeta_of_z;
    std::vector<basic_series<T>> z_of_zeta;
    basic_series<T> jacobian;  // det(dz/dzeta)
    matrix_of<T> hessian;
};

/// H(z) = 2 int_0^1 (1-t) Hess Phi(tz) dt, zeta = (A^{-1} H)^{1/2} z, inverted by fixed point.
template <class T>
morse_chart<T> morse_normalize(const phase_data<T>& phase, int K) {
    using S = basic_series<T>;
    const int m = phase.vars();
    const int ord = 2 * K + 1;
    if (!phase.series.exact() && phase.series.order() < ord + 1)
        throw std::invalid_argument("morse_normalize: phase order below " + std::to_string(ord + 1));
    const S phi = phase.series.as_exact().truncated(ord + 1);
    matrix_of<S> H(static_cast<std::size_t>(m), std::vector<S>(static_cast<std::size_t>(m)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            multi_index mu(m);
            mu[i] += 1;
            mu[j] += 1;
            S d = differentiate(phi, mu);
            const auto& L = d.lay();
            for (int r = 0; r < static_cast<int>(d.raw().size()); ++r) {
                const int deg = L.degree_of(r);
                d.set_rank(r, d.coeff_rank(r) * (2.0 / ((deg + 1.0) * (deg + 2.0))));
            }
            H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d.truncated(ord - 1);
        }
    const auto Ainv = detail::ring_inverse(phase.hessian);
    const S one = S::constant(m, ord - 1, detail::ring_one<T>());
    matrix_of<S> E(static_cast<std::size_t>(m), std::vector<S>(static_cast<std::size_t>(m), one * T{}));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            S acc = one * T{};
            for (int k = 0; k < m; ++k) acc = acc + H[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] * Ainv[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            if (i == j) acc = acc - one;
            acc.set(multi_index(m), T{});
            E[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
        }
    auto matmul = [&](const matrix_of<S>& a, const matrix_of<S>& b) {
        matrix_of<S> c(static_cast<std::size_t>(m), std::vector<S>(static_cast<std::size_t>(m), one * T{}));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        return c;
    };
    // P = sum_k binom(1/2, k) E^k
    matrix_of<S> P(static_cast<std::size_t>(m), std::vector<S>(static_cast<std::size_t>(m), one * T{}));
    matrix_of<S> Ek(static_cast<std::size_t>(m), std::vector<S>(static_cast<std::size_t>(m), one * T{}));
    for (int i = 0; i < m; ++i) Ek[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = one;
    double binom = 1.0;
    for (int k = 0; k <= ord - 1; ++k) {
        if (k > 0) {
            Ek = matmul(Ek, E);
            binom *= (0.5 - (k - 1)) / k;
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + Ek[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * binom;
    }
    morse_chart<T> out;
    out.hessian = phase.hessian;
    std::vector<S> zv, D;
    for (int i = 0; i < m; ++i) zv.push_back(S::variable(m, i, ord));
    for (int i = 0; i < m; ++i) {
        S zi = S::constant(m, ord, T{});
        // P is exact through degree ord-1, so P z is exact through degree ord
        for (int j = 0; j < m; ++j) zi = zi + (P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].as_exact() * zv[static_cast<std::size_t>(j)]).truncated(ord);
        out.zeta_of_z.push_back(zi.truncated(ord));
        D.push_back(out.zeta_of_z.back() - zv[static_cast<std::size_t>(i)]);
    }
    // z = zeta - D(z): each pass fixes one more degree
    std::vector<S> z = zv;
    for (int it = 0; it < ord; ++it) {
        std::vector<S> next;
        for (int i = 0; i < m; ++i) next.push_back(zv[static_cast<std::size_t>(i)] - substitute(D[static_cast<std::size_t>(i)], z));
        z = std::move(next);
    }
    out.z_of_zeta = z;
    matrix_of<S> Jm(static_cast<std::size_t>(m), std::vector<S>(static_cast<std::size_t>(m)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) Jm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d_dvar(z[static_cast<std::size_t>(i)], j);
    out.jacobian = detail::ring_det(Jm);
    return out;
}

/// T_k = (L^k B)(0)/k!, L = (1/2) sum C_ij d_i d_j, B = (a o z) det(dz/dzeta).
template <class T>
expansion_result<T> morse_expand(const phase_data<T>& phase, const basic_series<T>& amplitude, int K) {
    using S = basic_series<T>;
    const int m = phase.vars();
    const auto chart = morse_normalize(phase, K);
    const int ord = 2 * K;
    S B = substitute(amplitude.as_exact().truncated(ord), std::vector<S>(chart.z_of_zeta.begin(), chart.z_of_zeta.end())).truncated(ord) *
          chart.jacobian.truncated(ord);
    const auto C = gaussian_covariance(phase.hessian);
    expansion_result<T> out;
    out.normalization = "Morse chart: T_k = (L^k B)(0)/k!, same Gaussian factor divided out";
    S cur = B;
    double kf = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) {
            kf *= k;
            S next = S::constant(m, cur.order() - 2, T{});
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    multi_index mu(m);
                    mu[i] += 1;
                    mu[j] += 1;
                    next = next + differentiate(cur, mu) * (C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * 0.5);
                }
            cur = next;
        }
        out.coeffs.push_back(cur.constant_term() * (1.0 / kf));
    }
    return out;
}

}  // namespace tforge
