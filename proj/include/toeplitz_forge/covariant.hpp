#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "function_spaces.hpp"
#include "geometry.hpp"
#include "stationary_phase.hpp"

namespace tforge {

/// Coefficient function f_k(x, zbar), evaluated on 2-variable series.
using symbol_fn = std::function<series(const series& x, const series& zbar)>;

/// Default working order of per-point series (2 variables, layout cap 24).
inline constexpr int kCovariantOrder = 16;

/// Covariant symbol sum_k N^{-k} f_k(x, zbar), stored as series in (x - x_p, zbar - conj x_p)
/// around diagonal base points x_p.
struct covariant_symbol {
    model_geometry geom = model_geometry::bargmann();
    std::vector<cplx> base;
    std::vector<std::vector<series>> at;  // at[p][k]
    symbol_params params;

    int K() const { return at.empty() ? -1 : static_cast<int>(at[0].size()) - 1; }
    int num_points() const { return static_cast<int>(base.size()); }
    int order() const {
        int o = kExactOrder;
        for (const auto& pt : at)
            for (const auto& s : pt) o = std::min(o, s.order());
        return o;
    }
    const series& coeff(int p, int k) const { return at[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)]; }
    cplx value(int p, int k, cplx x, cplx zbar) const {
        const cplx x0 = base[static_cast<std::size_t>(p)];
        return evaluate(coeff(p, k), std::vector<cplx>{x - x0, zbar - std::conj(x0)});
    }
    analytic_symbol as_analytic(int p) const { return symbol_from_series(at[static_cast<std::size_t>(p)], params); }
    int nearest_point(cplx x) const {
        int best = 0;
        for (int p = 1; p < num_points(); ++p)
            if (std::abs(base[static_cast<std::size_t>(p)] - x) < std::abs(base[static_cast<std::size_t>(best)] - x)) best = p;
        return best;
    }
};

/// Default diagonal grid: the origin and 11 points on |x| = 0.3 (sphere); the origin alone (plane).
inline std::vector<cplx> default_base_points(const model_geometry& g) {
    if (!g.is_sphere()) return {cplx(0.0)};
    std::vector<cplx> b{cplx(0.0)};
    for (int i = 0; i < 11; ++i) b.push_back(std::polar(0.3, 2.0 * std::numbers::pi * i / 11.0));
    return b;
}

inline covariant_symbol covariant_from_functions(const model_geometry& g, const std::vector<symbol_fn>& fk,
                                                 std::vector<cplx> base = {}, int order = kCovariantOrder,
                                                 symbol_params params = {}) {
    if (fk.empty()) throw std::invalid_argument("covariant_from_functions: need at least one coefficient");
    covariant_symbol s;
    s.geom = g;
    s.base = base.empty() ? default_base_points(g) : std::move(base);
    s.params = params;
    for (cplx x0 : s.base) {
        const auto X = series::variable(2, 0, order, x0), Z = series::variable(2, 1, order, std::conj(x0));
        std::vector<series> row;
        for (const auto& f : fk) {
            auto c = f(X, Z).truncated(order);
            c.set_base_point({x0, std::conj(x0)});
            row.push_back(std::move(c));
        }
        s.at.push_back(std::move(row));
    }
    return s;
}

/// Symbol with constant coefficients, exact at every order.
inline covariant_symbol covariant_constant(const model_geometry& g, const std::vector<cplx>& values,
                                           std::vector<cplx> base = {}) {
    covariant_symbol s;
    s.geom = g;
    s.base = base.empty() ? default_base_points(g) : std::move(base);
    for (cplx x0 : s.base) {
        std::vector<series> row;
        for (cplx v : values) {
            auto c = series::constant(2, kExactOrder, v);
            c.set_base_point({x0, std::conj(x0)});
            row.push_back(std::move(c));
        }
        s.at.push_back(std::move(row));
    }
    return s;
}

/// Largest disagreement of real-locus restrictions at midpoints of base-point pairs closer than `reach`.
inline double overlap_discrepancy(const covariant_symbol& s, double reach = 0.35) {
    double worst = 0.0;
    for (int p = 0; p < s.num_points(); ++p)
        for (int q = p + 1; q < s.num_points(); ++q) {
            const cplx a = s.base[static_cast<std::size_t>(p)], b = s.base[static_cast<std::size_t>(q)];
            if (std::abs(a - b) > reach) continue;
            const cplx m = 0.5 * (a + b);
            for (int k = 0; k <= s.K(); ++k)
                worst = std::max(worst, std::abs(s.value(p, k, m, std::conj(m)) - s.value(q, k, m, std::conj(m))));
        }
    return worst;
}

/// Stationary-phase data of the composition integral at one base point: for
/// (f#g)_k = inv_h * sum_{l+m+n=k} sum_{a+b<=2n} dzbar^b f_l/b! * dx^a g_m/a! * L_n(a,b),
/// L_n(a,b) = <v^a vbar^b rho e^{N R}> at order N^{-n}.
struct sharp_kernel {
    int K = 0;
    int order = 0;
    series inv_h;                          // -1 / Phi_1 pairing coefficient
    std::vector<std::vector<series>> L;    // L[n][rank(a,b)], a + b <= 2n
    int p_max = 0;

    const series& entry(int n, int a, int b) const {
        const int e[2] = {a, b};
        return L[static_cast<std::size_t>(n)][static_cast<std::size_t>(detail::get_layout(2).rank_of(e))];
    }
};

/// Builds the kernel at lambda_0 = (x0, zb0). `weight`, if given, is a series in
/// (y - x0, wbar - zb0) multiplying the volume density (contravariant symbols enter this way).
inline sharp_kernel build_sharp_kernel(const model_geometry& g, cplx x0, cplx zb0, int K, int order,
                                       const series* weight = nullptr) {
    if (K < 0) throw std::invalid_argument("build_sharp_kernel: K must be non-negative");
    if (g.is_sphere() && std::abs(1.0 + x0 * zb0) < kBranchGuard) throw std::domain_error("build_sharp_kernel: branch locus");
    const int phase_ord = wick_required_phase_order(K), amp_ord = wick_required_amplitude_order(K);
    const auto& L2 = detail::get_layout(2);

    const series s = series::variable(2, 0, order), t = series::variable(2, 1, order);
    const auto nconst = [&](const series& c, int o) { return nested_series::constant(2, o, c); };
    const auto make = [&](int o) {
        const auto one = nconst(series::constant(2, order, 1.0), o);
        const auto X = nconst(s + series::constant(2, order, x0), o);
        const auto Z = nconst(t + series::constant(2, order, zb0), o);
        const auto Y = X + nested_series::variable(2, 0, o);
        const auto W = Z + nested_series::variable(2, 1, o);
        return std::make_tuple(one, X, Y, W, Z);
    };

    auto [one, X, Y, W, Z] = make(phase_ord);
    auto phase = g.phase_phi1_s(X, Y, W, Z, one);
    const series zero(2, order);
    phase.set(multi_index{0, 0}, zero);
    phase.set(multi_index{1, 0}, zero);
    phase.set(multi_index{0, 1}, zero);
    const auto pd = phase_data<series>::from(phase);

    auto [one_a, Xa, Ya, Wa, Za] = make(amp_ord);
    (void)Xa;
    (void)Za;
    nested_series rho = g.metric_density_s(Ya, Wa, one_a);
    if (weight) {
        const auto V = nested_series::variable(2, 0, amp_ord), Vb = nested_series::variable(2, 1, amp_ord);
        const std::vector<nested_series> args{nconst(s, amp_ord) + V, nconst(t, amp_ord) + Vb};
        rho = rho * compose_any(*weight, args, one_a).truncated(amp_ord);
    }

    sharp_kernel ker;
    ker.K = K;
    ker.order = order;
    ker.inv_h = -reciprocal(pd.hessian[0][1]);
    const auto Rx = pd.remainder.truncated(phase_ord).as_exact();
    // moments of degree 2(n + p); a quadratic phase needs only p = 0
    const moment_table<series> tab(gaussian_covariance(pd.hessian), Rx.is_zero() ? 2 * K : 6 * K);
    ker.L.assign(static_cast<std::size_t>(K) + 1, {});
    for (int n = 0; n <= K; ++n) ker.L[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(L2.count_upto(2 * n)), series(2, order));

    const auto Ax = rho.truncated(amp_ord).as_exact();
    nested_series Rp = nested_series::constant(2, kExactOrder, series::constant(2, order, 1.0));
    double pf = 1.0;
    for (int p = 0; p <= 2 * K; ++p) {
        if (p > 0) {
            const int ord = 2 * (K + p);
            Rp = (Rp.truncated(ord) * Rx.truncated(ord)).as_exact();
            pf *= p;
            if (Rp.is_zero()) break;
        }
        const auto G = (Ax.truncated(2 * (K + p)) * Rp.truncated(2 * (K + p))).as_exact();
        bool used = false;
        for (int r = 0; r < static_cast<int>(G.raw().size()); ++r) {
            const series& c = G.raw()[static_cast<std::size_t>(r)];
            if (detail::is_zero(c)) continue;
            const auto* ce = L2.exps(r);
            const int e = ce[0] + ce[1];
            for (int n = (p + 1) / 2; n <= K; ++n) {
                const int rest = 2 * (n + p) - e;
                if (rest < 0 || rest > 2 * n) continue;
                for (int a = 0; a <= rest; ++a) {
                    const int b = rest - a;
                    const int mu[2] = {a + ce[0], b + ce[1]};
                    const int ab[2] = {a, b};
                    auto& slot = ker.L[static_cast<std::size_t>(n)][static_cast<std::size_t>(L2.rank_of(ab))];
                    slot = slot + c * tab.weight_rank(L2.rank_of(mu)) * (1.0 / pf);
                    used = true;
                }
            }
        }
        if (used) ker.p_max = p;
    }
    for (auto& row : ker.L)
        for (auto& v : row) v = v.truncated(order);
    return ker;
}

namespace detail {

struct kernel_key {
    int kind;
    double xr, xi, zr, zi;
    auto operator<=>(const kernel_key&) const = default;
};

inline std::shared_ptr<const sharp_kernel> cached_kernel(const model_geometry& g, cplx x0, cplx zb0, int K, int order) {
    static std::mutex mu;
    static std::map<kernel_key, std::shared_ptr<const sharp_kernel>> cache;
    const kernel_key key{static_cast<int>(g.kind()), x0.real(), x0.imag(), zb0.real(), zb0.imag()};
    {
        std::lock_guard lock(mu);
        auto it = cache.find(key);
        if (it != cache.end() && it->second->K >= K && it->second->order >= order) return it->second;
    }
    auto ker = std::make_shared<const sharp_kernel>(build_sharp_kernel(g, x0, zb0, K, order));
    std::lock_guard lock(mu);
    auto& slot = cache[key];
    if (!slot || (slot->K <= K && slot->order <= order)) slot = ker;
    return ker;
}

/// d^j/j! tables of each coefficient in one variable, up to j_max (limited by the series order).
inline std::vector<std::vector<series>> taylor_tables(const std::vector<series>& f, int var, int j_max) {
    std::vector<std::vector<series>> out;
    for (const auto& c : f) {
        std::vector<series> row{c};
        const int top = c.exact() ? j_max : std::min(j_max, c.order());
        for (int j = 1; j <= top; ++j) row.push_back(d_dvar(row.back(), var) * (1.0 / j));
        out.push_back(std::move(row));
    }
    return out;
}

inline const series& table_entry(const std::vector<std::vector<series>>& t, int i, int j) {
    const auto& row = t[static_cast<std::size_t>(i)];
    if (j >= static_cast<int>(row.size()))
        throw std::invalid_argument("sharp_product: insufficient series order for " + std::to_string(j) + " derivatives");
    return row[static_cast<std::size_t>(j)];
}

/// Sum over l + m + n = k of the kernel terms, restricted to m in [m_lo, m_hi].
inline series sharp_term(const sharp_kernel& ker, const std::vector<std::vector<series>>& F,
                         const std::vector<std::vector<series>>& G, int k, int m_lo, int m_hi) {
    series acc(2, ker.order);
    for (int n = 0; n <= k; ++n)
        for (int l = 0; l + n <= k; ++l) {
            const int m = k - n - l;
            if (m < m_lo || m > m_hi) continue;
            if (l >= static_cast<int>(F.size()) || m >= static_cast<int>(G.size())) continue;
            for (int a = 0; a <= 2 * n; ++a)
                for (int b = 0; a + b <= 2 * n; ++b) {
                    const series& Lab = ker.entry(n, a, b);
                    if (Lab.is_zero()) continue;
                    const auto& fb = F[static_cast<std::size_t>(l)];
                    const auto& ga = G[static_cast<std::size_t>(m)];
                    if (b < static_cast<int>(fb.size()) && fb[static_cast<std::size_t>(b)].is_zero()) continue;
                    if (a < static_cast<int>(ga.size()) && ga[static_cast<std::size_t>(a)].is_zero()) continue;
                    acc = acc + table_entry(F, l, b) * table_entry(G, m, a) * Lab;
                }
        }
    return acc;
}

inline int working_order(const std::vector<series>& f, const std::vector<series>& g) {
    int o = kCovariantOrder;
    for (const auto& s : f)
        if (!s.exact()) o = std::min(o, s.order());
    for (const auto& s : g)
        if (!s.exact()) o = std::min(o, s.order());
    return o;
}

inline void check_compatible(const covariant_symbol& f, const covariant_symbol& g, int K) {
    if (f.geom.kind() != g.geom.kind()) throw std::invalid_argument("sharp_product: geometry mismatch");
    if (f.base != g.base) throw std::invalid_argument("sharp_product: base grids differ");
    if (K > f.K() || K > g.K()) throw std::invalid_argument("sharp_product: K exceeds the symbol truncation");
}

template <class Fn>
void parallel_points(int n, Fn&& fn) {
    std::vector<std::future<void>> jobs;
    for (int p = 0; p < n; ++p) jobs.push_back(std::async(std::launch::async, fn, p));
    for (auto& j : jobs) j.get();
}

inline void stamp(std::vector<series>& row, cplx x0) {
    for (auto& s : row) s.set_base_point({x0, std::conj(x0)});
}

}  // namespace detail

/// (f#g)_k for k <= K at one base point, from per-point series of f and g.
inline std::vector<series> sharp_at_point(const sharp_kernel& ker, const std::vector<series>& f,
                                          const std::vector<series>& g, int K) {
    const auto F = detail::taylor_tables(f, 1, 2 * K);
    const auto G = detail::taylor_tables(g, 0, 2 * K);
    std::vector<series> out;
    for (int k = 0; k <= K; ++k) out.push_back(ker.inv_h * detail::sharp_term(ker, F, G, k, 0, k));
    return out;
}

inline covariant_symbol sharp_product(const covariant_symbol& f, const covariant_symbol& g, int K) {
    detail::check_compatible(f, g, K);
    covariant_symbol out;
    out.geom = f.geom;
    out.base = f.base;
    out.params = f.params;
    out.at.resize(f.base.size());
    detail::parallel_points(f.num_points(), [&](int p) {
        const cplx x0 = f.base[static_cast<std::size_t>(p)];
        const int ord = detail::working_order(f.at[static_cast<std::size_t>(p)], g.at[static_cast<std::size_t>(p)]);
        const auto ker = detail::cached_kernel(f.geom, x0, std::conj(x0), K, ord);
        out.at[static_cast<std::size_t>(p)] = sharp_at_point(*ker, f.at[static_cast<std::size_t>(p)], g.at[static_cast<std::size_t>(p)], K);
        detail::stamp(out.at[static_cast<std::size_t>(p)], x0);
    });
    return out;
}

/// g with f#g = h to order K: g_k = (h_k - sum_{m<k} terms) / (inv_h f_0 L_0(0,0)).
inline covariant_symbol solve_sharp(const covariant_symbol& f, const covariant_symbol& h, int K) {
    detail::check_compatible(f, h, K);
    covariant_symbol out;
    out.geom = f.geom;
    out.base = f.base;
    out.params = h.params;
    out.at.resize(f.base.size());
    detail::parallel_points(f.num_points(), [&](int p) {
        const cplx x0 = f.base[static_cast<std::size_t>(p)];
        const auto& fp = f.at[static_cast<std::size_t>(p)];
        const auto& hp = h.at[static_cast<std::size_t>(p)];
        const int ord = detail::working_order(fp, hp);
        const auto ker = detail::cached_kernel(f.geom, x0, std::conj(x0), K, ord);
        const series lead = ker->inv_h * fp[0] * ker->entry(0, 0, 0);
        if (std::abs(lead.constant_term()) < 1e-12) throw std::domain_error("solve_sharp: leading coefficient vanishes");
        const series inv_lead = reciprocal(lead.truncated(std::min(lead.order(), ord)));
        const auto F = detail::taylor_tables(fp, 1, 2 * K);
        std::vector<series> g;
        std::vector<std::vector<series>> G;
        for (int k = 0; k <= K; ++k) {
            series rest(2, ord);
            if (k > 0) rest = ker->inv_h * detail::sharp_term(*ker, F, G, k, 0, k - 1);
            g.push_back(((hp[static_cast<std::size_t>(k)] - rest) * inv_lead));
            // extend the derivative tables with the new coefficient
            G = detail::taylor_tables(g, 0, 2 * K);
        }
        detail::stamp(g, x0);
        out.at[static_cast<std::size_t>(p)] = std::move(g);
    });
    return out;
}

inline covariant_symbol unit_symbol(const model_geometry& g, int K, std::vector<cplx> base = {}) {
    std::vector<cplx> v(static_cast<std::size_t>(K) + 1, cplx(0.0));
    v[0] = 1.0;
    return covariant_constant(g, v, std::move(base));
}

/// Bergman symbol a: the solution of 1 # a = 1.
inline covariant_symbol bergman_symbol(const model_geometry& g, int K, std::vector<cplx> base = {}) {
    const auto one = unit_symbol(g, K, std::move(base));
    return solve_sharp(one, one, K);
}

/// sum_mu |c_mu| rho^|mu|: bounds the series on the polydisk of radius rho. High-degree
/// coefficients carry cancellation noise from pole-type factors, which this weighting damps.
inline double weighted_norm(const series& s, double rho) {
    double acc = 0.0;
    const auto& L = s.lay();
    for (int r = 0; r < static_cast<int>(s.raw().size()); ++r)
        acc += std::abs(s.raw()[static_cast<std::size_t>(r)]) * std::pow(rho, L.degree_of(r));
    return acc;
}

inline constexpr double kSymbolRadius = 0.3;

/// Largest weighted coefficient disagreement of two symbols on the same grid.
inline double symbol_distance(const covariant_symbol& a, const covariant_symbol& b, int K, double rho = kSymbolRadius) {
    double worst = 0.0;
    for (int p = 0; p < a.num_points(); ++p)
        for (int k = 0; k <= K; ++k) worst = std::max(worst, weighted_norm(a.coeff(p, k) - b.coeff(p, k), rho));
    return worst;
}

/// Uniqueness check of the Bergman symbol: solve_sharp(f, f) for a second symbol f.
inline double bergman_uniqueness_gap(const covariant_symbol& f, int K) {
    return symbol_distance(solve_sharp(f, f, K), bergman_symbol(f.geom, K, f.base), K);
}

inline covariant_symbol sharp_inverse(const covariant_symbol& f, int K) {
    return solve_sharp(f, bergman_symbol(f.geom, K, f.base), K);
}

struct inverse_norm_report {
    double r = 0.0, R = 0.0;
    int m = 0;
    double norm_f = 0.0, norm_inverse = 0.0, ratio = 0.0;
};

/// ||f^{#-1}|| / ||f|| over a grid of class parameters (base-point norms, worst point).
inline std::vector<inverse_norm_report> inverse_norm_growth(const covariant_symbol& f, const covariant_symbol& finv,
                                                            const std::vector<symbol_params>& classes, int j_max) {
    std::vector<inverse_norm_report> out;
    const int K = std::min(f.K(), finv.K());
    for (const auto& c : classes) {
        inverse_norm_report r{c.r, c.R, c.m};
        for (int p = 0; p < f.num_points(); ++p) {
            r.norm_f = std::max(r.norm_f, estimate_symbol_norm(f.as_analytic(p), c.r, c.R, c.m, j_max, K));
            r.norm_inverse = std::max(r.norm_inverse, estimate_symbol_norm(finv.as_analytic(p), c.r, c.R, c.m, j_max, K));
        }
        r.ratio = r.norm_inverse / r.norm_f;
        out.push_back(r);
    }
    return out;
}

/// Covariant symbol of the Toeplitz operator S_N f S_N: a # a with weight f~(y, wbar) in the volume density.
inline covariant_symbol contravariant_to_covariant(const model_geometry& g, const symbol_fn& f, int K,
                                                   std::vector<cplx> base = {}, int order = kCovariantOrder) {
    const int weight_order = detail::get_layout(2).max_degree();
    if (order + 2 * K > weight_order)
        throw std::invalid_argument("contravariant_to_covariant: extension order " + std::to_string(weight_order) +
                                    " too small for K = " + std::to_string(K) + " at order " + std::to_string(order));
    const auto a = bergman_symbol(g, K, std::move(base));
    covariant_symbol out;
    out.geom = g;
    out.base = a.base;
    out.at.resize(a.base.size());
    detail::parallel_points(a.num_points(), [&](int p) {
        const cplx x0 = a.base[static_cast<std::size_t>(p)];
        const auto X = series::variable(2, 0, weight_order, x0), Z = series::variable(2, 1, weight_order, std::conj(x0));
        const auto w = f(X, Z);
        const auto ker = build_sharp_kernel(g, x0, std::conj(x0), K, order, &w);
        out.at[static_cast<std::size_t>(p)] = sharp_at_point(ker, a.at[static_cast<std::size_t>(p)], a.at[static_cast<std::size_t>(p)], K);
        detail::stamp(out.at[static_cast<std::size_t>(p)], x0);
    });
    return out;
}

/// Per-base-point Cauchy product in N^{-1} (pointwise product of symbol sequences).
inline covariant_symbol pointwise_product(const covariant_symbol& f, const covariant_symbol& g, int K) {
    detail::check_compatible(f, g, K);
    covariant_symbol out = f;
    for (int p = 0; p < f.num_points(); ++p) {
        std::vector<series> row;
        for (int k = 0; k <= K; ++k) {
            series acc(2, kExactOrder);
            for (int i = 0; i <= k; ++i) acc = acc + f.coeff(p, i) * g.coeff(p, k - i);
            row.push_back(acc);
        }
        detail::stamp(row, f.base[static_cast<std::size_t>(p)]);
        out.at[static_cast<std::size_t>(p)] = std::move(row);
    }
    return out;
}

/// Inverse for the pointwise product: b_k = -b_0 sum_{i>=1} a_i b_{k-i}.
inline covariant_symbol pointwise_inverse(const covariant_symbol& f, int K) {
    covariant_symbol out = f;
    for (int p = 0; p < f.num_points(); ++p) {
        const auto& a = f.at[static_cast<std::size_t>(p)];
        if (std::abs(a[0].constant_term()) < 1e-12) throw std::domain_error("pointwise_inverse: vanishing leading term");
        const int ord = a[0].exact() ? kCovariantOrder : a[0].order();
        std::vector<series> b{reciprocal(a[0].truncated(ord))};
        for (int k = 1; k <= K; ++k) {
            series acc(2, kExactOrder);
            for (int i = 1; i <= k; ++i) acc = acc + a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(k - i)];
            b.push_back(-(b[0] * acc));
        }
        detail::stamp(b, f.base[static_cast<std::size_t>(p)]);
        out.at[static_cast<std::size_t>(p)] = std::move(b);
    }
    return out;
}

/// Product for kernels written with the normalizing symbol: ((f*a) # (g*a)) * a^{*-1}.
inline covariant_symbol normalized_sharp(const covariant_symbol& f, const covariant_symbol& g, int K) {
    const auto a = bergman_symbol(f.geom, K, f.base);
    const auto prod = sharp_product(pointwise_product(f, a, K), pointwise_product(g, a, K), K);
    return pointwise_product(prod, pointwise_inverse(a, K), K);
}

struct wick_check_result {
    bool f_side = false, g_side = false;
    double f_change = 0.0, g_change = 0.0;
    // perturbations vanishing only to order k do move the coefficient (non-vacuity)
    double f_change_lower = 0.0, g_change_lower = 0.0;
    bool passed() const { return f_side && g_side; }
};

/// Perturbs every coefficient of f by (wbar - zbar_0)^{k+1} (resp. g by (y - x_0)^{k+1}) and
/// measures the change of (f#g)_k at the base point.
inline wick_check_result wick_degree_check(const covariant_symbol& f, const covariant_symbol& g, int k, int point = 0,
                                           double tol = 1e-8) {
    if (k > std::min(f.K(), g.K())) throw std::invalid_argument("wick_degree_check: k exceeds the truncation");
    const auto p = static_cast<std::size_t>(point);
    const cplx x0 = f.base[p];
    const int ord = detail::working_order(f.at[p], g.at[p]);
    const auto ker = detail::cached_kernel(f.geom, x0, std::conj(x0), k, ord);
    const auto fk = [&](const std::vector<series>& a, const std::vector<series>& b) {
        return sharp_at_point(*ker, a, b, k)[static_cast<std::size_t>(k)].constant_term();
    };
    const cplx ref = fk(f.at[p], g.at[p]);
    const auto bump = [&](const std::vector<series>& a, int var, int power) {
        auto out = a;
        series mono = series::constant(2, kExactOrder, 1.0);
        const auto v = series::variable(2, var, kExactOrder);
        for (int i = 0; i < power; ++i) mono = mono * v;
        for (auto& c : out) c = c + mono;
        return out;
    };
    wick_check_result r;
    r.f_change = std::abs(fk(bump(f.at[p], 1, k + 1), g.at[p]) - ref);
    r.g_change = std::abs(fk(f.at[p], bump(g.at[p], 0, k + 1)) - ref);
    r.f_change_lower = std::abs(fk(bump(f.at[p], 1, k), g.at[p]) - ref);
    r.g_change_lower = std::abs(fk(f.at[p], bump(g.at[p], 0, k)) - ref);
    r.f_side = r.f_change < tol;
    r.g_side = r.g_change < tol;
    return r;
}

/// Symbol whose coefficients are random polynomials of bidegree <= deg in (x, zbar), f_0 near 1.
inline covariant_symbol random_polynomial_symbol(const model_geometry& g, unsigned seed, int K, int deg = 2,
                                                 double scale = 0.3, std::vector<cplx> base = {}) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<symbol_fn> fk;
    for (int k = 0; k <= K; ++k) {
        std::vector<std::tuple<int, int, cplx>> terms;
        for (int i = 0; i <= deg; ++i)
            for (int j = 0; j <= deg; ++j) terms.emplace_back(i, j, scale * cplx(u(rng), u(rng)) / double(1 + i + j));
        if (k == 0) std::get<2>(terms[0]) += 1.0;
        fk.push_back([terms](const series& x, const series& z) {
            series acc = series::constant(2, x.order(), 0.0);
            for (const auto& [i, j, c] : terms) {
                series m = series::constant(2, x.order(), c);
                for (int a = 0; a < i; ++a) m = m * x;
                for (int b = 0; b < j; ++b) m = m * z;
                acc = acc + m;
            }
            return acc;
        });
    }
    return covariant_from_functions(g, fk, std::move(base));
}

struct class_stability_report {
    symbol_params cls;
    double norm_f = 0.0;   // in S^{r,R}_m
    double norm_g = 0.0;   // in S^{2r,2R}_m
    double norm_fg = 0.0;  // in S^{2r,2R}_m
    double ratio = 0.0;    // norm_fg / (norm_f norm_g)
};

/// Base-point estimates of the two-class bound for f # g (worst base point for each norm).
inline class_stability_report sharp_class_stability(const covariant_symbol& f, const covariant_symbol& g,
                                                    const covariant_symbol& fg, symbol_params cls, int j_max) {
    class_stability_report rep{cls};
    const int K = fg.K();
    for (int p = 0; p < f.num_points(); ++p) {
        rep.norm_f = std::max(rep.norm_f, estimate_symbol_norm(f.as_analytic(p), cls.r, cls.R, cls.m, j_max, K));
        rep.norm_g = std::max(rep.norm_g, estimate_symbol_norm(g.as_analytic(p), 2 * cls.r, 2 * cls.R, cls.m, j_max, K));
        rep.norm_fg = std::max(rep.norm_fg, estimate_symbol_norm(fg.as_analytic(p), 2 * cls.r, 2 * cls.R, cls.m, j_max, K));
    }
    rep.ratio = rep.norm_fg / (rep.norm_f * rep.norm_g);
    return rep;
}

}  // namespace tforge
