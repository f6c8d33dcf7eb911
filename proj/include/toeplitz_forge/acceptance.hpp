#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "covariant.hpp"
#include "function_spaces.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "quantization.hpp"
#include "stationary_phase.hpp"

namespace tforge::acceptance {

struct criterion_result {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    std::map<std::string, double> metrics;
};

// Tolerances and sweep ranges, one block per criterion.
inline constexpr int kC1MuMax = 10, kC1SumMax = 10, kC1HullN = 5, kC1HullEll = 12, kC1LemEll = 60, kC1LemM = 24;
inline constexpr double kC2C1 = 0.45, kC2RateFactor = 0.9, kC2R2 = 0.99;
inline constexpr double kC3Residual = 1e-12;
inline constexpr int kC3Order = 12, kC3Instances = 50;
inline constexpr double kC4Value = 0.3193368, kC4Tol = 1e-12;
inline constexpr double kC5Agreement = 1e-10, kC5SlopeTol = 0.5;
inline constexpr double kC6Tol = 1e-10;
inline constexpr int kC6K = 6, kC6Degree = 4;
inline constexpr double kC7SymbolTol = 1e-8, kC7R2 = 0.98;
inline constexpr double kC8SlopeMargin = 0.5;
inline constexpr double kC9Tol = 1e-8;
inline constexpr double kC10Rate = 0.2, kC10R2 = 0.99, kC10MassTol = 1e-10, kC10ControlRateTol = 1e-3;
inline constexpr double kC11Lo = 0.9, kC11Hi = 1.1;

namespace detail {

inline std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

inline void for_each_tuple(int n, int maxsum, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> t(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int pos, int rem) {
        if (pos == n) {
            fn(t);
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            t[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, rem - v);
        }
    };
    rec(0, maxsum);
}

inline series random_poly(std::mt19937& rng, int m, int lo, int hi, int order, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    series s(m, order);
    const auto& L = s.lay();
    for (int r = L.begin(lo); r < L.count_upto(hi); ++r) s.set_rank(r, cplx(u(rng), u(rng)) * scale);
    return s;
}

// polynomial in (x, zbar) of total degree <= deg
inline symbol_fn random_bidegree_poly(std::mt19937& rng, int deg) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::tuple<int, int, cplx>> terms;
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j) terms.emplace_back(i, j, cplx(u(rng), u(rng)));
    return [terms](const series& x, const series& z) {
        series acc = series::constant(2, x.order(), 0.0);
        for (const auto& [i, j, c] : terms) {
            series t = series::constant(2, x.order(), c);
            for (int a = 0; a < i; ++a) t = t * x;
            for (int b = 0; b < j; ++b) t = t * z;
            acc = acc + t;
        }
        return acc;
    };
}

}  // namespace detail

inline criterion_result combinatorics_suite() {
    criterion_result r{1, "combinatorics suite", false, "", {}};
    long checked = 0, violations = 0;
    for (int n = 1; n <= 3; ++n)
        detail::for_each_tuple(n, kC1MuMax, [&](const std::vector<int>& mu) {
            detail::for_each_tuple(n, kC1MuMax, [&](const std::vector<int>& nu) {
                for (int i = 0; i < n; ++i)
                    if (nu[static_cast<std::size_t>(i)] > mu[static_cast<std::size_t>(i)]) return;
                ++checked;
                violations += !check_binomial_domination(multi_index(mu), multi_index(nu)).holds;
            });
        });
    for (int n = 2; n <= 4; ++n)
        detail::for_each_tuple(n, kC1SumMax, [&](const std::vector<int>& a) {
            detail::for_each_tuple(n, kC1SumMax - n, [&](const std::vector<int>& b0) {
                std::vector<int> b(b0);
                for (int& v : b) ++v;
                ++checked;
                violations += !binom_multi_bound(a, b).holds;
            });
        });
    for (int n = 2; n <= kC1HullN; ++n)
        for (int ell = 2; ell <= kC1HullEll; ++ell)
            detail::for_each_tuple(n, ell, [&](const std::vector<int>& t) {
                int s = 0, pos = 0;
                for (int v : t) {
                    s += v;
                    pos += v > 0;
                }
                if (s != ell || pos < 2) return;
                ++checked;
                violations += !hull_membership(t, ell);
            });
    for (int n = 2; n <= 3; ++n)
        for (int d = 0; d <= 2; ++d)
            for (int m = lem_hard_min_m(n, d); m <= kC1LemM; ++m)
                for (int ell = 0; ell <= kC1LemEll; ++ell) {
                    const auto h = lem_hard_sum(n, d, m, ell);
                    ++checked;
                    violations += !(h.exact && h.bound_holds);
                }
    r.metrics["checked"] = static_cast<double>(checked);
    r.metrics["violations"] = static_cast<double>(violations);
    r.passed = violations == 0;
    r.detail = std::to_string(checked) + " exact checks, " + std::to_string(violations) + " violations";
    return r;
}

inline criterion_result summation_contract() {
    criterion_result r{2, "summation contract", false, "", {}};
    const double R = 1.0;
    const int K = 220;
    std::vector<cplx> ones(static_cast<std::size_t>(K) + 1, 1.0);
    std::vector<double> ls;
    for (int k = 0; k <= K; ++k) ls.push_back(std::lgamma(k + 1.0) + k * std::log(R));
    const auto a = constant_symbol(ones, {1.0, R, 0}, ls);
    bool ratio_ok = true, bound_ok = true;
    double worst_ratio = 0.0;
    std::vector<double> xs, ys;
    for (int N = 5; N <= 200; ++N) {
        const auto s = summation(a, N, kC2C1);
        worst_ratio = std::max(worst_ratio, s.max_term_ratio);
        ratio_ok = ratio_ok && s.max_term_ratio <= std::numbers::e / 3.0 * (1.0 + 1e-12);
        bound_ok = bound_ok && s.uniform_bound_holds;
        if (std::isfinite(s.log_tail)) {
            xs.push_back(N);
            ys.push_back(-s.log_tail);
        }
    }
    const auto fit = linear_fit(xs, ys);
    const double floor_rate = kC2RateFactor * kC2C1 * std::log(3.0 / std::numbers::e);
    r.metrics = {{"max_ratio", worst_ratio}, {"tail_rate", fit.slope}, {"rate_floor", floor_rate}, {"r2", fit.r_squared}};
    r.passed = ratio_ok && bound_ok && fit.slope >= floor_rate && fit.r_squared > kC2R2;
    r.detail = "max ratio " + detail::fmt(worst_ratio) + " (<= e/3), uniform bound " + (bound_ok ? "holds" : "fails") +
               ", tail rate " + detail::fmt(fit.slope) + " vs floor " + detail::fmt(floor_rate) + ", r2 " + detail::fmt(fit.r_squared);
    return r;
}

inline criterion_result star_inverse_residual() {
    criterion_result r{3, "star-inverse residual", false, "", {}};
    std::mt19937 rng(1301);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto grid = make_grid(box_domain{{{-0.5, 0.5}}}, 11, 6);
    double worst = 0.0;
    int bound_fail = 0;
    double worst_cert_ratio = 0.0;
    for (int trial = 0; trial < kC3Instances; ++trial) {
        std::vector<analytic_function> fs;
        for (int k = 0; k <= kC3Order; ++k) {
            const cplx c0 = k == 0 ? cplx(2.0 + u(rng), 0.3 * u(rng)) : cplx(u(rng), u(rng));
            const cplx c1(0.3 * u(rng), 0.3 * u(rng)), c2(0.3 * u(rng), 0.3 * u(rng));
            fs.push_back(analytic_function::from_expr(1, [=](const std::vector<series>& x) {
                return series::constant(1, x[0].order(), c0) + x[0] * c1 + x[0] * x[0] * c2;
            }));
        }
        const auto a = symbol_from_functions(fs, grid, {1.0, 1.0, 2});
        const auto rep = star_inverse_checked(a, {4.0, 4.0, 4});
        const auto unit = cauchy_product(a, rep.inverse);
        double res = max_abs(unit.coeffs[0][0] - series::constant(1, 6, 1.0));
        for (std::size_t p = 1; p < unit.coeffs[0].size(); ++p) res = std::max(res, max_abs(unit.coeffs[0][p] - series::constant(1, 6, 1.0)));
        for (int k = 1; k <= kC3Order; ++k)
            for (const auto& jet : unit.coeffs[static_cast<std::size_t>(k)]) res = std::max(res, max_abs(jet));
        worst = std::max(worst, res);
        bound_fail += !rep.bound_holds;
        worst_cert_ratio = std::max(worst_cert_ratio, rep.norm_inverse / rep.bound);
    }
    r.metrics = {{"residual", worst}, {"bound_failures", bound_fail}, {"max_norm_over_bound", worst_cert_ratio}};
    r.passed = worst < kC3Residual && bound_fail == 0;
    r.detail = "max residual " + detail::fmt(worst) + " over " + std::to_string(kC3Instances) + " instances, certificate failures " +
               std::to_string(bound_fail) + ", max ||a^-1||/bound " + detail::fmt(worst_cert_ratio);
    return r;
}

inline criterion_result sphere_phase_constant() {
    criterion_result r{4, "sphere phase constant", false, "", {}};
    const cplx v = mixed_log_derivative(model_geometry::sphere());
    const double gap = std::abs(v - kC4Value);
    const double L = std::log(2.0);
    r.metrics = {{"value", v.real()}, {"target", kC4Value}, {"gap", gap}, {"closed_form_ratio", ((1.0 - L) / (2.0 * L * L)) / v.real()}};
    r.passed = gap < kC4Tol;
    r.detail = "computed " + detail::fmt(v.real(), 12) + " vs reference " + detail::fmt(kC4Value, 8) + ", gap " + detail::fmt(gap) +
               "; reference / computed = " + detail::fmt(((1.0 - L) / (2.0 * L * L)) / v.real(), 12);
    return r;
}

inline criterion_result stationary_phase_engine() {
    criterion_result r{5, "stationary-phase engine", false, "", {}};
    const auto S = model_geometry::sphere(), B = model_geometry::bargmann();
    std::mt19937 rng(4711);
    double worst = 0.0;
    for (int K = 1; K <= 4; ++K) {
        const int order = 2 * K + 2;
        for (const auto* g : {&S, &B})
            for (cplx x : {cplx(0.0), cplx(0.3, -0.2), cplx(-0.1, 0.25)}) {
                const auto phase = phase_data<cplx>::from(g->phase_phi1_series(x, std::conj(x) + cplx(0.05, 0.02), order));
                const auto a = detail::random_poly(rng, 2, 0, order, order, 1.0);
                const auto w = wick_expand(phase, a, K).coeffs;
                const auto mo = morse_expand(phase, a, K).coeffs;
                for (int k = 0; k <= K; ++k) worst = std::max(worst, std::abs(w[static_cast<std::size_t>(k)] - mo[static_cast<std::size_t>(k)]));
            }
    }
    // N int a (1+|v|^2)^{-N} dA/pi against the truncated expansion
    const int order = 10;
    const auto phase = phase_data<cplx>::from(S.phase_phi1_series(0.0, 0.0, order));
    const auto v = series::variable(2, 0, order), vb = series::variable(2, 1, order);
    const auto one = series::constant(2, order, 1.0);
    const auto a = exp((v + vb) * cplx(0.3)) * reciprocal((one + v * vb) * (one + v * vb));
    const auto af = [](cplx z) { return std::exp(0.3 * (z + std::conj(z))) / std::pow(1.0 + std::norm(z), 2); };
    const auto T = wick_expand(phase, a, 3).coeffs;
    const auto integral = [&](int N) {
        const auto gl = gauss_legendre(160, 0.0, 1.0);
        const int na = 64;
        cplx acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double s = gl.nodes[i], rad = std::sqrt(s / (1.0 - s));
            const double w = gl.weights[i] * std::pow(1.0 - s, N - 2) / na;
            for (int k = 0; k < na; ++k) acc += w * af(std::polar(rad, 2.0 * std::numbers::pi * (k + 0.5) / na));
        }
        return acc * static_cast<double>(N);
    };
    bool slopes_ok = true;
    std::string slopes;
    for (int K : {1, 2}) {
        std::vector<double> lx, ly;
        for (int N = 10; N <= 80; N += 10) {
            cplx approx = 0.0;
            for (int k = 0; k <= K; ++k) approx += T[static_cast<std::size_t>(k)] * std::pow(static_cast<double>(N), -k);
            lx.push_back(std::log(static_cast<double>(N)));
            ly.push_back(std::log(std::abs(integral(N) - approx)));
        }
        const double sl = linear_fit(lx, ly).slope;
        r.metrics["slope_K" + std::to_string(K)] = sl;
        slopes_ok = slopes_ok && std::abs(sl + (K + 1)) < kC5SlopeTol;
        slopes += " K=" + std::to_string(K) + ":" + detail::fmt(sl, 4);
    }
    r.metrics["wick_morse_gap"] = worst;
    r.passed = worst < kC5Agreement && slopes_ok;
    r.detail = "Wick vs Morse max gap " + detail::fmt(worst) + ", slopes" + slopes;
    return r;
}

inline criterion_result bargmann_star_product() {
    criterion_result r{6, "Bargmann star product", false, "", {}};
    const auto B = model_geometry::bargmann();
    std::mt19937 rng(606);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<symbol_fn> fk, gk;
        for (int k = 0; k <= kC6K; ++k) {
            fk.push_back(detail::random_bidegree_poly(rng, kC6Degree));
            gk.push_back(detail::random_bidegree_poly(rng, kC6Degree));
        }
        const auto f = covariant_from_functions(B, fk, {0.0}), g = covariant_from_functions(B, gk, {0.0});
        const auto fg = sharp_product(f, g, kC6K);
        for (int k = 0; k <= kC6K; ++k) {
            series expect(2, kExactOrder);
            for (int n = 0; n <= k; ++n)
                for (int l = 0; l + n <= k; ++l)
                    expect = expect + d_dvar(f.coeff(0, l), 1, n) * d_dvar(g.coeff(0, k - n - l), 0, n) * (1.0 / std::tgamma(n + 1.0));
            worst = std::max(worst, weighted_norm(fg.coeff(0, k) - expect, 1.0));
        }
    }
    r.metrics["max_gap"] = worst;
    r.passed = worst < kC6Tol;
    r.detail = "max coefficient-sum gap " + detail::fmt(worst) + " for k <= " + std::to_string(kC6K) + ", degree <= " + std::to_string(kC6Degree);
    return r;
}

inline std::vector<std::pair<cplx, cplx>> sphere_sample_pairs() {
    std::vector<cplx> pts;
    for (double rad : {0.0, 0.35, 0.8, 1.3, 2.5})
        for (int k = 0; k < 5; ++k) pts.push_back(std::polar(rad, 2.0 * std::numbers::pi * k / 5 + 0.3 * rad));
    std::vector<std::pair<cplx, cplx>> pairs;
    for (cplx x : pts)
        for (cplx y : pts) pairs.emplace_back(x, y);
    return pairs;
}

inline criterion_result bergman_kernel_expansion(std::vector<int> Ns = {8, 16, 24, 32, 40, 48, 56, 64}) {
    criterion_result r{7, "Bergman-kernel expansion", false, "", {}};
    const auto S = model_geometry::sphere();
    const int K = 3;
    const auto a = bergman_symbol(S, K);
    double gap = 0.0;
    const cplx want[] = {1.0, 1.0, 0.0, 0.0};
    for (int p = 0; p < a.num_points(); ++p)
        for (int k = 0; k <= 2; ++k)
            gap = std::max(gap, weighted_norm(a.coeff(p, k) - series::constant(2, kExactOrder, want[k]), kSymbolRadius));
    // global form read at the origin; the Bergman symbol has bidegree 0
    const auto G = global_form(bergman_symbol(S, K, {0.0}), 0, 0);
    const auto rep = bergman_sweep(G, 1.0, Ns, default_cutoff(), sphere_sample_pairs());
    r.metrics = {{"symbol_gap", gap}, {"residual", G.residual}, {"slope", rep.fit.slope}, {"r2", rep.fit.r_squared}};
    r.passed = gap < kC7SymbolTol && rep.fit.slope < 0.0 && rep.fit.r_squared > kC7R2;
    r.detail = "(a0,a1,a2) gap " + detail::fmt(gap) + ", log sup error slope " + detail::fmt(rep.fit.slope) + " per unit N, r2 " +
               detail::fmt(rep.fit.r_squared) + ", sup error N=" + std::to_string(rep.rows.front().N) + ": " +
               detail::fmt(rep.rows.front().sup_error) + ", N=" + std::to_string(rep.rows.back().N) + ": " + detail::fmt(rep.rows.back().sup_error);
    return r;
}

inline criterion_result operator_composition(std::vector<int> Ns = {8, 16, 24, 32, 40, 48, 56, 64}) {
    criterion_result r{8, "operator-level composition", false, "", {}};
    const auto geo = model_geometry::sphere();
    const auto f = parse_polynomial("x3 + 0.5*x1", ambient_vars(geo)), g = parse_polynomial("x1*x3 + x2", ambient_vars(geo));
    bool ok = true;
    for (int K : {2, 3}) {
        const auto rep = composition_sweep(f, g, K, Ns);
        r.metrics["slope_K" + std::to_string(K)] = rep.fit.slope;
        r.metrics["residual_K" + std::to_string(K)] = rep.global_residual;
        ok = ok && rep.fit.slope <= -(K + kC8SlopeMargin);
        r.detail += (r.detail.empty() ? "" : ", ") + std::string("K=") + std::to_string(K) + " slope " + detail::fmt(rep.fit.slope, 4) +
                    " (need <= " + detail::fmt(-(K + kC8SlopeMargin), 3) + ")";
    }
    r.passed = ok;
    return r;
}

inline criterion_result wick_degree_property() {
    criterion_result r{9, "Wick-degree property", false, "", {}};
    double worst = 0.0, weakest_lower = 1e300;
    bool ok = true;
    unsigned seed = 900;
    for (const auto& geo : {model_geometry::sphere(), model_geometry::bargmann()}) {
        const auto base = default_base_points(geo);
        const auto f = random_polynomial_symbol(geo, seed++, 3, 3, 0.3, base), g = random_polynomial_symbol(geo, seed++, 3, 3, 0.3, base);
        for (int p = 0; p < f.num_points(); ++p)
            for (int k = 0; k <= 3; ++k) {
                const auto w = wick_degree_check(f, g, k, p, kC9Tol);
                worst = std::max({worst, w.f_change, w.g_change});
                if (k > 0) weakest_lower = std::min({weakest_lower, w.f_change_lower, w.g_change_lower});
                ok = ok && w.passed();
            }
    }
    r.metrics = {{"max_deviation", worst}, {"min_order_k_change", weakest_lower}};
    r.passed = ok && worst < kC9Tol;
    r.detail = "max deviation " + detail::fmt(worst) + " (order k+1), smallest order-k change " + detail::fmt(weakest_lower);
    return r;
}

inline criterion_result eigenfunction_decay() {
    criterion_result r{10, "eigenfunction decay", false, "", {}};
    const auto S = model_geometry::sphere();
    std::vector<int> Ns;
    for (int N = 8; N <= 48; N += 4) Ns.push_back(N);
    const auto rep = decay_experiment(parse_polynomial("x3", ambient_vars(S)), 0.0, region::x3_between(0.5, 1.0), Ns);
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) decreasing = decreasing && rep.rows[i].mass < rep.rows[i - 1].mass;
    // control: e_0 on {x3 <= -1/2}
    double ctrl_gap = 0.0;
    std::vector<std::pair<int, double>> ctrl;
    for (int N : Ns) {
        const double m = forbidden_mass(S, N, cvector::Unit(N + 1, 0), region::x3_between(-1.0, -0.5)).mass;
        const double exact = std::pow(4.0, -(N + 1));
        ctrl_gap = std::max(ctrl_gap, std::abs(m - exact) / exact);
        ctrl.emplace_back(N, m);
    }
    const auto cf = decay_rate_fit(ctrl);
    const bool ctrl_ok = ctrl_gap < kC10MassTol && std::abs(cf.slope - std::log(4.0)) < kC10ControlRateTol;
    r.metrics = {{"rate", rep.rate()},      {"r2", rep.fit.r_squared},         {"decreasing", decreasing},
                 {"control_rel_gap", ctrl_gap}, {"control_rate", cf.slope}};
    r.passed = decreasing && rep.rate() > kC10Rate && rep.fit.r_squared > kC10R2 && ctrl_ok;
    r.detail = "f=x3, E=0: rate " + detail::fmt(rep.rate()) + " (need > " + detail::fmt(kC10Rate) + "), r2 " + detail::fmt(rep.fit.r_squared) +
               ", mass " + (decreasing ? "decreasing" : "not decreasing") + "; control rel gap " + detail::fmt(ctrl_gap) + ", rate " +
               detail::fmt(cf.slope, 8);
    return r;
}

inline criterion_result pre_inverse_uniformity(int N_lo = 4, int N_hi = 32) {
    criterion_result r{11, "pre-inverse uniformity", false, "", {}};
    const auto S = model_geometry::sphere();
    const auto G = global_form(bergman_symbol(S, 2, {0.0}), 0, 0);
    double lo = 1e300, hi = 0.0;
    for (int N = N_lo; N <= N_hi; ++N) {
        const double sv = invertibility_check(covariant_matrix_cutoff(G, N, summation_cutoff(N, 1.0), default_cutoff()));
        lo = std::min(lo, sv);
        hi = std::max(hi, sv);
    }
    r.metrics = {{"min_sv_lo", lo}, {"min_sv_hi", hi}};
    r.passed = lo >= kC11Lo && hi <= kC11Hi;
    r.detail = "smallest singular value in [" + detail::fmt(lo) + ", " + detail::fmt(hi) + "] for N = " + std::to_string(N_lo) + ".." +
               std::to_string(N_hi);
    return r;
}

inline std::vector<std::function<criterion_result()>> all_criteria() {
    return {combinatorics_suite,   summation_contract,      star_inverse_residual,
            sphere_phase_constant, stationary_phase_engine, bargmann_star_product,
            [] { return bergman_kernel_expansion(); },
            [] { return operator_composition(); },
            wick_degree_property,  eigenfunction_decay,
            [] { return pre_inverse_uniformity(); }};
}

}  // namespace tforge::acceptance
