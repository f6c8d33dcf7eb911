#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "calibration.hpp"
#include "series.hpp"

namespace tforge {

struct box_domain {
    std::vector<std::pair<double, double>> axes;
};
struct polydisk_domain {
    std::vector<cplx> center;
    double radius = 1.0;
};
using domain = std::variant<box_domain, polydisk_domain>;

inline int domain_dim(const domain& d) {
    return std::visit([](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, box_domain>) return static_cast<int>(x.axes.size());
        else return static_cast<int>(x.center.size());
    }, d);
}

/// Tensor grid on a box (res points per axis, endpoints included) or polar grid
/// (res radii times res angles per complex axis) on a polydisk.
inline std::vector<std::vector<cplx>> grid_points(const domain& d, int res) {
    if (res < 1) throw std::invalid_argument("grid_points: resolution must be positive");
    std::vector<std::vector<cplx>> axis_pts;
    if (const auto* b = std::get_if<box_domain>(&d)) {
        for (const auto& [lo, hi] : b->axes) {
            std::vector<cplx> p;
            for (int i = 0; i < res; ++i) p.emplace_back(res == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (res - 1), 0.0);
            axis_pts.push_back(std::move(p));
        }
    } else {
        const auto& pd = std::get<polydisk_domain>(d);
        for (const auto& c : pd.center) {
            std::vector<cplx> p{c};
            for (int i = 1; i < res; ++i)
                for (int k = 0; k < res; ++k)
                    p.push_back(c + std::polar(pd.radius * i / (res - 1), 2.0 * std::numbers::pi * k / res));
            axis_pts.push_back(std::move(p));
        }
    }
    std::vector<std::vector<cplx>> out{{}};
    for (const auto& ap : axis_pts) {
        std::vector<std::vector<cplx>> next;
        for (const auto& prefix : out)
            for (const auto& v : ap) {
                auto q = prefix;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    return out;
}

/// Taylor-mode evaluator: given coordinate series x_i + h_i returns the series of f.
struct analytic_function {
    int nvars = 1;
    std::function<series(const std::vector<series>&)> eval;
    /// Set when built from a truncated series: evaluation far from the base point is unreliable.
    std::optional<series> source;

    series jet(const std::vector<cplx>& x, int order) const {
        if (static_cast<int>(x.size()) != nvars) throw std::invalid_argument("analytic_function: point dimension mismatch");
        std::vector<series> args;
        for (int i = 0; i < nvars; ++i) args.push_back(series::variable(nvars, i, order, x[static_cast<std::size_t>(i)]));
        auto s = eval(args).truncated(order);
        s.set_base_point(x);
        return s;
    }

    /// Relative change of the jet at x when the top-degree block of the source series is dropped.
    double tail_indicator(const std::vector<cplx>& x, int order) const {
        if (!source || source->exact()) return 0.0;
        const auto& s = *source;
        auto trimmed = s - homogeneous_part(s, s.degree());
        trimmed = trimmed.truncated(s.order());
        auto shifted = shifted_args(x, order, s);
        auto full = compose_any(s, shifted, series::constant(nvars, order, 1.0));
        auto part = compose_any(trimmed, shifted, series::constant(nvars, order, 1.0));
        const double scale = std::max(max_abs(full), 1e-300);
        return max_abs(full - part) / scale;
    }

    template <class F>
    static analytic_function from_expr(int n, F f) {
        analytic_function a;
        a.nvars = n;
        a.eval = [f](const std::vector<series>& x) { return series(f(x)); };
        return a;
    }

    static analytic_function from_series(const series& s) {
        analytic_function a;
        a.nvars = s.num_vars();
        a.source = s;
        a.eval = [s](const std::vector<series>& x) {
            std::vector<series> shifted;
            const int n = s.num_vars();
            for (int i = 0; i < n; ++i) {
                const cplx b = s.base_point().empty() ? cplx(0.0) : s.base_point()[static_cast<std::size_t>(i)];
                shifted.push_back(x[static_cast<std::size_t>(i)] - series::constant(n, x[0].order(), b));
            }
            return compose_any(s.as_exact(), shifted, series::constant(n, x[0].order(), 1.0));
        };
        return a;
    }

private:
    std::vector<series> shifted_args(const std::vector<cplx>& x, int order, const series& s) const {
        std::vector<series> out;
        for (int i = 0; i < nvars; ++i) {
            const cplx b = s.base_point().empty() ? cplx(0.0) : s.base_point()[static_cast<std::size_t>(i)];
            out.push_back(series::variable(nvars, i, order, x[static_cast<std::size_t>(i)] - b));
        }
        return out;
    }
};

/// sum_{|nu|=j} |c_nu| of a jet, i.e. ||nabla^j f||_{l^1} / j!.
inline double jet_level_l1(const series& jet, int j) {
    if (j > jet.degree()) return 0.0;
    const auto& L = jet.lay();
    double s = 0.0;
    for (int r = L.begin(j); r < L.begin(j + 1); ++r) s += std::abs(jet.raw()[static_cast<std::size_t>(r)]);
    return s;
}

struct h_norm_certificate {
    int m = 0;
    double r = 1.0;
    domain dom;
    double constant = 0.0;
    int j_max = 0;
    int grid_resolution = 41;
    std::vector<double> per_j;  // sup over the grid for each j
    bool tail_flag = false;
};

inline constexpr double kTailTolerance = 1e-6;

/// Grid lower estimate of ||f||_{H(m,r,U)}.
inline h_norm_certificate estimate_h_norm(const analytic_function& f, int m, double r, const domain& dom, int j_max,
                                          int resolution = 41) {
    if (j_max < 0) throw std::invalid_argument("estimate_h_norm: j_max must be non-negative");
    if (r <= 0) throw std::invalid_argument("estimate_h_norm: r must be positive");
    if (domain_dim(dom) != f.nvars) throw std::invalid_argument("estimate_h_norm: domain dimension mismatch");
    h_norm_certificate c;
    c.m = m;
    c.r = r;
    c.dom = dom;
    c.j_max = j_max;
    c.grid_resolution = resolution;
    c.per_j.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
    for (const auto& x : grid_points(dom, resolution)) {
        const auto jet = f.jet(x, j_max);
        if (f.tail_indicator(x, j_max) > kTailTolerance) c.tail_flag = true;
        for (int j = 0; j <= j_max; ++j) {
            const double v = jet_level_l1(jet, j) * std::pow(j + 1.0, m) / std::pow(r, j);
            c.per_j[static_cast<std::size_t>(j)] = std::max(c.per_j[static_cast<std::size_t>(j)], v);
        }
    }
    for (double v : c.per_j) c.constant = std::max(c.constant, v);
    return c;
}

inline h_norm_certificate estimate_h_norm(const series& f, int m, double r, const domain& dom, int j_max, int resolution = 41) {
    return estimate_h_norm(analytic_function::from_series(f), m, r, dom, j_max, resolution);
}

/// Move a certificate to a weaker class; the rule is r_new >= r 2^{m_new - m}.
inline h_norm_certificate embed_certificate(const h_norm_certificate& c, int m_new, double r_new) {
    if (m_new < c.m) throw std::invalid_argument("embed_certificate: m cannot decrease");
    const double need = c.r * std::ldexp(1.0, m_new - c.m);
    if (r_new < need * (1.0 - 1e-12))
        throw std::invalid_argument("embed_certificate: r_new below r*2^(m_new-m)");
    h_norm_certificate out = c;
    out.m = m_new;
    out.r = r_new;
    return out;
}

struct inverse_h_result {
    series inverse;  // series of 1/f at the base point of the input
    h_norm_certificate certificate;
    double bound = 0.0;
    bool bound_holds = false;
};

/// 1/f with the certificate checked against ||f|| / inf|f|^2.
inline inverse_h_result invert_h(const analytic_function& f, const h_norm_certificate& cf, double inf_abs,
                                 std::vector<cplx> base = {}) {
    if (inf_abs <= 0) throw std::invalid_argument("invert_h: inf_abs must be positive");
    for (const auto& x : grid_points(cf.dom, cf.grid_resolution)) {
        const cplx v = f.jet(x, 0).constant_term();
        if (std::abs(v) < inf_abs * (1.0 - 1e-12))
            throw std::domain_error("invert_h: |f| falls below inf_abs on the grid");
    }
    analytic_function g;
    g.nvars = f.nvars;
    g.eval = [f](const std::vector<series>& x) { return reciprocal(f.eval(x)); };
    inverse_h_result out;
    if (base.empty()) base.assign(static_cast<std::size_t>(f.nvars), cplx(0.0));
    out.inverse = g.jet(base, f.source ? std::min(f.source->order(), kMaxOrder) : cf.j_max);
    out.certificate = estimate_h_norm(g, cf.m, cf.r, cf.dom, cf.j_max, cf.grid_resolution);
    out.bound = cf.constant / (inf_abs * inf_abs);
    out.bound_holds = out.certificate.constant <= out.bound * (1.0 + 1e-12);
    return out;
}

inline double cauchy_import_constant(int d) { return std::ldexp(1.0, d); }

/// Certificate in H(-d, d/T, P(0,T)) from a sup bound on P(0,2T).
inline h_norm_certificate cauchy_import(const series& f, double T, double sup_bound, int d, int j_max = 10) {
    if (T <= 0) throw std::invalid_argument("cauchy_import: T must be positive");
    if (d != f.num_vars()) throw std::invalid_argument("cauchy_import: dimension mismatch");
    h_norm_certificate c;
    c.m = -d;
    c.r = d / T;
    c.dom = polydisk_domain{std::vector<cplx>(static_cast<std::size_t>(d), cplx(0.0)), T};
    c.constant = cauchy_import_constant(d) * sup_bound;
    c.j_max = j_max;
    return c;
}

// ---------------------------------------------------------------------------
// Analytic symbols

struct symbol_params {
    double r = 1.0;
    double R = 1.0;
    int m = 0;
};

struct symbol_grid {
    std::optional<domain> dom;  // empty in base-point mode
    int resolution = 1;
    std::vector<std::vector<cplx>> points;
    int nvars = 1;
    int j_max = 0;
};

/// a_k = exp(log_scale[k]) * coeffs[k][p] near grid point p.
struct analytic_symbol {
    std::shared_ptr<const symbol_grid> grid;
    std::vector<std::vector<series>> coeffs;
    std::vector<double> log_scale;
    symbol_params params;
    double certificate = 0.0;

    int K() const { return static_cast<int>(coeffs.size()) - 1; }
    std::size_t num_points() const { return grid->points.size(); }
};

inline std::shared_ptr<const symbol_grid> make_grid(const domain& dom, int resolution, int j_max) {
    auto g = std::make_shared<symbol_grid>();
    g->dom = dom;
    g->resolution = resolution;
    g->points = grid_points(dom, resolution);
    g->nvars = domain_dim(dom);
    g->j_max = j_max;
    return g;
}

inline std::shared_ptr<const symbol_grid> base_point_grid(std::vector<cplx> base, int order) {
    auto g = std::make_shared<symbol_grid>();
    g->nvars = static_cast<int>(base.size());
    g->points = {std::move(base)};
    g->j_max = order;
    return g;
}

double estimate_symbol_norm(const analytic_symbol& a, double r, double R, int m, int j_max, int k_max);

inline analytic_symbol certify(analytic_symbol a) {
    a.certificate = estimate_symbol_norm(a, a.params.r, a.params.R, a.params.m, a.grid->j_max, a.K());
    return a;
}

inline analytic_symbol symbol_from_functions(const std::vector<analytic_function>& fs, std::shared_ptr<const symbol_grid> grid,
                                             symbol_params params) {
    analytic_symbol a;
    a.grid = std::move(grid);
    a.params = params;
    for (const auto& f : fs) {
        std::vector<series> jets;
        for (const auto& x : a.grid->points) jets.push_back(f.jet(x, a.grid->j_max));
        a.coeffs.push_back(std::move(jets));
    }
    a.log_scale.assign(a.coeffs.size(), 0.0);
    return certify(std::move(a));
}

/// Base-point mode: each a_k is a power series around a common base point.
inline analytic_symbol symbol_from_series(const std::vector<series>& ks, symbol_params params) {
    if (ks.empty()) throw std::invalid_argument("symbol_from_series: need at least one coefficient");
    const int n = ks[0].num_vars();
    std::vector<cplx> base = ks[0].base_point();
    if (base.empty()) base.assign(static_cast<std::size_t>(n), cplx(0.0));
    int order = kMaxOrder;
    for (const auto& s : ks) order = std::min(order, s.exact() ? kMaxOrder : s.order());
    int deg = 0;
    for (const auto& s : ks) deg = std::max(deg, s.exact() ? s.degree() : s.order());
    analytic_symbol a;
    a.grid = base_point_grid(base, std::min(order, std::max(deg, 0)));
    a.params = params;
    for (const auto& s : ks) a.coeffs.push_back({s});
    a.log_scale.assign(a.coeffs.size(), 0.0);
    return certify(std::move(a));
}

/// Constant coefficients a_k = exp(log_scale[k]) * values[k].
inline analytic_symbol constant_symbol(const std::vector<cplx>& values, symbol_params params, std::vector<double> log_scale = {},
                                       int nvars = 1) {
    analytic_symbol a;
    a.grid = base_point_grid(std::vector<cplx>(static_cast<std::size_t>(nvars), cplx(0.0)), 0);
    a.params = params;
    for (const auto& v : values) a.coeffs.push_back({series::constant(nvars, kExactOrder, v)});
    a.log_scale = log_scale.empty() ? std::vector<double>(values.size(), 0.0) : std::move(log_scale);
    if (a.log_scale.size() != values.size()) throw std::invalid_argument("constant_symbol: scale count mismatch");
    return certify(std::move(a));
}

/// max over grid, j <= j_max, k <= k_max of ||a_k||_{C^j} (j+k+1)^m / (r^j R^k (j+k)!).
inline double estimate_symbol_norm(const analytic_symbol& a, double r, double R, int m, int j_max, int k_max) {
    if (k_max > a.K()) throw std::invalid_argument("estimate_symbol_norm: k_max exceeds the truncation");
    double best = 0.0;
    for (int k = 0; k <= k_max; ++k)
        for (int j = 0; j <= j_max; ++j) {
            double sup = 0.0;
            for (const auto& jet : a.coeffs[static_cast<std::size_t>(k)]) sup = std::max(sup, jet_level_l1(jet, j));
            if (sup == 0.0) continue;
            const double lg = a.log_scale[static_cast<std::size_t>(k)] + std::log(sup) + std::lgamma(j + 1.0) +
                              m * std::log(j + k + 1.0) - j * std::log(r) - k * std::log(R) - std::lgamma(j + k + 1.0);
            best = std::max(best, std::exp(lg));
        }
    return best;
}

namespace detail {
inline void require_same_grid(const analytic_symbol& a, const analytic_symbol& b) {
    if (a.grid == b.grid) return;
    if (a.grid->points != b.grid->points) throw std::invalid_argument("symbol: domain mismatch");
}
// Coefficients with the scale folded in; refuses magnitudes that would overflow.
inline std::vector<std::vector<series>> materialize(const analytic_symbol& a) {
    auto out = a.coeffs;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double s = a.log_scale[k];
        if (s == 0.0) continue;
        if (s > 600.0) throw std::overflow_error("symbol: coefficient magnitude too large for direct arithmetic");
        for (auto& jet : out[k]) jet = jet * cplx(std::exp(s));
    }
    return out;
}
}  // namespace detail

struct product_report {
    analytic_symbol product;
    double norm_a = 0.0, norm_b = 0.0, norm_ab = 0.0;
    double C0 = calibration::kProductC0;
    bool bound_checked = false;  // only for m >= 4
    bool bound_holds = true;
};

/// (a*b)_k = sum_{i<=k} a_i b_{k-i}, pointwise on the grid.
inline analytic_symbol cauchy_product(const analytic_symbol& a, const analytic_symbol& b) {
    detail::require_same_grid(a, b);
    const auto A = detail::materialize(a), B = detail::materialize(b);
    const int K = std::min(a.K(), b.K());
    analytic_symbol c;
    c.grid = a.grid;
    c.params = a.params;
    for (int k = 0; k <= K; ++k) {
        std::vector<series> row;
        for (std::size_t p = 0; p < a.num_points(); ++p) {
            series acc = A[0][p] * B[static_cast<std::size_t>(k)][p];
            for (int i = 1; i <= k; ++i) acc = acc + A[static_cast<std::size_t>(i)][p] * B[static_cast<std::size_t>(k - i)][p];
            row.push_back(std::move(acc));
        }
        c.coeffs.push_back(std::move(row));
    }
    c.log_scale.assign(c.coeffs.size(), 0.0);
    return certify(std::move(c));
}

inline product_report cauchy_product_checked(const analytic_symbol& a, const analytic_symbol& b) {
    product_report rep;
    rep.product = cauchy_product(a, b);
    const auto& p = a.params;
    const int J = a.grid->j_max, K = rep.product.K();
    rep.norm_a = estimate_symbol_norm(a, p.r, p.R, p.m, J, K);
    rep.norm_b = estimate_symbol_norm(b, p.r, p.R, p.m, J, K);
    rep.norm_ab = estimate_symbol_norm(rep.product, p.r, p.R, p.m, J, K);
    if (p.m >= 4) {
        rep.bound_checked = true;
        rep.bound_holds = rep.norm_ab <= rep.C0 * rep.norm_a * rep.norm_b * (1.0 + 1e-12);
    }
    return rep;
}

/// b with a*b = (1,0,...,0): b_0 = 1/a_0, b_k = -b_0 sum_{i=1}^k a_i b_{k-i}.
inline analytic_symbol star_inverse(const analytic_symbol& a) {
    const auto A = detail::materialize(a);
    analytic_symbol b;
    b.grid = a.grid;
    b.params = a.params;
    std::vector<series> b0;
    for (std::size_t p = 0; p < a.num_points(); ++p) {
        const auto& a0 = A[0][p];
        if (std::abs(a0.constant_term()) < 1e-14) throw std::domain_error("star_inverse: a_0 vanishes on the grid");
        b0.push_back(a0.exact() && a0.degree() > 0 ? reciprocal(a0.truncated(a.grid->j_max)) : reciprocal(a0));
    }
    b.coeffs.push_back(b0);
    for (int k = 1; k <= a.K(); ++k) {
        std::vector<series> row;
        for (std::size_t p = 0; p < a.num_points(); ++p) {
            series acc = A[1][p] * b.coeffs[static_cast<std::size_t>(k - 1)][p];
            for (int i = 2; i <= k; ++i) acc = acc + A[static_cast<std::size_t>(i)][p] * b.coeffs[static_cast<std::size_t>(k - i)][p];
            row.push_back(-(b0[p] * acc));
        }
        b.coeffs.push_back(std::move(row));
    }
    b.log_scale.assign(b.coeffs.size(), 0.0);
    return certify(std::move(b));
}

struct inverse_report {
    analytic_symbol inverse;
    double norm_inverse = 0.0;  // at the target class
    double norm_a = 0.0;        // at the source class
    double min_abs_a0 = 0.0;
    double bound = 0.0;  // 2 min|a_0|^{-4} ||a||^3
    bool bound_holds = false;
};

/// Inverse certificate in S^{r,R}_m against the source-class norm of a.
inline inverse_report star_inverse_checked(const analytic_symbol& a, symbol_params target) {
    inverse_report rep;
    rep.inverse = star_inverse(a);
    const int J = a.grid->j_max, K = a.K();
    rep.norm_a = estimate_symbol_norm(a, a.params.r, a.params.R, a.params.m, J, K);
    rep.norm_inverse = estimate_symbol_norm(rep.inverse, target.r, target.R, target.m, J, K);
    double mn = std::numeric_limits<double>::infinity();
    const auto A = detail::materialize(a);
    for (const auto& jet : A[0]) mn = std::min(mn, std::abs(jet.constant_term()));
    rep.min_abs_a0 = mn;
    rep.bound = 2.0 * std::pow(mn, -4.0) * std::pow(rep.norm_a, 3.0);
    rep.bound_holds = rep.norm_inverse <= rep.bound;
    return rep;
}

struct summation_result {
    int N = 1;
    int K_used = 0;    // floor(e N / (3R))
    int K_summed = 0;  // min(K_used, K): coefficients past the truncation count as zero
    std::vector<series> values;
    double tail_estimate = 0.0;
    double log_tail = -std::numeric_limits<double>::infinity();
    double max_term_ratio = 0.0;
    double uniform_bound = 0.0;  // ||a|| 3/(3-e) with the j = 0 part of the norm
    bool uniform_bound_holds = true;
};

inline int summation_cutoff(int N, double R) { return static_cast<int>(std::floor(std::numbers::e * N / (3.0 * R))); }

/// f(N) = sum_{k<=K_used} N^{-k} a_k with tail from ceil(c1 N) to K_used.
inline summation_result summation(const analytic_symbol& a, int N, std::optional<double> c1 = std::nullopt) {
    if (N < 1) throw std::invalid_argument("summation: N must be positive");
    summation_result s;
    s.N = N;
    s.K_used = summation_cutoff(N, a.params.R);
    s.K_summed = std::min(s.K_used, a.K());
    const double logN = std::log(static_cast<double>(N));
    std::vector<double> log_t(static_cast<std::size_t>(s.K_summed) + 1, -std::numeric_limits<double>::infinity());
    for (int k = 0; k <= s.K_summed; ++k) {
        double sup = 0.0;
        for (const auto& jet : a.coeffs[static_cast<std::size_t>(k)]) sup = std::max(sup, std::abs(jet.constant_term()));
        if (sup > 0) log_t[static_cast<std::size_t>(k)] = a.log_scale[static_cast<std::size_t>(k)] + std::log(sup) - k * logN;
    }
    s.values.resize(a.num_points());
    for (std::size_t p = 0; p < a.num_points(); ++p) {
        series acc = a.coeffs[0][p] * cplx(std::exp(a.log_scale[0]));
        for (int k = 1; k <= s.K_summed; ++k) {
            const double w = std::exp(a.log_scale[static_cast<std::size_t>(k)] - k * logN);
            if (w == 0.0) continue;
            acc = acc + a.coeffs[static_cast<std::size_t>(k)][p] * cplx(w);
        }
        s.values[p] = std::move(acc);
    }
    for (int k = 1; k <= s.K_summed; ++k) {
        const double a1 = log_t[static_cast<std::size_t>(k)], a0 = log_t[static_cast<std::size_t>(k - 1)];
        if (std::isinf(a1)) continue;
        if (std::isinf(a0)) {
            s.max_term_ratio = std::numeric_limits<double>::infinity();
            continue;
        }
        s.max_term_ratio = std::max(s.max_term_ratio, std::exp(a1 - a0));
    }
    if (c1) {
        const int k0 = static_cast<int>(std::ceil(*c1 * N));
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = k0; k <= s.K_summed; ++k) mx = std::max(mx, log_t[static_cast<std::size_t>(k)]);
        if (!std::isinf(mx)) {
            double acc = 0.0;
            for (int k = k0; k <= s.K_summed; ++k) acc += std::exp(log_t[static_cast<std::size_t>(k)] - mx);
            s.log_tail = mx + std::log(acc);
            s.tail_estimate = std::exp(s.log_tail);
        }
    }
    const double norm0 = estimate_symbol_norm(a, a.params.r, a.params.R, a.params.m, 0, a.K());
    s.uniform_bound = norm0 * 3.0 / (3.0 - std::numbers::e);
    for (const auto& v : s.values)
        if (std::abs(v.constant_term()) > s.uniform_bound * (1.0 + 1e-12)) s.uniform_bound_holds = false;
    return s;
}

/// Compose every coefficient with kappa (base-point mode only).
inline analytic_symbol symbol_pullback(const analytic_symbol& a, const std::vector<series>& kappa) {
    if (a.num_points() != 1 || a.grid->dom) throw std::invalid_argument("symbol_pullback: requires base-point mode");
    analytic_symbol b = a;
    int order = kMaxOrder;
    for (const auto& s : kappa) order = std::min(order, s.exact() ? kMaxOrder : s.order());
    for (auto& row : b.coeffs) {
        auto& s = row[0];
        if (s.degree() <= 0) continue;
        s = substitute(s.exact() ? s.truncated(order) : s, kappa);
    }
    int deg = 0;
    for (const auto& row : b.coeffs) deg = std::max(deg, row[0].exact() ? row[0].degree() : row[0].order());
    b.grid = base_point_grid(a.grid->points[0], std::min(order, deg));
    return certify(std::move(b));
}

}  // namespace tforge
