#include <catch_amalgamated.hpp>

#include <random>

#include "toeplitz_forge/calibration.hpp"
#include "toeplitz_forge/covariant.hpp"

using namespace tforge;

namespace {
const auto S = model_geometry::sphere();
const auto B = model_geometry::bargmann();

// max |coefficient| of (series - expected constant)
double off(const series& s, cplx c) {
    return weighted_norm(s - series::constant(2, kExactOrder, c), kSymbolRadius);
}

symbol_fn x3_tilde() {
    return [](const series& x, const series& z) {
        const auto one = series::constant(2, x.order(), 1.0);
        return (one - x * z) * reciprocal(one + x * z);
    };
}

// random polynomial of bidegree <= d in (x, zbar), small coefficients
symbol_fn random_poly(std::mt19937& rng, int d, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::tuple<int, int, cplx>> terms;
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d; ++j) terms.emplace_back(i, j, scale * cplx(u(rng), u(rng)) / double(1 + i + j));
    std::get<2>(terms[0]) += 1.0;
    return [terms](const series& x, const series& z) {
        series acc = series::constant(2, x.order(), 0.0);
        for (const auto& [i, j, c] : terms) {
            series m = series::constant(2, x.order(), c);
            for (int a = 0; a < i; ++a) m = m * x;
            for (int b = 0; b < j; ++b) m = m * z;
            acc = acc + m;
        }
        return acc;
    };
}

covariant_symbol random_symbol(const model_geometry& g, std::mt19937& rng, int K, int deg = 2) {
    std::vector<symbol_fn> fk;
    for (int k = 0; k <= K; ++k) fk.push_back(random_poly(rng, deg, k == 0 ? 0.3 : 0.2));
    return covariant_from_functions(g, fk);
}
}  // namespace

TEST_CASE("sharp_product Bargmann examples", "[covariant]") {
    const auto x = [](const series& a, const series&) { return a; };
    const auto zb = [](const series&, const series& b) { return b; };
    const auto f = covariant_from_functions(B, {zb, zb, zb, zb});
    const auto g = covariant_from_functions(B, {x, x, x, x});
    // use only the leading coefficients: zero the rest
    auto f0 = f, g0 = g;
    for (int k = 1; k <= 3; ++k) {
        f0.at[0][k] = series(2, kExactOrder);
        g0.at[0][k] = series(2, kExactOrder);
    }
    const auto fg = sharp_product(f0, g0, 3);
    const auto xz = fg.coeff(0, 0);
    CHECK(std::abs(xz.coeff(multi_index{1, 1}) - cplx(1.0)) < 1e-14);
    CHECK(std::abs(xz.constant_term()) < 1e-14);
    CHECK(off(fg.coeff(0, 1), 1.0) < 1e-14);
    CHECK(off(fg.coeff(0, 2), 0.0) < 1e-14);
    CHECK(off(fg.coeff(0, 3), 0.0) < 1e-14);

    // x # zbar: no contractible derivatives
    const auto gx = sharp_product(g0, f0, 3);
    CHECK(std::abs(gx.coeff(0, 0).coeff(multi_index{1, 1}) - cplx(1.0)) < 1e-14);
    for (int k = 1; k <= 3; ++k) CHECK(off(gx.coeff(0, k), 0.0) < 1e-14);

    const auto one = sharp_product(unit_symbol(B, 3), unit_symbol(B, 3), 3);
    CHECK(off(one.coeff(0, 0), 1.0) < 1e-14);
    for (int k = 1; k <= 3; ++k) CHECK(off(one.coeff(0, k), 0.0) < 1e-14);
}

TEST_CASE("Bargmann sharp equals the closed Wick form", "[covariant][property]") {
    std::mt19937 rng(5);
    const int K = 3;
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = random_symbol(B, rng, K), g = random_symbol(B, rng, K);
        const auto fg = sharp_product(f, g, K);
        for (int k = 0; k <= K; ++k) {
            series expect(2, kExactOrder);
            for (int n = 0; n <= k; ++n)
                for (int l = 0; l + n <= k; ++l) {
                    const auto a = d_dvar(f.coeff(0, l), 1, n), b = d_dvar(g.coeff(0, k - n - l), 0, n);
                    expect = expect + a * b * (1.0 / std::tgamma(n + 1.0));
                }
            CHECK(weighted_norm(fg.coeff(0, k) - expect, 1.0) < 1e-12);
        }
    }
}

TEST_CASE("sphere unit products and Bergman symbol", "[covariant]") {
    const int K = 3;
    // T(1) = N/(N+1) S_N, so 1 # 1 = N/(N+1)
    const auto one = sharp_product(unit_symbol(S, K), unit_symbol(S, K), K);
    for (int p = 0; p < one.num_points(); ++p)
        for (int k = 0; k <= K; ++k) CHECK(off(one.coeff(p, k), k % 2 ? -1.0 : 1.0) < 1e-10);

    const auto a = bergman_symbol(S, K);
    for (int p = 0; p < a.num_points(); ++p) {
        CHECK(off(a.coeff(p, 0), 1.0) < 1e-11);
        CHECK(off(a.coeff(p, 1), 1.0) < 1e-11);
        for (int k = 2; k <= K; ++k) CHECK(off(a.coeff(p, k), 0.0) < 1e-10);
    }
    // diagonal value at N = 3: N (a_0 + a_1/N) = 4 = exact kernel
    const double N = 3.0;
    cplx v = 0.0;
    for (int k = 0; k <= K; ++k) v += a.coeff(0, k).constant_term() * std::pow(N, 1 - k);
    CHECK(std::abs(v - S.exact_bergman(3, 0.0, 0.0).value) < 1e-10);

    const auto ab = bergman_symbol(B, K);
    CHECK(off(ab.coeff(0, 0), 1.0) < 1e-14);
    for (int k = 1; k <= K; ++k) CHECK(off(ab.coeff(0, k), 0.0) < 1e-14);
}

TEST_CASE("Bergman symbol uniqueness", "[covariant]") {
    std::mt19937 rng(8);
    for (const auto* g : {&S, &B}) {
        const auto f = random_symbol(*g, rng, 3);
        CHECK(bergman_uniqueness_gap(f, 3) < 1e-9);
    }
}

TEST_CASE("solve_sharp examples", "[covariant]") {
    const auto two = covariant_constant(B, {2.0, 0.0, 0.0});
    const auto g = solve_sharp(two, two, 2);
    CHECK(off(g.coeff(0, 0), 1.0) < 1e-14);
    CHECK(off(g.coeff(0, 1), 0.0) < 1e-14);

    const auto half = sharp_inverse(two, 2);
    CHECK(off(half.coeff(0, 0), 0.5) < 1e-14);
    CHECK(off(half.coeff(0, 2), 0.0) < 1e-14);

    std::mt19937 rng(21);
    for (const auto* geo : {&S, &B}) {
        const int K = 3;
        const auto f = random_symbol(*geo, rng, K), g0 = random_symbol(*geo, rng, K);
        const auto h = sharp_product(f, g0, K);
        const auto g1 = solve_sharp(f, h, K);
        // recovered coefficients agree at precision limited by the order lost to derivatives
        CHECK(symbol_distance(g1, g0, K) < 1e-10);
        const auto res = sharp_product(f, g1, K);
        CHECK(symbol_distance(res, h, K) < 1e-9);
    }
}

TEST_CASE("sharp_inverse of the Bergman symbol and perturbations", "[covariant]") {
    const int K = 3;
    std::mt19937 rng(2);
    for (const auto* geo : {&S, &B}) {
        const auto a = bergman_symbol(*geo, K);
        CHECK(symbol_distance(sharp_inverse(a, K), a, K) < 1e-10);
        CHECK(symbol_distance(sharp_product(a, a, K), a, K) < 1e-10);

        // f = a + eps N^{-1} b: f^{#-1} = a - eps N^{-1} b + O(eps^2)
        const auto b = random_poly(rng, 2, 0.5);
        const auto zero = [](const series& x, const series&) { return series::constant(2, x.order(), 0.0); };
        const auto pert = covariant_from_functions(*geo, {zero, b, zero, zero}, a.base);
        std::vector<double> errs;
        for (double eps : {1e-2, 1e-3}) {
            auto f = a, lin = a;
            for (int p = 0; p < a.num_points(); ++p)
                for (int k = 0; k <= K; ++k) {
                    f.at[p][k] = a.coeff(p, k) + pert.coeff(p, k) * eps;
                    lin.at[p][k] = a.coeff(p, k) - pert.coeff(p, k) * eps;
                }
            errs.push_back(symbol_distance(sharp_inverse(f, K), lin, K));
        }
        // quadratic in eps: one decade in eps gives about two decades in error
        CHECK(errs[0] / errs[1] > 50.0);
        CHECK(errs[0] < 1e-2);
    }
}

TEST_CASE("normalized inverse norm growth report", "[covariant]") {
    std::mt19937 rng(4);
    const auto f = random_symbol(S, rng, 3);
    const auto finv = sharp_inverse(f, 3);
    const auto rep = inverse_norm_growth(f, finv, {{1.0, 4.0, 4}, {2.0, 16.0, 4}, {1.0, 8.0, 6}}, 6);
    REQUIRE(rep.size() == 3);
    for (const auto& r : rep) {
        CHECK(std::isfinite(r.ratio));
        CHECK(r.norm_f > 0.0);
    }

    // normalized wrapper with f = g = 1 reproduces the unit
    const auto n1 = normalized_sharp(unit_symbol(S, 3), unit_symbol(S, 3), 3);
    const auto a = bergman_symbol(S, 3);
    const auto p = pointwise_product(n1, a, 3);
    CHECK(symbol_distance(p, a, 3) < 1e-10);
}

TEST_CASE("contravariant_to_covariant examples", "[covariant]") {
    const int K = 3;
    const auto one_fn = [](const series& x, const series&) { return series::constant(2, x.order(), 1.0); };
    for (const auto* geo : {&S, &B}) {
        const auto g = contravariant_to_covariant(*geo, one_fn, K);
        CHECK(symbol_distance(g, bergman_symbol(*geo, K), K) < 1e-10);
    }

    // T_N(x_3) = (N+1)/(N+2) T^cov(x3~): g_0 = x3~, g_k = (-1)^k 2^{k-1} x3~
    const auto t = contravariant_to_covariant(S, x3_tilde(), K, {}, 16);
    const auto ref = covariant_from_functions(S, {x3_tilde()}, {}, 16);
    for (int p = 0; p < t.num_points(); ++p) {
        CHECK(weighted_norm(t.coeff(p, 0) - ref.coeff(p, 0), kSymbolRadius) < 1e-10);
        for (int k = 1; k <= K; ++k) {
            const double c = (k % 2 ? -1.0 : 1.0) * std::pow(2.0, k - 1);
            CHECK(weighted_norm(t.coeff(p, k) - ref.coeff(p, 0) * c, kSymbolRadius) < 1e-9);
        }
    }
}

TEST_CASE("Bargmann anti-Wick shift", "[covariant]") {
    const auto absq = [](const series& x, const series& z) { return x * z; };
    const auto g = contravariant_to_covariant(B, absq, 3);
    CHECK(std::abs(g.coeff(0, 0).coeff(multi_index{1, 1}) - cplx(1.0)) < 1e-13);
    CHECK(max_abs(g.coeff(0, 0)) < 1.0 + 1e-13);
    CHECK(off(g.coeff(0, 1), 1.0) < 1e-13);
    CHECK(off(g.coeff(0, 2), 0.0) < 1e-13);
    CHECK(off(g.coeff(0, 3), 0.0) < 1e-13);
}

TEST_CASE("wick_degree_check", "[covariant][property]") {
    std::mt19937 rng(17);
    for (const auto* geo : {&S, &B}) {
        const auto f = random_symbol(*geo, rng, 3, 3), g = random_symbol(*geo, rng, 3, 3);
        for (int k = 0; k <= 3; ++k)
            for (int p : {0, 3}) {
                if (p >= f.num_points()) continue;
                const auto r = wick_degree_check(f, g, k, p);
                CHECK(r.passed());
                CHECK(r.f_change < 1e-8);
                CHECK(r.g_change < 1e-8);
                // at degree k the perturbation is seen
                if (k > 0) {
                    CHECK(r.f_change_lower > 1e-6);
                    CHECK(r.g_change_lower > 1e-6);
                }
            }
    }
}

TEST_CASE("associativity and unit", "[covariant][property]") {
    std::mt19937 rng(31);
    for (const auto* geo : {&S, &B}) {
        const int K = 3;
        const auto f = random_symbol(*geo, rng, K), g = random_symbol(*geo, rng, K), h = random_symbol(*geo, rng, K);
        const auto lhs = sharp_product(sharp_product(f, g, K), h, K);
        const auto rhs = sharp_product(f, sharp_product(g, h, K), K);
        CHECK(symbol_distance(lhs, rhs, K) < 1e-8);
        const auto a = bergman_symbol(*geo, K);
        CHECK(symbol_distance(sharp_product(a, f, K), f, K) < 1e-9);
        CHECK(symbol_distance(sharp_product(f, a, K), f, K) < 1e-9);
    }
}

TEST_CASE("base-point restrictions agree on overlaps", "[covariant]") {
    std::mt19937 rng(12);
    const auto f = random_symbol(S, rng, 2), g = random_symbol(S, rng, 2);
    CHECK(overlap_discrepancy(f) < 1e-12);
    const auto fg = sharp_product(f, g, 2);
    CHECK(overlap_discrepancy(fg) < 1e-9);
    CHECK(overlap_discrepancy(contravariant_to_covariant(S, x3_tilde(), 2)) < 1e-9);
}

TEST_CASE("sharp_product errors", "[covariant]") {
    const auto a = unit_symbol(S, 2), b = unit_symbol(B, 2);
    CHECK_THROWS_AS(sharp_product(a, b, 2), std::invalid_argument);
    CHECK_THROWS_AS(sharp_product(a, a, 3), std::invalid_argument);
    CHECK_THROWS_AS(solve_sharp(covariant_constant(S, {0.0, 1.0}), a, 1), std::domain_error);
}

TEST_CASE("two-class stability on fresh symbols", "[covariant][property]") {
    const std::vector<symbol_params> classes{{0.5, 1.0, 4}, {1.0, 8.0, 4}, {1.0, 16.0, 6}, {2.0, 64.0, 4}};
    double worst = 0.0;
    for (const auto* geo : {&S, &B})
        for (unsigned s = 0; s < 3; ++s) {
            const auto f = random_polynomial_symbol(*geo, 7 + 2 * s, 2), g = random_polynomial_symbol(*geo, 8 + 2 * s, 2);
            const auto fg = sharp_product(f, g, 2);
            for (const auto& c : classes) {
                const auto r = sharp_class_stability(f, g, fg, c, 8);
                CHECK(r.norm_fg <= calibration::kSharpClassC * r.norm_f * r.norm_g);
                worst = std::max(worst, r.ratio);
            }
        }
    CHECK(worst > 0.0);
}

TEST_CASE("kernel coefficients agree with the Morse-chart expansion", "[covariant][property]") {
    std::mt19937 rng(40);
    const int K = 3;
    for (const auto* geo : {&S, &B}) {
        const auto f = random_symbol(*geo, rng, 0), g = random_symbol(*geo, rng, 0);
        auto fK = covariant_constant(*geo, std::vector<cplx>(K + 1, 0.0), f.base), gK = fK;
        for (int p = 0; p < f.num_points(); ++p) {
            fK.at[p][0] = f.coeff(p, 0);
            gK.at[p][0] = g.coeff(p, 0);
        }
        const auto fg = sharp_product(fK, gK, K);
        const int p = f.num_points() - 1;
        const cplx x0 = f.base[p], zb0 = std::conj(x0);
        const int ord = wick_required_phase_order(K);
        const auto phase = phase_data<cplx>::from(geo->phase_phi1_series(x0, zb0, ord));
        // amplitude f(x0, zb0 + vbar) g(x0 + v, zb0) rho(x0 + v, zb0 + vbar)
        const auto V = series::variable(2, 0, ord), Vb = series::variable(2, 1, ord), zero = series::constant(2, ord, 0.0);
        const auto one = series::constant(2, ord, 1.0);
        const auto fa = compose_any(f.coeff(p, 0), std::vector<series>{zero, Vb}, one);
        const auto ga = compose_any(g.coeff(p, 0), std::vector<series>{V, zero}, one);
        const auto Y = series::variable(2, 0, ord, x0), W = series::variable(2, 1, ord, zb0);
        const auto amp = (fa * ga * geo->metric_density_s(Y, W, one)).truncated(ord);
        const auto morse = morse_expand(phase, amp, K);
        const cplx inv_h = -1.0 / phase.hessian[0][1];
        for (int k = 0; k <= K; ++k) CHECK(std::abs(fg.coeff(p, k).constant_term() - inv_h * morse.coeffs[k]) < 1e-11);
    }
}
