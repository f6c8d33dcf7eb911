#include <catch_amalgamated.hpp>

#include <random>

#include "toeplitz_forge/function_spaces.hpp"

using namespace tforge;
using Catch::Approx;

namespace {

box_domain interval(double a, double b) { return box_domain{{{a, b}}}; }

series geometric(int order) {
    series s(1, order);
    for (int k = 0; k <= order; ++k) s.set(multi_index{k}, 1.0);
    return s;
}

analytic_function inv_one_minus() {
    return analytic_function::from_expr(1, [](const std::vector<series>& x) {
        return reciprocal(series::constant(1, x[0].order(), 1.0) - x[0]);
    });
}

}  // namespace

TEST_CASE("estimate_h_norm examples", "[function_spaces]") {
    auto one = analytic_function::from_expr(1, [](const std::vector<series>& x) { return series::constant(1, x[0].order(), 1.0); });
    CHECK(estimate_h_norm(one, 3, 0.5, interval(-1, 1), 6).constant == Approx(1.0).epsilon(1e-14));

    // sup_x j! 2^{j+1} / (j! 2^j) = 2, attained at x = 1/2.
    auto c = estimate_h_norm(inv_one_minus(), 0, 2.0, interval(-0.5, 0.5), 12);
    CHECK(c.constant == Approx(2.0).epsilon(1e-12));
    for (double v : c.per_j) CHECK(v == Approx(2.0).epsilon(1e-12));

    auto e = analytic_function::from_expr(1, [](const std::vector<series>& x) { return exp(x[0]); });
    CHECK(estimate_h_norm(e, 0, 1.0, interval(-1, 1), 10).constant == Approx(std::numbers::e).epsilon(1e-13));
}

TEST_CASE("series input flags an unreliable radius", "[function_spaces]") {
    auto near = estimate_h_norm(geometric(20), 0, 2.0, interval(-0.1, 0.1), 4);
    CHECK_FALSE(near.tail_flag);
    auto far = estimate_h_norm(geometric(20), 0, 2.0, interval(-0.5, 0.9), 4);
    CHECK(far.tail_flag);
}

TEST_CASE("embed_certificate rule", "[function_spaces]") {
    auto c = estimate_h_norm(inv_one_minus(), 0, 2.0, interval(-0.5, 0.5), 8);
    auto e = embed_certificate(c, 2, 8.0);
    CHECK(e.m == 2);
    CHECK(e.r == 8.0);
    CHECK(e.constant == c.constant);
    auto id = embed_certificate(c, 0, 2.0);
    CHECK(id.constant == c.constant);
    c.m = 1;
    c.r = 1.0;
    CHECK(embed_certificate(c, 3, 4.0).r == 4.0);
    CHECK_THROWS_AS(embed_certificate(c, 3, 3.9), std::invalid_argument);
    CHECK_THROWS_AS(embed_certificate(c, 0, 4.0), std::invalid_argument);
}

TEST_CASE("embedding is monotone on recomputed norms", "[function_spaces][property]") {
    auto f = inv_one_minus();
    for (int m = 0; m <= 3; ++m) {
        auto c = estimate_h_norm(f, m, 3.0, interval(-0.5, 0.5), 14);
        auto c2 = estimate_h_norm(f, m + 2, 12.0, interval(-0.5, 0.5), 14);
        CHECK(c2.constant <= c.constant * (1 + 1e-12));
    }
}

TEST_CASE("invert_h examples", "[function_spaces]") {
    auto two = analytic_function::from_expr(1, [](const std::vector<series>& x) { return series::constant(1, x[0].order(), 2.0); });
    auto c2 = estimate_h_norm(two, 2, 1.0, interval(-0.5, 0.5), 6);
    auto r2 = invert_h(two, c2, 2.0);
    CHECK(r2.certificate.constant == Approx(0.5));
    CHECK(r2.bound == Approx(0.5));
    CHECK(r2.bound_holds);
    CHECK(r2.inverse.constant_term() == cplx(0.5));

    auto f = analytic_function::from_expr(1, [](const std::vector<series>& x) { return series::constant(1, x[0].order(), 2.0) + x[0]; });
    auto cf = estimate_h_norm(f, 2, 2.0, interval(-0.5, 0.5), 12);
    auto rf = invert_h(f, cf, 1.5);
    CHECK(rf.bound == Approx(cf.constant / 2.25));
    CHECK(rf.bound_holds);
    // At r = 1 the inverse grows faster than the bound: sup (2/3)^{j+1}(j+1)^2 = 3.29 at j = 4.
    auto cf1 = estimate_h_norm(f, 2, 1.0, interval(-0.5, 0.5), 12);
    auto rf1 = invert_h(f, cf1, 1.5);
    CHECK(rf1.certificate.constant == Approx(std::pow(2.0 / 3.0, 5) * 25).epsilon(1e-12));
    CHECK_FALSE(rf1.bound_holds);
    // inverse series coefficients (-1)^k / 2^{k+1}
    for (int k = 0; k <= 6; ++k)
        CHECK(std::abs(rf.inverse.coeff(multi_index{k}) - std::pow(-0.5, k) * 0.5) < 1e-15);

    auto g = analytic_function::from_expr(1, [](const std::vector<series>& x) {
        return series::constant(1, x[0].order(), 1.0) + x[0] * x[0] * cplx(0.25);
    });
    auto cg = estimate_h_norm(g, 2, 1.0, interval(-0.5, 0.5), 12);
    auto rg = invert_h(g, cg, 1.0);
    CHECK(rg.bound_holds);

    CHECK_THROWS_AS(invert_h(f, cf, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(invert_h(f, cf, 1.6), std::domain_error);
}

TEST_CASE("cauchy_import examples", "[function_spaces]") {
    auto c = cauchy_import(geometric(24), 0.25, 2.0, 1);
    CHECK(c.m == -1);
    CHECK(c.r == Approx(4.0));
    CHECK(c.constant == Approx(4.0));
    auto check = estimate_h_norm(inv_one_minus(), c.m, c.r, c.dom, 10, 9);
    CHECK(check.constant <= c.constant);

    series z5(1, kExactOrder);
    z5.set(multi_index{5}, 1.0);
    auto c5 = cauchy_import(z5, 0.5, 1.0, 1);
    auto check5 = estimate_h_norm(z5, c5.m, c5.r, c5.dom, 10, 9);
    CHECK(check5.constant <= c5.constant);
    CHECK(check5.constant > 0.0);

    series k(2, kExactOrder);
    k.set(multi_index{0, 0}, cplx(3.0, 4.0));
    auto ck = cauchy_import(k, 1.0, 5.0, 2);
    CHECK(ck.constant <= cauchy_import_constant(2) * 5.0);

    CHECK_THROWS_AS(cauchy_import(z5, 0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("cauchy_import holds on random holomorphic polynomials", "[function_spaces][property]") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double T = 0.2 + 0.1 * trial;
        series p(1, kExactOrder);
        for (int j = 0; j <= 8; ++j) p.set(multi_index{j}, cplx(u(rng), u(rng)));
        // sup on P(0, 2T) by sampling the boundary (maximum principle), padded by 1%.
        double sup = 0.0;
        for (int i = 0; i < 720; ++i) sup = std::max(sup, std::abs(evaluate(p, std::vector<cplx>{std::polar(2 * T, i * std::numbers::pi / 360)})));
        auto c = cauchy_import(p, T, sup * 1.01, 1);
        CHECK(estimate_h_norm(p, c.m, c.r, c.dom, 10, 9).constant <= c.constant);
    }
}

TEST_CASE("estimate_symbol_norm examples", "[function_spaces]") {
    auto unit = constant_symbol({1.0, 0.0, 0.0, 0.0}, {2.0, 3.0, 1});
    CHECK(estimate_symbol_norm(unit, 2.0, 3.0, 1, 0, 3) == Approx(1.0));
    CHECK(estimate_symbol_norm(unit, 0.5, 0.7, 5, 0, 3) == Approx(1.0));

    // a_k = R^k k! as scaled constants, far past the range of doubles.
    std::vector<cplx> ones(201, 1.0);
    std::vector<double> ls;
    for (int k = 0; k <= 200; ++k) ls.push_back(k * std::log(1.5) + std::lgamma(k + 1.0));
    auto sat = constant_symbol(ones, {1.0, 1.5, 0}, ls);
    CHECK(estimate_symbol_norm(sat, 1.0, 1.5, 0, 0, 200) == Approx(1.0).epsilon(1e-10));
    CHECK(sat.certificate == Approx(1.0).epsilon(1e-10));

    // a_k(x) = 1/(1-x)^{k+1} on [-1/4, 1/4]
    std::vector<analytic_function> fs;
    for (int k = 0; k <= 6; ++k)
        fs.push_back(analytic_function::from_expr(1, [k](const std::vector<series>& x) {
            return pow(series::constant(1, x[0].order(), 1.0) - x[0], -(k + 1.0));
        }));
    auto grid = make_grid(interval(-0.25, 0.25), 21, 10);
    auto a = symbol_from_functions(fs, grid, {2.0, 1.0, 0});
    CHECK(std::isfinite(a.certificate));
    CHECK(a.certificate > 1.0);
    CHECK(a.certificate < 10.0);
    CHECK_THROWS_AS(estimate_symbol_norm(a, 2.0, 1.0, 0, 10, 7), std::invalid_argument);
}

TEST_CASE("cauchy_product examples", "[function_spaces]") {
    auto a = constant_symbol({1.0, 1.0, 1.0, 1.0, 1.0}, {1, 1, 0});
    auto b = constant_symbol({1.0, -1.0, 0.0, 0.0, 0.0}, {1, 1, 0});
    b.grid = a.grid;
    auto c = cauchy_product(a, b);
    CHECK(c.K() == 4);
    CHECK(c.coeffs[0][0].constant_term() == cplx(1.0));
    for (int k = 1; k <= 4; ++k) CHECK(c.coeffs[static_cast<std::size_t>(k)][0].constant_term() == cplx(0.0));

    auto grid = make_grid(interval(-0.5, 0.5), 11, 6);
    std::vector<analytic_function> fs;
    for (int k = 0; k <= 4; ++k)
        fs.push_back(analytic_function::from_expr(1, [k](const std::vector<series>& x) { return exp(x[0] * cplx(0.3 * k)); }));
    auto f = symbol_from_functions(fs, grid, {2, 2, 4});
    std::vector<analytic_function> us(5, analytic_function::from_expr(1, [](const std::vector<series>& x) {
        return series::constant(1, x[0].order(), 0.0);
    }));
    us[0] = analytic_function::from_expr(1, [](const std::vector<series>& x) { return series::constant(1, x[0].order(), 1.0); });
    auto unit = symbol_from_functions(us, grid, {2, 2, 4});
    auto fu = cauchy_product(unit, f);
    for (int k = 0; k <= 4; ++k)
        for (std::size_t p = 0; p < grid->points.size(); ++p)
            CHECK(max_abs(fu.coeffs[static_cast<std::size_t>(k)][p] - f.coeffs[static_cast<std::size_t>(k)][p]) < 1e-15);

    auto other = make_grid(interval(-0.4, 0.5), 11, 6);
    auto g = symbol_from_functions(fs, other, {2, 2, 4});
    CHECK_THROWS_AS(cauchy_product(f, g), std::invalid_argument);
}

TEST_CASE("algebra bound with the calibrated constant", "[function_spaces][property]") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto grid = make_grid(interval(-0.5, 0.5), 11, 8);
    auto random_symbol = [&](int K) {
        std::vector<analytic_function> fs;
        for (int k = 0; k <= K; ++k) {
            const cplx c0(u(rng), u(rng)), c1(u(rng), u(rng)), c2(u(rng), u(rng));
            const double w = std::tgamma(k + 1.0);
            fs.push_back(analytic_function::from_expr(1, [=](const std::vector<series>& x) {
                return (series::constant(1, x[0].order(), c0) + x[0] * c1 + x[0] * x[0] * c2) * cplx(w);
            }));
        }
        return symbol_from_functions(fs, grid, {1.0, 1.0, 4});
    };
    for (int trial = 0; trial < 20; ++trial) {
        auto rep = cauchy_product_checked(random_symbol(8), random_symbol(8));
        CHECK(rep.bound_checked);
        CHECK(rep.bound_holds);
        CHECK(rep.norm_ab <= rep.C0 * rep.norm_a * rep.norm_b);
    }
}

TEST_CASE("star_inverse examples", "[function_spaces]") {
    auto a = constant_symbol({2.0, 0.0, 0.0}, {1, 1, 0});
    auto b = star_inverse(a);
    CHECK(b.coeffs[0][0].constant_term() == cplx(0.5));
    CHECK(b.coeffs[1][0].constant_term() == cplx(0.0));
    CHECK(b.coeffs[2][0].constant_term() == cplx(0.0));

    const cplx c(0.3, -0.2);
    auto g = star_inverse(constant_symbol({1.0, c, 0.0, 0.0, 0.0, 0.0}, {1, 1, 0}));
    for (int k = 0; k <= 5; ++k)
        CHECK(std::abs(g.coeffs[static_cast<std::size_t>(k)][0].constant_term() - std::pow(-c, k)) < 1e-15);

    auto berg = star_inverse(constant_symbol({1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0}, {1, 1, 0}));
    for (int k = 0; k <= 6; ++k) CHECK(berg.coeffs[static_cast<std::size_t>(k)][0].constant_term() == cplx(k % 2 ? -1.0 : 1.0));

    CHECK_THROWS_AS(star_inverse(constant_symbol({0.0, 1.0}, {1, 1, 0})), std::domain_error);
}

TEST_CASE("star_inverse residual and bound on random symbols", "[function_spaces][property]") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto grid = make_grid(interval(-0.5, 0.5), 11, 6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<analytic_function> fs;
        for (int k = 0; k <= 12; ++k) {
            const cplx c0 = k == 0 ? cplx(2.0 + u(rng), 0.3 * u(rng)) : cplx(u(rng), u(rng));
            const cplx c1(0.3 * u(rng), 0.3 * u(rng)), c2(0.3 * u(rng), 0.3 * u(rng));
            fs.push_back(analytic_function::from_expr(1, [=](const std::vector<series>& x) {
                return series::constant(1, x[0].order(), c0) + x[0] * c1 + x[0] * x[0] * c2;
            }));
        }
        auto a = symbol_from_functions(fs, grid, {1.0, 1.0, 2});
        auto rep = star_inverse_checked(a, {4.0, 4.0, 4});
        auto unit = cauchy_product(a, rep.inverse);
        double res = max_abs(unit.coeffs[0][0] - series::constant(1, 6, 1.0));
        for (int k = 1; k <= 12; ++k)
            for (const auto& jet : unit.coeffs[static_cast<std::size_t>(k)]) res = std::max(res, max_abs(jet));
        CHECK(res < 1e-12);
        CHECK(rep.bound_holds);
    }
}

TEST_CASE("summation examples", "[function_spaces]") {
    auto unit = constant_symbol({1.0, 0.0, 0.0}, {1, 1, 0});
    for (int N : {1, 5, 17}) {
        auto s = summation(unit, N);
        CHECK(s.K_used == summation_cutoff(N, 1.0));
        CHECK(s.values[0].constant_term() == cplx(1.0));
        CHECK(s.tail_estimate >= 0.0);
    }

    std::vector<cplx> ones(40, 1.0);
    std::vector<double> ls;
    for (int k = 0; k < 40; ++k) ls.push_back(std::lgamma(k + 1.0));
    auto fact = constant_symbol(ones, {1, 1, 0}, ls);
    auto s = summation(fact, 10, 0.45);
    CHECK(s.K_used == 9);
    CHECK(s.values[0].constant_term().real() == Approx(1.1315901).epsilon(1e-7));
    CHECK(s.max_term_ratio <= std::numbers::e / 3.0);
    CHECK(s.uniform_bound_holds);
    // tail from k = 5: (5! + 6!/10 + ... + 9!/10^4) / 10^5
    CHECK(s.tail_estimate == Approx((120.0 + 72.0 + 50.4 + 40.32 + 36.288) / 1e5).epsilon(1e-12));
}

TEST_CASE("summation stays bounded uniformly in N", "[function_spaces][property]") {
    std::vector<cplx> ones(400, 1.0);
    std::vector<double> ls;
    for (int k = 0; k < 400; ++k) ls.push_back(std::lgamma(k + 1.0) + k * std::log(0.8));
    auto a = constant_symbol(ones, {1, 0.8, 0}, ls);
    for (int N = 1; N <= 100; N += 3) {
        auto s = summation(a, N);
        CHECK(s.uniform_bound_holds);
        CHECK(s.max_term_ratio <= std::numbers::e / 3.0 + 1e-12);
    }
}

TEST_CASE("symbol_pullback examples", "[function_spaces]") {
    const int order = 8;
    auto x = series::variable(2, 0, order), y = series::variable(2, 1, order);
    std::vector<series> ks = {series::constant(2, order, 1.0) + x * y, x * x - y * cplx(0.5), series::constant(2, order, 3.0)};
    auto a = symbol_from_series(ks, {1, 1, 0});
    auto same = symbol_pullback(a, {x, y});
    for (int k = 0; k <= 2; ++k) CHECK(max_abs(same.coeffs[static_cast<std::size_t>(k)][0] - ks[static_cast<std::size_t>(k)]) < 1e-15);

    auto cst = constant_symbol({1.0, 2.0, -1.0}, {1, 1, 0}, {}, 2);
    auto kappa = std::vector<series>{x + y * y, y * cplx(2.0) - x * y};
    auto pc = symbol_pullback(cst, kappa);
    for (int k = 0; k <= 2; ++k)
        CHECK(pc.coeffs[static_cast<std::size_t>(k)][0].constant_term() == cst.coeffs[static_cast<std::size_t>(k)][0].constant_term());

    auto pb = symbol_pullback(a, kappa);
    CHECK(std::isfinite(pb.certificate));
    CHECK(max_abs(pb.coeffs[1][0] - substitute(ks[1], kappa)) < 1e-14);
}
