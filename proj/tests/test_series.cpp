#include <catch_amalgamated.hpp>

#include <random>

#include "toeplitz_forge/series.hpp"

using namespace tforge;
using Catch::Approx;

namespace {

series var(int n, int i, int order) { return series::variable(n, i, order); }
series one(int n, int order) { return series::constant(n, order, 1.0); }

series exp_series(int order) {
    series s(1, order);
    double f = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k) f *= k;
        s.set(multi_index{k}, 1.0 / f);
    }
    return s;
}

series random_poly(std::mt19937& rng, int n, int deg, int order) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    series s(n, order);
    const auto& L = s.lay();
    for (int r = 0; r < L.count_upto(deg); ++r) s.set_rank(r, cplx(u(rng), u(rng)));
    return s;
}

double diff(const series& a, const series& b) { return max_abs(a - b); }

}  // namespace

TEST_CASE("multiply examples", "[series]") {
    auto v = var(1, 0, 2);
    auto p = (one(1, 2) + v) * (one(1, 2) - v);
    CHECK(p.coeff(multi_index{0}) == cplx(1.0));
    CHECK(p.coeff(multi_index{1}) == cplx(0.0));
    CHECK(p.coeff(multi_index{2}) == cplx(-1.0));

    auto a = var(1, 0, 3) * cplx(3.0) + one(1, 3);
    CHECK(diff(a * one(1, 3), a) == 0.0);

    series e1(1, 2), e2(1, 2);
    e1.set(multi_index{0}, 1.0);
    e1.set(multi_index{1}, 1.0);
    e1.set(multi_index{2}, 0.5);
    e2.set(multi_index{0}, 1.0);
    e2.set(multi_index{1}, -1.0);
    e2.set(multi_index{2}, 0.5);
    auto c = e1 * e2;
    CHECK(c.coeff(multi_index{0}) == cplx(1.0));
    CHECK(std::abs(c.coeff(multi_index{1})) == 0.0);
    CHECK(std::abs(c.coeff(multi_index{2})) == 0.0);
    CHECK(c.order() == 2);
}

TEST_CASE("order of a product is the smaller operand order", "[series]") {
    auto a = var(2, 0, 5), b = var(2, 1, 3);
    CHECK((a * b).order() == 3);
    CHECK((a + b).order() == 3);
    CHECK(series(2, 4).terms().empty());
}

TEST_CASE("variable count mismatch is rejected", "[series]") {
    CHECK_THROWS_AS(var(1, 0, 3) * var(2, 0, 3), std::invalid_argument);
}

TEST_CASE("differentiate examples", "[series]") {
    auto v = var(1, 0, 4);
    auto d = d_dvar(v * v, 0);
    CHECK(d.coeff(multi_index{1}) == cplx(2.0));
    CHECK(d.coeff(multi_index{0}) == cplx(0.0));

    auto vw = var(2, 0, 4) * var(2, 1, 4);
    auto dd = differentiate(vw, multi_index{1, 1});
    CHECK(dd.coeff(multi_index{0, 0}) == cplx(1.0));
    CHECK(dd.order() == 2);

    auto e = exp_series(5);
    auto e2 = differentiate(e, multi_index{2});
    CHECK(e2.order() == 3);
    CHECK(diff(e2, exp_series(3)) < 1e-15);

    CHECK_THROWS_AS(differentiate(e, multi_index{6}), std::invalid_argument);
}

TEST_CASE("substitute examples", "[series]") {
    auto v = var(1, 0, 4);
    auto u = var(1, 0, 4);
    auto r = substitute(v * v, {u * cplx(2.0)});
    CHECK(r.coeff(multi_index{2}) == cplx(4.0));

    series geo(1, 3);
    for (int k = 0; k <= 3; ++k) geo.set(multi_index{k}, 1.0);
    auto u3 = var(1, 0, 3);
    auto g = substitute(geo, {u3 + u3 * u3});
    CHECK(g.coeff(multi_index{0}) == cplx(1.0));
    CHECK(g.coeff(multi_index{1}) == cplx(1.0));
    CHECK(g.coeff(multi_index{2}) == cplx(2.0));
    CHECK(g.coeff(multi_index{3}) == cplx(3.0));

    std::mt19937 rng(7);
    auto a = random_poly(rng, 2, 5, 5);
    auto id = substitute(a, {var(2, 0, 5), var(2, 1, 5)});
    CHECK(diff(id, a) == 0.0);

    CHECK_THROWS_AS(substitute(geo, {u3 + one(1, 3)}), std::invalid_argument);
}

TEST_CASE("evaluate examples", "[series]") {
    auto v = var(1, 0, 2);
    auto p = one(1, 2) - v * v;
    CHECK(evaluate(p, std::vector<cplx>{2.0}) == cplx(-3.0));
    auto e = exp_series(10);
    CHECK(std::abs(evaluate(e, std::vector<cplx>{1.0}) - std::exp(1.0)) < 3e-7);
    std::mt19937 rng(3);
    auto a = random_poly(rng, 3, 4, 6);
    CHECK(evaluate(a, std::vector<cplx>{0.0, 0.0, 0.0}) == a.constant_term());
}

TEST_CASE("ring axioms on random polynomials", "[series][property]") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3, order = 6;
        auto a = random_poly(rng, n, 3, order), b = random_poly(rng, n, 3, order), c = random_poly(rng, n, 3, order);
        CHECK(diff((a * b) * c, a * (b * c)) < 1e-12);
        CHECK(diff(a * (b + c), a * b + a * c) < 1e-12);
        CHECK(diff(a * b, b * a) < 1e-13);
    }
}

TEST_CASE("Leibniz rule", "[series][property]") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto a = random_poly(rng, 2, 4, 7), b = random_poly(rng, 2, 4, 7);
        for (int i = 0; i < 2; ++i) {
            auto lhs = d_dvar(a * b, i);
            auto rhs = d_dvar(a, i) * b + a * d_dvar(b, i);
            CHECK(diff(lhs, rhs) < 1e-12);
        }
        auto lhs = differentiate(a * b, multi_index{1, 1});
        auto rhs = differentiate(a, multi_index{1, 1}) * b + d_dvar(a, 0) * d_dvar(b, 1) + d_dvar(a, 1) * d_dvar(b, 0) +
                   a * differentiate(b, multi_index{1, 1});
        CHECK(diff(lhs, rhs) < 1e-11);
    }
}

TEST_CASE("substitution is associative", "[series][property]") {
    std::mt19937 rng(17);
    const int order = 6;
    auto a = random_poly(rng, 2, 5, order);
    auto k1 = std::vector<series>{var(2, 0, order) + var(2, 1, order) * var(2, 1, order) * cplx(0.3),
                                  var(2, 1, order) * cplx(0.5, 0.2) + var(2, 0, order) * var(2, 1, order)};
    auto k2 = std::vector<series>{var(2, 0, order) * cplx(1.2) - var(2, 0, order) * var(2, 0, order),
                                  var(2, 1, order) + var(2, 0, order) * cplx(0.1)};
    auto lhs = substitute(substitute(a, k1), k2);
    std::vector<series> k12 = {substitute(k1[0], k2), substitute(k1[1], k2)};
    auto rhs = substitute(a, k12);
    CHECK(diff(lhs, rhs) < 1e-12);
}

TEST_CASE("transcendental functions on series", "[series]") {
    const int order = 10;
    auto v = var(1, 0, order);
    auto e = exp(v);
    CHECK(diff(e, exp_series(order)) < 1e-15);
    auto l = log(one(1, order) + v);
    for (int k = 1; k <= order; ++k) CHECK(std::abs(l.coeff(multi_index{k}) - cplx((k % 2 ? 1.0 : -1.0) / k)) < 1e-15);
    auto r = reciprocal(one(1, order) - v);
    for (int k = 0; k <= order; ++k) CHECK(std::abs(r.coeff(multi_index{k}) - 1.0) < 1e-15);
    auto s = sqrt(one(1, order) + v);
    CHECK(diff(s * s, one(1, order) + v) < 1e-14);

    std::mt19937 rng(19);
    auto a = random_poly(rng, 2, 3, 8) * cplx(0.2) + one(2, 8) * cplx(2.0, 0.5);
    CHECK(diff(exp(log(a)), a) < 1e-12);
    CHECK(diff(a * reciprocal(a), one(2, 8)) < 1e-13);
    CHECK(diff(pow(a, 3.0), a * a * a) < 1e-11);
}

TEST_CASE("nested series arithmetic", "[series]") {
    const int order = 6;
    series s0 = series::variable(2, 0, order, 2.0);
    nested_series outer(2, 4);
    outer.set(multi_index{0, 0}, s0);
    outer.set(multi_index{1, 0}, series::constant(2, order, 1.0));
    auto inv = reciprocal(outer);
    auto prod = outer * inv;
    CHECK(max_abs(prod - nested_series::constant(2, 4, series::constant(2, order, 1.0))) < 1e-12);
    auto lg = log(outer);
    CHECK(max_abs(exp(lg) - outer) < 1e-12);
}
