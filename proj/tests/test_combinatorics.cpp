#include <catch_amalgamated.hpp>

#include <numeric>

#include "toeplitz_forge/combinatorics.hpp"

using namespace tforge;

namespace {

// Count ways to pick nu_i items from each of mu_i labelled boxes.
long subset_count(const std::vector<int>& mu, const std::vector<int>& nu) {
    long total = 0;
    int bits = 0;
    for (int v : mu) bits += v;
    for (long mask = 0; mask < (1L << bits); ++mask) {
        int offset = 0;
        bool ok = true;
        for (std::size_t i = 0; i < mu.size() && ok; ++i) {
            int c = 0;
            for (int k = 0; k < mu[i]; ++k) c += (mask >> (offset + k)) & 1;
            ok = c == nu[i];
            offset += mu[i];
        }
        total += ok;
    }
    return total;
}

void for_each_tuple(int n, int maxsum, const std::function<void(const std::vector<int>&)>& fn) {
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

}  // namespace

TEST_CASE("polyindex binomial examples", "[combinatorics]") {
    CHECK(polyindex_binomial({2, 1}, {1, 1}) == 2);
    CHECK(polyindex_binomial({3, 0}, {0, 0}) == 1);
    CHECK(polyindex_binomial({3, 2}, {2, 1}) == 6);
    CHECK(subset_count({3, 2}, {2, 1}) == 6);
    CHECK_THROWS_AS(polyindex_binomial({1, 1}, {2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(polyindex_binomial({1, 1}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("polyindex binomial matches subset enumeration", "[combinatorics][oracle]") {
    for_each_tuple(3, 6, [](const std::vector<int>& mu) {
        for_each_tuple(3, 6, [&](const std::vector<int>& nu) {
            bool below = true;
            for (int i = 0; i < 3; ++i) below = below && nu[static_cast<std::size_t>(i)] <= mu[static_cast<std::size_t>(i)];
            if (!below) return;
            CHECK(polyindex_binomial(multi_index(mu), multi_index(nu)) == subset_count(mu, nu));
        });
    });
}

TEST_CASE("binomial domination examples", "[combinatorics]") {
    auto r = check_binomial_domination({2, 1}, {1, 1});
    CHECK(r.lhs == 2);
    CHECK(r.rhs == 3);
    CHECK(r.holds);
    r = check_binomial_domination({2, 0}, {2, 0});
    CHECK(r.lhs == 1);
    CHECK(r.rhs == 1);
    r = check_binomial_domination({1, 1, 1}, {1, 0, 0});
    CHECK(r.lhs == 1);
    CHECK(r.rhs == 3);
    CHECK(r.holds);
}

TEST_CASE("multinomial bound examples", "[combinatorics]") {
    auto r = binom_multi_bound({1, 1}, {1, 1});
    CHECK(r.lhs == 1);
    CHECK(r.rhs == 1);
    CHECK(r.holds);
    r = binom_multi_bound({0, 0}, {1, 1});
    CHECK(r.lhs == 1);
    CHECK(r.rhs == 1);
    r = binom_multi_bound({2, 1}, {2, 1});
    CHECK(r.lhs == mpq_class(3, 2));
    CHECK(r.rhs == 2);
    CHECK(r.holds);
    CHECK_THROWS_AS(binom_multi_bound({1}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(binom_multi_bound({1, 1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("hull membership examples", "[combinatorics]") {
    CHECK(hull_membership({1, 1, 0}, 2));
    CHECK(hull_membership({2, 1, 1}, 4));
    CHECK_FALSE(hull_membership({4, 0, 0}, 4));
    CHECK_FALSE(hull_membership({1, 1, 1}, 4));  // wrong coordinate sum
    CHECK_THROWS_AS(hull_membership({1, 1}, 1), std::invalid_argument);
}

TEST_CASE("hull membership agrees with the majorization criterion", "[combinatorics][oracle]") {
    // For integer points with sum ell the hull of the permutations of (ell-1,1,0..)
    // is cut out by max entry <= ell-1 (Rado).
    for (int n = 2; n <= 4; ++n)
        for (int ell = 2; ell <= 6; ++ell)
            for_each_tuple(n, ell, [&](const std::vector<int>& t) {
                const int s = std::accumulate(t.begin(), t.end(), 0);
                const int mx = *std::max_element(t.begin(), t.end());
                const bool expected = s == ell && mx <= ell - 1;
                CHECK(hull_membership(t, ell) == expected);
            });
}

TEST_CASE("hard sum lemma examples", "[combinatorics]") {
    auto v = lem_hard_sum_exact(2, 0, 4, 3);
    mpq_class expected(256, 1296);
    expected.canonicalize();
    CHECK(v == 1 + expected);
    CHECK(lem_hard_sum(2, 0, 4, 3).value == Catch::Approx(1.19753).epsilon(1e-5));
    CHECK(lem_hard_sum(2, 0, 4, 0).value == 1.0);
    auto r = lem_hard_sum(3, 1, 8, 10);
    CHECK(r.bound_holds);
    CHECK(r.value <= r.bound);
    CHECK(lem_hard_sum(3, 1, 3, 10).below_threshold);
}

TEST_CASE("hard sum is non-increasing in m", "[combinatorics][property]") {
    for (int n = 2; n <= 3; ++n)
        for (int d = 0; d <= 2; ++d)
            for (int ell = 0; ell <= 20; ++ell)
                for (int m = lem_hard_min_m(n, d); m < 24; ++m)
                    CHECK(lem_hard_sum_exact(n, d, m + 1, ell) <= lem_hard_sum_exact(n, d, m, ell));
}

TEST_CASE("the two-part sum is twice the ordered sum minus the middle term", "[combinatorics][property]") {
    for (int d = 0; d <= 2; ++d)
        for (int m = 4; m <= 12; ++m)
            for (int j = 0; j <= 30; ++j) {
                mpq_class middle = 0;
                if (j % 2 == 0) {
                    const int h = j / 2 + 1;
                    mpz_class num, den, w;
                    mpz_ui_pow_ui(num.get_mpz_t(), static_cast<unsigned long>(j + 1), static_cast<unsigned long>(m));
                    mpz_ui_pow_ui(w.get_mpz_t(), static_cast<unsigned long>(h), static_cast<unsigned long>(d));
                    num *= w;
                    mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(h), static_cast<unsigned long>(2 * m));
                    middle = mpq_class(num, den);
                    middle.canonicalize();
                }
                CHECK(lem_easy_sum_exact(d, m, j) == 2 * lem_hard_sum_exact(2, d, m, j) - middle);
            }
}

TEST_CASE("float path agrees with exact path", "[combinatorics]") {
    for (int ell : {10, 40, 60}) {
        const double e = lem_hard_sum_exact(3, 1, 10, ell).get_d();
        const double f = static_cast<double>(lem_hard_sum_float(3, 1, 10, ell));
        CHECK(std::abs(e - f) <= 1e-12 * e);
    }
}
