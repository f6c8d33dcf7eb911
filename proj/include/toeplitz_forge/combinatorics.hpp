#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "calibration.hpp"
#include "multi_index.hpp"

namespace tforge {

struct bound_check_result {
    mpq_class lhs;
    mpq_class rhs;
    bool holds = false;
};

inline mpz_class factorial_z(unsigned long n) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

inline mpz_class binomial_z(unsigned long n, unsigned long k) {
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return b;
}

/// mu! / (nu! (mu - nu)!)
inline mpz_class polyindex_binomial(const multi_index& mu, const multi_index& nu) {
    mu.check_dim(nu);
    if (!nu.leq(mu)) throw std::invalid_argument("polyindex_binomial: nu is not below mu");
    mpz_class r = 1;
    for (int i = 0; i < mu.dim(); ++i)
        r *= binomial_z(static_cast<unsigned long>(mu[i]), static_cast<unsigned long>(nu[i]));
    return r;
}

inline bound_check_result check_binomial_domination(const multi_index& mu, const multi_index& nu) {
    bound_check_result r;
    r.lhs = polyindex_binomial(mu, nu);
    r.rhs = binomial_z(static_cast<unsigned long>(mu.norm()), static_cast<unsigned long>(nu.norm()));
    r.holds = r.lhs <= r.rhs;
    return r;
}

/// prod (a_i+b_i-1)!/(a_i! b_i!)  versus  (j+l-n)!/(j! (l-n+1)!)
inline bound_check_result binom_multi_bound(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("binom_multi_bound: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("binom_multi_bound: need at least two entries");
    const long n = static_cast<long>(a.size());
    long j = 0, l = 0;
    mpq_class lhs = 1;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0) throw std::invalid_argument("binom_multi_bound: negative a entry");
        if (b[i] < 1) throw std::invalid_argument("binom_multi_bound: b entries must be positive");
        j += a[i];
        l += b[i];
        mpq_class t(factorial_z(static_cast<unsigned long>(a[i] + b[i] - 1)),
                    factorial_z(static_cast<unsigned long>(a[i])) * factorial_z(static_cast<unsigned long>(b[i])));
        t.canonicalize();
        lhs *= t;
    }
    bound_check_result r;
    r.lhs = lhs;
    r.rhs = mpq_class(factorial_z(static_cast<unsigned long>(j + l - n)),
                      factorial_z(static_cast<unsigned long>(j)) * factorial_z(static_cast<unsigned long>(l - n + 1)));
    r.rhs.canonicalize();
    r.holds = r.lhs <= r.rhs;
    return r;
}

namespace detail {

// Phase-one simplex over the rationals with Bland's rule. Decides whether
// A x = b, x >= 0 has a solution; b is made non-negative by row sign flips.
inline bool exact_feasible(std::vector<std::vector<mpq_class>> A, std::vector<mpq_class> b) {
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    for (std::size_t i = 0; i < m; ++i)
        if (b[i] < 0) {
            for (auto& v : A[i]) v = -v;
            b[i] = -b[i];
        }
    // tableau columns: n structural, m artificial, then rhs
    const std::size_t cols = n + m + 1;
    std::vector<std::vector<mpq_class>> T(m + 1, std::vector<mpq_class>(cols, 0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) T[i][k] = A[i][k];
        T[i][n + i] = 1;
        T[i][cols - 1] = b[i];
        basis[i] = n + i;
    }
    // objective row: minimise the sum of artificials, written as reduced costs
    for (std::size_t k = 0; k < cols; ++k) {
        mpq_class s = 0;
        for (std::size_t i = 0; i < m; ++i) s += T[i][k];
        T[m][k] = (k >= n && k < n + m) ? mpq_class(0) : mpq_class(-s);
    }
    for (;;) {
        std::size_t enter = cols;
        for (std::size_t k = 0; k + 1 < cols; ++k)
            if (T[m][k] < 0) {
                enter = k;
                break;
            }
        if (enter == cols) break;
        std::size_t leave = m;
        mpq_class best;
        for (std::size_t i = 0; i < m; ++i)
            if (T[i][enter] > 0) {
                mpq_class ratio = T[i][cols - 1] / T[i][enter];
                if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
        if (leave == m) break;  // unbounded direction cannot occur for phase one
        const mpq_class piv = T[leave][enter];
        for (auto& v : T[leave]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave || T[i][enter] == 0) continue;
            const mpq_class f = T[i][enter];
            for (std::size_t k = 0; k < cols; ++k) T[i][k] -= f * T[leave][k];
        }
        basis[leave] = enter;
    }
    return T[m][cols - 1] == 0;
}

}  // namespace detail

/// Is t in the convex hull of the permutations of (ell-1, 1, 0, ..., 0)?
inline bool hull_membership(const std::vector<int>& t, int ell) {
    if (ell < 2) throw std::invalid_argument("hull_membership: ell must be at least 2");
    const std::size_t n = t.size();
    if (n < 2) throw std::invalid_argument("hull_membership: tuple length must be at least 2");
    for (int v : t)
        if (v < 0) throw std::invalid_argument("hull_membership: entries must be non-negative");
    // vertices: ell-1 at position p, 1 at position q != p
    std::vector<std::vector<mpq_class>> A(n + 1);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            for (std::size_t i = 0; i < n; ++i) {
                int v = 0;
                if (i == p) v = ell - 1;
                if (i == q) v = 1;
                A[i].push_back(v);
            }
            A[n].push_back(1);
        }
    std::vector<mpq_class> b(n + 1);
    for (std::size_t i = 0; i < n; ++i) b[i] = t[i];
    b[n] = 1;
    return detail::exact_feasible(std::move(A), std::move(b));
}

inline int lem_hard_min_m(int n, int d) { return std::max(d + 2, 2 * (d + n - 1)); }

/// Visit every non-decreasing tuple 0 <= i_1 <= ... <= i_n with sum ell.
inline void for_each_ordered_partition(int n, int ell, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    std::function<void(int, int, int)> rec = [&](int pos, int lo, int rem) {
        if (pos == n - 1) {
            if (rem >= lo) {
                cur[static_cast<std::size_t>(pos)] = rem;
                fn(cur);
            }
            return;
        }
        const int slots = n - pos;
        for (int v = lo; v * slots <= rem; ++v) {
            cur[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, v, rem - v);
        }
    };
    rec(0, 0, ell);
}

inline mpq_class lem_hard_sum_exact(int n, int d, int m, int ell) {
    mpq_class total = 0;
    mpz_class top;
    mpz_ui_pow_ui(top.get_mpz_t(), static_cast<unsigned long>(ell + 1), static_cast<unsigned long>(m));
    for_each_ordered_partition(n, ell, [&](const std::vector<int>& i) {
        mpz_class num = top;
        mpz_class w;
        mpz_ui_pow_ui(w.get_mpz_t(), static_cast<unsigned long>(i[static_cast<std::size_t>(n - 2)] + 1),
                      static_cast<unsigned long>(d));
        num *= w;
        mpz_class den = 1;
        for (int v : i) {
            mpz_ui_pow_ui(w.get_mpz_t(), static_cast<unsigned long>(v + 1), static_cast<unsigned long>(m));
            den *= w;
        }
        mpq_class term(num, den);
        term.canonicalize();
        total += term;
    });
    return total;
}

inline long double lem_hard_sum_float(int n, int d, int m, int ell) {
    long double total = 0.0L;
    for_each_ordered_partition(n, ell, [&](const std::vector<int>& i) {
        long double lg = m * std::log(static_cast<long double>(ell + 1)) +
                         d * std::log(static_cast<long double>(i[static_cast<std::size_t>(n - 2)] + 1));
        for (int v : i) lg -= m * std::log(static_cast<long double>(v + 1));
        total += std::exp(lg);
    });
    return total;
}

/// sum_i min(i+1, j-i+1)^d (j+1)^m / ((i+1)^m (j-i+1)^m), the unordered two-part sum.
inline mpq_class lem_easy_sum_exact(int d, int m, int j) {
    mpq_class total = 0;
    for (int i = 0; i <= j; ++i) {
        mpz_class num, den, w;
        mpz_ui_pow_ui(num.get_mpz_t(), static_cast<unsigned long>(j + 1), static_cast<unsigned long>(m));
        mpz_ui_pow_ui(w.get_mpz_t(), static_cast<unsigned long>(std::min(i + 1, j - i + 1)), static_cast<unsigned long>(d));
        num *= w;
        mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(i + 1), static_cast<unsigned long>(m));
        mpz_ui_pow_ui(w.get_mpz_t(), static_cast<unsigned long>(j - i + 1), static_cast<unsigned long>(m));
        den *= w;
        mpq_class t(num, den);
        t.canonicalize();
        total += t;
    }
    return total;
}

struct lem_hard_result {
    double value = 0.0;
    bool bound_holds = false;
    double bound = 0.0;
    bool below_threshold = false;  // m under the lemma's hypothesis
    bool exact = false;
};

/// Ordered n-part sum with the frozen constant C(n,d); exact for ell <= 60.
inline lem_hard_result lem_hard_sum(int n, int d, int m, int ell) {
    if (n < 2) throw std::invalid_argument("lem_hard_sum: n must be at least 2");
    if (d < 0 || ell < 0) throw std::invalid_argument("lem_hard_sum: d and ell must be non-negative");
    lem_hard_result r;
    r.below_threshold = m < lem_hard_min_m(n, d);
    const auto C = calibration::lem_hard_constant(n, d);
    if (ell <= calibration::kExactEllMax) {
        const mpq_class v = lem_hard_sum_exact(n, d, m, ell);
        r.value = v.get_d();
        r.exact = true;
        if (C) {
            mpq_class q(3, 4), p = 1;
            for (int i = 0; i < m; ++i) p *= q;
            const mpq_class bound = 1 + mpq_class(*C) * p;
            r.bound = bound.get_d();
            r.bound_holds = v <= bound;
        }
    } else {
        const long double v = lem_hard_sum_float(n, d, m, ell);
        r.value = static_cast<double>(v);
        if (C) {
            const long double bound = 1.0L + static_cast<long double>(*C) * std::pow(0.75L, m);
            r.bound = static_cast<double>(bound);
            r.bound_holds = v <= bound * (1.0L + 1e-12L);
        }
    }
    return r;
}

}  // namespace tforge
