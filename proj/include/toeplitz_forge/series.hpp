#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "multi_index.hpp"

namespace tforge {

using cplx = std::complex<double>;

inline constexpr int kMaxOrder = 24;
/// Truncation order of a series known exactly (a polynomial).
inline constexpr int kExactOrder = 1 << 20;

namespace detail {

// Graded layout: monomials sorted by total degree, lexicographically descending
// inside a degree. The rank of a monomial does not depend on the truncation
// order, so a series of lower order is a prefix of one of higher order.
class layout {
public:
    struct entry {
        int a, b, c;
    };

    explicit layout(int n) : n_(n) {
        if (n == 0) max_deg_ = 0;
        else if (n <= 3) max_deg_ = kMaxOrder;
        else if (n == 4) max_deg_ = 16;
        else if (n <= 6) max_deg_ = 10;
        else throw std::invalid_argument("series: at most 6 variables supported");

        begin_.assign(static_cast<std::size_t>(max_deg_) + 2, 0);
        std::vector<int> cur(static_cast<std::size_t>(n), 0);
        for (int d = 0; d <= max_deg_; ++d) {
            begin_[static_cast<std::size_t>(d)] = static_cast<int>(ex_.size() / std::max(n, 1));
            if (n == 0) {
                ++count0_;
            } else {
                emit(0, d, cur);
            }
        }
        begin_[static_cast<std::size_t>(max_deg_) + 1] = n == 0 ? 1 : static_cast<int>(ex_.size() / n);
        if (n == 0) begin_[0] = 0;
        for (int r = 0; r < size(); ++r) rank_.emplace(pack(exps(r)), r);

        blocks_.resize(static_cast<std::size_t>((max_deg_ + 1) * (max_deg_ + 1)));
        for (int da = 0; da <= max_deg_; ++da)
            for (int db = 0; da + db <= max_deg_; ++db) {
                auto& blk = blocks_[static_cast<std::size_t>(da * (max_deg_ + 1) + db)];
                blk.reserve(static_cast<std::size_t>((count_deg(da)) * count_deg(db)));
                std::vector<int> sum(static_cast<std::size_t>(n));
                for (int ia = begin(da); ia < begin(da + 1); ++ia)
                    for (int ib = begin(db); ib < begin(db + 1); ++ib) {
                        const auto* ea = exps(ia);
                        const auto* eb = exps(ib);
                        for (int i = 0; i < n; ++i) sum[static_cast<std::size_t>(i)] = ea[i] + eb[i];
                        blk.push_back({ia, ib, rank_of(sum.data())});
                    }
            }
    }

    int vars() const { return n_; }
    int max_degree() const { return max_deg_; }
    int begin(int d) const { return begin_[static_cast<std::size_t>(d)]; }
    int count_upto(int d) const { return d < 0 ? 0 : begin_[static_cast<std::size_t>(d) + 1]; }
    int count_deg(int d) const { return begin(d + 1) - begin(d); }
    int size() const { return count_upto(max_deg_); }
    const std::uint8_t* exps(int r) const { return n_ == 0 ? nullptr : &ex_[static_cast<std::size_t>(r * n_)]; }
    int degree_of(int r) const {
        int d = 0;
        while (begin(d + 1) <= r) ++d;
        return d;
    }

    int rank_of(const int* e) const {
        std::uint64_t key = 0;
        int deg = 0;
        for (int i = 0; i < n_; ++i) {
            key = (key << 5) | static_cast<std::uint64_t>(e[i]);
            deg += e[i];
        }
        if (deg > max_deg_) return -1;
        auto it = rank_.find(key);
        return it == rank_.end() ? -1 : it->second;
    }
    const std::vector<entry>& block(int da, int db) const {
        return blocks_[static_cast<std::size_t>(da * (max_deg_ + 1) + db)];
    }

private:
    void emit(int i, int rem, std::vector<int>& cur) {
        if (i == n_ - 1) {
            cur[static_cast<std::size_t>(i)] = rem;
            for (int v : cur) ex_.push_back(static_cast<std::uint8_t>(v));
            return;
        }
        for (int v = rem; v >= 0; --v) {
            cur[static_cast<std::size_t>(i)] = v;
            emit(i + 1, rem - v, cur);
        }
    }
    std::uint64_t pack(const std::uint8_t* e) const {
        std::uint64_t key = 0;
        for (int i = 0; i < n_; ++i) key = (key << 5) | e[i];
        return key;
    }

    int n_;
    int max_deg_ = 0;
    int count0_ = 0;
    std::vector<int> begin_;
    std::vector<std::uint8_t> ex_;
    std::unordered_map<std::uint64_t, int> rank_;
    std::vector<std::vector<entry>> blocks_;
};

inline const layout& get_layout(int n) {
    static std::mutex mu;
    static std::vector<std::unique_ptr<layout>> cache(8);
    if (n < 0 || n > 6) throw std::invalid_argument("series: at most 6 variables supported");
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[static_cast<std::size_t>(n)];
    if (!slot) slot = std::make_unique<layout>(n);
    return *slot;
}

template <class T>
struct is_series : std::false_type {};

}  // namespace detail

template <class T>
class basic_series;

namespace detail {
template <class T>
struct is_series<basic_series<T>> : std::true_type {};

// Scalars a coefficient of type T may be multiplied by.
template <class T, class U>
struct scales : std::is_same<T, U> {};
template <class U>
struct scales<cplx, U> : std::bool_constant<std::is_same_v<U, cplx> || std::is_same_v<U, double>> {};
template <class T, class U>
struct scales<basic_series<T>, U>
    : std::bool_constant<std::is_same_v<U, basic_series<T>> || scales<T, U>::value> {};
template <class T, class U>
inline constexpr bool scales_v = scales<T, U>::value;

inline bool is_zero(const cplx& z) { return z == cplx(0.0, 0.0); }
inline bool is_zero(double x) { return x == 0.0; }
template <class T>
bool is_zero(const basic_series<T>& s);

template <class T>
T from_double(double x) {
    if constexpr (is_series<T>::value) return T(from_double<typename T::value_type>(x));
    else return T(x);
}
}  // namespace detail

/// Truncated multivariate Taylor series. Coefficients are stored densely
/// up to the stored degree; an order of kExactOrder marks a polynomial.
template <class T>
class basic_series {
public:
    using value_type = T;

    basic_series() = default;
    /// Constant series in no variables; acts as a scalar in mixed operations.
    basic_series(const T& c) : nv_(0), order_(kExactOrder) {
        if (!detail::is_zero(c)) {
            deg_ = 0;
            c_.assign(1, c);
        }
    }
    basic_series(int nv, int order) : nv_(nv), order_(order) {
        check_order(order);
        (void)lay();
    }

    static basic_series constant(int nv, int order, const T& c) {
        basic_series s(nv, order);
        if (!detail::is_zero(c)) {
            s.deg_ = 0;
            s.c_.assign(1, c);
        }
        return s;
    }
    /// shift + h_i
    static basic_series variable(int nv, int i, int order, const T& shift = T{}) {
        if (i < 0 || i >= nv) throw std::invalid_argument("series: variable index out of range");
        basic_series s(nv, order);
        if (order < 1) return constant(nv, order, shift);
        s.deg_ = 1;
        s.c_.assign(static_cast<std::size_t>(s.lay().count_upto(1)), T{});
        s.c_[0] = shift;
        s.c_[static_cast<std::size_t>(1 + i)] = detail::from_double<T>(1.0);
        return s;
    }

    int num_vars() const { return nv_; }
    int order() const { return order_; }
    bool exact() const { return order_ >= kExactOrder; }
    int degree() const { return deg_; }
    bool empty() const { return deg_ < 0; }
    const std::vector<cplx>& base_point() const { return base_; }
    void set_base_point(std::vector<cplx> b) { base_ = std::move(b); }

    const detail::layout& lay() const { return detail::get_layout(nv_); }

    T coeff(const multi_index& mu) const {
        if (nv_ == 0) return mu.norm() == 0 ? constant_term() : T{};
        if (mu.dim() != nv_) throw std::invalid_argument("series: index dimension mismatch");
        if (mu.norm() > deg_) return T{};
        return c_[static_cast<std::size_t>(lay().rank_of(mu.entries().data()))];
    }
    T coeff_rank(int r) const { return r < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(r)] : T{}; }
    T constant_term() const { return c_.empty() ? T{} : c_[0]; }
    const std::vector<T>& raw() const { return c_; }

    void set(const multi_index& mu, const T& v) {
        if (nv_ == 0) {
            if (mu.norm() != 0) throw std::invalid_argument("series: scalar series has no variables");
            grow(0);
            c_[0] = v;
            return;
        }
        if (mu.dim() != nv_) throw std::invalid_argument("series: index dimension mismatch");
        const int d = mu.norm();
        if (d > order_) return;
        grow(d);
        c_[static_cast<std::size_t>(lay().rank_of(mu.entries().data()))] = v;
    }
    void set_rank(int r, const T& v) {
        const int d = lay().degree_of(r);
        if (d > order_) return;
        grow(d);
        c_[static_cast<std::size_t>(r)] = v;
    }

    multi_index index_of(int r) const {
        std::vector<int> e(static_cast<std::size_t>(nv_));
        const auto* p = lay().exps(r);
        for (int i = 0; i < nv_; ++i) e[static_cast<std::size_t>(i)] = p[i];
        return multi_index(std::move(e));
    }

    /// Nonzero coefficients; empty for the zero series.
    std::vector<std::pair<multi_index, T>> terms() const {
        std::vector<std::pair<multi_index, T>> out;
        for (int r = 0; r < static_cast<int>(c_.size()); ++r)
            if (!detail::is_zero(c_[static_cast<std::size_t>(r)])) {
                if (nv_ == 0) out.emplace_back(multi_index{0}, c_[0]);
                else out.emplace_back(index_of(r), c_[static_cast<std::size_t>(r)]);
            }
        return out;
    }

    basic_series truncated(int order) const {
        basic_series r(*this);
        if (order < r.order_) {
            r.order_ = order;
            if (r.deg_ > order) {
                r.deg_ = order;
                r.c_.resize(static_cast<std::size_t>(lay().count_upto(order)));
            }
        }
        return r;
    }
    /// Same coefficients, marked as exact.
    basic_series as_exact() const {
        basic_series r(*this);
        r.order_ = kExactOrder;
        return r;
    }

    /// Lowest degree carrying a nonzero coefficient, or -1.
    int valuation() const {
        for (int d = 0; d <= deg_; ++d)
            if (!block_zero(d)) return d;
        return -1;
    }
    bool block_zero(int d) const {
        if (d > deg_) return true;
        const auto& L = lay();
        for (int r = L.begin(d); r < L.begin(d + 1); ++r)
            if (!detail::is_zero(c_[static_cast<std::size_t>(r)])) return false;
        return true;
    }
    bool is_zero() const {
        for (const auto& v : c_)
            if (!detail::is_zero(v)) return false;
        return true;
    }

    basic_series& operator+=(const basic_series& o) { return *this = combine(*this, o, false); }
    basic_series& operator-=(const basic_series& o) { return *this = combine(*this, o, true); }
    basic_series& operator*=(const basic_series& o) { return *this = multiply(*this, o); }

    template <class U>
        requires(detail::scales_v<T, std::decay_t<U>>)
    basic_series& operator*=(const U& u) {
        for (auto& v : c_) v = v * u;
        return *this;
    }

    friend basic_series operator+(const basic_series& a, const basic_series& b) { return combine(a, b, false); }
    friend basic_series operator-(const basic_series& a, const basic_series& b) { return combine(a, b, true); }
    friend basic_series operator-(const basic_series& a) {
        basic_series r(a);
        for (auto& v : r.c_) v = -v;
        return r;
    }
    friend basic_series operator*(const basic_series& a, const basic_series& b) { return multiply(a, b); }

    template <class U>
        requires(detail::scales_v<T, std::decay_t<U>>)
    friend basic_series operator*(basic_series a, const U& u) {
        a *= u;
        return a;
    }
    template <class U>
        requires(detail::scales_v<T, std::decay_t<U>>)
    friend basic_series operator*(const U& u, basic_series a) {
        for (auto& v : a.c_) v = u * v;
        return a;
    }

    /// Truncated Cauchy product; result order is the minimum of the operand orders.
    static basic_series multiply(const basic_series& a, const basic_series& b) {
        if (a.nv_ == 0 && a.deg_ <= 0 && b.nv_ != 0) return scale_by(b, a.constant_term(), a.order_);
        if (b.nv_ == 0 && b.deg_ <= 0 && a.nv_ != 0) return scale_by(a, b.constant_term(), b.order_);
        if (a.nv_ != b.nv_) throw std::invalid_argument("series: variable-count mismatch in multiply");
        basic_series r(a.nv_, std::min(a.order_, b.order_));
        if (a.deg_ < 0 || b.deg_ < 0) return r;
        const int va = a.valuation(), vb = b.valuation();
        if (va < 0 || vb < 0) return r;
        const int deg = std::min(r.order_, a.deg_ + b.deg_);
        if (va + vb > deg) return r;
        r.grow(deg);
        mul_into(a, b, r, va, vb, deg);
        return r;
    }

    /// Degree-d homogeneous block of a·b accumulated into r (used by recurrences).
    static void mul_into(const basic_series& a, const basic_series& b, basic_series& r, int va, int vb, int deg) {
        const auto& L = a.lay();
        for (int da = va; da <= std::min(a.deg_, deg - vb); ++da) {
            if (a.block_zero(da)) continue;
            for (int db = vb; db <= std::min(b.deg_, deg - da); ++db) {
                if (b.block_zero(db)) continue;
                for (const auto& e : L.block(da, db))
                    r.c_[static_cast<std::size_t>(e.c)] += a.c_[static_cast<std::size_t>(e.a)] * b.c_[static_cast<std::size_t>(e.b)];
            }
        }
    }

    /// Accumulate (a_{da} * b_{db}) * w into the degree da+db block of r.
    static void block_fma(const basic_series& a, int da, const basic_series& b, int db, basic_series& r, const T* w) {
        if (da > a.deg_ || db > b.deg_ || a.block_zero(da) || b.block_zero(db)) return;
        for (const auto& e : a.lay().block(da, db)) {
            if (w) r.c_[static_cast<std::size_t>(e.c)] += (a.c_[static_cast<std::size_t>(e.a)] * b.c_[static_cast<std::size_t>(e.b)]) * *w;
            else r.c_[static_cast<std::size_t>(e.c)] += a.c_[static_cast<std::size_t>(e.a)] * b.c_[static_cast<std::size_t>(e.b)];
        }
    }

    void grow(int d) {
        if (d <= deg_) return;
        if (d > lay().max_degree())
            throw std::invalid_argument("series: degree " + std::to_string(d) + " exceeds the supported cap " +
                                        std::to_string(lay().max_degree()));
        c_.resize(static_cast<std::size_t>(lay().count_upto(d)), T{});
        deg_ = d;
    }
    T& at_rank(int r) { return c_[static_cast<std::size_t>(r)]; }

private:
    static void check_order(int order) {
        if (order < 0) throw std::invalid_argument("series: negative order");
        if (order > kMaxOrder && order != kExactOrder)
            throw std::invalid_argument("series: truncation order capped at " + std::to_string(kMaxOrder));
    }

    static basic_series scale_by(const basic_series& s, const T& c, int other_order) {
        basic_series r(s);
        for (auto& v : r.c_) v = v * c;
        if (other_order < r.order_) r = r.truncated(other_order);
        return r;
    }

    static basic_series combine(const basic_series& a, const basic_series& b, bool minus) {
        int nv = a.nv_;
        if (a.nv_ != b.nv_) {
            if (a.nv_ == 0 && a.deg_ <= 0) nv = b.nv_;
            else if (b.nv_ == 0 && b.deg_ <= 0) nv = a.nv_;
            else throw std::invalid_argument("series: variable-count mismatch");
        }
        basic_series r(nv, std::min(a.order_, b.order_));
        r.base_ = a.base_.empty() ? b.base_ : a.base_;
        const int deg = std::min(r.order_, std::max(a.deg_, b.deg_));
        if (deg < 0) return r;
        r.grow(deg);
        const std::size_t na = std::min(a.c_.size(), r.c_.size());
        for (std::size_t i = 0; i < na; ++i) r.c_[i] = a.c_[i];
        const std::size_t nb = std::min(b.c_.size(), r.c_.size());
        for (std::size_t i = 0; i < nb; ++i) r.c_[i] = minus ? r.c_[i] - b.c_[i] : r.c_[i] + b.c_[i];
        return r;
    }

    int nv_ = 0;
    int order_ = kExactOrder;
    int deg_ = -1;
    std::vector<T> c_;
    std::vector<cplx> base_;
};

using series = basic_series<cplx>;
/// Outer series in the integration variables whose coefficients are series in parameters.
using nested_series = basic_series<series>;

namespace detail {
template <class T>
bool is_zero(const basic_series<T>& s) {
    return s.is_zero();
}

inline cplx s_inv(const cplx& z) { return 1.0 / z; }
inline cplx s_exp(const cplx& z) { return std::exp(z); }
inline cplx s_log(const cplx& z) { return std::log(z); }
inline cplx s_pow(const cplx& z, double a) { return std::pow(z, a); }
inline double s_abs0(const cplx& z) { return std::abs(z); }

template <class T>
basic_series<T> s_inv(const basic_series<T>& s);
template <class T>
basic_series<T> s_exp(const basic_series<T>& s);
template <class T>
basic_series<T> s_log(const basic_series<T>& s);
template <class T>
basic_series<T> s_pow(const basic_series<T>& s, double a);
template <class T>
double s_abs0(const basic_series<T>& s) {
    return s_abs0(s.constant_term());
}

template <class T>
void require_truncated(const basic_series<T>& a, const char* what) {
    if (a.exact() && a.degree() > 0)
        throw std::invalid_argument(std::string("series: ") + what + " of a non-constant polynomial needs a truncation order");
}
}  // namespace detail

/// 1/a by the degree recurrence b_d = -b_0 * sum_{k>=1} a_k b_{d-k}.
template <class T>
basic_series<T> reciprocal(const basic_series<T>& a) {
    detail::require_truncated(a, "reciprocal");
    const T a0 = a.constant_term();
    if (detail::s_abs0(a0) == 0.0) throw std::domain_error("series: reciprocal of a series with zero constant term");
    const T b0 = detail::s_inv(a0);
    if (a.num_vars() == 0) return basic_series<T>(b0);
    basic_series<T> b(a.num_vars(), a.order());
    b.set_base_point(a.base_point());
    const int deg = a.exact() ? 0 : a.order();
    b.grow(deg);
    b.at_rank(0) = b0;
    const T mb0 = -b0;
    for (int d = 1; d <= deg; ++d) {
        for (int k = 1; k <= d; ++k) basic_series<T>::block_fma(a, k, b, d - k, b, nullptr);
        const auto& L = b.lay();
        for (int r = L.begin(d); r < L.begin(d + 1); ++r) b.at_rank(r) = b.raw()[static_cast<std::size_t>(r)] * mb0;
    }
    return b;
}

/// exp(a) via d E_d = sum_k k a_k E_{d-k}.
template <class T>
basic_series<T> exp(const basic_series<T>& a) {
    detail::require_truncated(a, "exp");
    const T e0 = detail::s_exp(a.constant_term());
    if (a.num_vars() == 0) return basic_series<T>(e0);
    basic_series<T> e(a.num_vars(), a.order());
    e.set_base_point(a.base_point());
    const int deg = a.exact() ? 0 : a.order();
    e.grow(deg);
    e.at_rank(0) = e0;
    for (int d = 1; d <= deg; ++d) {
        for (int k = 1; k <= d; ++k) {
            const T w = detail::from_double<T>(static_cast<double>(k) / d);
            basic_series<T>::block_fma(a, k, e, d - k, e, &w);
        }
    }
    return e;
}

/// log(a) with the principal branch on the constant term.
template <class T>
basic_series<T> log(const basic_series<T>& a) {
    detail::require_truncated(a, "log");
    const T a0 = a.constant_term();
    if (detail::s_abs0(a0) == 0.0) throw std::domain_error("series: log of a series with zero constant term");
    if (a.num_vars() == 0) return basic_series<T>(detail::s_log(a0));
    const T ia0 = detail::s_inv(a0);
    basic_series<T> l(a.num_vars(), a.order());
    l.set_base_point(a.base_point());
    const int deg = a.exact() ? 0 : a.order();
    l.grow(deg);
    l.at_rank(0) = detail::s_log(a0);
    const auto& L = l.lay();
    for (int d = 1; d <= deg; ++d) {
        for (int k = 1; k < d; ++k) {
            const T w = detail::from_double<T>(-static_cast<double>(k) / d);
            basic_series<T>::block_fma(l, k, a, d - k, l, &w);
        }
        for (int r = L.begin(d); r < L.begin(d + 1); ++r) l.at_rank(r) = (l.raw()[static_cast<std::size_t>(r)] + a.coeff_rank(r)) * ia0;
    }
    return l;
}

/// a^alpha via a * theta(P) = alpha * P * theta(a), theta the Euler operator.
template <class T>
basic_series<T> pow(const basic_series<T>& a, double alpha) {
    detail::require_truncated(a, "pow");
    const T a0 = a.constant_term();
    if (detail::s_abs0(a0) == 0.0) throw std::domain_error("series: pow of a series with zero constant term");
    if (a.num_vars() == 0) return basic_series<T>(detail::s_pow(a0, alpha));
    const T ia0 = detail::s_inv(a0);
    basic_series<T> p(a.num_vars(), a.order());
    p.set_base_point(a.base_point());
    const int deg = a.exact() ? 0 : a.order();
    p.grow(deg);
    p.at_rank(0) = detail::s_pow(a0, alpha);
    const auto& L = p.lay();
    for (int d = 1; d <= deg; ++d) {
        for (int k = 1; k <= d; ++k) {
            const T w = detail::from_double<T>((alpha * k - (d - k)) / d);
            basic_series<T>::block_fma(a, k, p, d - k, p, &w);
        }
        for (int r = L.begin(d); r < L.begin(d + 1); ++r) p.at_rank(r) = p.raw()[static_cast<std::size_t>(r)] * ia0;
    }
    return p;
}

template <class T>
basic_series<T> sqrt(const basic_series<T>& a) {
    return pow(a, 0.5);
}

namespace detail {
template <class T>
basic_series<T> s_inv(const basic_series<T>& s) {
    return reciprocal(s);
}
template <class T>
basic_series<T> s_exp(const basic_series<T>& s) {
    return exp(s);
}
template <class T>
basic_series<T> s_log(const basic_series<T>& s) {
    return log(s);
}
template <class T>
basic_series<T> s_pow(const basic_series<T>& s, double a) {
    return pow(s, a);
}
}  // namespace detail

/// Partial derivative d^mu; order drops by |mu|.
template <class T>
basic_series<T> differentiate(const basic_series<T>& a, const multi_index& mu) {
    if (mu.dim() != a.num_vars()) throw std::invalid_argument("series: derivative index dimension mismatch");
    const int k = mu.norm();
    if (!a.exact() && k > a.order()) throw std::invalid_argument("series: derivative order exceeds truncation order");
    basic_series<T> r(a.num_vars(), a.exact() ? kExactOrder : a.order() - k);
    r.set_base_point(a.base_point());
    if (a.degree() < k) return r;
    const auto& L = a.lay();
    std::vector<int> e(static_cast<std::size_t>(a.num_vars()));
    const int top = std::min(a.degree() - k, r.order());
    r.grow(top);
    for (int rk = 0; rk < L.count_upto(top); ++rk) {
        const auto* ex = L.exps(rk);
        double f = 1.0;
        for (int i = 0; i < a.num_vars(); ++i) {
            e[static_cast<std::size_t>(i)] = ex[i] + mu[i];
            for (int t = ex[i] + 1; t <= ex[i] + mu[i]; ++t) f *= t;
        }
        r.at_rank(rk) = a.coeff_rank(L.rank_of(e.data())) * detail::from_double<T>(f);
    }
    return r;
}

/// Derivative in one variable.
template <class T>
basic_series<T> d_dvar(const basic_series<T>& a, int var, int times = 1) {
    multi_index mu(a.num_vars());
    mu[var] = times;
    return differentiate(a, mu);
}

/// sum_nu c_nu * prod_i args_i^{nu_i}; no restriction on constant terms.
template <class T, class S>
S compose_any(const basic_series<T>& a, const std::vector<S>& args, const S& one) {
    if (static_cast<int>(args.size()) != a.num_vars())
        throw std::invalid_argument("series: one argument per variable required");
    const int n = a.num_vars();
    const int deg = a.degree();
    S result = one * T{};
    if (deg < 0) return result;
    std::vector<std::vector<S>> pw(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& p = pw[static_cast<std::size_t>(i)];
        p.push_back(one);
        for (int k = 1; k <= deg; ++k) p.push_back(p.back() * args[static_cast<std::size_t>(i)]);
    }
    const auto& L = a.lay();
    for (int r = 0; r < L.count_upto(deg); ++r) {
        const T& c = a.raw()[static_cast<std::size_t>(r)];
        if (detail::is_zero(c)) continue;
        const auto* ex = L.exps(r);
        S term = pw[0][ex[0]];
        for (int i = 1; i < n; ++i)
            if (ex[i]) term = term * pw[static_cast<std::size_t>(i)][ex[i]];
        result = result + term * c;
    }
    return result;
}

/// Formal composition with series having zero constant term.
template <class T>
basic_series<T> substitute(const basic_series<T>& a, const std::vector<basic_series<T>>& subs) {
    if (static_cast<int>(subs.size()) != a.num_vars())
        throw std::invalid_argument("series: one substitution series per variable required");
    if (subs.empty()) throw std::invalid_argument("series: nothing to substitute");
    const int m = subs[0].num_vars();
    int order = a.order();
    for (const auto& s : subs) {
        if (s.num_vars() != m) throw std::invalid_argument("series: substitution variable-count mismatch");
        if (!detail::is_zero(s.constant_term()))
            throw std::invalid_argument("series: substitution with nonzero constant term requires re-centering");
        order = std::min(order, s.order());
    }
    std::vector<basic_series<T>> args;
    for (const auto& s : subs) args.push_back(s.truncated(order));
    auto one = basic_series<T>::constant(m, order, detail::from_double<T>(1.0));
    auto r = compose_any(a, args, one);
    return r.truncated(order);
}

/// Horner-style evaluation of the stored polynomial at a point.
template <class T, class P>
auto evaluate(const basic_series<T>& a, const std::vector<P>& point) {
    if (static_cast<int>(point.size()) != a.num_vars())
        throw std::invalid_argument("series: evaluation point dimension mismatch");
    using R = decltype(std::declval<T>() * std::declval<P>());
    R acc{};
    const int deg = a.degree();
    if (deg < 0) return acc;
    const int n = a.num_vars();
    std::vector<std::vector<P>> pw(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        pw[static_cast<std::size_t>(i)].push_back(P(1.0));
        for (int k = 1; k <= deg; ++k)
            pw[static_cast<std::size_t>(i)].push_back(pw[static_cast<std::size_t>(i)].back() * point[static_cast<std::size_t>(i)]);
    }
    const auto& L = a.lay();
    // highest degree first keeps the summation closer to Horner's accumulation order
    for (int d = deg; d >= 0; --d)
        for (int r = L.begin(d); r < L.begin(d + 1); ++r) {
            const auto* ex = L.exps(r);
            P m(1.0);
            for (int i = 0; i < n; ++i) m *= pw[static_cast<std::size_t>(i)][ex[i]];
            acc += a.raw()[static_cast<std::size_t>(r)] * m;
        }
    return acc;
}

/// Homogeneous part of degree d, as a series of the same order.
template <class T>
basic_series<T> homogeneous_part(const basic_series<T>& a, int d) {
    basic_series<T> r(a.num_vars(), a.order());
    if (d > a.degree()) return r;
    r.grow(d);
    const auto& L = a.lay();
    for (int k = L.begin(d); k < L.begin(d + 1); ++k) r.at_rank(k) = a.raw()[static_cast<std::size_t>(k)];
    return r;
}

/// Largest coefficient modulus (scalar coefficients only).
inline double max_abs(const series& a) {
    double m = 0.0;
    for (const auto& v : a.raw()) m = std::max(m, std::abs(v));
    return m;
}
inline double max_abs(const nested_series& a) {
    double m = 0.0;
    for (const auto& v : a.raw()) m = std::max(m, max_abs(v));
    return m;
}

}  // namespace tforge
