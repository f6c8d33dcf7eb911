#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace tforge {

/// Ordered tuple of non-negative integers.
class multi_index {
public:
    multi_index() = default;
    explicit multi_index(int dim) : e_(static_cast<std::size_t>(dim), 0) {
        if (dim <= 0) throw std::invalid_argument("multi_index: dimension must be positive");
    }
    multi_index(std::initializer_list<int> il) : e_(il) { validate(); }
    explicit multi_index(std::vector<int> v) : e_(std::move(v)) { validate(); }

    int dim() const { return static_cast<int>(e_.size()); }
    int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
    int& operator[](int i) { return e_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& entries() const { return e_; }

    int norm() const {
        int s = 0;
        for (int v : e_) s += v;
        return s;
    }

    /// Entrywise partial order.
    bool leq(const multi_index& o) const {
        check_dim(o);
        for (std::size_t i = 0; i < e_.size(); ++i)
            if (e_[i] > o.e_[i]) return false;
        return true;
    }

    /// Product of entry factorials as a double.
    double factorial() const {
        double f = 1.0;
        for (int v : e_)
            for (int k = 2; k <= v; ++k) f *= k;
        return f;
    }

    multi_index operator+(const multi_index& o) const {
        check_dim(o);
        multi_index r(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
        return r;
    }
    multi_index operator-(const multi_index& o) const {
        check_dim(o);
        multi_index r(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) {
            r.e_[i] -= o.e_[i];
            if (r.e_[i] < 0) throw std::invalid_argument("multi_index: negative entry in difference");
        }
        return r;
    }
    bool operator==(const multi_index& o) const = default;

    void check_dim(const multi_index& o) const {
        if (o.e_.size() != e_.size()) throw std::invalid_argument("multi_index: dimension mismatch");
    }

private:
    void validate() const {
        if (e_.empty()) throw std::invalid_argument("multi_index: dimension must be positive");
        for (int v : e_)
            if (v < 0) throw std::invalid_argument("multi_index: entries must be non-negative");
    }
    std::vector<int> e_;
};

inline std::ostream& operator<<(std::ostream& os, const multi_index& m) {
    os << '(';
    for (int i = 0; i < m.dim(); ++i) os << (i ? "," : "") << m[i];
    return os << ')';
}

}  // namespace tforge
