#pragma once
// Truncated power series in eps with coefficients in a ring T.
//
// Length is carried per value: constants have length 1 and combine with longer
// series without padding. A product keeps the longer of the two lengths, so
// every result is exact through the order of its longest operand.

#include <algorithm>
#include <type_traits>
#include <vector>

#include "linalg.hpp"

namespace lindstedt {

template <class T>
class EpsSeries {
public:
    EpsSeries() : c_(1, T{}) {}
    EpsSeries(const T& c0) : c_(1, c0) {}  // NOLINT: implicit lift of constants
    EpsSeries(double c0) requires(!std::is_same_v<T, double>) : c_(1, T(c0)) {}  // NOLINT
    explicit EpsSeries(std::vector<T> c) : c_(std::move(c)) {
        if (c_.empty()) c_.push_back(T{});
    }

    /// coeff * eps^k, truncated at order K (zero when k > K).
    static EpsSeries monomial(const T& coeff, int k, int K) {
        std::vector<T> c(K + 1, T{});
        if (k <= K) c[k] = coeff;
        return EpsSeries(std::move(c));
    }

    int length() const { return static_cast<int>(c_.size()); }
    int order() const { return length() - 1; }
    const T& operator[](int k) const { return c_[k]; }
    T& operator[](int k) { return c_[k]; }
    /// Coefficient of eps^k, zero beyond the stored length.
    T coeff(int k) const { return k < length() ? c_[k] : T{}; }

    template <class E>
    T eval(const E& eps) const {
        T r{};
        for (int k = order(); k >= 0; --k) r = r * eps + c_[k];
        return r;
    }

    EpsSeries& operator+=(const EpsSeries& o) {
        if (o.length() > length()) c_.resize(o.length(), T{});
        for (int k = 0; k < o.length(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    EpsSeries& operator-=(const EpsSeries& o) {
        if (o.length() > length()) c_.resize(o.length(), T{});
        for (int k = 0; k < o.length(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    EpsSeries operator-() const {
        EpsSeries r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend EpsSeries operator+(EpsSeries a, const EpsSeries& b) { return a += b; }
    friend EpsSeries operator-(EpsSeries a, const EpsSeries& b) { return a -= b; }
    friend EpsSeries operator*(const EpsSeries& a, const EpsSeries& b) {
        const int L = std::max(a.length(), b.length());
        std::vector<T> c(L, T{});
        for (int i = 0; i < a.length(); ++i)
            for (int j = 0; j < b.length() && i + j < L; ++j) c[i + j] += a.c_[i] * b.c_[j];
        return EpsSeries(std::move(c));
    }
    EpsSeries& operator*=(const EpsSeries& o) { return *this = *this * o; }
    friend EpsSeries operator*(EpsSeries a, const T& s) {
        for (auto& x : a.c_) x = x * s;
        return a;
    }
    friend EpsSeries operator*(const T& s, EpsSeries a) { return a * s; }

    /// Needs an invertible eps^0 coefficient.
    EpsSeries reciprocal() const {
        std::vector<T> r(length(), T{});
        T inv0 = T(1.0) / c_[0];
        r[0] = inv0;
        for (int n = 1; n < length(); ++n) {
            T s{};
            for (int j = 1; j <= n; ++j) s += c_[j] * r[n - j];
            r[n] = -(inv0 * s);
        }
        return EpsSeries(std::move(r));
    }
    friend EpsSeries operator/(const EpsSeries& a, const EpsSeries& b) { return a * b.reciprocal(); }

    friend bool operator==(const EpsSeries& a, const EpsSeries& b) {
        const int L = std::max(a.length(), b.length());
        for (int k = 0; k < L; ++k)
            if (!(a.coeff(k) == b.coeff(k))) return false;
        return true;
    }

private:
    std::vector<T> c_;
};

template <class T>
double pivot_magnitude(const EpsSeries<T>& s) {
    return pivot_magnitude(s[0]);
}

}  // namespace lindstedt
