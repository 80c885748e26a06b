#pragma once
// Second-order forward-mode jets in one real parameter x.
//
// A Jet2 carries (f, f', f'') at a point. Arithmetic follows the Leibniz rules
// exactly; smooth scalar functions enter through compose() with their analytic
// derivatives.

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

namespace lindstedt {

template <class T>
struct Jet2 {
    T v{}, d1{}, d2{};

    Jet2() = default;
    Jet2(T value) : v(value) {}  // NOLINT: constants promote implicitly
    Jet2(T value, T first, T second) : v(value), d1(first), d2(second) {}

    /// The identity jet x at a point.
    static Jet2 variable(T x) { return {x, T(1), T(0)}; }

    template <class U>
    explicit operator Jet2<U>() const { return {U(v), U(d1), U(d2)}; }

    Jet2& operator+=(const Jet2& o) { v += o.v; d1 += o.d1; d2 += o.d2; return *this; }
    Jet2& operator-=(const Jet2& o) { v -= o.v; d1 -= o.d1; d2 -= o.d2; return *this; }
    Jet2& operator*=(const Jet2& o) {
        T nd2 = d2 * o.v + T(2) * d1 * o.d1 + v * o.d2;
        T nd1 = d1 * o.v + v * o.d1;
        v *= o.v; d1 = nd1; d2 = nd2;
        return *this;
    }
    Jet2& operator/=(const Jet2& o) { return *this *= o.reciprocal(); }
    Jet2& operator*=(const T& s) { v *= s; d1 *= s; d2 *= s; return *this; }

    Jet2 reciprocal() const {
        T r = T(1) / v;
        T r2 = r * r;
        // (1/g)' = -g'/g^2, (1/g)'' = 2g'^2/g^3 - g''/g^2
        return {r, -d1 * r2, T(2) * d1 * d1 * r2 * r - d2 * r2};
    }

    Jet2 operator-() const { return {-v, -d1, -d2}; }
};

template <class T> Jet2<T> operator+(Jet2<T> a, const Jet2<T>& b) { return a += b; }
template <class T> Jet2<T> operator-(Jet2<T> a, const Jet2<T>& b) { return a -= b; }
template <class T> Jet2<T> operator*(Jet2<T> a, const Jet2<T>& b) { return a *= b; }
template <class T> Jet2<T> operator/(Jet2<T> a, const Jet2<T>& b) { return a /= b; }
template <class T> Jet2<T> operator*(Jet2<T> a, const T& s) { return a *= s; }
template <class T> Jet2<T> operator*(const T& s, Jet2<T> a) { return a *= s; }

template <class T>
bool operator==(const Jet2<T>& a, const Jet2<T>& b) {
    return a.v == b.v && a.d1 == b.d1 && a.d2 == b.d2;
}

/// Chain rule: g(x(t)) given g, g', g'' at x(t).v.
template <class T, class R>
Jet2<T> compose(const Jet2<T>& x, R g, R gp, R gpp) {
    return {T(g), T(gp) * x.d1, T(gpp) * x.d1 * x.d1 + T(gp) * x.d2};
}

/// Promote a real jet to a complex one.
inline Jet2<std::complex<double>> to_complex(const Jet2<double>& j) {
    return {j.v, j.d1, j.d2};
}

inline Jet2<std::complex<double>> conj(const Jet2<std::complex<double>>& j) {
    return {std::conj(j.v), std::conj(j.d1), std::conj(j.d2)};
}

/// Largest component magnitude, used for tolerances.
template <class T>
double max_abs(const Jet2<T>& j) {
    using std::abs;
    return std::max({abs(j.v), abs(j.d1), abs(j.d2)});
}

template <class T>
std::ostream& operator<<(std::ostream& os, const Jet2<T>& j) {
    return os << "(" << j.v << "; " << j.d1 << ", " << j.d2 << ")";
}

}  // namespace lindstedt
