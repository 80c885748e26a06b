#pragma once
// Small dense matrices over a generic scalar ring, with LU inversion.
//
// The scalar only needs +, -, *, division by a pivot, and pivot_magnitude().
// Pivoting uses the magnitude of the leading part of the scalar (the value of a
// jet, the eps^0 coefficient of a series), which is where invertibility lives.

#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"

namespace lindstedt {

inline double pivot_magnitude(double x) { return std::abs(x); }
inline double pivot_magnitude(const std::complex<double>& x) { return std::abs(x); }
template <class T>
double pivot_magnitude(const Jet2<T>& x) { return pivot_magnitude(x.v); }

template <class S>
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, const S& fill = S{}) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = S(1.0);
        return m;
    }

    int size() const { return n_; }
    S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    Matrix& operator+=(const Matrix& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        Matrix r(a.n_);
        for (int i = 0; i < a.n_; ++i)
            for (int k = 0; k < a.n_; ++k)
                for (int j = 0; j < a.n_; ++j) r(i, j) += a(i, k) * b(k, j);
        return r;
    }
    template <class T>
    Matrix& scale(const T& s) {
        for (auto& x : a_) x = x * s;
        return *this;
    }

    template <class F>
    auto map(F fn) const {
        using R = decltype(fn(a_[0]));
        Matrix<R> r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(i, j) = fn((*this)(i, j));
        return r;
    }

private:
    int n_ = 0;
    std::vector<S> a_;
};

template <class S>
struct LUResult {
    Matrix<S> inverse;
    S determinant;
};

/// Gauss-Jordan with partial pivoting. Throws SingularMatrix when the best
/// pivot magnitude falls below `tiny`.
template <class S>
LUResult<S> lu_invert(Matrix<S> a, double tiny = 1e-300) {
    const int n = a.size();
    Matrix<S> inv = Matrix<S>::identity(n);
    S det(1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = pivot_magnitude(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            double m = pivot_magnitude(a(r, col));
            if (m > best) { best = m; piv = r; }
        }
        if (!(best > tiny)) throw SingularMatrix("pivot " + std::to_string(best) + " in column " + std::to_string(col));
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(col, j), a(piv, j));
                std::swap(inv(col, j), inv(piv, j));
            }
            det = -det;
        }
        S p = a(col, col);
        det = det * p;
        S pinv = S(1.0) / p;
        for (int j = 0; j < n; ++j) {
            a(col, j) = a(col, j) * pinv;
            inv(col, j) = inv(col, j) * pinv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            S fct = a(r, col);
            for (int j = 0; j < n; ++j) {
                a(r, j) -= fct * a(col, j);
                inv(r, j) -= fct * inv(col, j);
            }
        }
    }
    return {inv, det};
}

}  // namespace lindstedt
