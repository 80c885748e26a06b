#pragma once
// Shared systems for the test suites.

#include <cmath>
#include <vector>

#include <lindstedt/fourier.hpp>

namespace fixtures {

inline const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

/// d = 2, f = cos(alpha_1 + beta) + cos(alpha_2) + cos(beta).
inline lindstedt::TrigPoly standard_f() {
    lindstedt::TrigPoly f(2);
    f.add_cosine({1, 0}, 1);
    f.add_cosine({0, 1}, 0);
    f.add_cosine({0, 0}, 1);
    return f;
}

/// d = 2, f = cos(alpha_1 + beta) + cos(beta): the two-term variant.
inline lindstedt::TrigPoly two_term_f() {
    lindstedt::TrigPoly f(2);
    f.add_cosine({1, 0}, 1);
    f.add_cosine({0, 0}, 1);
    return f;
}

}  // namespace fixtures

namespace fixtures {

/// A system whose low-order trees already reach scale 1: modes (2,-3) and
/// (3,-5) combine into (5,-8) with |omega.nu| ~ 0.056.
inline lindstedt::TrigPoly multiscale_f() {
    lindstedt::TrigPoly f(2);
    f.add_cosine({2, -3}, 1);
    f.add_cosine({3, -5}, 0);
    f.add_cosine({0, 0}, 1);
    return f;
}

/// d = 2, f = cos(alpha_1 + beta) + cos(alpha_1): no beta-only mode, so the
/// first zero-mode order vanishes and G^(1) = sin(beta) / 2 (found by a search
/// over two-term cosine systems).
inline lindstedt::TrigPoly odd_order_f() {
    lindstedt::TrigPoly f(2);
    f.add_cosine({1, 0}, 1);
    f.add_cosine({1, 0}, 0);
    return f;
}

inline std::vector<double> beta_samples(int n = 8) {
    std::vector<double> b;
    for (int i = 0; i < n; ++i) b.push_back(0.3 + 2.0 * M_PI * i / n);
    return b;
}

}  // namespace fixtures
