// ============================================================================
// Plain Lindstedt recursion.
// ============================================================================
#include <catch_amalgamated.hpp>

#include <lindstedt/series.hpp>

#include "fixtures.hpp"

using namespace lindstedt;
using Catch::Approx;

TEST_CASE("first order closed form", "[series]") {
    auto f = fixtures::standard_f();
    auto freq = Frequency::golden2();
    auto t = compute_series(f, freq, 3);
    for (const Mode& nu : f.alpha_support()) {
        if (is_zero(nu)) continue;
        double w = freq.dot(nu);
        BetaPoly fh = f.project_mode(nu);
        for (int i = 0; i < 2; ++i) {
            BetaPoly expect = fh * cplx(0, nu[i]) * cplx(-1.0 / (w * w));
            CHECK((t.a(1, nu, i) - expect).max_abs() <= 1e-15);
        }
        CHECK((t.a(1, nu, 2) - fh.deriv(1) * cplx(1.0 / (w * w))).max_abs() <= 1e-15);
    }
    // first order of the standard example, written out: a_1 along (1,0)
    // is -(i/1)(1/2) e^{i beta0}
    CHECK(t.a(1, {1, 0}, 0).coeff(1) == cplx(0, -0.5));
}

TEST_CASE("alpha-independent f gives no range coefficients", "[series]") {
    auto f = TrigPoly::cosine(2, {0, 0}, 1);
    auto t = compute_series(f, Frequency::golden2(), 4);
    for (int k = 1; k <= 4; ++k) CHECK(t.coeff[k].empty());
    CHECK((zero_mode_beta(t, 0) - BetaPoly::sine(1, -1.0)).max_abs() == 0.0);
    for (int k = 0; k <= 4; ++k)
        for (auto& p : zero_mode_alpha(t, k)) CHECK(p.empty());
}

TEST_CASE("zero modes of the standard example", "[series]") {
    auto f = fixtures::standard_f();
    auto t = compute_series(f, Frequency::golden2(), 4);
    // G^(0) = -sin(beta0)
    CHECK((zero_mode_beta(t, 0) - BetaPoly::sine(1, -1.0)).max_abs() <= 1e-16);
    for (int k = 0; k <= 4; ++k) {
        double scale = t.scale[k];
        for (auto& p : zero_mode_alpha(t, k)) CHECK(p.max_abs() <= 1e-10 * scale);
        CHECK(std::abs(zero_mode_beta(t, k).coeff(0)) <= 1e-12 * scale);
    }
    auto g = compute_series(TrigPoly::cosine(2, {1, 0}, 1), Frequency::golden2(), 2);
    CHECK(zero_mode_beta(g, 0).empty());
}

TEST_CASE("support, reality and range identity", "[series][property]") {
    auto f = fixtures::standard_f();
    auto freq = Frequency::golden2();
    auto t = compute_series(f, freq, 4);
    const int Na = f.alpha_degree();
    for (int k = 1; k <= 4; ++k)
        for (auto& [nu, v] : t.coeff[k]) {
            CHECK(!is_zero(nu));
            CHECK(l1(nu) <= k * Na);
            Mode neg = nu;
            for (int& c : neg) c = -c;
            for (int h = 0; h <= 2; ++h) {
                double s = std::max(1e-300, v[h].max_abs());
                CHECK((t.a(k, neg, h) - v[h].conj_reflect()).max_abs() <= 1e-13 * s);
            }
        }
    CHECK(range_identity_residual(t, f, freq) <= 1e-12);
}

TEST_CASE("convex flag flips the first-order alpha coefficients", "[series]") {
    auto f = fixtures::standard_f();
    auto freq = Frequency::golden2();
    auto a = compute_series(f, freq, 2);
    SeriesOptions o;
    o.convex_sign_flip = true;
    auto b = compute_series(f, freq, 2, o);
    CHECK((a.a(1, {1, 0}, 0) + b.a(1, {1, 0}, 0)).max_abs() == 0.0);
    CHECK(a.a(1, {1, 0}, 2) == b.a(1, {1, 0}, 2));
}

TEST_CASE("series export round trip", "[series][io]") {
    auto f = fixtures::standard_f();
    auto t = compute_series(f, Frequency::golden2(), 3);
    auto j = nlohmann::json::parse(series_to_json(t).dump());
    auto back = series_coefficients_from_json(j);
    std::size_t count = 0;
    for (int k = 1; k <= 3; ++k)
        for (auto& [nu, v] : t.coeff[k])
            for (int h = 0; h <= 2; ++h) {
                if (v[h].empty()) continue;
                ++count;
                CHECK(back.at({k, nu, h}) == v[h]);
            }
    CHECK(back.size() == count);
    auto csv = series_to_csv(t);
    CHECK(csv.rfind("k,nu,h,m,re,im\n", 0) == 0);
}
