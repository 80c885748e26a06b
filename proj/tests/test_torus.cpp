#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <lindstedt/torus.hpp>

#include "fixtures.hpp"

using namespace lindstedt;

namespace {

void require_pass(const Report& r) {
    for (auto& c : r.checks) {
        INFO(r.suite << ": " << c.name << " dev=" << c.deviation << " tol=" << c.tolerance << " " << c.detail);
        CHECK(c.pass());
    }
}

double selected_beta0(const BifurcationResult& b, double eps) {
    auto r = b.selected_root(eps);
    REQUIRE(r);
    auto p = b.branch_point(*r, eps);
    REQUIRE(p);
    return p->beta0;
}

// sin(beta)^2 / 2 shifted to touch zero: only even-order zeros
BetaPoly touching_poly() {
    BetaPoly p = BetaPoly::constant(0.5);
    p += BetaPoly::cosine(2, -0.5);
    return p;
}

}  // namespace

TEST_CASE("regime classification") {
    const Frequency freq = Frequency::golden2();
    ScaleSystem sc = build_scales(freq, 8);
    SECTION("beta-only mode gives order 0") {
        for (auto f : {fixtures::standard_f(), fixtures::two_term_f()}) {
            auto t = compute_series(f, freq, 3);
            auto r = classify_condition(t);
            CHECK(r.regime == Regime::bifurcation);
            CHECK(r.order == 0);
            // G^(0) = -sin(beta0)
            for (double be : fixtures::beta_samples())
                CHECK(std::abs(zero_mode_beta(t, 0).eval(be).real() + std::sin(be)) < 1e-15);
        }
    }
    SECTION("no beta-only mode: first nonzero order is 1") {
        auto t = compute_series(fixtures::odd_order_f(), freq, 3);
        auto r = classify_condition(t);
        CHECK(r.regime == Regime::bifurcation);
        CHECK(r.order == 1);
        CHECK(zero_mode_beta(t, 0).max_abs() <= 1e-10 * t.scale[0]);
        // hand computation: a_1 = sin(psi_1 + beta0) + sin(psi_1), b = -sin(psi_1 + beta0),
        // average of d_beta d_alpha f a + d_beta^2 f b = sin(beta0) / 2
        for (double be : fixtures::beta_samples())
            CHECK(std::abs(zero_mode_beta(t, 1).eval(be).real() - 0.5 * std::sin(be)) < 1e-14);
    }
    SECTION("f without beta: every order vanishes") {
        TrigPoly f(2);
        f.add_cosine({1, 0}, 0);
        f.add_cosine({1, -1}, 0, 0.5);
        auto t = compute_series(f, freq, 3);
        DiagramContext ctx(f, sc);
        PlainSelfEnergy se(ctx, 2);
        auto r = classify_condition(t, &se);
        CHECK(r.regime == Regime::all_vanishing);
        CHECK(r.K == 3);
        CHECK(r.label().find("undetermined beyond") != std::string::npos);
    }
}

TEST_CASE("bifurcation roots and branches, even order") {
    auto t = compute_series(fixtures::standard_f(), Frequency::golden2(), 3);
    auto b = solve_bifurcation(t, 0);
    REQUIRE(b.roots.size() == 2);
    CHECK(std::abs(b.roots[0].beta) <= 1e-12);
    CHECK(std::abs(b.roots[1].beta - M_PI) <= 1e-12);
    for (auto& r : b.roots) {
        CHECK(r.order == 1);
        CHECK_FALSE(r.degenerate);
    }
    // G = -sin: decreasing through 0, increasing through pi
    CHECK(b.roots[0].sign == -1);
    CHECK(b.roots[1].sign == 1);
    require_pass(check_bifurcation(b));
    // the selected root jumps between the two signs of eps
    CHECK(*b.selected_root(1e-3) == 0);
    CHECK(*b.selected_root(-1e-3) == 1);
    for (auto& br : b.branches) {
        REQUIRE(br.points.size() == 7);
        CHECK(b.branch_point(br.root, 0.0)->beta0 == b.roots[br.root].beta);
        for (auto& p : br.points) {
            CHECK(p.converged);
            CHECK(p.residual <= 1e-12);
        }
    }
}

TEST_CASE("bifurcation roots and branches, odd order") {
    auto t = compute_series(fixtures::odd_order_f(), Frequency::golden2(), 3);
    auto b = solve_bifurcation(t, 1);
    REQUIRE(b.roots.size() == 2);
    CHECK(std::abs(b.roots[0].beta) <= 1e-12);
    CHECK(std::abs(b.roots[1].beta - M_PI) <= 1e-12);
    require_pass(check_bifurcation(b));
    // eps^2 sigma < 0 picks the root where G^(1) = sin/2 decreases, for both signs
    CHECK(*b.selected_root(1e-3) == 1);
    CHECK(*b.selected_root(-1e-3) == 1);
    for (double eps : {1e-3, -1e-3}) {
        ResidualReport r = verify_residual(assemble(t, eps, selected_beta0(b, eps), 3), fixtures::odd_order_f());
        INFO("eps " << eps << " r_range " << r.r_range);
        CHECK(r.r_range <= 1e-6);
    }
}

TEST_CASE("root finder reports touching zeros as degenerate") {
    auto roots = find_roots(touching_poly());
    REQUIRE(roots.size() == 2);
    for (auto& r : roots) {
        CHECK(r.degenerate);
        CHECK(r.order == 2);
    }
    CHECK(std::abs(roots[0].beta) < 1e-6);
    CHECK(std::abs(roots[1].beta - M_PI) < 1e-6);
    // a cubic zero is odd and kept as a sign change
    BetaPoly s3 = BetaPoly::sine(1, 0.75);
    s3 += BetaPoly::sine(3, -0.25);  // sin^3
    auto r3 = find_roots(s3);
    REQUIRE(r3.size() == 2);
    CHECK(r3[0].order == 3);
    CHECK_FALSE(r3[0].degenerate);
    CHECK(r3[0].sign == 1);
    CHECK(r3[1].sign == -1);
}

TEST_CASE("assembled torus") {
    const auto f = fixtures::standard_f();
    auto t = compute_series(f, Frequency::golden2(), 3);
    const double g = fixtures::golden;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 2 * M_PI);
    SECTION("eps = 0 is the unperturbed flow") {
        auto s = assemble(t, 0.0, 0.3, 3);
        for (int j = 0; j < 5; ++j) {
            std::vector<double> psi{U(rng), U(rng)};
            for (int q = 0; q <= 2; ++q)
                for (auto v : s.eval(psi, q)) CHECK(v == cplx(0.0));
        }
        auto r = verify_residual(s, f);
        CHECK(r.r_range == 0.0);
    }
    SECTION("real on real angles") {
        auto s = assemble(t, 0.01, 0.4, 3);
        for (int j = 0; j < 50; ++j)
            for (int q = 0; q <= 2; ++q)
                for (auto v : s.eval({U(rng), U(rng)}, q)) CHECK(std::abs(v.imag()) <= 1e-10);
    }
    SECTION("first order closed form") {
        // a = eps (sin(psi_1 + beta0), sin(psi_2) / gamma^2), b = -eps sin(psi_1 + beta0)
        const double eps = 0.01, be = 0.8;
        auto s = assemble(t, eps, be, 1);
        for (int j = 0; j < 20; ++j) {
            std::vector<double> psi{U(rng), U(rng)};
            auto v = s.eval(psi, 0);
            auto w = s.eval(psi, 1);
            CHECK(std::abs(v[0].real() - eps * std::sin(psi[0] + be)) < 1e-15);
            CHECK(std::abs(v[1].real() - eps * std::sin(psi[1]) / (g * g)) < 1e-15);
            CHECK(std::abs(v[2].real() + eps * std::sin(psi[0] + be)) < 1e-15);
            // derivatives along the flow
            CHECK(std::abs(w[0].real() - eps * std::cos(psi[0] + be)) < 1e-15);
            CHECK(std::abs(w[1].real() - eps * std::cos(psi[1]) / g) < 1e-15);
        }
    }
    SECTION("orders beyond the table are rejected") {
        CHECK_THROWS_AS(assemble(t, 0.01, 0.0, 4), ConfigError);
    }
}

TEST_CASE("range residual scales with the truncation order") {
    const auto f = fixtures::standard_f();
    auto t = compute_series(f, Frequency::golden2(), 3);
    auto b = solve_bifurcation(t, 0);
    std::vector<ResidualReport> rs;
    for (double eps : {1e-3, 5e-4}) rs.push_back(verify_residual(assemble(t, eps, selected_beta0(b, eps), 3), f));
    INFO("r_range " << rs[0].r_range << " " << rs[1].r_range);
    CHECK(std::log2(rs[0].r_range / rs[1].r_range) >= 3.5);
    CHECK(rs[0].r_range <= 1e-6);
    CHECK(rs[0].r_bif_alpha <= 1e-9 * 1e-3);
    // away from the root the zero-mode residual is larger
    auto off = verify_residual(assemble(t, 1e-3, 0.9, 3), f);
    CHECK(off.r_bif > 100 * rs[0].r_bif);
    CHECK(off.r_bif_alpha <= 1e-9 * 1e-3);
}

TEST_CASE("numerical flow follows the torus") {
    const auto f = fixtures::standard_f();
    auto t = compute_series(f, Frequency::golden2(), 3);
    SECTION("eps = 0") {
        auto r = verify_ode(assemble(t, 0.0, 0.0, 3), f, 10.0, 1e-3);
        CHECK(r.max_deviation <= 1e-10);
        CHECK_FALSE(r.escaped);
    }
    SECTION("deviation ratio under halving eps") {
        BifurcationOptions o;
        o.eps = {0.01, 0.005};
        auto b = solve_bifurcation(t, 0, o);
        std::vector<double> dev;
        for (double eps : o.eps) {
            auto r = verify_ode(assemble(t, eps, selected_beta0(b, eps), 3), f, 10.0, 1e-3);
            CHECK_FALSE(r.escaped);
            CHECK(r.checkpoints.size() == 10);
            dev.push_back(r.max_deviation);
        }
        INFO("deviations " << dev[0] << " " << dev[1]);
        CHECK(dev[0] / dev[1] >= std::pow(2.0, 3.5) * 0.7);
    }
    SECTION("blow-up is reported with its time") {
        auto r = verify_ode(assemble(t, 1e4, 0.0, 3), f, 10.0, 1e-3);
        CHECK(r.escaped);
        CHECK(r.escape_time > 0.0);
        CHECK(r.escape_time <= 10.0);
    }
}

TEST_CASE("regularised chain at the selected root") {
    const auto f = fixtures::standard_f();
    const Frequency freq = Frequency::golden2();
    auto t = compute_series(f, freq, 3);
    auto b = solve_bifurcation(t, 0);
    ScaleSystem sc = build_scales(freq, 8);
    DiagramContext ctx(f, sc);
    RenormCatalog cat(ctx, 2);
    for (double eps : {1e-3, -1e-3}) require_pass(check_regularised_chain(cat, eps, selected_beta0(b, eps), 0, 2));
}
