#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <lindstedt/resum.hpp>

#include "fixtures.hpp"

using namespace lindstedt;

namespace {

struct Setup {
    TrigPoly f;
    Frequency freq = Frequency::golden2();
    ScaleSystem sc;
    DiagramContext ctx;
    RenormCatalog cat;
    explicit Setup(TrigPoly g, int K = 3) : f(g), sc(build_scales(freq, 8)), ctx(g, sc), cat(ctx, K) {}
};

void require_pass(const Report& r) {
    for (auto& c : r.checks) {
        INFO(r.suite << ": " << c.name << " dev=" << c.deviation << " tol=" << c.tolerance << " " << c.detail);
        CHECK(c.pass());
    }
}

using DSeries = EpsSeries<double>;

}  // namespace

TEST_CASE("eps series arithmetic") {
    DSeries a(std::vector<double>{1.0, 2.0, -1.0});
    DSeries b(std::vector<double>{0.5, 0.0, 3.0});
    auto p = a * b;
    // (1 + 2e - e^2)(0.5 + 3e^2) = 0.5 + e + 2.5e^2 + ...
    CHECK(p.length() == 3);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 1.0);
    CHECK(p[2] == 2.5);
    auto one = a * a.reciprocal();
    CHECK(std::abs(one[0] - 1.0) < 1e-15);
    CHECK(std::abs(one[1]) < 1e-15);
    CHECK(std::abs(one[2]) < 1e-15);
    // constants combine with longer series without truncating them
    DSeries c(2.0);
    CHECK((c * a).length() == 3);
    CHECK((c + a)[0] == 3.0);
    CHECK((c + a)[2] == -1.0);
    CHECK(DSeries::monomial(4.0, 2, 3).coeff(2) == 4.0);
    CHECK(DSeries::monomial(4.0, 4, 3) == DSeries(0.0));
    CHECK(std::abs(a.eval(0.1) - (1.0 + 0.2 - 0.01)) < 1e-15);
    auto q = b / a;
    auto back = q * a;
    for (int k = 0; k < 3; ++k) CHECK(std::abs(back[k] - b[k]) < 1e-14);
}

TEST_CASE("propagator at eps = 0 is Psi_n / x^2 times the identity") {
    Setup s(fixtures::standard_f(), 2);
    ResumOptions o;
    o.K = 2;
    o.eps = 0.0;
    o.beta0 = 0.4;
    NumericResum R(s.cat, o);
    for (int n = 0; n <= 4; ++n)
        for (double x : {0.3, -0.05, 0.011, 0.0042}) {
            auto G = R.propagator(n, x);
            double want = s.sc.Psi(n, x) / (x * x);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(std::abs(G(i, j).v - (i == j ? want : 0.0)) < 1e-12 * (1 + want));
        }
    auto I = R.propagator(-1, 0.2);
    CHECK(I(0, 0).v == cplx(1.0));
    CHECK(I(0, 2).v == cplx(0.0));
}

TEST_CASE("low-order self-energies agree with the plain clusters") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g, 2);
        PlainSelfEnergy se(s.ctx, 2);
        for (double be : {0.7, 2.9}) {
            ResumOptions o;
            o.K = 2;
            o.beta0 = be;
            SymbolicResum R(s.cat, o);
            for (int n = -1; n <= 4; ++n)
                for (double x : {0.003, -0.01, 0.02, 0.06}) {
                    auto M = R.self_energy_scale(n, x);
                    for (int k = 1; k <= 2; ++k) {
                        auto P = se.single(k, n, x, be);
                        for (int u = 0; u < 3; ++u)
                            for (int e = 0; e < 3; ++e) {
                                INFO("n=" << n << " x=" << x << " k=" << k << " u=" << u << " e=" << e);
                                CHECK(std::abs(M(u, e).coeff(k).v - P(u, e).v) <= 1e-10 * (1 + std::abs(P(u, e).v)));
                            }
                    }
                    CHECK(std::abs(M(2, 2).coeff(0).v) == 0.0);
                }
            // the scale -1 piece is the zero-mode node: eps d^2 hat f_0 in the beta-beta entry
            auto Mm = R.self_energy_scale(-1, 0.01);
            CHECK(std::abs(Mm(2, 2).coeff(1).v + std::cos(be)) < 1e-15);
            CHECK(Mm(0, 0).coeff(1).v == cplx(0.0));
        }
    }
}

TEST_CASE("inverses of class members stay in the class") {
    std::mt19937_64 rng(12345);
    std::vector<double> xs;
    for (int j = 1; j <= 5; ++j) xs.push_back(0.13 * j);
    for (int size : {3, 4}) {
        for (int trial = 0; trial < 100; ++trial) {
            auto B = random_class_member(size, rng);
            auto c = class_closure_check(B, xs);
            INFO("size " << size << " trial " << trial << " " << c.detail);
            CHECK(c.pass());
        }
        auto I = [size](double) { return Matrix<cplx>::identity(size); };
        CHECK(class_closure_check(I, xs).deviation == 0.0);
        auto D = [size](double x) {
            Matrix<cplx> m(size);
            for (int i = 0; i < size; ++i) m(i, i) = 2.0 + x * x + i;
            return m;
        };
        CHECK(class_closure_check(D, xs).pass());
    }
    // a matrix breaking the mixed-block antisymmetry is caught
    auto bad = [](double x) {
        Matrix<cplx> m = Matrix<cplx>::identity(3);
        m(0, 2) = 1.0 + x;
        m(2, 0) = 1.0 - x;
        return m;
    };
    CHECK_FALSE(class_closure_check(bad, {0.2}).pass());
}

TEST_CASE("resummed self-energy symmetries and small-x orders") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g, 2);
        for (double eps : {0.01, -0.01})
            for (double be : {0.3, 1.9}) {
                ResumOptions o;
                o.K = 2;
                o.eps = eps;
                o.beta0 = be;
                NumericResum R(s.cat, o);
                require_pass(check_resummed_symmetries(R, 4));
                require_pass(check_resummed_orders(R, 4));
                CHECK(R.violations().empty());
            }
    }
}

TEST_CASE("resummed coefficients re-expand to the plain series") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g, 3);
        auto t = compute_series(g, s.freq, 3);
        require_pass(check_reexpansion(s.cat, t, 3, {0.3, 1.7, 4.4}));
    }
}

TEST_CASE("determinant formula gap shrinks like eps^2") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g, 2);
        const std::vector<double> xs{1e-4, 3e-4, 1e-3, -2e-3};
        std::vector<double> gaps;
        for (double eps : {1e-4, 1e-5}) {
            ResumOptions o;
            o.K = 2;
            o.eps = eps;
            o.beta0 = 0.7;
            NumericResum R(s.cat, o);
            gaps.push_back(determinant_monitor(R, 3, xs).deviation);
        }
        INFO("gaps " << gaps[0] << " " << gaps[1]);
        CHECK(gaps[0] / gaps[1] > 80.0);
        CHECK(gaps[0] / gaps[1] < 120.0);
    }
    Setup s(fixtures::standard_f(), 2);
    ResumOptions o;
    o.K = 2;
    o.eps = 1e-5;
    o.beta0 = 0.7;
    NumericResum R(s.cat, o);
    for (int p = 0; p <= 4; ++p) CHECK(determinant_monitor(R, p, {1e-4, 5e-4, -1e-3}, 1e-8).pass());
}

TEST_CASE("regularised propagators") {
    Setup s(fixtures::standard_f(), 2);
    SECTION("low orders of the beta-beta entry") {
        for (double be : {0.0, 1.1}) {
            // k0 = 2 subtracts eps d^2 hat f_0 = -eps cos(beta0); k0 <= 1 subtracts nothing
            auto low2 = low_order_beta_beta(s.cat, 0.01, be, 2);
            auto low1 = low_order_beta_beta(s.cat, 0.01, be, 1);
            auto low0 = low_order_beta_beta(s.cat, 0.01, be, 0);
            for (int n = 0; n <= s.sc.n_max(); ++n) {
                CHECK(std::abs(low2[n] + 0.01 * std::cos(be)) < 1e-15);
                CHECK(low1[n] == 0.0);
                CHECK(low0[n] == 0.0);
            }
        }
    }
    SECTION("xi is 1 near the zero of the bifurcation function at eps > 0") {
        for (int k0 : {0, 1}) {
            ResumOptions o;
            o.K = 2;
            o.eps = 0.01;
            o.beta0 = 0.0;
            o.regularised = true;
            o.low_order_bb = low_order_beta_beta(s.cat, o.eps, o.beta0, k0);
            NumericResum Rr(s.cat, o);
            o.regularised = false;
            NumericResum Ru(s.cat, o);
            for (int n = 0; n <= 4; ++n) {
                CHECK(Rr.delta(n) < 0.0);
                CHECK(Rr.xi_factor(n) == 1.0);
                for (double x : {0.2, 0.03, -0.004}) {
                    auto A = Rr.propagator(n, x), B = Ru.propagator(n, x);
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) CHECK(A(i, j).v == B(i, j).v);
                }
            }
            CHECK(Rr.violations().empty());
        }
    }
    SECTION("positive Delta switches the self-energy off") {
        ResumOptions o;
        o.K = 2;
        o.eps = -0.01;
        o.beta0 = 0.0;
        o.regularised = true;
        o.low_order_bb = low_order_beta_beta(s.cat, o.eps, o.beta0, 1);
        NumericResum R(s.cat, o);
        for (int n = 0; n <= 4; ++n) {
            CHECK(R.delta(n) > 0.0);
            CHECK(R.xi_factor(n) == 0.0);
            double x = 0.02;
            auto G = R.propagator(n, x);
            double want = s.sc.Psi(n, x) / (x * x);
            for (int i = 0; i < 3; ++i) CHECK(std::abs(G(i, i).v - want) <= 1e-14 * (1 + want));
        }
        CHECK(R.violations().empty());
    }
}

TEST_CASE("renormalised diagrams contain no self-energy cluster and obey the line bound") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g, 3);
        for (int k = 1; k <= 3; ++k)
            for (auto& T : s.cat.trees(k)) CHECK(find_self_energy_clusters(T.diagram, INT_MAX, false).empty());
        for (int n = 0; n <= s.sc.n_max(); ++n)
            for (auto& T : s.cat.clusters(n)) {
                CHECK(T.scale == n);
                CHECK(find_self_energy_clusters(T.diagram, n, false).empty());
            }
        require_pass(check_renormalised_counting(s.cat));
    }
}
