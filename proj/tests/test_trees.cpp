#include <catch2/catch_amalgamated.hpp>

#include <lindstedt/tree_checks.hpp>

#include "fixtures.hpp"

using namespace lindstedt;

namespace {

// Brute force over labeled rooted trees on k vertices, weight 1/k!, scale
// labels already summed (sum_s Psi_s = 1 on every line that admits a scale).
// Returns the sum for total momentum nu and root component h at beta0.
cplx labeled_tree_oracle(const TrigPoly& f, const std::vector<double>& omega, int k, const Mode& nu, int h,
                         double beta0) {
    const int d = f.d();
    auto S = f.alpha_support();
    std::vector<std::vector<cplx>> fh(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        BetaPoly p = f.project_mode(S[i]);
        for (int q = 0; q <= k + 1; ++q) {
            fh[i].push_back(p.eval(beta0));
            p = p.deriv(1);
        }
    }
    auto wdot = [&](const Mode& m) {
        double s = 0;
        for (int i = 0; i < d; ++i) s += omega[i] * m[i];
        return s;
    };
    double kfact = 1;
    for (int i = 2; i <= k; ++i) kfact *= i;

    cplx total = 0;
    std::vector<int> par(k);
    // parent[v] in {-1, 0..k-1}; exactly one root, no cycles
    std::function<void(int)> shapes = [&](int v) {
        if (v == k) {
            int roots = 0, root = -1;
            for (int i = 0; i < k; ++i)
                if (par[i] == -1) { ++roots; root = i; }
            if (roots != 1) return;
            for (int i = 0; i < k; ++i) {
                int w = i, steps = 0;
                while (w != -1 && steps <= k) { w = par[w]; ++steps; }
                if (steps > k) return;
            }
            std::vector<int> mi(k, 0), comp(k, 0);
            std::function<void(int)> modes = [&](int a) {
                if (a == k) {
                    std::vector<Mode> mom(k, Mode(d, 0));
                    for (int i = 0; i < k; ++i)
                        for (int w = i; w != -1; w = par[w])
                            for (int j = 0; j < d; ++j) mom[w][j] += S[mi[i]][j];
                    if (mom[root] != nu) return;
                    double prop = 1;
                    for (int i = 0; i < k; ++i) {
                        if (i == root) {
                            if (is_zero(mom[i])) continue;
                        } else if (is_zero(mom[i])) {
                            return;
                        }
                        double y = wdot(mom[i]);
                        prop /= y * y;
                    }
                    std::function<void(int)> comps = [&](int b) {
                        if (b == k) {
                            if (comp[root] != h) return;
                            cplx val = prop / kfact;
                            for (int v2 = 0; v2 < k; ++v2) {
                                const Mode& m = S[mi[v2]];
                                int q = 0;
                                for (int c = 0; c < k; ++c)
                                    if (par[c] == v2) {
                                        if (comp[c] == d) ++q;
                                        else val *= cplx(0, m[comp[c]]);
                                    }
                                if (comp[v2] == d) ++q;
                                else val *= -cplx(0, m[comp[v2]]);
                                val *= fh[mi[v2]][q];
                            }
                            total += val;
                            return;
                        }
                        for (int c = 0; c <= d; ++c) { comp[b] = c; comps(b + 1); }
                    };
                    comps(0);
                    return;
                }
                for (std::size_t i = 0; i < S.size(); ++i) { mi[a] = static_cast<int>(i); modes(a + 1); }
            };
            modes(0);
            return;
        }
        for (int p = -1; p < k; ++p) {
            if (p == v) continue;
            par[v] = p;
            shapes(v + 1);
        }
    };
    shapes(0);
    return total;
}

struct Setup {
    TrigPoly f;
    Frequency freq = Frequency::golden2();
    ScaleSystem sc;
    DiagramContext ctx;
    CoeffTable t;
    explicit Setup(TrigPoly g, int K = 4)
        : f(g), sc(build_scales(freq, 8)), ctx(g, sc), t(compute_series(g, freq, K)) {}
};

}  // namespace

TEST_CASE("labeled-tree oracle reproduces the recursion coefficients") {
    Setup s(fixtures::standard_f());
    const int d = 2;
    for (int k = 1; k <= 3; ++k) {
        std::set<Mode> modes;
        for (auto& [nu, v] : s.t.coeff[k]) modes.insert(nu);
        for (const Mode& nu : modes)
            for (int h = 0; h <= d; ++h)
                for (double be : {0.3, 2.1}) {
                    cplx want = s.t.a(k, nu, h).eval(be);
                    cplx got = labeled_tree_oracle(s.f, s.freq.omega(), k, nu, h, be);
                    INFO("k=" << k << " nu=" << detail::mode_str(nu) << " h=" << h);
                    CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
                }
    }
}

TEST_CASE("labeled-tree oracle at zero momentum gives the previous-order zero modes") {
    Setup s(fixtures::standard_f());
    for (int k = 1; k <= 3; ++k)
        for (double be : {0.3, 2.1}) {
            cplx g = labeled_tree_oracle(s.f, s.freq.omega(), k, Mode{0, 0}, 2, be);
            CHECK(std::abs(g - zero_mode_beta(s.t, k - 1).eval(be)) < 1e-10);
            for (int j = 0; j < 2; ++j) {
                cplx a = labeled_tree_oracle(s.f, s.freq.omega(), k, Mode{0, 0}, j, be);
                CHECK(std::abs(a - zero_mode_alpha(s.t, k - 1)[j].eval(be)) < 1e-10);
            }
        }
}

TEST_CASE("class sums with scale labels match the recursion") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g);
        auto rep = check_tree_sums(s.ctx, s.t, 3, 3, fixtures::beta_samples());
        for (auto& c : rep.checks) {
            INFO(c.name << " " << c.deviation << " " << c.detail);
            CHECK(c.pass());
        }
    }
}

TEST_CASE("class symmetry factor counts identical sibling subtrees") {
    Diagram D;
    D.parent = {-1, 0, 0, 0};
    D.nu = {{0, 1}, {1, 0}, {1, 0}, {0, 1}};
    D.h = D.e = {2, 2, 2, 2};
    CHECK(canonicalize(D).size() > 0);
    CHECK(D.symmetry == Catch::Approx(0.5));
    D.nu[3] = {1, 0};
    canonicalize(D);
    CHECK(D.symmetry == Catch::Approx(1.0 / 6.0));
    D.h[3] = D.e[3] = 0;
    canonicalize(D);
    CHECK(D.symmetry == Catch::Approx(0.5));

    // relabeling children does not change the class key
    Diagram A, B;
    A.parent = B.parent = {-1, 0, 0};
    A.nu = {{0, 0}, {1, 0}, {0, 1}};
    B.nu = {{0, 0}, {0, 1}, {1, 0}};
    A.h = A.e = B.h = B.e = {2, 2, 2};
    CHECK(canonicalize(A) == canonicalize(B));
}

TEST_CASE("node factor of a single node") {
    Setup s(fixtures::standard_f());
    Diagram D;
    D.parent = {-1};
    D.nu = {{1, 0}};
    D.h = D.e = {0};
    auto kids = detail::children_of(D);
    // h = alpha_1: -i nu_1 hat f_nu; hat f_(1,0) = e^{i beta}/2
    BetaPoly nf = node_factor(s.ctx, D, kids, 0);
    for (double be : {0.0, 0.7})
        CHECK(std::abs(nf.eval(be) - cplx(0, -1) * 0.5 * std::exp(cplx(0, be))) < 1e-15);
    D.h = D.e = {2};
    nf = node_factor(s.ctx, D, kids, 0);
    CHECK(std::abs(nf.eval(0.7) - cplx(0, 0.5) * std::exp(cplx(0, 0.7))) < 1e-15);
    // convex flag flips the alpha sign only
    DiagramContext cx(s.f, s.sc, true);
    D.h = D.e = {0};
    CHECK(node_factor(cx, D, kids, 0).eval(0.7) == -node_factor(s.ctx, D, kids, 0).eval(0.7));
}

TEST_CASE("self-energy cluster detection") {
    // chain 0 <- 1 <- 2 <- 3 with nu_1 + nu_2 = 0: lines 1, 2 carry the same
    // momentum as line 3's subtree exit, making {1, 2} a cluster when line 2
    // is on a scale below lines 1 and 3.
    Diagram D;
    D.parent = {-1, 0, 1, 2};
    D.nu = {{1, 0}, {0, 1}, {0, -1}, {1, 0}};
    D.h = D.e = {2, 2, 2, 2};
    compute_momenta(D);
    D.scale = {0, 3, 1, 3};
    auto hits = find_self_energy_clusters(D, 100, false);
    bool found = false;
    for (auto& h : hits)
        if (h.threshold == 1 && h.nodes == std::vector<int>{1, 2}) {
            found = true;
            CHECK(h.exit_line == 1);
            CHECK(h.entering_line == 3);
        }
    CHECK(found);
    // raising the internal scale to the external ones removes it
    D.scale = {0, 3, 3, 3};
    for (auto& h : find_self_energy_clusters(D, 100, false)) CHECK(h.nodes != std::vector<int>{1, 2});

    // a zero-mode node with one entering line is a scale -1 cluster
    Diagram Z;
    Z.parent = {-1, 0, 1};
    Z.nu = {{1, 0}, {0, 0}, {0, 1}};
    Z.h = Z.e = {2, 2, 2};
    compute_momenta(Z);
    Z.scale = {0, 2, 2};
    hits = find_self_energy_clusters(Z, 100, false);
    REQUIRE(!hits.empty());
    CHECK(hits[0].threshold == -1);
    CHECK(hits[0].nodes == std::vector<int>{1});
    CHECK(find_self_energy_clusters(Z, -1, false).empty());
}

TEST_CASE("a cluster at the root needs the root line above it") {
    // {0, 1} has zero momentum and line 2 enters it with the root momentum
    Diagram D;
    D.parent = {-1, 0, 1};
    D.nu = {{0, 1}, {0, -1}, {1, 0}};
    D.h = D.e = {2, 2, 2};
    compute_momenta(D);
    auto has_pair = [&] {
        for (auto& h : find_self_energy_clusters(D, 100, false))
            if (h.nodes == std::vector<int>{0, 1}) return true;
        return false;
    };
    D.scale = {3, 1, 3};
    CHECK(has_pair());
    D.scale = {1, 1, 3};
    CHECK_FALSE(has_pair());
    D.scale = {0, 1, 3};
    CHECK_FALSE(has_pair());
}

TEST_CASE("strict clusters exclude path lines carrying the entering momentum") {
    // cluster {0, 1, 2}, entering at 2; path line of node 2 has offset nu_2,
    // and nu_2 = 0 would repeat the entering momentum.
    Diagram D;
    D.parent = {-1, 0, 1};
    D.nu = {{1, 0}, {-1, 0}, {0, 0}};
    D.h = D.e = {2, 2, 2};
    D.enter = 2;
    D.enter_comp = 2;
    compute_momenta(D);
    D.scale = {1, 0, 0};  // exiting line above the cluster
    bool plain = false, strict = false;
    for (auto& h : find_self_energy_clusters(D, 100, false)) plain |= h.nodes.size() == 3;
    for (auto& h : find_self_energy_clusters(D, 100, true)) strict |= h.nodes.size() == 3;
    CHECK(plain);
    CHECK_FALSE(strict);
}

TEST_CASE("plain self-energy: order one and the direct formula") {
    Setup s(fixtures::standard_f());
    PlainSelfEnergy se(s.ctx, 3);
    // order 1: the zero-mode node only; beta-beta entry is d^2 hat f_0 = -cos
    for (int n = -1; n <= 3; ++n) {
        auto C = se.cumulative(1, n, 0.01, 0.4);
        CHECK(std::abs(C(2, 2).v + std::cos(0.4)) < 1e-15);
        auto M = se.single(1, n, 0.01, 0.4);
        CHECK(std::abs(M(2, 2).v - (n == -1 ? -std::cos(0.4) : 0.0)) < 1e-15);
    }
    // where every line is inside the scale range the limit is sum F prod 1/y^2
    const double x = 0.003;
    REQUIRE(se.limit_exact(2, x));
    for (double be : {0.2, 1.3}) {
        Matrix<cplx> want(3);
        for (auto& sk : se.skeletons(2)) {
            cplx w = sk.factor.eval(be);
            for (std::size_t l = 0; l < sk.c.size(); ++l) {
                double y = sk.c[l] + (sk.path[l] ? x : 0.0);
                w /= y * y;
            }
            want(sk.u, sk.e) += w;
        }
        auto L = se.limit(2, x, be);
        for (int u = 0; u < 3; ++u)
            for (int e = 0; e < 3; ++e) CHECK(std::abs(L(u, e).v - want(u, e)) < 1e-10);
    }
    // single-scale pieces telescope to the cumulative sum
    for (int n = 0; n <= 4; ++n) {
        auto C = se.cumulative(2, n, x, 0.9);
        JetMatrix S(3);
        for (int p = -1; p <= n; ++p) S = S + se.single(2, p, x, 0.9);
        for (int u = 0; u < 3; ++u)
            for (int e = 0; e < 3; ++e) CHECK(std::abs(C(u, e).v - S(u, e).v) < 1e-10);
    }
}

TEST_CASE("self-energy identity suites") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g);
        PlainSelfEnergy se(s.ctx, 3);
        auto check = [](const Report& r) {
            for (auto& c : r.checks) {
                INFO(r.suite << ": " << c.name << " dev=" << c.deviation << " " << c.detail);
                CHECK(c.pass());
            }
        };
        check(check_zero_modes(s.t, 4));
        check(check_self_energy_symmetries(se, 3, 4, {0.3, 1.7}));
        check(check_zero_mode_derivatives(se, s.t, 3, fixtures::beta_samples()));
        check(check_decomposition(se, 3, 2, {0.4}));
        check(variational_identity_diagnostic(se, s.t, 3, fixtures::beta_samples()));
    }
}

TEST_CASE("counting bounds on trees and clusters") {
    for (auto g : {fixtures::standard_f(), fixtures::multiscale_f()}) {
        Setup s(g);
        auto rep = check_counting(s.ctx, 3, 4);
        for (auto& c : rep.checks) {
            INFO(c.name << " " << c.detail);
            CHECK(c.pass());
        }
    }
}

TEST_CASE("a line needing a scale beyond n_max is a budget error") {
    Setup s(fixtures::standard_f());
    ScaleSystem small = build_scales(s.freq, 2);
    DiagramContext ctx(s.f, small);
    CHECK_THROWS_AS(ctx.admissible_scales(1e-6), BudgetError);
    CHECK(ctx.admissible_scales(0.0).empty());
}
