// Walks the standard example from the series to a verified torus:
//   f = cos(alpha_1 + beta) + cos(alpha_2) + cos(beta), omega = (1, golden mean).
// Prints the regime, the roots of the bifurcation equation, beta0(eps) on the
// selected branch, residuals, and how the flow drifts from the torus over time.

#include <cstdio>

#include <lindstedt/torus.hpp>

using namespace lindstedt;

int main(int argc, char** argv) {
    const int K = argc > 1 ? std::atoi(argv[1]) : 3;
    TrigPoly f(2);
    f.add_cosine({1, 0}, 1);
    f.add_cosine({0, 1}, 0);
    f.add_cosine({0, 0}, 1);
    Frequency freq = Frequency::golden2();
    CoeffTable t = compute_series(f, freq, K);

    ScaleSystem sc = build_scales(freq, 8);
    DiagramContext ctx(f, sc);
    PlainSelfEnergy se(ctx, std::min(K, 3));
    RegimeInfo reg = classify_condition(t, &se);
    std::printf("regime: %s\n", reg.label().c_str());
    if (reg.regime != Regime::bifurcation) return 0;

    BifurcationOptions opt;
    opt.eps = {0.02, 0.01, 0.005, 0.0025, -0.0025, -0.005, -0.01, -0.02};
    BifurcationResult b = solve_bifurcation(t, reg.order, opt);
    for (auto& r : b.roots)
        std::printf("root beta0* = %.15f  order %d  leading-derivative sign %+d\n", r.beta, r.order, r.sign);

    std::printf("\n%10s %10s %22s %12s %12s %12s\n", "eps", "root", "beta0(eps)", "r_range", "r_bif", "ode dev");
    for (double eps : opt.eps) {
        int root = *b.selected_root(eps);
        double be = b.branch_point(root, eps)->beta0;
        TorusSolution sol = assemble(t, eps, be, K, reg.label());
        ResidualReport res = verify_residual(sol, f);
        OdeReport ode = verify_ode(sol, f, 10.0, 1e-3);
        std::printf("%10.4g %10d %22.15f %12.3e %12.3e %12.3e\n", eps, root, be, res.r_range, res.r_bif,
                    ode.max_deviation);
    }

    // drift of the numerical flow from the torus, eps = 0.01
    double eps = 0.01;
    double be = b.branch_point(*b.selected_root(eps), eps)->beta0;
    OdeReport ode = verify_ode(assemble(t, eps, be, K), f, 40.0, 1e-3);
    std::printf("\nmax deviation on [0, t], eps = %g:\n", eps);
    for (std::size_t i = 4; i < ode.checkpoints.size(); i += 5)
        std::printf("  t = %5.1f   %.3e\n", ode.checkpoints[i].first, ode.checkpoints[i].second);
    return 0;
}
