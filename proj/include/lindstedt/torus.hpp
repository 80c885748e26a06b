#pragma once
// Bifurcation analysis and the assembled torus.
//
// The torus is parametrized as alpha(psi) = psi + a(psi), beta(psi) = beta0 + b(psi)
// with psi = omega t, a and b summed from the plain coefficient table. The
// equations of motion are alpha'' = eps d_alpha f, beta'' = -eps d_beta f.

#include <cmath>
#include <optional>

#include "resum.hpp"
#include "series.hpp"

namespace lindstedt {

// ---------------------------------------------------------------------------
// Regime

enum class Regime {
    bifurcation,        // some G^(k) is nonzero; order = first such k
    mixed_self_energy,  // every G^(k) vanishes, some d/dx M_{alpha,beta}(0) does not; order = first such k
    all_vanishing,      // nothing nonzero through the computed orders
};

struct RegimeInfo {
    Regime regime = Regime::all_vanishing;
    int order = -1;
    int K = 0;

    std::string label() const {
        switch (regime) {
            case Regime::bifurcation: return "bifurcation(k0=" + std::to_string(order) + ")";
            case Regime::mixed_self_energy: return "mixed_self_energy(k1=" + std::to_string(order) + ")";
            default: return "all_vanishing(K=" + std::to_string(K) + "): consistent with full foliation, undetermined beyond";
        }
    }
};

/// A BetaPoly counts as vanishing when its largest coefficient is at most
/// `tol` times the reference scale of its order.
inline bool vanishes(const BetaPoly& p, double scale, double tol) { return p.max_abs() <= tol * scale; }

/// Scans G^(0..K) for the first non-vanishing order; failing that, the mixed
/// alpha-beta self-energy derivative at 0 for orders 1..K_tree (if given).
inline RegimeInfo classify_condition(const CoeffTable& t, const PlainSelfEnergy* se = nullptr,
                                     double tol = 1e-10) {
    RegimeInfo r;
    r.K = t.K;
    for (int k = 0; k <= t.K; ++k)
        if (!vanishes(zero_mode_beta(t, k), t.scale[k], tol)) {
            r.regime = Regime::bifurcation;
            r.order = k;
            return r;
        }
    if (!se) return r;
    const int d = t.d;
    const int n_max = se->context().scales().n_max();
    for (int k = 1; k <= se->K(); ++k) {
        double worst = 0.0, scale = 0.0;
        for (int j = 0; j < 16; ++j) {
            double be = 2.0 * M_PI * (j + 0.37) / 16;
            auto Z = se->limit(k, 0.0, be);
            for (int i = 0; i < d; ++i) worst = std::max(worst, std::abs(Z(i, d).d1));
            scale = std::max(scale, se->term_magnitude(k, n_max, 0.0, be, false));
        }
        if (worst > tol * scale) {
            r.regime = Regime::mixed_self_energy;
            r.order = k;
            return r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bifurcation equation

struct BifurcationOptions {
    int grid = 2048;
    double root_tol = 1e-12;     // bisection interval width
    double newton_tol = 1e-12;   // |truncated G| at accepted branch points
    int newton_max = 60;
    double vanish_tol = 1e-10;
    std::vector<double> eps = {1e-3, 5e-4, 2.5e-4, -1e-3, -5e-4, -2.5e-4};
};

struct BifurcationRoot {
    double beta = 0.0;
    int order = 0;         // order of the zero
    int sign = 0;          // sign of the leading nonzero derivative
    bool degenerate = false;  // even order: no sign change
    double residual = 0.0;    // |G^(k0)(beta)|
};

struct BranchPoint {
    double eps = 0.0;
    double beta0 = 0.0;
    double residual = 0.0;  // |sum_{k=k0}^{K} eps^{k-k0} G^(k)(beta0)|
    int iterations = 0;
    bool converged = false;
    double slope_sign_product = 0.0;  // eps * d/dbeta0 sum_k eps^k G^(k)
};

struct Branch {
    int root = 0;
    std::vector<BranchPoint> points;  // sorted by eps
};

struct BifurcationResult {
    int k0 = -1;  // -1: every order vanishes through K
    int K = 0;
    double scale = 0.0;  // reference scale of G^(k0)
    std::vector<BifurcationRoot> roots;
    std::vector<Branch> branches;
    std::vector<std::string> notes;

    /// Index of the root whose branch is selected for this sign of eps:
    /// eps^{k0+1} times the sign of the leading derivative must be negative.
    std::optional<int> selected_root(double eps) const {
        if (eps == 0.0) return std::nullopt;
        for (std::size_t r = 0; r < roots.size(); ++r) {
            if (roots[r].degenerate) continue;
            double s = std::pow(eps, k0 + 1) * roots[r].sign;
            if (s < 0) return int(r);
        }
        return std::nullopt;
    }
    const BranchPoint* branch_point(int root, double eps) const {
        for (auto& b : branches)
            if (b.root == root)
                for (auto& p : b.points)
                    if (p.eps == eps) return &p;
        return nullptr;
    }
};

namespace detail {

inline double real_eval(const BetaPoly& p, double beta) { return p.eval(beta).real(); }

/// Sum |c_m| |m|^q: scale of the q-th derivative.
inline double deriv_scale(const BetaPoly& p, int q) {
    double s = 0.0;
    for (auto& [m, c] : p.coeffs()) s += std::abs(c) * std::pow(std::abs(double(m)), q);
    return s;
}

/// Order and sign of a zero: the first derivative above 1e-8 of its scale.
inline std::pair<int, int> zero_order(const BetaPoly& g, double beta) {
    for (int q = 1; q <= 12; ++q) {
        BetaPoly dq = g.deriv(q);
        double v = real_eval(dq, beta);
        if (std::abs(v) > 1e-8 * deriv_scale(g, q)) return {q, v > 0 ? 1 : -1};
    }
    return {0, 0};
}

}  // namespace detail

/// Zeros of a real-valued BetaPoly on [0, 2pi): sign changes on a uniform
/// grid refined by bisection and a Newton polish; touching zeros (local minima
/// of |G| reaching the vanishing threshold) are kept and marked degenerate.
inline std::vector<BifurcationRoot> find_roots(const BetaPoly& G, const BifurcationOptions& opt = {}) {
    std::vector<BifurcationRoot> roots;
    const BetaPoly dG = G.deriv(1);
    const double scale = G.max_abs();
    const int N = opt.grid;
    std::vector<double> xs(N + 1), gs(N + 1);
    for (int i = 0; i <= N; ++i) {
        xs[i] = 2.0 * M_PI * i / N;
        gs[i] = detail::real_eval(G, xs[i]);
    }
    auto polish = [&](double b) {
        for (int it = 0; it < 3; ++it) {
            double d = detail::real_eval(dG, b);
            if (d == 0.0) break;
            double nb = b - detail::real_eval(G, b) / d;
            if (std::abs(nb - b) > 1e-10) break;
            b = nb;
        }
        return b;
    };
    auto wrap = [](double b) {
        b = std::fmod(b, 2.0 * M_PI);
        if (b < 0) b += 2.0 * M_PI;
        if (b >= 2.0 * M_PI - 1e-13) b = 0.0;
        return b;
    };
    std::vector<double> found;
    auto add_root = [&](double b, bool degenerate) {
        b = wrap(b);
        for (double f : found)
            if (std::abs(f - b) < 1e-9 || std::abs(std::abs(f - b) - 2 * M_PI) < 1e-9) return;
        found.push_back(b);
        BifurcationRoot r;
        r.beta = b;
        auto [q, s] = detail::zero_order(G, b);
        r.order = q;
        r.sign = s;
        r.degenerate = degenerate || q % 2 == 0;
        r.residual = std::abs(detail::real_eval(G, b));
        roots.push_back(r);
    };
    for (int i = 0; i < N; ++i) {
        if (gs[i] == 0.0) { add_root(xs[i], false); continue; }
        if (gs[i] * gs[i + 1] >= 0.0) continue;
        double lo = xs[i], hi = xs[i + 1], glo = gs[i];
        while (hi - lo > opt.root_tol) {
            double mid = 0.5 * (lo + hi);
            double gm = detail::real_eval(G, mid);
            if (gm == 0.0) { lo = hi = mid; break; }
            if ((gm < 0) == (glo < 0)) { lo = mid; glo = gm; }
            else hi = mid;
        }
        add_root(polish(0.5 * (lo + hi)), false);
    }
    for (int i = 0; i < N; ++i) {
        int a = (i + N - 1) % N, c = i + 1;
        if (!(std::abs(gs[i]) <= std::abs(gs[a]) && std::abs(gs[i]) <= std::abs(gs[c]))) continue;
        if (gs[a] * gs[c] <= 0.0 || gs[i] * gs[a] <= 0.0) continue;
        double lo = xs[i] - 2 * M_PI / N, hi = xs[i] + 2 * M_PI / N;
        double dlo = detail::real_eval(dG, lo), dhi = detail::real_eval(dG, hi);
        if (dlo * dhi > 0) continue;
        while (hi - lo > opt.root_tol) {
            double mid = 0.5 * (lo + hi);
            double dm = detail::real_eval(dG, mid);
            if ((dm < 0) == (dlo < 0)) { lo = mid; dlo = dm; }
            else hi = mid;
        }
        double b = 0.5 * (lo + hi);
        if (std::abs(detail::real_eval(G, b)) <= opt.vanish_tol * std::max(scale, 1e-300)) add_root(b, true);
    }
    std::sort(roots.begin(), roots.end(),
              [](const BifurcationRoot& p, const BifurcationRoot& q) { return p.beta < q.beta; });
    return roots;
}

/// Roots of G^(k0) via find_roots; branches beta0(eps) by Newton on
/// sum_{k=k0}^{K} eps^{k-k0} G^(k), continued in |eps| from the root, with
/// step halving when the residual does not drop.
inline BifurcationResult solve_bifurcation(const CoeffTable& t, int k0, const BifurcationOptions& opt = {}) {
    BifurcationResult res;
    res.k0 = k0;
    res.K = t.K;
    if (k0 < 0 || k0 > t.K) throw ConfigError("bifurcation order out of range");
    const BetaPoly G = zero_mode_beta(t, k0);
    res.scale = G.max_abs();
    if (vanishes(G, t.scale[k0], opt.vanish_tol)) throw ConfigError("G at the bifurcation order vanishes");
    res.roots = find_roots(G, opt);
    if (std::none_of(res.roots.begin(), res.roots.end(), [](auto& r) { return !r.degenerate; }))
        res.notes.push_back("degenerate: no sign change of G^(k0); every zero has even order");

    // branches
    std::vector<BetaPoly> Gk(t.K + 1), dGk(t.K + 1);
    for (int k = k0; k <= t.K; ++k) {
        Gk[k] = zero_mode_beta(t, k);
        dGk[k] = Gk[k].deriv(1);
    }
    auto H = [&](double eps, double b, bool derivative) {
        double s = 0.0;
        for (int k = t.K; k >= k0; --k) s = s * eps + detail::real_eval(derivative ? dGk[k] : Gk[k], b);
        return s;
    };
    std::vector<double> pos, neg;
    for (double e : opt.eps)
        if (e != 0.0) (e > 0 ? pos : neg).push_back(e);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end(), std::greater<>());
    for (std::size_t r = 0; r < res.roots.size(); ++r) {
        if (res.roots[r].degenerate) continue;
        Branch br;
        br.root = int(r);
        br.points.push_back({0.0, res.roots[r].beta, std::abs(H(0.0, res.roots[r].beta, false)), 0, true, 0.0});
        for (auto* side : {&pos, &neg}) {
            double b = res.roots[r].beta;
            for (double eps : *side) {
                BranchPoint p;
                p.eps = eps;
                double h = H(eps, b, false);
                int it = 0;
                for (; it < opt.newton_max && std::abs(h) > opt.newton_tol; ++it) {
                    double dh = H(eps, b, true);
                    if (dh == 0.0) break;
                    double step = -h / dh, nb = b + step, nh = H(eps, nb, false);
                    int halvings = 0;
                    while (std::abs(nh) >= std::abs(h) && halvings < 30) {
                        step *= 0.5;
                        nb = b + step;
                        nh = H(eps, nb, false);
                        ++halvings;
                    }
                    if (halvings == 30) break;
                    b = nb;
                    h = nh;
                }
                p.beta0 = b;
                p.residual = std::abs(h);
                p.iterations = it;
                p.converged = p.residual <= opt.newton_tol;
                // eps * d/dbeta0 of the unnormalized sum eps^k G^(k)
                p.slope_sign_product = eps * std::pow(eps, k0) * H(eps, b, true);
                if (!p.converged)
                    res.notes.push_back("Newton did not converge at eps=" + format_double(eps) + " from root " +
                                        format_double(res.roots[r].beta));
                br.points.push_back(p);
            }
        }
        std::sort(br.points.begin(), br.points.end(),
                  [](const BranchPoint& p, const BranchPoint& q) { return p.eps < q.eps; });
        res.branches.push_back(std::move(br));
    }
    return res;
}

/// Root-set and branch checks: at least two sign-changing roots with
/// alternating signs, root residuals, Newton residuals, the slope-sign rule
/// on selected branches, and the continuity pattern in eps (same root for
/// both signs of eps when k0 is odd, different roots when k0 is even).
inline Report check_bifurcation(const BifurcationResult& b, double root_tol = 1e-10, double newton_tol = 1e-12) {
    Report rep{"bifurcation equation", {}};
    std::vector<const BifurcationRoot*> odd;
    double worst_root = 0.0;
    for (auto& r : b.roots)
        if (!r.degenerate) {
            odd.push_back(&r);
            worst_root = std::max(worst_root, r.residual);
        }
    rep.add("at least two sign-changing roots", odd.size() >= 2 ? 0.0 : 1.0, 0.0,
            std::to_string(odd.size()) + " roots");
    double alt = 0.0;
    for (std::size_t i = 0; i < odd.size(); ++i)
        if (odd[i]->sign == odd[(i + 1) % odd.size()]->sign && odd.size() > 1) alt = 1.0;
    rep.add("leading-derivative signs alternate", alt, 0.0);
    rep.add("root residual |G(beta*)|", b.scale > 0 ? worst_root / b.scale : worst_root, root_tol);
    double worst_newton = 0.0, worst_slope = 0.0;
    int failures = 0;
    for (auto& br : b.branches)
        for (auto& p : br.points) {
            worst_newton = std::max(worst_newton, p.residual);
            failures += !p.converged;
            if (p.eps != 0.0 && b.selected_root(p.eps) == br.root)
                worst_slope = std::max(worst_slope, p.slope_sign_product);
        }
    rep.add("Newton residual on every branch point", worst_newton, newton_tol,
            std::to_string(failures) + " unconverged");
    rep.add("eps * slope <= 0 on selected branches", std::max(worst_slope, 0.0), 0.0);
    auto up = b.selected_root(1.0), down = b.selected_root(-1.0);
    bool ok = up && down && ((b.k0 % 2 == 1) == (*up == *down));
    rep.add(b.k0 % 2 ? "odd k0: one root serves both signs of eps" : "even k0: the selected root jumps at eps = 0",
            ok ? 0.0 : 1.0, 0.0);
    return rep;
}

// ---------------------------------------------------------------------------
// Torus

struct TorusSolution {
    double eps = 0.0;
    double beta0 = 0.0;
    int K = 0;
    int d = 0;
    std::vector<double> omega;
    std::string regime;
    /// sum_k eps^k coefficient of e^{i nu.psi} per component
    std::map<Mode, std::vector<cplx>> coeff;

    /// Component values of (omega.d_psi)^q applied to (a, b) at psi; the
    /// beta entry excludes beta0. Complex: reality is checked by callers.
    std::vector<cplx> eval(const std::vector<double>& psi, int q = 0) const {
        std::vector<cplx> r(d + 1, cplx{});
        for (auto& [nu, c] : coeff) {
            double wn = 0.0, ph = 0.0;
            for (int i = 0; i < d; ++i) {
                wn += omega[i] * nu[i];
                ph += psi[i] * nu[i];
            }
            cplx fac = std::polar(1.0, ph) * std::pow(cplx(0, wn), q);
            for (int h = 0; h <= d; ++h) r[h] += c[h] * fac;
        }
        return r;
    }
};

/// Sums the plain coefficients of orders <= K at beta0 into the torus.
inline TorusSolution assemble(const CoeffTable& t, double eps, double beta0, int K, const std::string& regime = {}) {
    if (K > t.K) throw ConfigError("torus order K exceeds the coefficient table");
    TorusSolution s;
    s.eps = eps;
    s.beta0 = beta0;
    s.K = K;
    s.d = t.d;
    s.omega = t.omega;
    s.regime = regime;
    if (eps == 0.0) return s;
    for (int k = 1; k <= K; ++k) {
        double ek = std::pow(eps, k);
        for (auto& [nu, v] : t.coeff[k]) {
            auto& c = s.coeff[nu];
            c.resize(t.d + 1);
            for (int h = 0; h <= t.d; ++h) c[h] += ek * v[h].eval(beta0);
        }
    }
    return s;
}

struct ResidualReport {
    double r_range = 0.0;        // max over alpha and beta components
    double r_range_alpha = 0.0;
    double r_range_beta = 0.0;
    double r_bif = 0.0;          // |grid mean of eps d_beta f|
    double r_bif_alpha = 0.0;    // max_i |grid mean of eps d_alpha_i f|
    double imag = 0.0;           // largest imaginary part of a, b on the grid
};

namespace detail {

struct ForceField {
    std::vector<TrigPoly> dalpha;
    TrigPoly dbeta;
    explicit ForceField(const TrigPoly& f) : dbeta(f.deriv_beta()) {
        for (int j = 0; j < f.d(); ++j) dalpha.push_back(f.deriv_alpha(j));
    }
    /// (d_alpha f, d_beta f) at (alpha, beta); real parts.
    std::vector<double> operator()(const std::vector<double>& alpha, double beta) const {
        std::vector<double> r;
        for (auto& p : dalpha) r.push_back(p.eval(alpha, beta).real());
        r.push_back(dbeta.eval(alpha, beta).real());
        return r;
    }
};

}  // namespace detail

/// Range residuals (nonzero Fourier part of each equation of motion) and the
/// zero-mode (bifurcation) residuals on a grid^d lattice of psi:
///   alpha: (omega.d)^2 a - eps d_alpha f(psi + a, beta0 + b)
///   beta:  (omega.d)^2 b + eps d_beta f(psi + a, beta0 + b)
inline ResidualReport verify_residual(const TorusSolution& sol, const TrigPoly& f, int grid = 32) {
    ResidualReport rep;
    const int d = sol.d;
    detail::ForceField F(f);
    std::vector<std::vector<double>> res;
    std::vector<double> mean(d + 1, 0.0), fmean(d + 1, 0.0);
    std::int64_t count = 0;
    detail::odometer(d, grid, [&](const std::vector<int>& j) {
        std::vector<double> psi(d);
        for (int i = 0; i < d; ++i) psi[i] = 2.0 * M_PI * j[i] / grid;
        auto v = sol.eval(psi, 0);
        auto acc = sol.eval(psi, 2);
        std::vector<double> alpha(d);
        for (int i = 0; i < d; ++i) {
            alpha[i] = psi[i] + v[i].real();
            rep.imag = std::max(rep.imag, std::abs(v[i].imag()));
        }
        rep.imag = std::max(rep.imag, std::abs(v[d].imag()));
        auto force = F(alpha, sol.beta0 + v[d].real());
        std::vector<double> r(d + 1);
        for (int i = 0; i < d; ++i) r[i] = acc[i].real() - sol.eps * force[i];
        r[d] = acc[d].real() + sol.eps * force[d];
        for (int h = 0; h <= d; ++h) {
            mean[h] += r[h];
            fmean[h] += sol.eps * force[h];
        }
        res.push_back(std::move(r));
        ++count;
    });
    for (int h = 0; h <= d; ++h) {
        mean[h] /= double(count);
        fmean[h] /= double(count);
    }
    for (auto& r : res)
        for (int h = 0; h <= d; ++h) {
            double e = std::abs(r[h] - mean[h]);
            if (h < d) rep.r_range_alpha = std::max(rep.r_range_alpha, e);
            else rep.r_range_beta = std::max(rep.r_range_beta, e);
        }
    rep.r_range = std::max(rep.r_range_alpha, rep.r_range_beta);
    rep.r_bif = std::abs(fmean[d]);
    for (int i = 0; i < d; ++i) rep.r_bif_alpha = std::max(rep.r_bif_alpha, std::abs(fmean[i]));
    return rep;
}

struct OdeReport {
    double max_deviation = 0.0;
    std::vector<std::pair<double, double>> checkpoints;  // (t, max deviation on [0, t])
    bool escaped = false;
    double escape_time = 0.0;
};

/// Integrates the equations of motion by classical RK4 from the torus point
/// at psi = psi0, in the co-moving variables u = alpha - omega t, and compares
/// with the prediction alpha = omega t + a(psi0 + omega t), beta = beta0 + b(...).
inline OdeReport verify_ode(const TorusSolution& sol, const TrigPoly& f, double T = 10.0, double h = 1e-3,
                            const std::vector<double>& psi0 = {}) {
    if (!(h > 0) || !(T >= 0)) throw ConfigError("ODE step and horizon must be positive");
    const int d = sol.d;
    std::vector<double> p0 = psi0.empty() ? std::vector<double>(d, 0.0) : psi0;
    detail::ForceField F(f);
    // state: u (d), beta (1), u' (d), beta' (1)
    const int D = d + 1;
    auto predict = [&](double t) {
        std::vector<double> psi(d);
        for (int i = 0; i < d; ++i) psi[i] = p0[i] + sol.omega[i] * t;
        auto v = sol.eval(psi, 0), w = sol.eval(psi, 1);
        std::vector<double> y(2 * D);
        for (int i = 0; i < d; ++i) {
            y[i] = p0[i] + v[i].real();
            y[D + i] = w[i].real();
        }
        y[d] = sol.beta0 + v[d].real();
        y[D + d] = w[d].real();
        return y;
    };
    auto rhs = [&](double t, const std::vector<double>& y) {
        std::vector<double> alpha(d);
        for (int i = 0; i < d; ++i) alpha[i] = y[i] + sol.omega[i] * t;
        auto force = F(alpha, y[d]);
        std::vector<double> dy(2 * D);
        for (int i = 0; i < D; ++i) dy[i] = y[D + i];
        for (int i = 0; i < d; ++i) dy[D + i] = sol.eps * force[i];
        dy[D + d] = -sol.eps * force[d];
        return dy;
    };
    OdeReport rep;
    std::vector<double> y = predict(0.0);
    const long steps = std::lround(T / h);
    const double dt = steps > 0 ? T / double(steps) : 0.0;
    auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
        std::vector<double> r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    double next_mark = 1.0;
    for (long n = 1; n <= steps; ++n) {
        double t = (n - 1) * dt;
        auto k1 = rhs(t, y);
        auto k2 = rhs(t + dt / 2, axpy(y, dt / 2, k1));
        auto k3 = rhs(t + dt / 2, axpy(y, dt / 2, k2));
        auto k4 = rhs(t + dt, axpy(y, dt, k3));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        double tn = n * dt;
        auto p = predict(tn);
        double dev = 0.0;
        bool finite = true;
        for (int i = 0; i < D; ++i) {
            if (!std::isfinite(y[i])) finite = false;
            dev = std::max(dev, std::abs(y[i] - p[i]));
        }
        if (!finite || dev > 1e3) {
            rep.escaped = true;
            rep.escape_time = tn;
            break;
        }
        rep.max_deviation = std::max(rep.max_deviation, dev);
        if (tn >= next_mark - 1e-12 || n == steps) {
            rep.checkpoints.push_back({tn, rep.max_deviation});
            next_mark += 1.0;
        }
    }
    return rep;
}

/// xi_n(Delta_n) along the regularised chain at (eps, beta0) for n = 0..n_max,
/// with the orders below k0 of the beta-beta entry subtracted.
inline Report check_regularised_chain(const RenormCatalog& cat, double eps, double beta0, int k0, int K) {
    Report rep{"regularised chain", {}};
    ResumOptions o;
    o.K = K;
    o.eps = eps;
    o.beta0 = beta0;
    o.regularised = true;
    o.low_order_bb = low_order_beta_beta(cat, eps, beta0, k0);
    NumericResum R(cat, o);
    const int n_max = cat.context().scales().n_max();
    for (int n = 0; n <= n_max; ++n) {
        double xi = R.xi_factor(n);
        rep.add("xi_n(Delta_n) = 1, n=" + std::to_string(n), std::abs(1.0 - xi), 0.0,
                "Delta=" + format_double(R.delta(n)));
    }
    // every propagator on a sampled grid stays finite
    for (int n = 0; n <= n_max; ++n)
        for (double x : symmetry_samples(cat.context().scales(), n, 10)) R.propagator(n, x);
    rep.add("no singular propagator on the sampled grid", double(R.violations().size()), 0.0);
    return rep;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json regime_to_json(const RegimeInfo& r) {
    static const char* names[] = {"bifurcation", "mixed_self_energy", "all_vanishing"};
    return {{"regime", names[int(r.regime)]}, {"order", r.order}, {"K", r.K}, {"label", r.label()}};
}

inline nlohmann::json bifurcation_to_json(const BifurcationResult& b) {
    nlohmann::json roots = nlohmann::json::array(), branches = nlohmann::json::array();
    for (auto& r : b.roots)
        roots.push_back({{"beta0", r.beta}, {"order", r.order}, {"sign", r.sign}, {"degenerate", r.degenerate},
                         {"residual", r.residual}});
    for (auto& br : b.branches) {
        nlohmann::json pts = nlohmann::json::array();
        for (auto& p : br.points)
            pts.push_back({{"eps", p.eps}, {"beta0", p.beta0}, {"residual", p.residual},
                           {"iterations", p.iterations}, {"converged", p.converged},
                           {"eps_times_slope", p.slope_sign_product}});
        branches.push_back({{"root", br.root}, {"points", pts}});
    }
    return {{"k0", b.k0}, {"K", b.K}, {"scale", b.scale}, {"roots", roots}, {"branches", branches}, {"notes", b.notes}};
}

inline BifurcationResult bifurcation_from_json(const nlohmann::json& j) {
    BifurcationResult b;
    b.k0 = j.at("k0").get<int>();
    b.K = j.at("K").get<int>();
    b.scale = j.at("scale").get<double>();
    for (auto& r : j.at("roots"))
        b.roots.push_back({r.at("beta0").get<double>(), r.at("order").get<int>(), r.at("sign").get<int>(),
                           r.at("degenerate").get<bool>(), r.at("residual").get<double>()});
    for (auto& br : j.at("branches")) {
        Branch x;
        x.root = br.at("root").get<int>();
        for (auto& p : br.at("points"))
            x.points.push_back({p.at("eps").get<double>(), p.at("beta0").get<double>(), p.at("residual").get<double>(),
                                p.at("iterations").get<int>(), p.at("converged").get<bool>(),
                                p.at("eps_times_slope").get<double>()});
        b.branches.push_back(std::move(x));
    }
    b.notes = j.at("notes").get<std::vector<std::string>>();
    return b;
}

inline nlohmann::json torus_to_json(const TorusSolution& s) {
    nlohmann::json c = nlohmann::json::array();
    for (auto& [nu, v] : s.coeff)
        for (int h = 0; h <= s.d; ++h)
            c.push_back({{"nu", nu}, {"h", component_name(h, s.d)}, {"re", v[h].real()}, {"im", v[h].imag()}});
    return {{"eps", s.eps}, {"beta0", s.beta0}, {"K", s.K}, {"d", s.d}, {"omega", s.omega},
            {"regime", s.regime}, {"coefficients", c}};
}

inline TorusSolution torus_from_json(const nlohmann::json& j) {
    TorusSolution s;
    s.eps = j.at("eps").get<double>();
    s.beta0 = j.at("beta0").get<double>();
    s.K = j.at("K").get<int>();
    s.d = j.at("d").get<int>();
    s.omega = j.at("omega").get<std::vector<double>>();
    s.regime = j.at("regime").get<std::string>();
    for (auto& rec : j.at("coefficients")) {
        auto& v = s.coeff[rec.at("nu").get<Mode>()];
        v.resize(s.d + 1);
        v[component_index(rec.at("h").get<std::string>(), s.d)] = {rec.at("re").get<double>(), rec.at("im").get<double>()};
    }
    return s;
}

inline nlohmann::json residual_to_json(const ResidualReport& r) {
    return {{"r_range", r.r_range}, {"r_range_alpha", r.r_range_alpha}, {"r_range_beta", r.r_range_beta},
            {"r_bif", r.r_bif}, {"r_bif_alpha", r.r_bif_alpha}, {"max_imag", r.imag}};
}

inline nlohmann::json ode_to_json(const OdeReport& r) {
    nlohmann::json cp = nlohmann::json::array();
    for (auto& [t, dev] : r.checkpoints) cp.push_back({{"t", t}, {"max_deviation", dev}});
    return {{"max_deviation", r.max_deviation}, {"escaped", r.escaped}, {"escape_time", r.escape_time},
            {"checkpoints", cp}};
}

}  // namespace lindstedt
