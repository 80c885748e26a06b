#pragma once
// Renormalised expansion.
//
// Lines carry a pair of components (e on the parent side, u = h of the node
// the line leaves) and a matrix propagator
//     G^[n](y) = Psi_n(y) (y^2 1 - MM^[n-1](y))^{-1},   G^[-1] = 1,
// with MM^[n](y) = sum_{q=-1}^{n} chi_q(y) M^[q](y). M^[q] sums renormalised
// self-energy clusters of scale q: clusters whose exiting and entering lines
// carry the same momentum, with no such cluster nested inside. Renormalised
// trees contain no self-energy cluster at all.
//
// The engine is generic in the scalar: Jet2<cplx> for a numeric eps, or
// EpsSeries<Jet2<cplx>> to track eps orders exactly. Jets are always in the
// momentum y of the entering line.

#include <array>
#include <climits>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "epsseries.hpp"
#include "report.hpp"
#include "tree_checks.hpp"
#include "trees.hpp"

namespace lindstedt {

using EpsJet = EpsSeries<cjet>;

struct RLine {
    double c;    // omega . momentum (offset when on the path)
    bool path;   // whether the entering momentum flows through
    int scale;
    int e, u;
};

/// A labeled renormalised cluster or tree with its momentum-independent data.
struct RDiagram {
    int u = 0;      // exit component (cluster) / u of the root line (tree)
    int e = 0;      // entering component (cluster) / total component (tree)
    int order = 0;
    int scale = -1; // cluster scale; for trees the largest line scale
    Mode nu;        // total momentum (trees)
    BetaPoly factor;  // symmetry * node factors
    std::vector<RLine> lines;
    Diagram diagram;
};

namespace detail {

/// Can Psi_s(c + x) be nonzero for some |x| < X?
inline bool scale_reachable(const ScaleSystem& sc, int s, double c, double X) {
    double lo = std::abs(c) > X ? std::abs(c) - X : 0.0;
    double hi = std::abs(c) + X;
    double smin = sc.alpha_at(s) / 16.0;
    double smax = s == 0 ? std::numeric_limits<double>::infinity() : sc.alpha_at(s - 1) / 8.0;
    return hi > smin && lo < smax;
}

inline std::vector<RLine> lines_of(const DiagramContext& ctx, const Diagram& D, int first) {
    std::vector<RLine> r;
    for (int v = first; v < D.order(); ++v) {
        if (D.scale[v] < 0) continue;
        r.push_back({ctx.dot(D.mom[v]), bool(D.on_path[v]), D.scale[v], D.e[v], D.h[v]});
    }
    return r;
}

inline bool factors_nonzero(const DiagramContext& ctx, const Diagram& D) {
    auto kids = children_of(D);
    for (int v = 0; v < D.order(); ++v)
        if (node_factor(ctx, D, kids, v).empty()) return false;
    return true;
}

}  // namespace detail

/// Renormalised self-energy clusters of order k on scale n. Scale -1 holds
/// the single zero-mode node. Path-line scales are kept when reachable for
/// some entering momentum |x| < alpha_{m_n}/8 (the entering line is above n).
inline std::vector<RDiagram> enumerate_renormalised_clusters(const DiagramContext& ctx, int k, int n) {
    std::vector<RDiagram> out;
    const int d = ctx.d();
    const auto& sc = ctx.scales();
    if (k == 1) {
        const Mode zero(d, 0);
        if (n != -1 || ctx.fhat(zero, 0).empty()) return out;
        for (int u = 0; u <= d; ++u)
            for (int e = 0; e <= d; ++e) {
                Diagram D;
                D.parent = {-1};
                D.nu = {zero};
                D.h = D.e = {u};
                D.scale = {0};
                D.enter = 0;
                D.enter_comp = e;
                compute_momenta(D);
                canonicalize(D);
                RDiagram r{u, e, 1, -1, {}, node_factor_product(ctx, D), {}, D};
                if (!r.factor.empty()) out.push_back(std::move(r));
            }
        return out;
    }
    if (n < 0 || k < 1) return out;
    const double X = sc.alpha_at(n) / 8.0;
    const auto& S = ctx.support();
    std::unordered_set<std::string> seen;
    std::int64_t work = 0;
    for (auto& P : detail::parent_arrays(k)) {
        detail::odometer(k, static_cast<int>(S.size()), [&](const std::vector<int>& mi) {
            Diagram D;
            D.parent = P;
            for (int i : mi) D.nu.push_back(S[i]);
            D.enter = 0;
            compute_momenta(D);
            if (!is_zero(D.mom[0])) return;
            for (int w = 0; w < k; ++w) {
                D.enter = w;
                compute_momenta(D);
                std::vector<std::vector<int>> lists(k);
                lists[0] = {n + 1};
                bool ok = true, top = false;
                for (int v = 1; v < k && ok; ++v) {
                    double c = ctx.dot(D.mom[v]);
                    if (!D.on_path[v] && is_zero(D.mom[v])) { ok = false; break; }
                    for (int s = 0; s <= n; ++s)
                        if (D.on_path[v] ? detail::scale_reachable(sc, s, c, X) : sc.Psi_support(s, c))
                            lists[v].push_back(s);
                    if (lists[v].empty()) ok = false;
                    else if (lists[v].back() == n) top = true;
                }
                if (!ok || !top) continue;
                detail::odometer(2 * k, d + 1, [&](const std::vector<int>& comps) {
                    if (++work > ctx.budget())
                        throw BudgetError("renormalised cluster enumeration at order " + std::to_string(k));
                    D.h.assign(comps.begin(), comps.begin() + k);
                    // slots: h for every node, e for the non-root nodes, the entering component
                    D.e.assign(k, D.h[0]);
                    std::copy(comps.begin() + k, comps.begin() + 2 * k - 1, D.e.begin() + 1);
                    D.enter_comp = comps[2 * k - 1];
                    if (!detail::factors_nonzero(ctx, D)) return;
                    detail::product(lists, [&](const std::vector<int>& scl) {
                        if (*std::max_element(scl.begin() + 1, scl.end()) != n) return;
                        D.scale = scl;
                        if (!find_self_energy_clusters(D, n, false).empty()) return;
                        Diagram E = D;
                        if (!seen.insert(canonicalize(E)).second) return;
                        RDiagram r{E.h[0], E.enter_comp, k, n, {}, node_factor_product(ctx, E),
                                   detail::lines_of(ctx, E, 1), E};
                        if (!r.factor.empty()) out.push_back(std::move(r));
                    });
                });
            }
        });
    }
    return out;
}

/// Renormalised trees of order k with |total momentum|_1 <= l1_max. The root
/// line has e = total component; a zero-momentum root sits on scale -1 with
/// the identity propagator, so there e = u.
inline std::vector<RDiagram> enumerate_renormalised_trees(const DiagramContext& ctx, int k, int l1_max) {
    std::vector<RDiagram> out;
    const int d = ctx.d();
    const auto& S = ctx.support();
    std::unordered_set<std::string> seen;
    std::int64_t work = 0;
    for (auto& P : detail::parent_arrays(k)) {
        detail::odometer(k, static_cast<int>(S.size()), [&](const std::vector<int>& mi) {
            Diagram D;
            D.parent = P;
            for (int i : mi) D.nu.push_back(S[i]);
            compute_momenta(D);
            if (l1(D.mom[0]) > l1_max) return;
            std::vector<std::vector<int>> lists(k);
            for (int v = 0; v < k; ++v) {
                if (is_zero(D.mom[v])) {
                    if (v > 0) return;
                    lists[v] = {-1};
                } else {
                    lists[v] = ctx.admissible_scales(ctx.dot(D.mom[v]));
                }
            }
            const bool zero_root = is_zero(D.mom[0]);
            detail::odometer(2 * k, d + 1, [&](const std::vector<int>& comps) {
                if (++work > ctx.budget())
                    throw BudgetError("renormalised tree enumeration at order " + std::to_string(k));
                D.h.assign(comps.begin(), comps.begin() + k);
                D.e.assign(comps.begin() + k, comps.end());
                if (zero_root && D.e[0] != D.h[0]) return;
                if (!detail::factors_nonzero(ctx, D)) return;
                detail::product(lists, [&](const std::vector<int>& scl) {
                    D.scale = scl;
                    if (!find_self_energy_clusters(D, INT_MAX, false).empty()) return;
                    Diagram E = D;
                    if (!seen.insert(canonicalize(E)).second) return;
                    RDiagram r{E.h[0], E.e[0], k, *std::max_element(scl.begin(), scl.end()), E.mom[0],
                               node_factor_product(ctx, E), detail::lines_of(ctx, E, 0), E};
                    if (!r.factor.empty()) out.push_back(std::move(r));
                });
            });
        });
    }
    return out;
}

/// Clusters (orders <= K, scales -1..n_max) and trees (orders <= K) of the
/// renormalised expansion. Independent of eps and beta0.
class RenormCatalog {
public:
    RenormCatalog(const DiagramContext& ctx, int K, int tree_l1_max = 3)
        : ctx_(&ctx), K_(K), l1_max_(tree_l1_max) {
        if (K < 1) throw ConfigError("K must be >= 1");
        const int n_max = ctx.scales().n_max();
        clusters_.resize(n_max + 2);
        for (int n = -1; n <= n_max; ++n)
            for (int k = 1; k <= K; ++k)
                for (auto& r : enumerate_renormalised_clusters(ctx, k, n)) clusters_[n + 1].push_back(std::move(r));
        trees_.resize(K + 1);
        for (int k = 1; k <= K; ++k) trees_[k] = enumerate_renormalised_trees(ctx, k, tree_l1_max);
    }

    const DiagramContext& context() const { return *ctx_; }
    int K() const { return K_; }
    int tree_l1_max() const { return l1_max_; }
    int d() const { return ctx_->d(); }
    const std::vector<RDiagram>& clusters(int n) const { return clusters_.at(n + 1); }
    const std::vector<RDiagram>& trees(int k) const { return trees_.at(k); }

private:
    const DiagramContext* ctx_;
    int K_, l1_max_;
    std::vector<std::vector<RDiagram>> clusters_;
    std::vector<std::vector<RDiagram>> trees_;
};

struct ResumOptions {
    int K = 2;               // eps truncation; at most the catalog's K
    double eps = 0.0;        // numeric scalar only
    double beta0 = 0.0;
    bool regularised = false;
    // sum_{k<k0} eps^k [MM^[n]_{beta,beta}(0)]^(k) per scale n (regularised runs)
    std::vector<double> low_order_bb;
};

struct PropertyViolation {
    int scale;
    double y;
    std::string what;
};

namespace detail {

inline cjet strip(const cjet& a) { return cjet(a.v); }
inline EpsJet strip(const EpsJet& a) {
    EpsJet r = a;
    for (int k = 0; k < r.length(); ++k) r[k] = cjet(r[k].v);
    return r;
}

template <class S>
S eps_term(cplx coef, int k, const ResumOptions& o);
template <>
inline cjet eps_term<cjet>(cplx coef, int k, const ResumOptions& o) {
    return cjet(coef * std::pow(o.eps, k));
}
template <>
inline EpsJet eps_term<EpsJet>(cplx coef, int k, const ResumOptions& o) {
    return EpsJet::monomial(cjet(coef), k, o.K);
}

inline cjet modulus(const cjet& a) { return cjet(std::abs(a.v)); }
inline EpsJet modulus(const EpsJet& a) {
    EpsJet r = a;
    for (int k = 0; k < r.length(); ++k) r[k] = cjet(std::abs(r[k].v));
    return r;
}

inline bool jet_is_zero(const Jet2<double>& j) { return j.v == 0.0 && j.d1 == 0.0 && j.d2 == 0.0; }

}  // namespace detail

/// Scale-recursive self-energies and propagators, memoized per (scale, y).
template <class S>
class ResumEngine {
public:
    using SMatrix = Matrix<S>;

    ResumEngine(const RenormCatalog& cat, ResumOptions opt) : cat_(&cat), opt_(std::move(opt)) {
        if (opt_.K > cat.K()) throw ConfigError("eps order K exceeds the catalog order");
        if (opt_.regularised && opt_.low_order_bb.size() < std::size_t(n_max() + 1))
            opt_.low_order_bb.resize(n_max() + 1, 0.0);
        for (int n = -1; n <= n_max(); ++n)
            for (const RDiagram& T : cat.clusters(n))
                if (T.order <= opt_.K) factor_[&T] = T.factor.eval(opt_.beta0);
        for (int k = 1; k <= opt_.K; ++k)
            for (const RDiagram& T : cat.trees(k)) factor_[&T] = T.factor.eval(opt_.beta0);
    }

    int d() const { return cat_->d(); }
    int n_max() const { return scales().n_max(); }
    const ScaleSystem& scales() const { return cat_->context().scales(); }
    const ResumOptions& options() const { return opt_; }
    const RenormCatalog& catalog() const { return *cat_; }
    const std::vector<PropertyViolation>& violations() const { return violations_; }

    /// M^[q](y): renormalised clusters of scale q at entering momentum y.
    const SMatrix& self_energy_scale(int q, double y) {
        auto key = std::make_pair(q, y);
        auto it = M_.find(key);
        if (it != M_.end()) return it->second;
        SMatrix M(d() + 1);
        for (const RDiagram& T : cat_->clusters(q)) {
            if (T.order > opt_.K) continue;
            S w = detail::eps_term<S>(factor_.at(&T), T.order, opt_);
            for (const RLine& l : T.lines) {
                const SMatrix& G = propagator(l.scale, l.c + (l.path ? y : 0.0));
                w = w * (l.path ? G(l.e, l.u) : detail::strip(G(l.e, l.u)));
            }
            M(T.u, T.e) += w;
        }
        return M_.emplace(key, std::move(M)).first->second;
    }

    /// MM^[n](y) = sum_{q=-1}^{n} chi_q(y) M^[q](y).
    SMatrix self_energy(int n, double y) {
        SMatrix MM(d() + 1);
        for (int q = -1; q <= n; ++q) {
            cjet chi = to_complex(scales().chi_n(q, Jet2<double>::variable(y)));
            if (chi == cjet{}) continue;
            SMatrix Mq = self_energy_scale(q, y);
            MM += Mq.scale(chi);
        }
        return MM;
    }

    /// Sum over scales q <= n of chi_q times sum |term| of each cluster, the
    /// largest entry; a roundoff reference for entries that cancel.
    double term_magnitude(int n, double y) {
        std::vector<double> m((d() + 1) * (d() + 1), 0.0);
        for (int q = -1; q <= n; ++q) {
            double chi = std::abs(scales().chi_n(q, Jet2<double>::variable(y)).v) +
                         std::abs(scales().chi_n(q, Jet2<double>::variable(y)).d1);
            if (chi == 0.0) continue;
            for (const RDiagram& T : cat_->clusters(q)) {
                if (T.order > opt_.K) continue;
                S w = detail::eps_term<S>(factor_.at(&T), T.order, opt_);
                for (const RLine& l : T.lines) {
                    const SMatrix& G = propagator(l.scale, l.c + (l.path ? y : 0.0));
                    w = w * (l.path ? G(l.e, l.u) : detail::strip(G(l.e, l.u)));
                }
                m[T.u * (d() + 1) + T.e] += chi * magnitude(w);
            }
        }
        return *std::max_element(m.begin(), m.end());
    }

    /// G^[n](y); G^[-1] = 1. With the regularised flag the self-energy is
    /// damped by xi_{n-1}(Delta_{n-1}). Singular matrices are recorded as
    /// violations and give a zero propagator.
    const SMatrix& propagator(int n, double y) {
        auto key = std::make_pair(n, y);
        auto it = G_.find(key);
        if (it != G_.end()) return it->second;
        const int D = d() + 1;
        SMatrix G(D);
        if (n < 0) {
            G = SMatrix::identity(D);
        } else {
            Jet2<double> yj = Jet2<double>::variable(y);
            Jet2<double> psi = scales().Psi(n, yj);
            if (!detail::jet_is_zero(psi)) {
                SMatrix A = SMatrix::identity(D).scale(to_complex(yj * yj));
                SMatrix MM = self_energy(n - 1, y);
                if (opt_.regularised) MM.scale(cjet(cplx(xi_factor(n - 1))));
                A -= MM;
                try {
                    G = lu_invert(A).inverse.scale(to_complex(psi));
                } catch (const SingularMatrix& e) {
                    violations_.push_back({n, y, e.what()});
                    G = SMatrix(D);
                }
            }
        }
        return G_.emplace(key, std::move(G)).first->second;
    }

    /// Delta_n = Re MM^[n]_{beta,beta}(0) - sum_{k<k0} eps^k [...]^(k).
    double delta(int n) {
        if (n < 0) return 0.0;
        double full = value0(self_energy(n, 0.0)(d(), d())).real();
        double low = n < int(opt_.low_order_bb.size()) ? opt_.low_order_bb[n] : 0.0;
        return full - low;
    }

    /// xi_n(Delta_n); 1 for n = -1.
    double xi_factor(int n) {
        if (n < 0) return 1.0;
        auto it = xi_.find(n);
        if (it != xi_.end()) return it->second;
        double v = scales().xi(n, delta(n));
        xi_[n] = v;
        return v;
    }

    /// Resummed coefficient summed over orders: sum_k eps^k a^[k]_nu (nu != 0),
    /// or sum_k eps^k F/G^[k] from trees of order k+1 (nu = 0). Trees with a
    /// line above n_cap are dropped (the G^{R,n} truncation).
    /// With `absolute`, every factor is replaced by its modulus: a bound on
    /// the sum of |term| per order, used as a roundoff reference.
    S coefficient(const Mode& nu, int h, int n_cap = INT_MAX, bool absolute = false) {
        S total{};
        const bool zero = is_zero(nu);
        for (int k = 1; k <= opt_.K; ++k)
            for (const RDiagram& T : cat_->trees(k)) {
                if (T.e != h || T.nu != nu || T.scale > n_cap) continue;
                cplx f = factor_.at(&T);
                S w = detail::eps_term<S>(absolute ? cplx(std::abs(f)) : f, zero ? k - 1 : k, opt_);
                for (const RLine& l : T.lines) {
                    S g = detail::strip(propagator(l.scale, l.c)(l.e, l.u));
                    w = w * (absolute ? detail::modulus(g) : g);
                }
                total += w;
            }
        return total;
    }

    /// The eps^0 value of a scalar (numeric scalars are returned as is).
    static cplx value0(const cjet& s) { return s.v; }
    static cplx value0(const EpsJet& s) { return s[0].v; }

private:
    static double magnitude(const cjet& s) { return std::abs(s.v) + std::abs(s.d1); }
    static double magnitude(const EpsJet& s) {
        double m = 0.0;
        for (int k = 0; k < s.length(); ++k) m += magnitude(s[k]);
        return m;
    }

    const RenormCatalog* cat_;
    ResumOptions opt_;
    std::map<const RDiagram*, cplx> factor_;
    std::map<std::pair<int, double>, SMatrix> M_, G_;
    std::map<int, double> xi_;
    std::vector<PropertyViolation> violations_;
};

using NumericResum = ResumEngine<cjet>;
using SymbolicResum = ResumEngine<EpsJet>;

/// Sum_{k<k0} eps^k [MM^[n]_{beta,beta}(0)]^(k) for n = 0..n_max, read from
/// the eps-tracked (unregularised) self-energies; the regularised ones agree
/// with them through order k0 - 1.
inline std::vector<double> low_order_beta_beta(const RenormCatalog& cat, double eps, double beta0, int k0) {
    ResumOptions o;
    o.K = std::min(cat.K(), std::max(k0 - 1, 0));
    o.beta0 = beta0;
    SymbolicResum sym(cat, o);
    std::vector<double> r(cat.context().scales().n_max() + 1, 0.0);
    if (k0 <= 0) return r;
    for (int n = 0; n <= cat.context().scales().n_max(); ++n) {
        EpsJet bb = sym.self_energy(n, 0.0)(cat.d(), cat.d());
        double s = 0.0;
        for (int k = 0; k < k0 && k < bb.length(); ++k) s += bb[k].v.real() * std::pow(eps, k);
        r[n] = s;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Checks

/// Class relations: B_ij(-x) = B_ji(x) on the alpha block, B_bb even,
/// B_bi(-x) = -B_ib(x). Returns the largest violation over the given pairs
/// (B(x), B(-x)), relative to the largest entry.
inline double class_violation(const Matrix<cplx>& P, const Matrix<cplx>& Q) {
    const int n = P.size();
    const int b = n - 1;
    double dev = 0.0, sc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sc = std::max({sc, std::abs(P(i, j)), std::abs(Q(i, j))});
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) dev = std::max(dev, std::abs(Q(i, j) - P(j, i)));
        dev = std::max(dev, std::abs(Q(b, i) + P(i, b)));
    }
    dev = std::max(dev, std::abs(Q(b, b) - P(b, b)));
    return sc > 0 ? dev / sc : dev;
}

/// Inverse of a class member stays in the class: for each x, checks
/// B(x)^{-1} against B(-x)^{-1}. Singular samples are skipped with a note.
template <class F>
Check class_closure_check(F B, const std::vector<double>& xs, double tol = 1e-10) {
    double worst = 0.0;
    int skipped = 0;
    for (double x : xs) {
        try {
            auto P = lu_invert(B(x)).inverse;
            auto Q = lu_invert(B(-x)).inverse;
            worst = std::max({worst, class_violation(B(x), B(-x)), class_violation(P, Q)});
        } catch (const SingularMatrix&) {
            ++skipped;
        }
    }
    return {"inverse stays in the class", worst, tol, true,
            skipped ? std::to_string(skipped) + " singular samples skipped" : ""};
}

/// A random class member of size n built from random polynomials in x of
/// degree <= deg, with a dominant diagonal so it is invertible near x = 0.
inline std::function<Matrix<cplx>(double)> random_class_member(int n, std::mt19937_64& rng, int deg = 3) {
    std::normal_distribution<double> g(0.0, 1.0);
    auto poly = [&]() {
        std::vector<cplx> c(deg + 1);
        for (auto& z : c) z = cplx(g(rng), g(rng));
        return c;
    };
    auto ev = [](const std::vector<cplx>& c, double x) {
        cplx r = 0;
        for (int k = int(c.size()) - 1; k >= 0; --k) r = r * x + c[k];
        return r;
    };
    const int b = n - 1;
    std::vector<std::vector<std::vector<cplx>>> p(n, std::vector<std::vector<cplx>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p[i][j] = poly();
    for (int i = 0; i < n; ++i) p[i][i][0] += cplx(3.0 * n, 0.0);
    return [=](double x) {
        Matrix<cplx> B(n);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
                // B_ij(x) = p_ij(x) + p_ji(-x) gives B_ij(-x) = B_ji(x)
                B(i, j) = ev(p[i][j], x) + ev(p[j][i], -x);
        for (int i = 0; i < b; ++i) {
            B(i, b) = ev(p[i][b], x);
            B(b, i) = -ev(p[i][b], -x);
        }
        B(b, b) = ev(p[b][b], x) + ev(p[b][b], -x);
        return B;
    };
}

/// Parity, transposition and conjugation relations of MM^[n](x) and its zero
/// structure at x = 0 (alpha-alpha block and its derivative, both mixed
/// blocks, the beta-beta derivative), for n = -1..n_top.
inline Report check_resummed_symmetries(NumericResum& R, int n_top, int samples = 20, double tol = 1e-9) {
    Report rep{"resummed self-energy symmetries", {}};
    const int d = R.d();
    const auto& sc = R.scales();
    for (int n = -1; n <= n_top; ++n) {
        double scale = 0.0, d_aa = 0.0, d_bb = 0.0, d_ab = 0.0;
        for (double x : symmetry_samples(sc, n, samples)) {
            auto P = R.self_energy(n, x), Q = R.self_energy(n, -x);
            scale = std::max({scale, detail::max_entry(P), detail::max_entry(Q), R.term_magnitude(n, x),
                              R.term_magnitude(n, -x)});
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    d_aa = std::max(d_aa, std::abs(P(i, j).v - Q(j, i).v));
                    d_aa = std::max(d_aa, std::abs(Q(i, j).v - std::conj(P(i, j).v)));
                }
                d_ab = std::max(d_ab, std::abs(P(i, d).v + Q(d, i).v));
                d_ab = std::max(d_ab, std::abs(P(i, d).v + std::conj(P(d, i).v)));
            }
            d_bb = std::max(d_bb, std::abs(P(d, d).v - Q(d, d).v));
            d_bb = std::max(d_bb, std::abs(P(d, d).v.imag()));
        }
        std::string tag = "n=" + std::to_string(n);
        rep.add("alpha-alpha transpose/parity/conjugate, " + tag, detail::ratio(d_aa, scale), tol);
        rep.add("beta-beta even and real, " + tag, detail::ratio(d_bb, scale), tol);
        rep.add("alpha-beta antisymmetry, " + tag, detail::ratio(d_ab, scale), tol);

        auto Z = R.self_energy(n, 0.0);
        double zs = std::max(detail::max_entry(Z, true), R.term_magnitude(n, 0.0));
        double z_aa = 0.0, z_mixed = 0.0, z_bb = 0.0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) z_aa = std::max({z_aa, std::abs(Z(i, j).v), std::abs(Z(i, j).d1)});
            z_mixed = std::max({z_mixed, std::abs(Z(i, d).v), std::abs(Z(d, i).v)});
        }
        z_bb = std::abs(Z(d, d).d1);
        rep.add("alpha-alpha and its x-derivative vanish at 0, " + tag, detail::ratio(z_aa, zs), tol);
        rep.add("mixed blocks vanish at 0, " + tag, detail::ratio(z_mixed, zs), tol);
        rep.add("beta-beta x-derivative vanishes at 0, " + tag, detail::ratio(z_bb, zs), tol);
    }
    return rep;
}

/// Ratio tests over one decade [x_top/10, x_top], x_top below every cutoff
/// band: |MM_aa(x)|/x^2, |MM_ba(x)|/|x| and |MM_bb(x) - MM_bb(0)|/x^2 must
/// stay bounded (the value at x_top/10 at most `growth` times the value at
/// x_top, plus a roundoff allowance).
inline Report check_resummed_orders(NumericResum& R, int n_top, double growth = 3.0) {
    Report rep{"resummed self-energy small-x orders", {}};
    const int d = R.d();
    const auto& sc = R.scales();
    for (int n = 0; n <= n_top; ++n) {
        double x_top = sc.alpha_at(n_top + 1) / 32.0;
        auto Z = R.self_energy(n, 0.0);
        auto ratios = [&](double x) {
            auto P = R.self_energy(n, x);
            double aa = 0.0, ba = 0.0;
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) aa = std::max(aa, std::abs(P(i, j).v));
                ba = std::max({ba, std::abs(P(d, i).v), std::abs(P(i, d).v)});
            }
            double bb = std::abs(P(d, d).v - Z(d, d).v);
            double mag = R.term_magnitude(n, x) * 1e-15;
            return std::array<double, 6>{aa / (x * x), ba / x, bb / (x * x), mag / (x * x), mag / x, mag / (x * x)};
        };
        auto hi = ratios(x_top), lo = ratios(x_top / 10.0);
        const char* names[3] = {"alpha-alpha = O(x^2)", "mixed = O(x)", "beta-beta - value at 0 = O(x^2)"};
        for (int b = 0; b < 3; ++b) {
            double allowed = growth * hi[b] + lo[b + 3];
            double dev = lo[b] - allowed;
            rep.add(std::string(names[b]) + ", n=" + std::to_string(n), std::max(dev, 0.0), 0.0,
                    "ratio " + format_double(lo[b]) + " at x/10 vs " + format_double(hi[b]) + " at x=" +
                        format_double(x_top));
        }
    }
    return rep;
}

/// det(x^2 1 - MM^[p](x)) against x^{2d}(x^2 - (MM_bb(0) - |d/dx MM_ab(0)|^2)).
/// The formula drops O(eps^2 x^2) terms, so the relative gap shrinks like eps^2.
inline Check determinant_monitor(NumericResum& R, int p, const std::vector<double>& xs, double tol = 1e-9) {
    const int d = R.d();
    auto Z = R.self_energy(p, 0.0);
    cplx m0 = Z(d, d).v;
    double b2 = 0.0;
    for (int i = 0; i < d; ++i) b2 += std::norm(Z(i, d).d1);
    double worst = 0.0;
    for (double x : xs) {
        auto MM = R.self_energy(p, x);
        Matrix<cplx> A(d + 1);
        for (int i = 0; i <= d; ++i)
            for (int j = 0; j <= d; ++j) A(i, j) = (i == j ? x * x : 0.0) - MM(i, j).v;
        cplx direct = lu_invert(A).determinant;
        cplx formula = std::pow(x, 2 * d) * (x * x - (m0 - b2));
        worst = std::max(worst, std::abs(direct - formula) / std::abs(formula));
    }
    return {"determinant formula, p=" + std::to_string(p) + " eps=" + format_double(R.options().eps), worst, tol,
            true, ""};
}

/// Re-expansion: eps-order j of every resummed coefficient equals the plain
/// coefficient of order j (zero modes: bifurcation functions of order j),
/// for j <= K, at the given beta0 samples. Errors are relative to the
/// entry, or to 1e-6 of the summed term moduli when the entry cancels.
inline Report check_reexpansion(const RenormCatalog& cat, const CoeffTable& t, int K,
                                const std::vector<double>& beta0s, double tol = 1e-8) {
    Report rep{"re-expansion of resummed coefficients", {}};
    const int d = cat.d();
    std::set<std::pair<Mode, int>> keys;
    for (int k = 1; k <= K; ++k)
        for (auto& T : cat.trees(k)) keys.insert({T.nu, T.e});
    for (int k = 1; k <= K; ++k)
        for (auto& [nu, v] : t.coeff[k])
            if (l1(nu) <= cat.tree_l1_max())
                for (int h = 0; h <= d; ++h) keys.insert({nu, h});
    std::vector<double> worst(K + 1, 0.0);
    std::vector<std::string> where(K + 1);
    for (double be : beta0s) {
        ResumOptions o;
        o.K = K;
        o.beta0 = be;
        SymbolicResum R(cat, o);
        for (auto& [nu, h] : keys) {
            EpsJet s = R.coefficient(nu, h);
            EpsJet mag = R.coefficient(nu, h, INT_MAX, true);
            const bool zero = is_zero(nu);
            for (int j = zero ? 0 : 1; j <= (zero ? K - 1 : K); ++j) {
                cplx want;
                if (zero) want = h < d ? zero_mode_alpha(t, j)[h].eval(be) : zero_mode_beta(t, j).eval(be);
                else want = t.a(j, nu, h).eval(be);
                cplx got = s.coeff(j).v;
                // structural zeros are measured against the term sizes
                double den = std::max({std::abs(want), std::abs(got), 1e-6 * std::abs(mag.coeff(j).v), 1e-300});
                double r = std::abs(got - want) / den;
                if (r > worst[j]) {
                    worst[j] = r;
                    where[j] = "nu=" + detail::mode_str(nu) + " h=" + component_name(h, d);
                }
            }
        }
    }
    for (int j = 0; j <= K; ++j)
        rep.add("eps^" + std::to_string(j) + " coefficients", worst[j], tol, where[j]);
    return rep;
}

/// Renormalised diagrams have no resonant line, so every line on scale >= n
/// counts: at most 2^{-(m_n - 3)} K(T) of them, K(T) = sum |nu_v|_1.
/// Cluster lines are internal ones only.
inline Report check_renormalised_counting(const RenormCatalog& cat) {
    Report rep{"renormalised counting bounds", {}};
    const auto& sc = cat.context().scales();
    auto worst_excess = [&](const RDiagram& T) {
        int K = 0;
        for (auto& nu : T.diagram.nu) K += l1(nu);
        double w = 0.0;
        for (int n = 0; n <= sc.n_max(); ++n) {
            int lines = 0;
            for (auto& l : T.lines) lines += l.scale >= n;
            w = std::max(w, lines - std::ldexp(double(K), -(sc.m(n) - 3)));
        }
        return w;
    };
    std::int64_t trees = 0, tree_viol = 0, clusters = 0, cl_viol = 0;
    for (int k = 1; k <= cat.K(); ++k)
        for (auto& T : cat.trees(k)) {
            ++trees;
            tree_viol += worst_excess(T) > 0;
        }
    for (int n = -1; n <= sc.n_max(); ++n)
        for (auto& T : cat.clusters(n)) {
            ++clusters;
            cl_viol += worst_excess(T) > 0;
        }
    rep.add("tree line bound", double(tree_viol), 0.0, std::to_string(trees) + " trees");
    rep.add("cluster line bound", double(cl_viol), 0.0, std::to_string(clusters) + " clusters");
    return rep;
}

}  // namespace lindstedt
