#pragma once
// Labeled rooted trees and self-energy clusters.
//
// A diagram is a rooted tree of k nodes. Node v carries a mode nu_v from the
// support of f and a component h_v (0..d-1 for alpha_j, d for beta). The line
// leaving v carries the momentum sum of the modes below it, a scale label and
// (in the renormalised expansion) a second component e on the parent side.
// A cluster diagram also has one external line entering a designated node;
// its momentum is not stored, so momenta on the path from that node to the top
// are offsets nu^0 to which the entering momentum is added.
//
// Diagrams are generated as ordered trees and quotiented by a canonical
// string, so each equivalence class appears once. The class weight
// 1/prod(multiplicity!) over groups of identical sibling subtrees plays the
// role of the 1/(p! q!) of the recursion.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "fourier.hpp"
#include "linalg.hpp"
#include "report.hpp"
#include "series.hpp"
#include "smalldiv.hpp"

namespace lindstedt {

using cjet = Jet2<cplx>;
using JetMatrix = Matrix<cjet>;

/// f, the scales and the sign convention, with derivatives of hat f cached.
class DiagramContext {
public:
    DiagramContext(TrigPoly f, ScaleSystem scales, bool convex_sign_flip = false,
                   std::int64_t budget = 50'000'000)
        : f_(std::move(f)), scales_(std::move(scales)), convex_(convex_sign_flip), budget_(budget) {
        if (f_.d() != scales_.freq().d()) throw ConfigError("f and omega have different dimensions");
        support_ = f_.alpha_support();
        for (const Mode& nu : support_) {
            auto& v = derivs_[nu];
            v.push_back(f_.project_mode(nu));
            for (int q = 1; q <= kCachedDerivs; ++q) v.push_back(v.back().deriv(1));
        }
    }

    int d() const { return f_.d(); }
    const TrigPoly& f() const { return f_; }
    const ScaleSystem& scales() const { return scales_; }
    const std::vector<Mode>& support() const { return support_; }
    bool convex() const { return convex_; }
    std::int64_t budget() const { return budget_; }
    double dot(const Mode& nu) const { return scales_.freq().dot(nu); }

    /// d^q/dbeta^q hat f_nu.
    BetaPoly fhat(const Mode& nu, int q) const {
        auto it = derivs_.find(nu);
        if (it == derivs_.end()) return {};
        if (q <= kCachedDerivs) return it->second[q];
        return it->second[0].deriv(q);
    }

    /// Scales s in [0, n_max] with Psi_s(y) != 0.
    std::vector<int> admissible_scales(double y) const {
        std::vector<int> r;
        for (int s = 0; s <= scales_.n_max(); ++s)
            if (scales_.Psi_support(s, y)) r.push_back(s);
        if (r.empty() && y != 0.0)
            throw BudgetError("line with omega.nu = " + std::to_string(y) + " needs a scale beyond n_max=" +
                              std::to_string(scales_.n_max()));
        return r;
    }

private:
    static constexpr int kCachedDerivs = 12;
    TrigPoly f_;
    ScaleSystem scales_;
    bool convex_ = false;
    std::int64_t budget_;
    std::vector<Mode> support_;
    std::map<Mode, std::vector<BetaPoly>> derivs_;
};

struct Diagram {
    std::vector<int> parent;  // parent[0] = -1
    std::vector<Mode> nu;     // node modes
    std::vector<int> h;       // node components (u side of the line leaving the node)
    std::vector<int> e;       // parent-side components; equal to h in plain diagrams
    std::vector<int> scale;   // scale of the line leaving each node (may be empty)
    std::vector<Mode> mom;    // momentum (offset on the path) of the line leaving each node
    std::vector<char> on_path;
    int enter = -1;       // node receiving the external entering line
    int enter_comp = -1;  // component of the entering line
    double symmetry = 1.0;

    int order() const { return static_cast<int>(parent.size()); }
    bool is_cluster() const { return enter >= 0; }
};

// ---------------------------------------------------------------------------
// Generation helpers

namespace detail {

/// All parent arrays with parent[i] < i; every rooted shape appears at least once.
inline std::vector<std::vector<int>> parent_arrays(int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> p(k, -1);
    std::function<void(int)> rec = [&](int i) {
        if (i == k) { out.push_back(p); return; }
        for (int q = 0; q < i; ++q) { p[i] = q; rec(i + 1); }
    };
    if (k >= 1) rec(1);
    return out;
}

/// Calls fn for every vector in [0, base)^n.
template <class F>
void odometer(int n, int base, F fn) {
    std::vector<int> c(n, 0);
    while (true) {
        fn(c);
        int i = 0;
        while (i < n && c[i] == base - 1) c[i++] = 0;
        if (i == n) return;
        ++c[i];
    }
}

/// Calls fn for every choice of one entry per list.
template <class F>
void product(const std::vector<std::vector<int>>& lists, F fn) {
    std::vector<int> pick(lists.size());
    for (auto& l : lists)
        if (l.empty()) return;
    std::vector<std::size_t> idx(lists.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < lists.size(); ++i) pick[i] = lists[i][idx[i]];
        fn(pick);
        std::size_t i = 0;
        while (i < lists.size() && idx[i] + 1 == lists[i].size()) idx[i++] = 0;
        if (i == lists.size()) return;
        ++idx[i];
    }
}

inline std::vector<std::vector<int>> children_of(const Diagram& D) {
    std::vector<std::vector<int>> kids(D.order());
    for (int v = 1; v < D.order(); ++v) kids[D.parent[v]].push_back(v);
    return kids;
}

inline std::string mode_str(const Mode& nu) {
    std::string s;
    for (int c : nu) s += std::to_string(c) + ",";
    return s;
}

inline std::string canon(const Diagram& D, const std::vector<std::vector<int>>& kids, int v, double& weight) {
    std::vector<std::string> ks;
    for (int c : kids[v]) ks.push_back(canon(D, kids, c, weight));
    std::sort(ks.begin(), ks.end());
    for (std::size_t i = 0; i < ks.size();) {
        std::size_t j = i;
        while (j < ks.size() && ks[j] == ks[i]) ++j;
        for (std::size_t m = 2; m <= j - i; ++m) weight /= double(m);
        i = j;
    }
    std::string s = "(" + mode_str(D.nu[v]) + ";" + std::to_string(D.h[v]) + ";" + std::to_string(D.e[v]);
    if (!D.scale.empty()) s += ";" + std::to_string(D.scale[v]);
    if (v == D.enter) s += ";E" + std::to_string(D.enter_comp);
    s += "[";
    for (auto& k : ks) s += k;
    return s + "])";
}

}  // namespace detail

/// Canonical key of the class of D; sets D.symmetry.
inline std::string canonicalize(Diagram& D) {
    auto kids = detail::children_of(D);
    double w = 1.0;
    std::string key = detail::canon(D, kids, 0, w);
    D.symmetry = w;
    return key;
}

/// Fills mom and on_path from parent, nu and enter.
inline void compute_momenta(Diagram& D) {
    const int k = D.order();
    D.mom = D.nu;
    for (int v = k - 1; v >= 1; --v)
        for (std::size_t i = 0; i < D.mom[v].size(); ++i) D.mom[D.parent[v]][i] += D.mom[v][i];
    D.on_path.assign(k, 0);
    for (int v = D.enter; v >= 0; v = D.parent[v]) D.on_path[v] = 1;
}

/// Node factor as a BetaPoly in beta0: a sign, one i nu_{v,j} per incoming
/// alpha_j line, one more i nu_{v,i} and the sign -1 when h_v = alpha_i, and
/// the beta-derivative of hat f of order (#incoming beta lines + [h_v = beta]).
inline BetaPoly node_factor(const DiagramContext& ctx, const Diagram& D,
                            const std::vector<std::vector<int>>& kids, int v) {
    const int d = ctx.d();
    cplx c(1.0);
    int q = 0;
    auto incoming = [&](int comp) {
        if (comp == d) ++q;
        else c *= cplx(0, D.nu[v][comp]);
    };
    for (int ch : kids[v]) incoming(D.e[ch]);
    if (v == D.enter) incoming(D.enter_comp);
    if (D.h[v] == d) {
        ++q;
    } else {
        c *= cplx(0, D.nu[v][D.h[v]]);
        if (!ctx.convex()) c = -c;
    }
    if (c == cplx{}) return {};
    return ctx.fhat(D.nu[v], q) * c;
}

inline BetaPoly node_factor_product(const DiagramContext& ctx, const Diagram& D) {
    auto kids = detail::children_of(D);
    BetaPoly r = BetaPoly::constant(D.symmetry);
    for (int v = 0; v < D.order(); ++v) {
        r = r * node_factor(ctx, D, kids, v);
        if (r.empty()) break;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Self-energy clusters inside a diagram

struct SelfEnergyHit {
    int threshold;          // cluster scale; -1 for a single zero-mode node
    std::vector<int> nodes;
    int exit_line;          // node whose outgoing line exits the cluster
    int entering_line;      // node whose outgoing line enters; -2 for the external line
};

/// Self-energy clusters at thresholds below `below` (all thresholds when
/// below = INT_MAX). For clusters, D.scale[0] is the scale of the exiting
/// line and must exceed every internal scale. Momenta are compared through the stored offsets: the
/// external entering line counts as offset 0 and path lines share its momentum.
/// With `strict_path`, a cluster also needs every line of its path to differ
/// in momentum from the entering line.
inline std::vector<SelfEnergyHit> find_self_energy_clusters(const Diagram& D, int below, bool strict_path) {
    std::vector<SelfEnergyHit> out;
    const int k = D.order();
    auto kids = detail::children_of(D);
    const Mode zero(D.nu.empty() ? 0 : D.nu[0].size(), 0);
    auto line_mom = [&](int line) -> const Mode& { return line == -2 ? zero : D.mom[line]; };

    for (int v = 0; v < k; ++v) {
        if (!is_zero(D.nu[v]) || -1 >= below) continue;
        int in = static_cast<int>(kids[v].size()) + (v == D.enter ? 1 : 0);
        if (in != 1) continue;
        int entering = kids[v].empty() ? -2 : kids[v][0];
        out.push_back({-1, {v}, v, entering});
    }
    if (D.scale.empty()) return out;

    std::set<int> thresholds;
    for (int v = 1; v < k; ++v)
        if (D.scale[v] < below) thresholds.insert(D.scale[v]);
    for (int t : thresholds) {
        std::vector<int> comp(k);
        std::iota(comp.begin(), comp.end(), 0);
        std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
        for (int v = 1; v < k; ++v)
            if (D.scale[v] <= t) comp[find(v)] = find(D.parent[v]);
        std::map<int, std::vector<int>> groups;
        for (int v = 0; v < k; ++v) groups[find(v)].push_back(v);
        for (auto& [root, nodes] : groups) {
            if (nodes.size() < 2) continue;
            std::set<int> in_c(nodes.begin(), nodes.end());
            bool has_t = false;
            int top = -1;
            std::vector<int> entering;
            for (int v : nodes) {
                if (v != 0 && in_c.count(D.parent[v]) && D.scale[v] == t) has_t = true;
                if (v == 0 || !in_c.count(D.parent[v])) top = v;
                for (int c : kids[v])
                    if (!in_c.count(c)) entering.push_back(c);
                if (v == D.enter) entering.push_back(-2);
            }
            if (!has_t || entering.size() != 1) continue;
            // the exiting line must lie above the cluster; only the root line can fail this
            if (top == 0 && D.scale[0] <= t) continue;
            int ent = entering[0];
            if (line_mom(top) != line_mom(ent)) continue;
            if (strict_path) {
                int start = ent == -2 ? D.enter : D.parent[ent];
                bool ok = true;
                for (int w = start; w != top; w = D.parent[w])
                    if (D.mom[w] == line_mom(ent)) { ok = false; break; }
                if (!ok) continue;
            }
            out.push_back({t, nodes, top, ent});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration

/// Plain trees of order k, grouped by (total momentum, root component).
/// Classes with an identically vanishing node-factor product are dropped.
inline std::map<std::pair<Mode, int>, std::vector<Diagram>> enumerate_all_trees(const DiagramContext& ctx, int k) {
    std::map<std::pair<Mode, int>, std::vector<Diagram>> out;
    std::unordered_set<std::string> seen;
    const int d = ctx.d();
    const auto& S = ctx.support();
    std::int64_t work = 0;
    for (auto& P : detail::parent_arrays(k)) {
        detail::odometer(k, static_cast<int>(S.size()), [&](const std::vector<int>& mi) {
            Diagram D;
            D.parent = P;
            for (int i : mi) D.nu.push_back(S[i]);
            compute_momenta(D);
            for (int v = 1; v < k; ++v)
                if (is_zero(D.mom[v])) return;
            std::vector<std::vector<int>> scale_lists(k);
            for (int v = 0; v < k; ++v) {
                if (v == 0 && is_zero(D.mom[0])) scale_lists[v] = {-1};
                else scale_lists[v] = ctx.admissible_scales(ctx.dot(D.mom[v]));
            }
            detail::odometer(k, d + 1, [&](const std::vector<int>& comps) {
                if (++work > ctx.budget()) throw BudgetError("tree enumeration at order " + std::to_string(k));
                D.h = comps;
                D.e = comps;
                D.scale.clear();
                auto kids = detail::children_of(D);
                // cheap rejection before the scale product
                for (int v = 0; v < k; ++v)
                    if (node_factor(ctx, D, kids, v).empty()) return;
                detail::product(scale_lists, [&](const std::vector<int>& sc) {
                    Diagram E = D;
                    E.scale = sc;
                    std::string key = canonicalize(E);
                    if (!seen.insert(key).second) return;
                    out[{E.mom[0], E.h[0]}].push_back(std::move(E));
                });
            });
        });
    }
    return out;
}

/// Value of a plain tree: symmetry * node factors * Psi_{n_l}(x_l)/x_l^2 per line.
inline BetaPoly tree_value(const DiagramContext& ctx, const Diagram& D) {
    BetaPoly r = node_factor_product(ctx, D);
    if (r.empty()) return r;
    double prop = 1.0;
    for (int v = 0; v < D.order(); ++v) {
        if (D.scale[v] < 0) continue;
        double y = ctx.dot(D.mom[v]);
        prop *= ctx.scales().Psi(D.scale[v], y) / (y * y);
    }
    return r * cplx(prop);
}

/// Sum of tree values over a class list.
inline BetaPoly sum_trees(const DiagramContext& ctx, const std::vector<Diagram>& trees) {
    BetaPoly s;
    for (auto& t : trees) s += tree_value(ctx, t);
    return s;
}

/// Sum of |tree value| at beta0: the roundoff reference for a class sum
/// whose terms cancel.
inline double sum_trees_magnitude(const DiagramContext& ctx, const std::vector<Diagram>& trees, double beta0) {
    double s = 0.0;
    for (auto& t : trees) s += std::abs(tree_value(ctx, t).eval(beta0));
    return s;
}

/// Cluster skeletons of order k: sum of modes zero, one external entering
/// line, no scale labels. Path offsets must be nonzero when strict_path is
/// set; other internal lines always need nonzero momentum.
inline std::vector<Diagram> enumerate_cluster_skeletons(const DiagramContext& ctx, int k, bool strict_path) {
    std::vector<Diagram> out;
    std::unordered_set<std::string> seen;
    const int d = ctx.d();
    const auto& S = ctx.support();
    std::int64_t work = 0;
    for (auto& P : detail::parent_arrays(k)) {
        detail::odometer(k, static_cast<int>(S.size()), [&](const std::vector<int>& mi) {
            Diagram base;
            base.parent = P;
            for (int i : mi) base.nu.push_back(S[i]);
            base.enter = 0;
            compute_momenta(base);
            if (!is_zero(base.mom[0])) return;
            for (int w = 0; w < k; ++w) {
                Diagram D = base;
                D.enter = w;
                compute_momenta(D);
                bool ok = true;
                for (int v = 1; v < k && ok; ++v)
                    if (is_zero(D.mom[v]) && (!D.on_path[v] || strict_path)) ok = false;
                if (!ok) continue;
                detail::odometer(k + 1, d + 1, [&](const std::vector<int>& comps) {
                    if (++work > ctx.budget()) throw BudgetError("cluster enumeration at order " + std::to_string(k));
                    D.h.assign(comps.begin(), comps.begin() + k);
                    D.e = D.h;
                    D.enter_comp = comps[k];
                    auto kids = detail::children_of(D);
                    for (int v = 0; v < k; ++v)
                        if (node_factor(ctx, D, kids, v).empty()) return;
                    Diagram E = D;
                    std::string key = canonicalize(E);
                    if (!seen.insert(key).second) return;
                    out.push_back(std::move(E));
                });
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plain self-energies

/// M^(k)(x, n) and its cumulative version sum_{p<=n} M^(k)(x, p), entry (u, e)
/// summed over clusters with exiting component u and entering component e.
/// The scale sum is carried line by line: summing over labels with max = n is
/// prod_l A_l(n) - prod_l A_l(n-1) with A_l(n) = sum_{s<=n} Psi_s(x_l)/x_l^2.
class PlainSelfEnergy {
public:
    struct Skeleton {
        int u, e;
        int order;
        BetaPoly factor;          // symmetry * node factors
        std::vector<double> c;    // omega . nu^0 per internal line
        std::vector<char> path;   // whether the entering momentum flows through
        Diagram diagram;
    };

    PlainSelfEnergy(const DiagramContext& ctx, int K_tree) : ctx_(&ctx), K_(K_tree) {
        if (K_tree < 1) throw ConfigError("K_tree must be >= 1");
        by_order_.resize(K_ + 1);
        for (int k = 1; k <= K_; ++k)
            for (auto& D : enumerate_cluster_skeletons(ctx, k, true)) {
                Skeleton s{D.h[0], D.enter_comp, k, node_factor_product(ctx, D), {}, {}, D};
                if (s.factor.empty()) continue;
                for (int v = 1; v < k; ++v) {
                    s.c.push_back(ctx.dot(D.mom[v]));
                    s.path.push_back(D.on_path[v]);
                }
                by_order_[k].push_back(std::move(s));
            }
    }

    int K() const { return K_; }
    int d() const { return ctx_->d(); }
    const DiagramContext& context() const { return *ctx_; }
    const std::vector<Skeleton>& skeletons(int k) const { return by_order_.at(k); }

    /// Cumulative self-energy sum_{p=-1}^{n} M^(k)(x, p).
    JetMatrix cumulative(int k, int n, double x, double beta0) const { return eval(k, n, x, beta0, false); }
    /// Single-scale self-energy M^(k)(x, n).
    JetMatrix single(int k, int n, double x, double beta0) const { return eval(k, n, x, beta0, true); }
    /// The n -> infinity object, realized at n_max.
    JetMatrix limit(int k, double x, double beta0) const {
        return cumulative(k, ctx_->scales().n_max(), x, beta0);
    }

    /// True when every line of every order-k cluster at entering momentum x
    /// already has its full scale sum by n_max, so limit() is exact there.
    bool limit_exact(int k, double x) const {
        double floor = ctx_->scales().alpha_at(ctx_->scales().n_max()) / 8.0;
        for (auto& s : by_order_.at(k))
            for (std::size_t l = 0; l < s.c.size(); ++l)
                if (std::abs(s.c[l] + (s.path[l] ? x : 0.0)) < floor) return false;
        return true;
    }

    /// Largest over entries of the sum of |term| (value and x-derivative),
    /// the roundoff reference for entries that cancel to zero.
    double term_magnitude(int k, int n, double x, double beta0, bool single) const {
        const int D = d() + 1;
        std::vector<double> m(D * D, 0.0);
        for (auto& s : by_order_.at(k)) {
            double w = 0.0;
            if (s.c.empty()) {
                w = (!single || n == -1) ? 1.0 : 0.0;
            } else {
                cjet hi(1.0), lo(1.0);
                for (std::size_t l = 0; l < s.c.size(); ++l) {
                    hi *= line_sum(n, s.c[l], s.path[l], x);
                    if (single) lo *= line_sum(n - 1, s.c[l], s.path[l], x);
                }
                w = std::abs(hi.v) + std::abs(hi.d1);
                if (single) w += std::abs(lo.v) + std::abs(lo.d1);
            }
            m[s.u * D + s.e] += w * std::abs(s.factor.eval(beta0));
        }
        return *std::max_element(m.begin(), m.end());
    }

private:
    cjet line_sum(int n, double c, bool path, double x) const {
        if (n < 0) return {};
        Jet2<double> y(c + (path ? x : 0.0), path ? 1.0 : 0.0, 0.0);
        Jet2<double> a = ctx_->scales().Psi_cumulative(n, y) / (y * y);
        return to_complex(a);
    }

    JetMatrix eval(int k, int n, double x, double beta0, bool single) const {
        const int D = d() + 1;
        JetMatrix M(D);
        if (k < 1 || k > K_) throw BudgetError("self-energy order " + std::to_string(k) + " beyond K_tree");
        if (n > ctx_->scales().n_max()) throw BudgetError("self-energy scale beyond n_max");
        for (auto& s : by_order_[k]) {
            cjet w;
            if (s.c.empty()) {
                // single zero-mode node: the scale -1 cluster
                w = (!single || n == -1) ? cjet(1.0) : cjet{};
            } else {
                cjet hi(1.0), lo(1.0);
                for (std::size_t l = 0; l < s.c.size(); ++l) {
                    hi *= line_sum(n, s.c[l], s.path[l], x);
                    if (single) lo *= line_sum(n - 1, s.c[l], s.path[l], x);
                }
                w = single ? hi - lo : hi;
            }
            M(s.u, s.e) += w * s.factor.eval(beta0);
        }
        return M;
    }

    const DiagramContext* ctx_;
    int K_;
    std::vector<std::vector<Skeleton>> by_order_;
};

}  // namespace lindstedt
