#pragma once
// The plain Lindstedt recursion.
//
// With alpha(t) = omega t + a(omega t), beta(t) = beta0 + b(omega t) and
// a = sum_k eps^k a^(k), the nu != 0 Fourier components give
//   (omega.nu)^2 a^(k)_nu = -[d_alpha f]^(k-1)_nu,
//   (omega.nu)^2 b^(k)_nu =  [d_beta f]^(k-1)_nu,
// where [g]^(k)_nu is the order-k, mode-nu coefficient of g(psi + a, beta0 + b).
// The nu = 0 components are the bifurcation functions. The initial phase alpha0
// is fixed to 0, so every coefficient is a BetaPoly in beta0.

#include <cstdint>
#include <tuple>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "fourier.hpp"

namespace lindstedt {

using ModeMap = std::map<Mode, BetaPoly>;

/// Component label: 0..d-1 are alpha_1..alpha_d, d is beta.
inline std::string component_name(int h, int d) {
    return h == d ? "beta" : "alpha_" + std::to_string(h + 1);
}
inline int component_index(const std::string& s, int d) {
    if (s == "beta") return d;
    if (s.rfind("alpha_", 0) == 0) {
        int j = std::stoi(s.substr(6)) - 1;
        if (j >= 0 && j < d) return j;
    }
    throw ConfigError("bad component label '" + s + "'");
}

struct SeriesOptions {
    /// Flip the sign of the alpha equation (convex unperturbed Hamiltonian).
    bool convex_sign_flip = false;
    /// Cap on the number of stored (order, mode) cells.
    std::int64_t mode_budget = 2'000'000;
};

struct CoeffTable {
    int d = 0;
    int K = 0;
    std::vector<double> omega;
    bool convex_sign_flip = false;
    /// coeff[k][nu][h] for k = 1..K and nu != 0 (index 0 unused).
    std::vector<std::map<Mode, std::vector<BetaPoly>>> coeff;
    /// bracket[k][nu][h] = [d_h f]^(k)_nu for k = 0..K, every reachable nu.
    std::vector<std::map<Mode, std::vector<BetaPoly>>> bracket;
    /// Largest single contribution added into the order-k brackets.
    std::vector<double> scale;

    const BetaPoly& a(int k, const Mode& nu, int h) const {
        static const BetaPoly zero;
        if (k < 1 || k > K) return zero;
        auto it = coeff[k].find(nu);
        return it == coeff[k].end() ? zero : it->second[h];
    }

    /// Every nu != 0 stored at some order, sorted.
    std::vector<Mode> modes() const {
        std::set<Mode> s;
        for (int k = 1; k <= K; ++k)
            for (auto& kv : coeff[k]) s.insert(kv.first);
        return {s.begin(), s.end()};
    }
};

namespace detail {

using Series = std::vector<ModeMap>;  // index = order in eps

inline void accumulate(ModeMap& dst, const Mode& nu, const BetaPoly& p) {
    if (p.empty()) return;
    auto& slot = dst[nu];
    slot += p;
    if (slot.empty()) dst.erase(nu);
}

inline Mode add_modes(const Mode& a, const Mode& b) {
    Mode r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}
inline Mode sub_modes(const Mode& a, const Mode& b) {
    Mode r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

inline ModeMap convolve(const ModeMap& x, const ModeMap& y) {
    ModeMap r;
    for (auto& [n1, p1] : x)
        for (auto& [n2, p2] : y) accumulate(r, add_modes(n1, n2), p1 * p2);
    return r;
}

/// Truncated product of eps-series through order `top`.
inline Series series_mul(const Series& x, const Series& y, int top) {
    Series r(top + 1);
    for (int i = 0; i <= top && i < (int)x.size(); ++i)
        for (int j = 0; i + j <= top && j < (int)y.size(); ++j) {
            if (x[i].empty() || y[j].empty()) continue;
            for (auto& [nu, p] : convolve(x[i], y[j])) accumulate(r[i + j], nu, p);
        }
    return r;
}

inline Series series_one(int d, int top) {
    Series r(top + 1);
    r[0][Mode(d, 0)] = BetaPoly::constant(1.0);
    return r;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

}  // namespace detail

/// Order-k brackets [d_h f]^(k)_nu from coefficients of orders 1..k.
/// Expanding f(psi + a, beta0 + b) around (psi, beta0) in powers of a and b,
/// each support mode nu0 of f contributes
///   e^{i nu0.psi} exp(i nu0.a) sum_q b^q/q! d^q hat f_nu0,
/// so only the exponential series of i nu0.a and powers of b are needed.
inline std::vector<ModeMap> compute_brackets(const CoeffTable& t, const TrigPoly& f, int k,
                                             double* scale_out = nullptr) {
    using namespace detail;
    const int d = t.d;
    std::vector<ModeMap> out(d + 1);
    double scale = 0.0;

    Series B(k + 1);
    for (int j = 1; j <= k; ++j)
        for (auto& [nu, v] : t.coeff[j]) accumulate(B[j], nu, v[d]);
    std::vector<Series> Bpow{series_one(d, k)};
    for (int q = 1; q <= k; ++q) Bpow.push_back(series_mul(Bpow.back(), B, k));

    for (const Mode& nu0 : f.alpha_support()) {
        const BetaPoly fhat = f.project_mode(nu0);
        Series A(k + 1);
        for (int j = 1; j <= k; ++j)
            for (auto& [nu, v] : t.coeff[j]) {
                BetaPoly s;
                for (int i = 0; i < d; ++i)
                    if (nu0[i] != 0) s += v[i] * cplx(0, nu0[i]);
                accumulate(A[j], nu, s);
            }
        Series E = series_one(d, k), term = series_one(d, k);
        for (int p = 1; p <= k; ++p) {
            term = series_mul(term, A, k);
            for (auto& lvl : term)
                for (auto& kv : lvl) kv.second *= cplx(1.0 / p);
            for (int j = 0; j <= k; ++j)
                for (auto& [nu, v] : term[j]) accumulate(E[j], nu, v);
        }
        for (int q = 0; q <= k; ++q) {
            ModeMap W;
            for (int j = 0; j <= k; ++j) {
                if (E[j].empty() || Bpow[q][k - j].empty()) continue;
                for (auto& [nu, v] : convolve(E[j], Bpow[q][k - j])) accumulate(W, nu, v);
            }
            if (W.empty()) continue;
            const double inv_qf = 1.0 / factorial(q);
            const BetaPoly dq = fhat.deriv(q) * cplx(inv_qf);
            const BetaPoly dq1 = fhat.deriv(q + 1) * cplx(inv_qf);
            for (auto& [nu, w] : W) {
                Mode tot = add_modes(nu, nu0);
                BetaPoly base = w * dq;
                for (int i = 0; i < d; ++i) {
                    if (nu0[i] == 0) continue;
                    BetaPoly c = base * cplx(0, nu0[i]);
                    scale = std::max(scale, c.max_abs());
                    accumulate(out[i], tot, c);
                }
                BetaPoly cb = w * dq1;
                scale = std::max(scale, cb.max_abs());
                accumulate(out[d], tot, cb);
            }
        }
    }
    if (scale_out) *scale_out = scale;
    return out;
}

inline CoeffTable compute_series(const TrigPoly& f, const Frequency& freq, int K,
                                 const SeriesOptions& opt = {}) {
    using namespace detail;
    if (K < 1) throw ConfigError("series order K must be >= 1");
    if (f.d() != freq.d()) throw ConfigError("f and omega have different dimensions");
    CoeffTable t;
    t.d = freq.d();
    t.K = K;
    t.omega = freq.omega();
    t.convex_sign_flip = opt.convex_sign_flip;
    t.coeff.resize(K + 1);
    t.bracket.resize(K + 1);
    t.scale.assign(K + 1, 0.0);
    const int d = t.d;
    const double sign_alpha = opt.convex_sign_flip ? 1.0 : -1.0;
    std::int64_t cells = 0;

    for (int k = 0; k <= K; ++k) {
        auto br = compute_brackets(t, f, k, &t.scale[k]);
        std::set<Mode> support;
        for (auto& comp : br)
            for (auto& kv : comp) support.insert(kv.first);
        for (const Mode& nu : support) {
            std::vector<BetaPoly> v(d + 1);
            for (int h = 0; h <= d; ++h) {
                auto it = br[h].find(nu);
                if (it != br[h].end()) v[h] = it->second;
            }
            t.bracket[k][nu] = v;
        }
        cells += static_cast<std::int64_t>(support.size());
        if (cells > opt.mode_budget)
            throw BudgetError("series table exceeds " + std::to_string(opt.mode_budget) + " cells at order " +
                              std::to_string(k));
        if (k == K) break;
        for (auto& [nu, v] : t.bracket[k]) {
            if (is_zero(nu)) continue;
            double w = freq.dot(nu);
            double inv = 1.0 / (w * w);
            std::vector<BetaPoly> c(d + 1);
            for (int h = 0; h < d; ++h) c[h] = v[h] * cplx(sign_alpha * inv);
            c[d] = v[d] * cplx(inv);
            t.coeff[k + 1][nu] = c;
        }
    }
    return t;
}

/// Order-k alpha bifurcation functions [-d_alpha f]^(k)_0 (sign flips with the
/// convex flag, matching the alpha equation).
inline std::vector<BetaPoly> zero_mode_alpha(const CoeffTable& t, int k) {
    if (k < 0 || k > t.K) throw BudgetError("zero mode order " + std::to_string(k) + " beyond table K");
    std::vector<BetaPoly> r(t.d);
    auto it = t.bracket[k].find(Mode(t.d, 0));
    if (it == t.bracket[k].end()) return r;
    const double sign_alpha = t.convex_sign_flip ? 1.0 : -1.0;
    for (int j = 0; j < t.d; ++j) r[j] = it->second[j] * cplx(sign_alpha);
    return r;
}

/// G^(k)(beta0) = [d_beta f]^(k)_0.
inline BetaPoly zero_mode_beta(const CoeffTable& t, int k) {
    if (k < 0 || k > t.K) throw BudgetError("zero mode order " + std::to_string(k) + " beyond table K");
    auto it = t.bracket[k].find(Mode(t.d, 0));
    return it == t.bracket[k].end() ? BetaPoly{} : it->second[t.d];
}

/// Largest deviation in the range equations when the brackets are rebuilt
/// from the stored coefficients, relative to the bracket scale.
inline double range_identity_residual(const CoeffTable& t, const TrigPoly& f, const Frequency& freq) {
    double worst = 0.0;
    const double sign_alpha = t.convex_sign_flip ? 1.0 : -1.0;
    for (int k = 1; k <= t.K; ++k) {
        auto br = compute_brackets(t, f, k - 1);
        double scale = 1e-300;
        for (auto& comp : br)
            for (auto& kv : comp) scale = std::max(scale, kv.second.max_abs());
        for (auto& [nu, v] : t.coeff[k]) {
            double w = freq.dot(nu);
            for (int h = 0; h <= t.d; ++h) {
                auto it = br[h].find(nu);
                BetaPoly rhs = it == br[h].end() ? BetaPoly{} : it->second;
                double s = h == t.d ? 1.0 : sign_alpha;
                worst = std::max(worst, (v[h] * cplx(w * w) - rhs * cplx(s)).max_abs() / scale);
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json series_to_json(const CoeffTable& t) {
    using nlohmann::json;
    json coeffs = json::array(), zalpha = json::array(), zbeta = json::array();
    for (int k = 1; k <= t.K; ++k)
        for (auto& [nu, v] : t.coeff[k])
            for (int h = 0; h <= t.d; ++h)
                for (auto& [m, c] : v[h].coeffs())
                    coeffs.push_back({{"k", k}, {"nu", nu}, {"h", component_name(h, t.d)}, {"m", m},
                                      {"re", c.real()}, {"im", c.imag()}});
    for (int k = 0; k <= t.K; ++k) {
        auto za = zero_mode_alpha(t, k);
        for (int j = 0; j < t.d; ++j)
            for (auto& [m, c] : za[j].coeffs())
                zalpha.push_back({{"k", k}, {"h", component_name(j, t.d)}, {"m", m},
                                  {"re", c.real()}, {"im", c.imag()}});
        const BetaPoly g = zero_mode_beta(t, k);
        for (auto& [m, c] : g.coeffs())
            zbeta.push_back({{"k", k}, {"m", m}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"d", t.d}, {"K", t.K}, {"omega", t.omega}, {"coefficients", coeffs},
            {"zero_mode_alpha", zalpha}, {"zero_mode_beta", zbeta}};
}

/// Reads back the coefficient part of series_to_json (zero modes are derived data).
inline std::map<std::tuple<int, Mode, int>, BetaPoly> series_coefficients_from_json(const nlohmann::json& j) {
    int d = j.at("d").get<int>();
    std::map<std::tuple<int, Mode, int>, BetaPoly> r;
    for (auto& rec : j.at("coefficients")) {
        auto key = std::make_tuple(rec.at("k").get<int>(), rec.at("nu").get<Mode>(),
                                   component_index(rec.at("h").get<std::string>(), d));
        r[key].add(rec.at("m").get<int>(), {rec.at("re").get<double>(), rec.at("im").get<double>()});
    }
    return r;
}

inline std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

/// CSV with columns k, nu, h, m, re, im (nu as space-separated integers).
inline std::string series_to_csv(const CoeffTable& t) {
    std::ostringstream os;
    os << "k,nu,h,m,re,im\n";
    for (int k = 1; k <= t.K; ++k)
        for (auto& [nu, v] : t.coeff[k])
            for (int h = 0; h <= t.d; ++h)
                for (auto& [m, c] : v[h].coeffs()) {
                    os << k << ",";
                    for (std::size_t i = 0; i < nu.size(); ++i) os << (i ? " " : "") << nu[i];
                    os << "," << component_name(h, t.d) << "," << m << "," << format_double(c.real()) << ","
                       << format_double(c.imag()) << "\n";
                }
    return os.str();
}

}  // namespace lindstedt
