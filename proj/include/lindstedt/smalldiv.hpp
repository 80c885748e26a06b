#pragma once
// Small divisors and the multiscale decomposition.
//
// alpha_m(omega) = min over 0 < |nu|_1 <= 2^m of |omega . nu|, the scale
// sequences {m_n, p_n} built from it, and the smooth cutoffs chi_n, psi_n,
// Psi_n, xi_n with analytic first and second derivatives.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "report.hpp"

namespace lindstedt {

using Mode = std::vector<int>;

inline double dot(const std::vector<double>& w, const Mode& nu) {
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) s += w[i] * nu[i];
    return s;
}

inline int l1(const Mode& nu) {
    int s = 0;
    for (int c : nu) s += std::abs(c);
    return s;
}

inline bool is_zero(const Mode& nu) {
    for (int c : nu) if (c != 0) return false;
    return true;
}

/// Flip the sign so the first nonzero component is positive.
inline Mode canonical_sign(Mode nu) {
    for (int c : nu) {
        if (c == 0) continue;
        if (c < 0) for (int& x : nu) x = -x;
        break;
    }
    return nu;
}

struct AlphaEntry {
    double value = 0.0;
    Mode argmin;  // sign-normalized minimizer
};

/// Exact alpha_m. The first component is eliminated analytically: for fixed
/// (nu_2..nu_d) the best nu_1 is one of the two integers around the real
/// optimum (clipped to the l1 ball), so the scan costs (2N+1)^(d-1) with N = 2^m.
/// `budget` caps that count.
inline AlphaEntry alpha_entry(const std::vector<double>& omega, int m,
                              double budget = 5e7) {
    const int d = static_cast<int>(omega.size());
    if (d < 1) throw ConfigError("frequency needs d >= 1");
    if (m < 0 || m > 30) throw BudgetError("alpha_m index m=" + std::to_string(m) + " out of range");
    const std::int64_t N = std::int64_t(1) << m;
    double outer = std::pow(double(2 * N + 1), d - 1);
    if (outer > budget)
        throw BudgetError("alpha_m with d=" + std::to_string(d) + ", m=" + std::to_string(m) +
                          " needs ~" + std::to_string(outer) + " outer iterations (limit " +
                          std::to_string(budget) + ")");

    AlphaEntry best;
    best.value = std::numeric_limits<double>::infinity();
    Mode nu(d, 0);
    Mode rest(d - 1 > 0 ? d - 1 : 0, static_cast<int>(-N));

    auto consider = [&](std::int64_t n1, std::int64_t restNorm) {
        if (std::abs(n1) + restNorm > N) return;
        if (n1 == 0 && restNorm == 0) return;
        nu[0] = static_cast<int>(n1);
        for (int i = 1; i < d; ++i) nu[i] = rest[i - 1];
        double v = std::abs(dot(omega, nu));
        Mode c = canonical_sign(nu);
        if (v < best.value || (v == best.value && c < best.argmin)) {
            best.value = v;
            best.argmin = c;
        }
    };

    while (true) {
        std::int64_t restNorm = 0;
        double partial = 0.0;
        for (int i = 1; i < d; ++i) {
            restNorm += std::abs(rest[i - 1]);
            partial += omega[i] * rest[i - 1];
        }
        if (restNorm <= N) {
            std::int64_t cap = N - restNorm;
            if (omega[0] == 0.0) {
                consider(0, restNorm);
            } else {
                double t = -partial / omega[0];
                auto lo = static_cast<std::int64_t>(std::floor(t));
                for (std::int64_t c : {lo, lo + 1, -cap, cap}) {
                    std::int64_t n1 = std::max(-cap, std::min(cap, c));
                    consider(n1, restNorm);
                    // an excluded zero vector leaves its neighbours as candidates
                    if (n1 == 0 && restNorm == 0) {
                        consider(1, 0);
                        consider(-1, 0);
                    }
                }
            }
        }
        int i = 0;
        while (i < d - 1 && rest[i] == N) rest[i++] = static_cast<int>(-N);
        if (i == d - 1) break;
        ++rest[i];
    }
    return best;
}

inline double alpha_m(const std::vector<double>& omega, int m) {
    return alpha_entry(omega, m).value;
}

/// Rotation vector plus the alpha table up to M_max.
class Frequency {
public:
    Frequency() = default;
    Frequency(std::vector<double> omega, int M_max = 20) : omega_(std::move(omega)), M_max_(M_max) {
        if (omega_.empty()) throw ConfigError("omega must be non-empty");
        if (M_max_ < 0) throw ConfigError("M_max must be >= 0");
        double scale = 0.0;
        for (double w : omega_) {
            if (!std::isfinite(w)) throw ConfigError("omega has a non-finite entry");
            scale = std::max(scale, std::abs(w));
        }
        table_.reserve(M_max_ + 1);
        for (int m = 0; m <= M_max_; ++m) table_.push_back(alpha_entry(omega_, m));
        // omega . nu == 0 up to roundoff counts as a resonance
        if (!(table_.back().value > 1e-13 * scale))
            throw ConfigError("omega is resonant: |omega.nu| = " + std::to_string(table_.back().value) +
                              " for |nu|_1 <= 2^" + std::to_string(M_max_));
    }

    static Frequency golden2(int M_max = 20) {
        return Frequency({1.0, (std::sqrt(5.0) - 1.0) / 2.0}, M_max);
    }

    int d() const { return static_cast<int>(omega_.size()); }
    int M_max() const { return M_max_; }
    const std::vector<double>& omega() const { return omega_; }

    double alpha(int m) const {
        if (m < 0 || m > M_max_)
            throw BudgetError("alpha_" + std::to_string(m) + " needs M_max >= " + std::to_string(m) +
                              " (configured " + std::to_string(M_max_) + ")");
        return table_[m].value;
    }
    const Mode& alpha_argmin(int m) const {
        alpha(m);
        return table_[m].argmin;
    }
    double dot(const Mode& nu) const { return lindstedt::dot(omega_, nu); }

private:
    std::vector<double> omega_;
    int M_max_ = 20;
    std::vector<AlphaEntry> table_;
};

/// Partial Bryuno sum: sum_{m=0}^{M} 2^{-m} log(1/alpha_m).
inline double bryuno_partial(const Frequency& freq, int M) {
    double s = 0.0;
    for (int m = 0; m <= M; ++m) s += std::ldexp(-std::log(freq.alpha(m)), -m);
    return s;
}

// ---------------------------------------------------------------------------
// Cutoffs

namespace detail {

// chi on the transition band 1/2 < s < 1 written as a logistic in
// phi(s) = 1/(1-s) - 1/(s-1/2): chi = 1/(1+e^phi). Returns (chi, chi', chi'').
struct Chi3 { double v, d1, d2; };

inline Chi3 chi_band(double s) {
    if (s <= 0.5) return {1.0, 0.0, 0.0};
    if (s >= 1.0) return {0.0, 0.0, 0.0};
    const double a = 1.0 - s, b = s - 0.5;
    const double phi = 1.0 / a - 1.0 / b;
    const double phi1 = 1.0 / (a * a) + 1.0 / (b * b);
    const double phi2 = 2.0 / (a * a * a) - 2.0 / (b * b * b);
    const double chi = 1.0 / (1.0 + std::exp(phi));
    const double ch = std::cosh(0.5 * phi);
    const double w = 1.0 / (4.0 * ch * ch);  // chi (1 - chi)
    const double d1 = -w * phi1;
    const double d2 = -((1.0 - 2.0 * chi) * d1 * phi1 + w * phi2);
    return {chi, std::isfinite(d1) ? d1 : 0.0, std::isfinite(d2) ? d2 : 0.0};
}

}  // namespace detail

/// The basic bump: 1 on |x| <= 1/2, 0 on |x| >= 1, C-infinity, even.
inline double cutoff_chi(double x) { return detail::chi_band(std::abs(x)).v; }

/// chi with its derivatives, composed with a jet argument.
inline Jet2<double> cutoff_chi(const Jet2<double>& x) {
    auto c = detail::chi_band(std::abs(x.v));
    double sgn = x.v < 0 ? -1.0 : 1.0;
    return compose(x, c.v, sgn * c.d1, c.d2);
}

/// Scales {m_n, p_n} on top of a Frequency, with the derived cutoffs.
class ScaleSystem {
public:
    ScaleSystem() = default;

    /// Resolves m_0..m_{n_max+1} (xi_n needs alpha_{m_{n+1}}) and p_0..p_{n_max}.
    ScaleSystem(const Frequency& freq, int n_max) : freq_(freq), n_max_(n_max) {
        if (n_max < 0) throw ConfigError("n_max must be >= 0");
        m_.push_back(0);
        for (int n = 0; n <= n_max_; ++n) {
            int mn = m_.back();
            int q = 0;
            // p_n is the last q with alpha_{m_n} < 2 alpha_{m_n+q}; resolving it
            // needs the first failing index m_n+q+1.
            while (true) {
                int next = mn + q + 1;
                if (next > freq_.M_max())
                    throw BudgetError("scale p_" + std::to_string(n) + " unresolved: needs M_max >= " +
                                      std::to_string(next) + " (configured " +
                                      std::to_string(freq_.M_max()) + ")");
                if (freq_.alpha(mn) < 2.0 * freq_.alpha(next)) ++q;
                else break;
            }
            p_.push_back(q);
            m_.push_back(mn + q + 1);
            if (!(freq_.alpha(m_.back()) <= 0.5 * freq_.alpha(mn))) halving_failures_.push_back(n);
        }
    }

    const Frequency& freq() const { return freq_; }
    int n_max() const { return n_max_; }
    int m(int n) const { check(n, n_max_ + 1); return m_[n]; }
    int p(int n) const { check(n, n_max_); return p_[n]; }
    const std::vector<int>& m_seq() const { return m_; }
    const std::vector<int>& p_seq() const { return p_; }
    /// Scales n where alpha_{m_{n+1}} <= alpha_{m_n}/2 failed (expected empty).
    const std::vector<int>& halving_failures() const { return halving_failures_; }

    /// alpha_{m_n}; +infinity for n = -1.
    double alpha_at(int n) const {
        if (n < 0) return std::numeric_limits<double>::infinity();
        return freq_.alpha(m(n));
    }

    /// chi_n(x) = chi(8x / alpha_{m_n}); chi_{-1} = 1.
    Jet2<double> chi_n(int n, const Jet2<double>& x) const {
        if (n < 0) return Jet2<double>(1.0);
        check(n, n_max_);
        return cutoff_chi(x * (8.0 / alpha_at(n)));
    }
    Jet2<double> psi_n(int n, const Jet2<double>& x) const { return Jet2<double>(1.0) - chi_n(n, x); }

    /// Psi_n = chi_{n-1} psi_n.
    Jet2<double> Psi(int n, const Jet2<double>& x) const {
        check(n, n_max_);
        if (!Psi_support(n, x.v)) return {};
        return chi_n(n - 1, x) * psi_n(n, x);
    }
    double Psi(int n, double x) const { return Psi(n, Jet2<double>(x)).v; }

    /// Closed support test: Psi_n(x) != 0 only if alpha_{m_n}/16 < |x| < alpha_{m_{n-1}}/8.
    bool Psi_support(int n, double x) const {
        double ax = std::abs(x);
        return ax > alpha_at(n) / 16.0 && (n == 0 || ax < alpha_at(n - 1) / 8.0);
    }

    /// Cumulative sum_{s=0}^{n} Psi_s(x), computed term by term.
    Jet2<double> Psi_cumulative(int n, const Jet2<double>& x) const {
        Jet2<double> s;
        for (int q = 0; q <= n; ++q)
            if (Psi_support(q, x.v)) s += Psi(q, x);
        return s;
    }

    /// xi_n: 1 for x <= alpha_{m_{n+1}}^2/2^12, 0 for x >= alpha_{m_{n+1}}^2/2^11,
    /// smooth and non-increasing in between; xi_{-1} = 1.
    Jet2<double> xi(int n, const Jet2<double>& x) const {
        if (n < 0) return Jet2<double>(1.0);
        check(n, n_max_);
        double a = alpha_at(n + 1);
        double lo = a * a / 4096.0;
        double hi = 2.0 * lo;
        if (x.v <= lo) return Jet2<double>(1.0);
        // map [lo, hi] onto the chi band [1/2, 1]
        Jet2<double> s = (x - Jet2<double>(lo)) * (0.5 / (hi - lo)) + Jet2<double>(0.5);
        return cutoff_chi(s);
    }
    double xi(int n, double x) const { return xi(n, Jet2<double>(x)).v; }

private:
    void check(int n, int top) const {
        if (n > top)
            throw BudgetError("scale index " + std::to_string(n) + " exceeds limit " + std::to_string(top) +
                              " (n_max=" + std::to_string(n_max_) + ")");
        if (n < 0) throw ConfigError("negative scale index " + std::to_string(n));
    }

    Frequency freq_;
    int n_max_ = 0;
    std::vector<int> m_, p_, halving_failures_;
};

inline ScaleSystem build_scales(const Frequency& freq, int n_max) { return ScaleSystem(freq, n_max); }

/// sum_n Psi_n = 1 and at most two nonzero Psi_n per x, on log-uniform
/// samples of alpha_{m_nmax}/8 <= |x| <= alpha_{m_0} with random signs.
inline Report check_partition_of_unity(const ScaleSystem& s, int samples = 10000, unsigned seed = 11) {
    Report rep{"partition of unity", {}};
    std::mt19937 rng(seed);
    const int N = s.n_max();
    std::uniform_real_distribution<double> U(std::log(s.alpha_at(N) / 8), std::log(s.alpha_at(0)));
    double worst = 0.0;
    int most = 0;
    for (int i = 0; i < samples; ++i) {
        double x = std::exp(U(rng)) * (i % 2 ? 1 : -1);
        double sum = 0.0;
        int nonzero = 0;
        for (int n = 0; n <= N; ++n) {
            double p = s.Psi(n, x);
            sum += p;
            nonzero += p != 0.0;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
        most = std::max(most, nonzero);
    }
    rep.add("|sum_n Psi_n(x) - 1|", worst, 1e-12, std::to_string(samples) + " samples");
    rep.add("at most two Psi_n nonzero per x", most > 2 ? double(most) : 0.0, 0.0,
            "max " + std::to_string(most));
    rep.add("alpha_{m_{n+1}} <= alpha_{m_n}/2 at every scale", double(s.halving_failures().size()), 0.0);
    return rep;
}

}  // namespace lindstedt
