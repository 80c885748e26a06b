#pragma once
// Sparse Fourier series.
//
// BetaPoly: finite series in one angle, sum_m c_m e^{i m beta}.
// TrigPoly: finite series on T^d x T, sum_{nu,m} c_{nu,m} e^{i(nu.alpha + m beta)}.
// Storage is an ordered map, so every loop runs in lexicographic key order and
// sums are reproducible.

#include <complex>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "smalldiv.hpp"

namespace lindstedt {

using cplx = std::complex<double>;
inline const cplx I_unit{0.0, 1.0};

/// i^q as an exact complex number.
inline cplx i_pow(int q) {
    switch (((q % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

class BetaPoly {
public:
    using Map = std::map<int, cplx>;

    BetaPoly() = default;
    explicit BetaPoly(Map c) : c_(std::move(c)) { prune(); }
    static BetaPoly constant(cplx c) { return BetaPoly(Map{{0, c}}); }
    static BetaPoly cosine(int m, double amp = 1.0) {
        if (m == 0) return constant(amp);
        return BetaPoly(Map{{m, amp / 2}, {-m, amp / 2}});
    }
    static BetaPoly sine(int m, double amp = 1.0) {
        if (m == 0) return {};
        return BetaPoly(Map{{m, cplx(0, -amp / 2)}, {-m, cplx(0, amp / 2)}});
    }

    const Map& coeffs() const { return c_; }
    bool empty() const { return c_.empty(); }
    cplx coeff(int m) const {
        auto it = c_.find(m);
        return it == c_.end() ? cplx{} : it->second;
    }

    /// Add c e^{i m beta}; exact zeros are dropped.
    void add(int m, cplx c) {
        if (c == cplx{}) return;
        auto [it, fresh] = c_.try_emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == cplx{}) c_.erase(it);
        }
    }

    BetaPoly& operator+=(const BetaPoly& o) { for (auto& [m, c] : o.c_) add(m, c); return *this; }
    BetaPoly& operator-=(const BetaPoly& o) { for (auto& [m, c] : o.c_) add(m, -c); return *this; }
    BetaPoly& operator*=(cplx s) {
        if (s == cplx{}) { c_.clear(); return *this; }
        for (auto& kv : c_) kv.second *= s;
        prune();
        return *this;
    }
    friend BetaPoly operator+(BetaPoly a, const BetaPoly& b) { return a += b; }
    friend BetaPoly operator-(BetaPoly a, const BetaPoly& b) { return a -= b; }
    friend BetaPoly operator*(BetaPoly a, cplx s) { return a *= s; }
    friend BetaPoly operator*(cplx s, BetaPoly a) { return a *= s; }
    friend BetaPoly operator*(const BetaPoly& a, const BetaPoly& b) {
        BetaPoly r;
        for (auto& [m1, c1] : a.c_)
            for (auto& [m2, c2] : b.c_) r.add(m1 + m2, c1 * c2);
        return r;
    }
    BetaPoly operator-() const { return *this * cplx(-1); }

    /// q-th derivative in beta: c_m -> (i m)^q c_m.
    BetaPoly deriv(int q = 1) const {
        BetaPoly r;
        for (auto& [m, c] : c_) {
            if (m == 0 && q > 0) continue;
            r.add(m, c * i_pow(q) * std::pow(double(m), q));
        }
        return r;
    }

    cplx eval(double beta) const {
        cplx s{};
        for (auto& [m, c] : c_) s += c * std::polar(1.0, m * beta);
        return s;
    }

    /// The series of conj(p(beta)) for real beta: c_m -> conj(c_{-m}).
    BetaPoly conj_reflect() const {
        BetaPoly r;
        for (auto& [m, c] : c_) r.add(-m, std::conj(c));
        return r;
    }

    double max_abs() const {
        double s = 0.0;
        for (auto& kv : c_) s = std::max(s, std::abs(kv.second));
        return s;
    }

    /// Reality: c_{-m} = conj(c_m) within tol * max_abs().
    bool is_real(double tol = 1e-12) const { return (*this - conj_reflect()).max_abs() <= tol * max_abs(); }

    friend bool operator==(const BetaPoly& a, const BetaPoly& b) { return a.c_ == b.c_; }

private:
    void prune() {
        for (auto it = c_.begin(); it != c_.end();)
            it = it->second == cplx{} ? c_.erase(it) : std::next(it);
    }
    Map c_;
};

/// Key (nu, m) of a TrigPoly coefficient.
using TrigKey = std::pair<Mode, int>;

class TrigPoly {
public:
    using Map = std::map<TrigKey, cplx>;

    TrigPoly() = default;
    explicit TrigPoly(int d) : d_(d) {}
    TrigPoly(int d, Map c) : d_(d) {
        for (auto& [k, v] : c) add(k.first, k.second, v);
    }

    /// amp * cos(nu.alpha + m beta).
    static TrigPoly cosine(int d, const Mode& nu, int m, double amp = 1.0) {
        TrigPoly t(d);
        t.add_cosine(nu, m, amp);
        return t;
    }
    void add_cosine(const Mode& nu, int m, double amp = 1.0) {
        check_mode(nu);
        Mode neg = nu;
        for (int& c : neg) c = -c;
        add(nu, m, amp / 2);
        add(neg, -m, amp / 2);
    }

    int d() const { return d_; }
    const Map& coeffs() const { return c_; }
    bool empty() const { return c_.empty(); }

    void add(const Mode& nu, int m, cplx c) {
        check_mode(nu);
        if (c == cplx{}) return;
        auto [it, fresh] = c_.try_emplace(TrigKey{nu, m}, c);
        if (!fresh) {
            it->second += c;
            if (it->second == cplx{}) c_.erase(it);
        }
    }

    cplx coeff(const Mode& nu, int m) const {
        auto it = c_.find({nu, m});
        return it == c_.end() ? cplx{} : it->second;
    }

    TrigPoly& operator+=(const TrigPoly& o) {
        merge_dim(o);
        for (auto& [k, v] : o.c_) add(k.first, k.second, v);
        return *this;
    }
    TrigPoly& operator*=(cplx s) {
        if (s == cplx{}) { c_.clear(); return *this; }
        for (auto& kv : c_) kv.second *= s;
        return *this;
    }
    friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
    friend TrigPoly operator*(TrigPoly a, cplx s) { return a *= s; }

    /// Exact product (convolution of supports).
    friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
        TrigPoly r(a.d_);
        r.merge_dim(b);
        for (auto& [ka, va] : a.c_)
            for (auto& [kb, vb] : b.c_) {
                Mode nu = ka.first;
                for (std::size_t i = 0; i < nu.size(); ++i) nu[i] += kb.first[i];
                r.add(nu, ka.second + kb.second, va * vb);
            }
        return r;
    }

    /// d/d alpha_j, j in [0, d).
    TrigPoly deriv_alpha(int j) const {
        if (j < 0 || j >= d_) throw ConfigError("alpha component " + std::to_string(j) + " out of range");
        TrigPoly r(d_);
        for (auto& [k, v] : c_) r.add(k.first, k.second, v * cplx(0, k.first[j]));
        return r;
    }
    TrigPoly deriv_beta() const {
        TrigPoly r(d_);
        for (auto& [k, v] : c_) r.add(k.first, k.second, v * cplx(0, k.second));
        return r;
    }

    /// hat f_nu(beta) as a BetaPoly.
    BetaPoly project_mode(const Mode& nu) const {
        BetaPoly r;
        auto it = c_.lower_bound({nu, std::numeric_limits<int>::min()});
        for (; it != c_.end() && it->first.first == nu; ++it) r.add(it->first.second, it->second);
        return r;
    }

    /// Distinct alpha-modes present, in lexicographic order.
    std::vector<Mode> alpha_support() const {
        std::set<Mode> s;
        for (auto& kv : c_) s.insert(kv.first.first);
        return {s.begin(), s.end()};
    }

    /// max |nu|_1 over the support.
    int alpha_degree() const {
        int s = 0;
        for (auto& kv : c_) s = std::max(s, l1(kv.first.first));
        return s;
    }

    cplx eval(const std::vector<double>& alpha, double beta) const {
        cplx s{};
        for (auto& [k, v] : c_) s += v * std::polar(1.0, dot(alpha, k.first) + k.second * beta);
        return s;
    }

    double max_abs() const {
        double s = 0.0;
        for (auto& kv : c_) s = std::max(s, std::abs(kv.second));
        return s;
    }

    /// c_{-nu,-m} = conj(c_{nu,m}) within tol * max_abs().
    bool is_real(double tol = 1e-12) const {
        double scale = max_abs();
        for (auto& [k, v] : c_) {
            Mode neg = k.first;
            for (int& c : neg) c = -c;
            if (std::abs(coeff(neg, -k.second) - std::conj(v)) > tol * scale) return false;
        }
        return true;
    }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (auto& [k, v] : c_)
            arr.push_back({{"nu", k.first}, {"m", k.second}, {"re", v.real()}, {"im", v.imag()}});
        return arr;
    }

    /// Parses [{"nu": [...], "m": int, "re": x, "im": y}, ...]. Rejects
    /// duplicate keys, wrong dimensions, and non-real data.
    static TrigPoly from_json(const nlohmann::json& j, int d) {
        if (!j.is_array()) throw ConfigError("trig polynomial must be a JSON array");
        TrigPoly t(d);
        std::set<TrigKey> seen;
        for (auto& rec : j) {
            if (!rec.is_object()) throw ConfigError("trig polynomial record must be an object");
            for (auto it = rec.begin(); it != rec.end(); ++it)
                if (it.key() != "nu" && it.key() != "m" && it.key() != "re" && it.key() != "im")
                    throw ConfigError("unknown key '" + it.key() + "' in trig polynomial record");
            if (!rec.contains("nu") || !rec.contains("m"))
                throw ConfigError("trig polynomial record needs 'nu' and 'm'");
            Mode nu = rec.at("nu").get<Mode>();
            if (static_cast<int>(nu.size()) != d)
                throw ConfigError("mode of dimension " + std::to_string(nu.size()) + ", expected " +
                                  std::to_string(d));
            int m = rec.at("m").get<int>();
            double re = rec.value("re", 0.0), im = rec.value("im", 0.0);
            if (!seen.insert({nu, m}).second) throw ConfigError("duplicate trig polynomial key");
            t.add(nu, m, {re, im});
        }
        if (!t.is_real(1e-12)) throw ConfigError("trig polynomial is not real: c(-nu,-m) != conj c(nu,m)");
        return t;
    }

    friend bool operator==(const TrigPoly& a, const TrigPoly& b) { return a.d_ == b.d_ && a.c_ == b.c_; }

private:
    void check_mode(const Mode& nu) const {
        if (static_cast<int>(nu.size()) != d_)
            throw ConfigError("mode dimension " + std::to_string(nu.size()) + " != d=" + std::to_string(d_));
    }
    void merge_dim(const TrigPoly& o) {
        if (o.d_ != d_) throw ConfigError("trig polynomial dimension mismatch");
    }

    int d_ = 0;
    Map c_;
};

}  // namespace lindstedt
