#pragma once
// Run configuration: JSON in, validated before any computation.
//
// Unknown keys are rejected. Every problem found is collected and reported
// together in one ConfigError.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "fourier.hpp"

namespace lindstedt {

struct GridConfig {
    int residual = 32;          // psi lattice per angle for the range residual
    int roots = 2048;           // bifurcation root grid
    int samples = 20;           // x samples per scale in the identity suites
    int l1_max = 3;             // |nu|_1 cap for tree-sum checks and renormalised trees
    int enter_l1 = 4;           // entering-momentum cap for cluster counting
};

struct ToleranceConfig {
    double vanish = 1e-10;      // relative threshold for "G^(k) vanishes"
    double root = 1e-12;        // bisection width
    double newton = 1e-12;      // truncated G at branch points
    double identity = 1e-9;     // matrix identities
    double tree_sum = 1e-10;    // tree sums vs recursion
    double reexpansion = 1e-8;  // resummed vs plain coefficients
    double residual = 1e-6;     // range residual of an emitted torus
    double bif_alpha = 1e-9;    // alpha zero-mode residual, relative to |eps|
};

struct OdeConfig {
    double T = 10.0;
    double h = 1e-3;
    std::vector<double> psi0;   // empty: the origin
};

struct RunConfig {
    std::vector<double> omega;
    std::string omega_preset;   // "golden2" or empty
    TrigPoly f;
    int K = 3;
    int K_tree = 3;
    int n_max = 8;
    int M_max = 20;
    std::vector<double> epsilon;
    std::vector<double> beta0;  // overrides of the beta0 sample set
    GridConfig grid;
    ToleranceConfig tol;
    OdeConfig ode;
    bool regularised = false;
    bool convex_sign_flip = false;

    int d() const { return static_cast<int>(omega.size()); }

    /// beta0 samples for the identity suites: the overrides, or 8 points.
    std::vector<double> beta_samples() const {
        if (!beta0.empty()) return beta0;
        std::vector<double> b;
        for (int i = 0; i < 8; ++i) b.push_back(0.3 + 2.0 * M_PI * i / 8);
        return b;
    }
};

namespace detail {

class Collector {
public:
    void error(const std::string& msg) { errors_.push_back(msg); }
    const std::vector<std::string>& errors() const { return errors_; }

    void keys(const nlohmann::json& j, const std::string& where, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            error(where + ": expected an object");
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!allowed.count(it.key())) error(where + ": unknown key '" + it.key() + "'");
    }

    template <class T>
    void get(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
        if (!j.is_object() || !j.contains(key)) return;
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            error(where + key + ": wrong type");
        }
    }
    void get_int(const nlohmann::json& j, const char* key, int& out, const std::string& where, int lo, int hi) {
        if (!j.is_object() || !j.contains(key)) return;
        if (!j.at(key).is_number_integer()) {
            error(where + key + ": expected an integer");
            return;
        }
        out = j.at(key).get<int>();
        if (out < lo || out > hi)
            error(where + key + "=" + std::to_string(out) + " outside [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "]");
    }
    void get_positive(const nlohmann::json& j, const char* key, double& out, const std::string& where) {
        if (!j.is_object() || !j.contains(key)) return;
        if (!j.at(key).is_number()) {
            error(where + key + ": expected a number");
            return;
        }
        out = j.at(key).get<double>();
        if (!(out > 0) || !std::isfinite(out)) error(where + key + ": must be positive and finite");
    }
    void get_reals(const nlohmann::json& j, const char* key, std::vector<double>& out, const std::string& where) {
        if (!j.is_object() || !j.contains(key)) return;
        const auto& a = j.at(key);
        if (!a.is_array()) {
            error(where + key + ": expected an array of numbers");
            return;
        }
        out.clear();
        for (auto& x : a) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) {
                error(where + key + ": entries must be finite numbers");
                return;
            }
            out.push_back(x.get<double>());
        }
    }

private:
    std::vector<std::string> errors_;
};

inline std::string join_errors(const std::vector<std::string>& errs) {
    std::string s = "invalid config (" + std::to_string(errs.size()) + " problem" + (errs.size() == 1 ? "" : "s") + ")";
    for (auto& e : errs) s += "\n  - " + e;
    return s;
}

}  // namespace detail

/// Thrown for invalid configs; `errors` lists every problem found.
class ConfigErrors : public ConfigError {
public:
    explicit ConfigErrors(std::vector<std::string> errs)
        : ConfigError(detail::join_errors(errs)), errors(std::move(errs)) {}
    std::vector<std::string> errors;
};

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> k{"d",       "omega",  "f",     "K",           "K_tree", "n_max",
                                         "M_max",   "epsilon", "beta0", "grid",        "tolerances",
                                         "ode",     "flags"};
    return k;
}

inline RunConfig parse_config(const nlohmann::json& j) {
    detail::Collector c;
    RunConfig cfg;
    c.keys(j, "config", config_keys());
    if (!c.errors().empty() && !j.is_object()) throw ConfigErrors(c.errors());

    if (!j.contains("omega")) c.error("omega: required");
    else if (j["omega"].is_string()) {
        cfg.omega_preset = j["omega"].get<std::string>();
        if (cfg.omega_preset == "golden2") cfg.omega = {1.0, (std::sqrt(5.0) - 1.0) / 2.0};
        else c.error("omega: unknown preset '" + cfg.omega_preset + "' (known: golden2)");
    } else c.get_reals(j, "omega", cfg.omega, "");
    if (j.contains("omega") && !j["omega"].is_string() && cfg.omega.empty()) c.error("omega: must be non-empty");

    if (j.contains("d")) {
        int d = -1;
        c.get_int(j, "d", d, "", 1, 8);
        if (d > 0 && !cfg.omega.empty() && d != cfg.d())
            c.error("d=" + std::to_string(d) + " disagrees with omega of length " + std::to_string(cfg.d()));
    }
    c.get_int(j, "K", cfg.K, "", 1, 12);
    c.get_int(j, "K_tree", cfg.K_tree, "", 1, 6);
    c.get_int(j, "n_max", cfg.n_max, "", 0, 30);
    c.get_int(j, "M_max", cfg.M_max, "", 1, 40);
    c.get_reals(j, "epsilon", cfg.epsilon, "");
    c.get_reals(j, "beta0", cfg.beta0, "");

    if (!j.contains("f")) c.error("f: required");
    else if (!cfg.omega.empty()) {
        try {
            cfg.f = TrigPoly::from_json(j["f"], cfg.d());
        } catch (const std::exception& e) {
            c.error(std::string("f: ") + e.what());
        }
        if (cfg.f.coeffs().empty() && c.errors().empty()) c.error("f: must have at least one term");
    }

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        c.keys(g, "grid", {"residual", "roots", "samples", "l1_max", "enter_l1"});
        c.get_int(g, "residual", cfg.grid.residual, "grid.", 4, 512);
        c.get_int(g, "roots", cfg.grid.roots, "grid.", 16, 1 << 20);
        c.get_int(g, "samples", cfg.grid.samples, "grid.", 1, 1000);
        c.get_int(g, "l1_max", cfg.grid.l1_max, "grid.", 1, 8);
        c.get_int(g, "enter_l1", cfg.grid.enter_l1, "grid.", 1, 8);
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        c.keys(t, "tolerances",
               {"vanish", "root", "newton", "identity", "tree_sum", "reexpansion", "residual", "bif_alpha"});
        c.get_positive(t, "vanish", cfg.tol.vanish, "tolerances.");
        c.get_positive(t, "root", cfg.tol.root, "tolerances.");
        c.get_positive(t, "newton", cfg.tol.newton, "tolerances.");
        c.get_positive(t, "identity", cfg.tol.identity, "tolerances.");
        c.get_positive(t, "tree_sum", cfg.tol.tree_sum, "tolerances.");
        c.get_positive(t, "reexpansion", cfg.tol.reexpansion, "tolerances.");
        c.get_positive(t, "residual", cfg.tol.residual, "tolerances.");
        c.get_positive(t, "bif_alpha", cfg.tol.bif_alpha, "tolerances.");
    }
    if (j.contains("ode")) {
        const auto& o = j["ode"];
        c.keys(o, "ode", {"T", "h", "psi0"});
        c.get_positive(o, "T", cfg.ode.T, "ode.");
        c.get_positive(o, "h", cfg.ode.h, "ode.");
        c.get_reals(o, "psi0", cfg.ode.psi0, "ode.");
        if (cfg.ode.h > 1e-3) c.error("ode.h: the integrator check needs h <= 1e-3");
        if (!cfg.ode.psi0.empty() && !cfg.omega.empty() && int(cfg.ode.psi0.size()) != cfg.d())
            c.error("ode.psi0: needs one angle per frequency");
    }
    if (j.contains("flags")) {
        const auto& fl = j["flags"];
        c.keys(fl, "flags", {"regularised", "convex_sign_flip"});
        c.get(fl, "regularised", cfg.regularised, "flags.");
        c.get(fl, "convex_sign_flip", cfg.convex_sign_flip, "flags.");
    }
    if (cfg.K_tree > cfg.K) c.error("K_tree must not exceed K (the tree checks compare with the series)");
    if (!c.errors().empty()) throw ConfigErrors(c.errors());
    return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["d"] = cfg.d();
    if (cfg.omega_preset.empty()) j["omega"] = cfg.omega;
    else j["omega"] = cfg.omega_preset;
    j["f"] = cfg.f.to_json();
    j["K"] = cfg.K;
    j["K_tree"] = cfg.K_tree;
    j["n_max"] = cfg.n_max;
    j["M_max"] = cfg.M_max;
    j["epsilon"] = cfg.epsilon;
    j["beta0"] = cfg.beta0;
    j["grid"] = {{"residual", cfg.grid.residual}, {"roots", cfg.grid.roots}, {"samples", cfg.grid.samples},
                 {"l1_max", cfg.grid.l1_max}, {"enter_l1", cfg.grid.enter_l1}};
    j["tolerances"] = {{"vanish", cfg.tol.vanish},     {"root", cfg.tol.root},
                       {"newton", cfg.tol.newton},     {"identity", cfg.tol.identity},
                       {"tree_sum", cfg.tol.tree_sum}, {"reexpansion", cfg.tol.reexpansion},
                       {"residual", cfg.tol.residual}, {"bif_alpha", cfg.tol.bif_alpha}};
    j["ode"] = {{"T", cfg.ode.T}, {"h", cfg.ode.h}, {"psi0", cfg.ode.psi0}};
    j["flags"] = {{"regularised", cfg.regularised}, {"convex_sign_flip", cfg.convex_sign_flip}};
    return j;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigErrors({"cannot open config file '" + path + "'"});
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigErrors({std::string("config is not valid JSON: ") + e.what()});
    }
    return parse_config(j);
}

}  // namespace lindstedt
