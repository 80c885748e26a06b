#pragma once
// Batch commands behind the command-line tool.
//
// Each command writes its artifacts into the output directory and returns
// the reports it asserted. The tool exits 0 only when every asserted check
// passed.

#include <filesystem>
#include <fstream>
#include <memory>

#include "config.hpp"
#include "torus.hpp"

namespace lindstedt {

struct CommandResult {
    std::string command;
    std::vector<Report> reports;
    std::vector<std::string> files;
    std::vector<std::string> notes;

    bool pass() const {
        for (auto& r : reports)
            if (!r.pass()) return false;
        return true;
    }
    void merge(CommandResult o) {
        for (auto& r : o.reports) reports.push_back(std::move(r));
        for (auto& f : o.files) files.push_back(std::move(f));
        for (auto& n : o.notes) notes.push_back(std::move(n));
    }

    /// One record per failed asserted check.
    nlohmann::json failures() const {
        auto arr = nlohmann::json::array();
        for (auto& r : reports)
            for (auto& c : r.checks)
                if (!c.pass())
                    arr.push_back({{"suite", r.suite}, {"check", c.name}, {"deviation", c.deviation},
                                   {"tolerance", c.tolerance}, {"detail", c.detail}});
        return arr;
    }
    nlohmann::json summary() const {
        auto suites = nlohmann::json::array();
        for (auto& r : reports) suites.push_back(r.to_json());
        return {{"command", command}, {"pass", pass()}, {"suites", suites}, {"files", files}, {"notes", notes},
                {"failures", failures()}};
    }
};

/// Everything derived from the config that several commands share. Built
/// once; the frequency and scale tables are validated at construction.
class Workspace {
public:
    Workspace(RunConfig cfg, std::filesystem::path out) : cfg_(std::move(cfg)), out_(std::move(out)) {
        std::vector<std::string> errs;
        try {
            freq_ = Frequency(cfg_.omega, cfg_.M_max);
        } catch (const std::exception& e) {
            errs.push_back(std::string("omega: ") + e.what());
        }
        if (errs.empty()) {
            try {
                sc_ = build_scales(freq_, cfg_.n_max);
            } catch (const std::exception& e) {
                errs.push_back(std::string("n_max/M_max: ") + e.what());
            }
        }
        if (cfg_.f.d() != cfg_.d()) errs.push_back("f: dimension differs from omega");
        if (!errs.empty()) throw ConfigErrors(errs);
        std::filesystem::create_directories(out_);
    }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    const RunConfig& cfg() const { return cfg_; }
    const Frequency& freq() const { return freq_; }
    const ScaleSystem& scales() const { return sc_; }

    const CoeffTable& series() {
        if (!table_) {
            SeriesOptions o;
            o.convex_sign_flip = cfg_.convex_sign_flip;
            table_ = std::make_unique<CoeffTable>(compute_series(cfg_.f, freq_, cfg_.K, o));
        }
        return *table_;
    }
    const DiagramContext& context() {
        if (!ctx_) ctx_ = std::make_unique<DiagramContext>(cfg_.f, sc_, cfg_.convex_sign_flip);
        return *ctx_;
    }
    const PlainSelfEnergy& self_energy() {
        if (!se_) se_ = std::make_unique<PlainSelfEnergy>(context(), cfg_.K_tree);
        return *se_;
    }
    const RenormCatalog& catalog() {
        if (!cat_) cat_ = std::make_unique<RenormCatalog>(context(), cfg_.K_tree, cfg_.grid.l1_max);
        return *cat_;
    }
    const RegimeInfo& regime() {
        if (!regime_) regime_ = std::make_unique<RegimeInfo>(classify_condition(series(), &self_energy(), cfg_.tol.vanish));
        return *regime_;
    }
    /// Bifurcation result over the configured eps list; empty when the
    /// regime is not a bifurcation.
    const BifurcationResult* bifurcation() {
        if (regime().regime != Regime::bifurcation) return nullptr;
        if (!bif_) {
            BifurcationOptions o;
            o.grid = cfg_.grid.roots;
            o.root_tol = cfg_.tol.root;
            o.newton_tol = cfg_.tol.newton;
            o.vanish_tol = cfg_.tol.vanish;
            o.eps = cfg_.epsilon;
            bif_ = std::make_unique<BifurcationResult>(solve_bifurcation(series(), regime().order, o));
        }
        return bif_.get();
    }

    std::string write(const std::string& name, const nlohmann::json& j) {
        auto p = out_ / name;
        std::ofstream(p) << j.dump(2) << "\n";
        return p.string();
    }
    std::string write(const std::string& name, const std::string& text) {
        auto p = out_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

private:
    RunConfig cfg_;
    std::filesystem::path out_;
    Frequency freq_;
    ScaleSystem sc_;
    std::unique_ptr<CoeffTable> table_;
    std::unique_ptr<DiagramContext> ctx_;
    std::unique_ptr<PlainSelfEnergy> se_;
    std::unique_ptr<RenormCatalog> cat_;
    std::unique_ptr<RegimeInfo> regime_;
    std::unique_ptr<BifurcationResult> bif_;
};

/// Compact number for suite labels (data fields keep 17 digits).
inline std::string label_double(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

inline int top_scale(const Workspace& ws) { return std::min(4, ws.scales().n_max()); }

inline CommandResult cmd_smalldiv(Workspace& ws) {
    CommandResult r{"smalldiv", {}, {}, {}};
    const auto& freq = ws.freq();
    const auto& sc = ws.scales();
    nlohmann::json alpha = nlohmann::json::array(), scales = nlohmann::json::array();
    std::ostringstream csv;
    csv << "m,alpha,argmin,bryuno_partial\n";
    for (int m = 0; m <= freq.M_max(); ++m) {
        double b = bryuno_partial(freq, m);
        alpha.push_back({{"m", m}, {"alpha", freq.alpha(m)}, {"argmin", freq.alpha_argmin(m)}, {"bryuno_partial", b}});
        csv << m << "," << format_double(freq.alpha(m)) << ",";
        const auto& nu = freq.alpha_argmin(m);
        for (std::size_t i = 0; i < nu.size(); ++i) csv << (i ? " " : "") << nu[i];
        csv << "," << format_double(b) << "\n";
    }
    for (int n = 0; n <= sc.n_max(); ++n)
        scales.push_back({{"n", n}, {"m", sc.m(n)}, {"p", sc.p(n)}, {"alpha", sc.alpha_at(n)}});
    r.reports.push_back(check_partition_of_unity(sc));
    r.files.push_back(ws.write("smalldiv.json", nlohmann::json{{"omega", freq.omega()},
                                                             {"alpha", alpha},
                                                             {"scales", scales},
                                                             {"m_next", sc.m(sc.n_max() + 1)},
                                                             {"halving_failures", sc.halving_failures()}}));
    r.files.push_back(ws.write("alpha.csv", csv.str()));
    return r;
}

inline CommandResult cmd_series(Workspace& ws) {
    CommandResult r{"series", {}, {}, {}};
    const auto& t = ws.series();
    r.reports.push_back(check_zero_modes(t, t.K));
    Report id{"range equations", {}};
    id.add("recursion solves the range equations order by order",
           range_identity_residual(t, ws.cfg().f, ws.freq()), 1e-12);
    r.reports.push_back(id);
    r.files.push_back(ws.write("series.json", series_to_json(t)));
    r.files.push_back(ws.write("series.csv", series_to_csv(t)));
    if (!ws.cfg().epsilon.empty()) r.notes.push_back("series writes coefficient tables only; see torus for eps sums");
    return r;
}

inline CommandResult cmd_verify_lemmas(Workspace& ws) {
    CommandResult r{"verify-lemmas", {}, {}, {}};
    const auto& cfg = ws.cfg();
    const auto& t = ws.series();
    const auto& se = ws.self_energy();
    auto betas = cfg.beta_samples();
    std::vector<double> two(betas.begin(), betas.begin() + std::min<std::size_t>(2, betas.size()));
    const int n_top = top_scale(ws);
    r.reports.push_back(check_zero_modes(t, t.K));
    r.reports.push_back(check_tree_sums(ws.context(), t, cfg.K_tree, cfg.grid.l1_max, betas, cfg.tol.tree_sum));
    r.reports.push_back(check_self_energy_symmetries(se, cfg.K_tree, n_top, two, cfg.grid.samples, cfg.tol.identity));
    r.reports.push_back(check_zero_mode_derivatives(se, t, cfg.K_tree, betas, cfg.tol.identity));
    r.reports.push_back(check_decomposition(se, cfg.K_tree, std::min(2, n_top), {betas.front()}));
    r.reports.push_back(variational_identity_diagnostic(se, t, cfg.K_tree, betas));
    r.reports.push_back(check_counting(ws.context(), cfg.K_tree, cfg.grid.enter_l1));
    nlohmann::json suites = nlohmann::json::array();
    for (auto& rep : r.reports) suites.push_back(rep.to_json());
    r.files.push_back(ws.write("lemmas.json", suites));
    return r;
}

inline CommandResult cmd_self_energy(Workspace& ws) {
    CommandResult r{"self-energy", {}, {}, {}};
    const auto& cfg = ws.cfg();
    const auto& cat = ws.catalog();
    const int n_top = top_scale(ws);
    auto betas = cfg.beta_samples();
    std::vector<double> eps = cfg.epsilon.empty() ? std::vector<double>{0.01} : cfg.epsilon;
    const int d = cfg.d();
    nlohmann::json runs = nlohmann::json::array();
    for (double e : eps)
        for (std::size_t b = 0; b < std::min<std::size_t>(2, betas.size()); ++b) {
            ResumOptions o;
            o.K = cfg.K_tree;
            o.eps = e;
            o.beta0 = betas[b];
            NumericResum R(cat, o);
            Report sym = check_resummed_symmetries(R, n_top, cfg.grid.samples, cfg.tol.identity);
            Report ord = check_resummed_orders(R, n_top);
            Report det{"determinant formula", {}};
            std::vector<double> xs{1e-4, 5e-4, -1e-3};
            for (int p = 0; p <= n_top; ++p) {
                Check c = determinant_monitor(R, p, xs, cfg.tol.identity);
                c.asserted = false;  // the gap is O(eps^2); logged
                det.checks.push_back(c);
            }
            Report fin{"propagators finite", {}};
            fin.add("no singular propagator", double(R.violations().size()), 0.0);
            std::string tag = " (eps=" + label_double(e) + ", beta0=" + label_double(betas[b]) + ")";
            for (Report* rep : {&sym, &ord, &det, &fin}) {
                rep->suite += tag;
                r.reports.push_back(*rep);
            }
            runs.push_back({{"eps", e}, {"beta0", betas[b]}, {"violations", R.violations().size()}});
        }
    r.reports.push_back(check_reexpansion(cat, ws.series(), std::min(cfg.K_tree, cfg.K), betas, cfg.tol.reexpansion));
    r.reports.push_back(check_renormalised_counting(cat));

    // state dump: eps-orders of the scale-n self-energy on sampled x
    ResumOptions o;
    o.K = cfg.K_tree;
    o.beta0 = betas.front();
    SymbolicResum S(cat, o);
    nlohmann::json state = nlohmann::json::array();
    for (int n = -1; n <= n_top; ++n)
        for (double x : symmetry_samples(ws.scales(), std::max(n, 0), 6)) {
            auto M = S.self_energy_scale(n, x);
            nlohmann::json orders = nlohmann::json::array();
            for (int k = 0; k <= cfg.K_tree; ++k) {
                nlohmann::json rows = nlohmann::json::array();
                for (int u = 0; u <= d; ++u) {
                    nlohmann::json row = nlohmann::json::array();
                    for (int e = 0; e <= d; ++e) {
                        cplx v = M(u, e).coeff(k).v;
                        row.push_back({v.real(), v.imag()});
                    }
                    rows.push_back(row);
                }
                orders.push_back({{"k", k}, {"matrix", rows}});
            }
            state.push_back({{"scale", n}, {"x", x}, {"orders", orders}});
        }
    r.files.push_back(ws.write("self_energy.json", nlohmann::json{{"beta0", betas.front()},
                                                                {"runs", runs},
                                                                {"clusters_per_scale", [&] {
                                                                     nlohmann::json c = nlohmann::json::array();
                                                                     for (int n = -1; n <= ws.scales().n_max(); ++n)
                                                                         c.push_back(cat.clusters(n).size());
                                                                     return c;
                                                                 }()},
                                                                {"state", state}}));
    return r;
}

inline CommandResult cmd_bifurcation(Workspace& ws) {
    CommandResult r{"bifurcation", {}, {}, {}};
    const auto& reg = ws.regime();
    nlohmann::json out{{"regime", regime_to_json(reg)}};
    if (auto* b = ws.bifurcation()) {
        r.reports.push_back(check_bifurcation(*b, ws.cfg().tol.vanish, ws.cfg().tol.newton));
        out["bifurcation"] = bifurcation_to_json(*b);
        std::ostringstream csv;
        csv << "root,eps,beta0,residual,converged\n";
        for (auto& br : b->branches)
            for (auto& p : br.points)
                csv << br.root << "," << format_double(p.eps) << "," << format_double(p.beta0) << ","
                    << format_double(p.residual) << "," << (p.converged ? 1 : 0) << "\n";
        r.files.push_back(ws.write("branches.csv", csv.str()));
        for (auto& n : b->notes) r.notes.push_back(n);
    } else {
        r.notes.push_back("no bifurcation equation: " + reg.label());
    }
    r.files.push_back(ws.write("bifurcation.json", out));
    return r;
}

inline CommandResult cmd_torus(Workspace& ws) {
    CommandResult r{"torus", {}, {}, {}};
    const auto& cfg = ws.cfg();
    const auto& reg = ws.regime();
    const auto* b = ws.bifurcation();
    nlohmann::json sols = nlohmann::json::array();
    if (cfg.epsilon.empty()) r.notes.push_back("empty eps list: no torus assembled");
    if (reg.regime == Regime::mixed_self_energy)
        r.notes.push_back("mixed self-energy regime: no torus is assembled; see self-energy for the monitors");
    for (double eps : cfg.epsilon) {
        if (reg.regime == Regime::mixed_self_energy) break;
        std::vector<double> beta0s;
        if (b) {
            auto root = b->selected_root(eps);
            if (eps == 0.0) {
                for (auto& x : b->roots)
                    if (!x.degenerate) beta0s.push_back(x.beta);
            } else if (!root) {
                r.notes.push_back("no root selected for eps=" + format_double(eps));
            } else if (auto* p = b->branch_point(*root, eps); p && p->converged) {
                beta0s.push_back(p->beta0);
            } else {
                Report fail{"branch", {}};
                fail.add("Newton branch converged at eps=" + format_double(eps), 1.0, 0.0);
                r.reports.push_back(fail);
            }
        } else {
            beta0s = cfg.beta0.empty() ? std::vector<double>{0.0} : cfg.beta0;
        }
        for (double be : beta0s) {
            auto sol = assemble(ws.series(), eps, be, cfg.K, reg.label());
            auto res = verify_residual(sol, cfg.f, cfg.grid.residual);
            auto ode = verify_ode(sol, cfg.f, cfg.ode.T, cfg.ode.h, cfg.ode.psi0);
            Report rep{"torus (eps=" + label_double(eps) + ", beta0=" + label_double(be) + ")", {}};
            rep.add("range residual", res.r_range, cfg.tol.residual);
            rep.add("alpha zero-mode residual", res.r_bif_alpha, cfg.tol.bif_alpha * std::max(std::abs(eps), 1e-300));
            rep.add("reality of a, b", res.imag, 1e-10);
            rep.add("zero-mode residual of the beta equation", res.r_bif, 0.0, "logged", false);
            rep.add("integrator did not escape", ode.escaped ? 1.0 : 0.0, 0.0,
                    ode.escaped ? "escape at t=" + format_double(ode.escape_time) : "");
            rep.add("ODE deviation over the horizon", ode.max_deviation, 0.0, "logged", false);
            if (cfg.regularised && b && eps != 0.0) {
                Report chain = check_regularised_chain(ws.catalog(), eps, be, b->k0, cfg.K_tree);
                chain.suite += " (eps=" + label_double(eps) + ", beta0=" + label_double(be) + ")";
                r.reports.push_back(chain);
            }
            r.reports.push_back(rep);
            sols.push_back({{"torus", torus_to_json(sol)}, {"residual", residual_to_json(res)}, {"ode", ode_to_json(ode)}});
        }
    }
    r.files.push_back(ws.write("torus.json", nlohmann::json{{"regime", regime_to_json(reg)}, {"solutions", sols}}));
    return r;
}

inline CommandResult cmd_verify(Workspace& ws) {
    CommandResult r{"verify", {}, {}, {}};
    r.merge(cmd_smalldiv(ws));
    r.merge(cmd_series(ws));
    r.merge(cmd_verify_lemmas(ws));
    r.merge(cmd_self_energy(ws));
    r.merge(cmd_bifurcation(ws));
    r.merge(cmd_torus(ws));
    return r;
}

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> n{"smalldiv", "series", "verify-lemmas", "self-energy",
                                            "bifurcation", "torus", "verify"};
    return n;
}

inline CommandResult run_command(const std::string& name, Workspace& ws) {
    if (name == "smalldiv") return cmd_smalldiv(ws);
    if (name == "series") return cmd_series(ws);
    if (name == "verify-lemmas") return cmd_verify_lemmas(ws);
    if (name == "self-energy") return cmd_self_energy(ws);
    if (name == "bifurcation") return cmd_bifurcation(ws);
    if (name == "torus") return cmd_torus(ws);
    if (name == "verify") return cmd_verify(ws);
    throw ConfigErrors({"unknown command '" + name + "'"});
}

/// Error report for exceptions: kind is config, budget, singular or runtime.
inline nlohmann::json error_report(const std::string& command, const std::exception& e) {
    std::string kind = "runtime";
    std::vector<std::string> messages{e.what()};
    if (auto* c = dynamic_cast<const ConfigErrors*>(&e)) {
        kind = "config";
        messages = c->errors;
    } else if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
    else if (dynamic_cast<const BudgetError*>(&e)) kind = "budget";
    else if (dynamic_cast<const SingularMatrix*>(&e)) kind = "singular";
    return {{"status", "error"}, {"command", command}, {"kind", kind}, {"messages", messages}};
}

}  // namespace lindstedt
