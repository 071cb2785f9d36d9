#include "calcium/bifurcation.hpp"
#include "calcium/blowup.hpp"
#include "calcium/config.hpp"
#include "calcium/cycles.hpp"
#include "calcium/gspt.hpp"
#include "calcium/io.hpp"
#include "calcium/kernels.hpp"
#include "calcium/ode.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace calcium;

namespace {

constexpr const char* kSchemaVersion = "1";

struct Common {
    std::string params_path;
    std::string convention;
    std::string out_dir;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    bool json_stdout = false;
    bool timing = false;
};

json num(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

class Report {
public:
    Report(std::string sub, const RunConfig& cfg) : sub_(std::move(sub)), cfg_(cfg)
    {
        j_["schema_version"] = kSchemaVersion;
        j_["subcommand"] = sub_;
        j_["convention"] = to_string(cfg.convention);
        j_["fingerprint"] = fingerprint(cfg.params.scaled);
        j_["tolerances"] = {{"rel_tol", cfg.rel_tol}, {"abs_tol", cfg.abs_tol}};
        j_["inputs"] = json::object();
        j_["inputs"]["params_source"] = fs::path(cfg.source).filename().string();
        j_["outputs"] = json::array();
        j_["results"] = json::object();
        j_["checks"] = json::array();
    }

    json& inputs() { return j_["inputs"]; }
    json& results() { return j_["results"]; }

    std::string path(const std::string& file) const { return (fs::path(cfg_.out_dir) / file).string(); }

    io::CsvWriter csv(const std::string& file, const std::string& schema, const std::vector<std::string>& cols)
    {
        j_["outputs"].push_back(file);
        return io::CsvWriter(path(file), schema, cols, cfg_.convention, fingerprint(cfg_.params.scaled));
    }

    // gated checks decide the exit status; the rest are reported comparisons
    void check(const std::string& name, double measured, double expected, double tol, bool pass, bool gated = true,
               const std::string& detail = {})
    {
        json c{{"name", name}, {"measured", num(measured)}, {"expected", num(expected)}, {"tolerance", num(tol)},
               {"pass", pass}, {"gated", gated}};
        if (!detail.empty()) c["detail"] = detail;
        j_["checks"].push_back(c);
        if (gated && !pass) ok_ = false;
    }

    int finish(const Common& common, double seconds)
    {
        j_["pass"] = ok_;
        if (common.timing) j_["wall_time_s"] = seconds;
        const std::string file = sub_ + ".json";
        j_["outputs"].push_back(file);
        std::ofstream out(path(file));
        out << j_.dump(2) << "\n";
        if (common.json_stdout) std::cout << j_.dump(2) << "\n";
        else std::cout << sub_ << ": " << (ok_ ? "pass" : "FAIL") << " (" << path(file) << ")\n";
        return ok_ ? 0 : 1;
    }

private:
    std::string sub_;
    const RunConfig& cfg_;
    json j_;
    bool ok_ = true;
};

RunConfig load(const Common& c)
{
    RunConfig cfg = c.params_path.empty() ? parse_config_text(default_config_text(), "<defaults>")
                                          : parse_config(c.params_path);
    if (!c.convention.empty()) cfg.convention = convention_from_string(c.convention);
    if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
    if (c.rel_tol > 0.0) cfg.rel_tol = c.rel_tol;
    if (c.abs_tol > 0.0) cfg.abs_tol = c.abs_tol;
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    return cfg;
}

json params_json(const ScaledParams& p)
{
    json j = json::object();
    for (const auto& [k, v] : to_map(p)) j[k] = v;
    return j;
}

ode::IntegratorConfig integrator(const RunConfig& cfg)
{
    ode::IntegratorConfig ic;
    ic.rel_tol = cfg.rel_tol;
    ic.abs_tol = cfg.abs_tol;
    return ic;
}

cycles::CycleOptions cycle_options(const RunConfig& cfg)
{
    cycles::CycleOptions o;
    // cycle detection needs tighter control than the run default
    o.rel_tol = std::min(cfg.rel_tol, 1e-10);
    o.abs_tol = std::min(cfg.abs_tol, 1e-13);
    return o;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Common& common, double h0, double c0, double t0, double t1, double eps, const std::string& method,
                 int samples)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("simulate", cfg);
    const ScaledParams& p = cfg.params.scaled;
    if (eps <= 0.0) eps = p.eps;
    ode::IntegratorConfig ic = integrator(cfg);
    if (method == "explicit") ic.method = ode::Method::ExplicitAdaptive;
    else if (method != "implicit") throw std::invalid_argument("--method must be implicit or explicit");
    rep.inputs().update({{"h0", h0}, {"c0", c0}, {"t0", t0}, {"t1", t1}, {"eps", eps}, {"method", method},
                         {"samples", samples}, {"params", params_json(p)}});
    ode::Vec y0(2);
    y0 << h0, c0;
    const ode::Trajectory tr = ode::integrate(cycles::scaled_field(p, eps), y0, t0, t1, ic);
    auto out = rep.csv("simulate.csv", "trajectory", {"t", "h", "c"});
    if (samples > 0 && tr.ok()) {
        for (int i = 0; i <= samples; ++i) {
            const double t = t0 + (t1 - t0) * i / samples;
            const ode::Vec y = tr.eval(t);
            out.row({t, y(0), y(1)});
        }
    } else {
        for (std::size_t i = 0; i < tr.t.size(); ++i) out.row({tr.t[i], tr.y[i](0), tr.y[i](1)});
    }
    rep.results().update({{"termination", ode::to_string(tr.reason)}, {"message", tr.message}, {"steps", tr.steps},
                          {"rejected", tr.rejected}, {"fevals", tr.fevals}, {"t_end", tr.t_end},
                          {"h_end", tr.y_end(0)}, {"c_end", tr.y_end(1)}});
    rep.check("integration reached t1", tr.t_end, t1, 0.0, tr.ok());
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_manifold(const Common& common, double C_min, double C_max, int n)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("manifold", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"C_min", C_min}, {"C_max", C_max}, {"n", n}, {"params", params_json(p)}});
    auto out = rep.csv("manifold.csv", "critical_manifold_R2", {"C", "zeta", "lambda", "branch"});
    const gspt::FoldPoint fold = gspt::fold_point(p, cfg.convention);
    for (int i = 0; i <= n; ++i) {
        const double C = C_min + (C_max - C_min) * i / n;
        const double z = gspt::zeta(C, p, cfg.convention);
        const gspt::Branch b = gspt::classify_R2(C, p);
        const gspt::Eigenvalue ev = gspt::nontrivial_eigenvalue({z, C, b}, p, cfg.convention);
        out.row_text({io::format_double(C), io::format_double(z), io::format_double(ev.value), gspt::to_string(b)});
    }
    rep.results().update({{"h_F", fold.h_F}, {"C_F", fold.C_F}});
    rep.check("fold at the zeta maximum: zeta'(C_F) = 0", gspt::zeta_prime(fold.C_F, p, cfg.convention), 0.0, 1e-9,
              std::abs(gspt::zeta_prime(fold.C_F, p, cfg.convention)) < 1e-9);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_equilibria(const Common& common)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("equilibria", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs()["params"] = params_json(p);
    const double delta = std::sqrt(p.eps);
    const double nu = p.tau_hat / delta;
    const gspt::CubicRoots roots = gspt::equilibria_cubic(p, cfg.convention);
    auto out = rep.csv("equilibria.csv", "equilibria_R2", {"root_m", "C_star", "h_star", "stable"});
    json lim = json::array();
    const gspt::Cubic q = gspt::equilibrium_cubic(p, cfg.convention);
    double worst = 0.0;
    for (double m : roots.m) {
        const double C = std::sqrt(m);
        const double h = h_inf_C(C, p);
        const auto jc = bif::limit_jacobian_check(p, cfg.convention, C, nu);
        const bool stable = jc.trace_analytic < 0.0 && jc.det_analytic > 0.0;
        out.row_text({io::format_double(m), io::format_double(C), io::format_double(h), stable ? "1" : "0"});
        lim.push_back({{"m", m}, {"C", C}, {"h", h}, {"trace", jc.trace_analytic}, {"det", jc.det_analytic}});
        worst = std::max(worst, std::abs(q(m)) / std::max({std::abs(q.a3 * m * m * m), std::abs(q.a0), 1.0}));
    }
    json full = json::array();
    for (const State& s : bif::equilibria(p, p.eps)) {
        const auto jf = bif::jacobian_full(s, p, p.eps);
        full.push_back({{"h", s.h}, {"c", s.c}, {"C", s.c / delta}, {"trace", jf.trace}, {"det", jf.det},
                        {"stability", bif::to_string(jf.det < 0.0 ? bif::Stability::Saddle
                                                     : jf.trace < 0.0 ? bif::Stability::Stable
                                                                      : bif::Stability::Unstable)}});
    }
    rep.results().update({{"root_count", roots.count()}, {"double_root", roots.double_root},
                          {"limit_system", lim}, {"full_system", full}, {"eps", p.eps}});
    rep.check("cubic residual at roots (relative)", worst, 0.0, 1e-10, worst < 1e-10);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_fold(const Common& common, double C_star)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("fold", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"C_star", C_star}, {"params", params_json(p)}});
    const gspt::FoldPoint f = gspt::fold_point(p, cfg.convention);
    const gspt::FoldSeparationReport a = gspt::check_fold_separation(p, cfg.convention, C_star);
    rep.results().update({{"h_F", f.h_F}, {"C_F", f.C_F}, {"d2C_f0", f.d2C_f0}, {"dh_f0", f.dh_f0}, {"g", f.g},
                          {"dC_g", f.dC_g},
                          {"fold_separation",
                           {{"root_count", a.root_count}, {"C_star", a.C_star}, {"h_star", a.h_star}, {"C_F", a.C_F},
                            {"lhs", a.lhs}, {"rhs", a.rhs}, {"satisfied", a.satisfied}}}});
    rep.check("C_F ~ 0.68", f.C_F, 0.68, 0.01, std::abs(f.C_F - 0.68) < 0.01, false);
    rep.check("non-degenerate fold: d2C f0 != 0 and dh f0 != 0", std::min(std::abs(f.d2C_f0), std::abs(f.dh_f0)), 0.0,
              0.0, f.d2C_f0 != 0.0 && f.dh_f0 != 0.0);
    rep.check("fold separation chain lhs > rhs", a.lhs - a.rhs, 0.0, 0.0, a.satisfied, false);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

void write_orbit(Report& rep, const std::string& file, const cycles::LimitCycle& cyc)
{
    auto out = rep.csv(file, "orbit", {"t", "h", "c"});
    for (std::size_t i = 0; i < cyc.t.size(); ++i) out.row({cyc.t[i], cyc.h[i], cyc.c[i]});
}

int cmd_cycle(const Common& common, double eps, double rho1)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("cycle", cfg);
    const ScaledParams& p = cfg.params.scaled;
    if (eps <= 0.0) eps = p.eps;
    cycles::CycleOptions opt = cycle_options(cfg);
    opt.rho1 = rho1;
    rep.inputs().update({{"eps", eps}, {"rho1", rho1}, {"params", params_json(p)}});
    const cycles::LimitCycle cyc = cycles::find_limit_cycle(p, eps, opt);
    write_orbit(rep, "cycle_orbit.csv", cyc);
    rep.results().update({{"period", cyc.period}, {"floquet_exponent", cyc.floquet_exponent},
                          {"closure_gap", cyc.closure_gap}, {"returns", cyc.returns},
                          {"section_point", {{"h", cyc.section_point.h}, {"c", cyc.section_point.c}}},
                          {"iterates", cyc.iterates}});
    rep.check("attracting: floquet exponent < 0", cyc.floquet_exponent, 0.0, 0.0, cyc.floquet_exponent < 0.0);
    rep.check("closed orbit", cyc.closure_gap, 0.0, 1e-6, cyc.closure_gap < 1e-6);
    rep.check("period ~ 2e4 (+-25%)", cyc.period, 2e4, 0.25, std::abs(cyc.period / 2e4 - 1.0) <= 0.25, false);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_converge_eps(const Common& common, const std::vector<double>& eps_list, bool orbits)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("converge-eps", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"eps", eps_list}, {"params", params_json(p)}});
    const cycles::CycleOptions opt = cycle_options(cfg);
    const cycles::ConvergenceReport r = cycles::eps_convergence_sweep(p, eps_list, cfg.convention, opt);
    auto out = rep.csv("converge_eps.csv", "eps_convergence", {"eps", "period", "floquet", "hausdorff"});
    json entries = json::array();
    for (const auto& e : r.entries) {
        if (e.ok) out.row({e.eps, e.period, e.floquet, e.hausdorff});
        entries.push_back({{"eps", e.eps}, {"ok", e.ok}, {"period", num(e.period)}, {"floquet", num(e.floquet)},
                           {"hausdorff", num(e.hausdorff)}, {"error", e.error}});
    }
    if (orbits) {
        for (const auto& e : r.entries) {
            if (!e.ok) continue;
            char name[64];
            std::snprintf(name, sizeof name, "orbit_eps_%g.csv", e.eps);
            write_orbit(rep, name, cycles::find_limit_cycle(p, e.eps, opt));
        }
    }
    rep.results().update({{"entries", entries}, {"slope", r.slope}, {"intercept", r.intercept},
                          {"monotone", r.monotone}, {"floquet_eps2_ratio", r.floquet_eps2_ratio},
                          {"survivors", r.survivors}});
    bool all_neg = true;
    for (const auto& e : r.entries)
        if (e.ok && !(e.floquet < 0.0)) all_neg = false;
    rep.check("at least 4 converged cycles", r.survivors, 4, 0, r.sufficient, false);
    rep.check("Hausdorff exponent in [0.2, 0.55]", r.slope, 1.0 / 3.0, 0.0, r.slope >= 0.2 && r.slope <= 0.55, false);
    rep.check("distances monotone in eps", r.monotone, 1, 0, r.monotone, false);
    rep.check("floquet exponent < 0 for every cycle", all_neg, 1, 0, all_neg, false);
    rep.check("max/min |Lambda| eps^2 < 5", r.floquet_eps2_ratio, 5.0, 0.0, r.floquet_eps2_ratio < 5.0, false);
    rep.check("at least one cycle converged", r.survivors, 1, 0, r.survivors > 0);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_period_scan(const Common& common, const std::vector<double>& taus)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("period-scan", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"tau_hat", taus}, {"params", params_json(p)}});
    const auto rows = cycles::period_scan(p, taus, cfg.convention, cycle_options(cfg));
    auto out = rep.csv("period_scan.csv", "period_scan", {"tau_hat", "period", "order_estimate", "T_est"});
    std::vector<double> x, y;
    for (const auto& r : rows) {
        out.row({r.tau_hat, r.period, r.order_estimate, r.T_est});
        x.push_back(r.tau_hat);
        y.push_back(r.period);
    }
    const cycles::PeriodEstimate est = cycles::period_estimate(p, cfg.convention);
    json res{{"order_estimate", est.order_estimate}, {"v", est.v}, {"T_est", est.T_est},
             {"quad_error", est.quad_error}};
    if (rows.size() >= 2) {
        const cycles::LinearFit fit = cycles::linear_fit(x, y);
        double tmin = *std::min_element(y.begin(), y.end());
        res["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2},
                      {"intercept_fraction", std::abs(fit.intercept) / tmin}};
        rep.check("linear in tau_hat: R^2 > 0.99", fit.r2, 0.99, 0.0, fit.r2 > 0.99, false);
        rep.check("intercept < 10% of smallest period", std::abs(fit.intercept) / tmin, 0.1, 0.0,
                  std::abs(fit.intercept) / tmin < 0.1, false);
    }
    for (const auto& r : rows) {
        if (std::abs(r.tau_hat - p.tau_hat) > 1e-12) continue;
        const double ratio = r.period / r.order_estimate;
        res["ratio_to_order_estimate"] = ratio;
        res["ratio_to_T_est"] = r.period / r.T_est;
        rep.check("simulated / order estimate in [0.2, 1]", ratio, 0.6, 0.4, ratio >= 0.2 && ratio <= 1.0, false);
    }
    rep.results() = res;
    rep.check("every period positive", rows.empty() ? 0.0 : *std::min_element(y.begin(), y.end()), 0.0, 0.0,
              !rows.empty() && *std::min_element(y.begin(), y.end()) > 0.0);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

ScaledParams with_overrides(ScaledParams p, double p_value, double ct_value)
{
    if (p_value > 0.0) p.p = p_value;
    if (ct_value > 0.0) p.c_t = ct_value;
    return p;
}

void write_branch(Report& rep, const bif::Branch& br)
{
    auto out = rep.csv("branch.csv", "equilibrium_branch", {"param", "h", "c", "trace", "det", "stability"});
    for (const auto& pt : br.points)
        out.row_text({io::format_double(pt.param), io::format_double(pt.h), io::format_double(pt.c),
                      io::format_double(pt.trace), io::format_double(pt.det), bif::to_string(pt.stability)});
}

int cmd_branch(const Common& common, const std::string& axis_s, double from, double to, int steps, double p_value,
               double ct_value)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("branch", cfg);
    const ScaledParams p = with_overrides(cfg.params.scaled, p_value, ct_value);
    const bif::Axis axis = bif::axis_from_string(axis_s);
    rep.inputs().update({{"axis", bif::to_string(axis)}, {"from", from}, {"to", to}, {"steps", steps},
                         {"params", params_json(p)}});
    const bif::Branch br = bif::equilibrium_branch(p, axis, from, to, steps, p.eps);
    write_branch(rep, br);
    double worst = 0.0;
    int folds = 0;
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        worst = std::max(worst, std::abs(br.points[i].residual));
        if (i >= 2) {
            const double a = br.points[i - 1].param - br.points[i - 2].param;
            const double b = br.points[i].param - br.points[i - 1].param;
            if (a * b < 0.0) ++folds;
        }
    }
    rep.results().update({{"points", br.points.size()}, {"termination", br.termination}, {"folds", folds},
                          {"max_residual", worst}});
    rep.check("Newton residual < 1e-10 at every point", worst, 0.0, 1e-10, worst < 1e-10);
    rep.check("branch reached the end of the range", br.termination == "reached end of range", 1, 0,
              br.termination == "reached end of range");
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

json formula_json(const bif::HopfFormula& f)
{
    return {{"C_star", f.C_star}, {"nu_formula", f.nu_formula}, {"DC_h_inf", f.DC_h_inf}, {"ratio", f.ratio},
            {"condition_holds", f.condition_holds}};
}

int cmd_hopf(const Common& common, const std::string& axis_s, double from, double to, int steps, double p_value,
             double ct_value, bool criticality, double C_star)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("hopf", cfg);
    const ScaledParams p = with_overrides(cfg.params.scaled, p_value, ct_value);
    const bif::Axis axis = bif::axis_from_string(axis_s);
    rep.inputs().update({{"axis", bif::to_string(axis)}, {"from", from}, {"to", to}, {"steps", steps},
                         {"criticality", criticality}, {"C_star", C_star}, {"params", params_json(p)}});
    const bif::Branch br = bif::equilibrium_branch(p, axis, from, to, steps, p.eps);
    write_branch(rep, br);
    const auto hopfs = bif::detect_hopf(br, p);
    auto out = rep.csv("hopf.csv", "hopf_points",
                       {"param", "h", "c", "trace", "det", "omega", "dtrace_dparam", "criticality"});
    json pts = json::array();
    for (auto hp : hopfs) {
        json extra = json::object();
        if (criticality) {
            const auto probe = bif::estimate_criticality(hp, p, p.eps);
            hp.criticality = probe.hint;
            extra = {{"param", probe.param}, {"amplitude", probe.amplitude}};
        }
        out.row_text({io::format_double(hp.param), io::format_double(hp.h), io::format_double(hp.c),
                      io::format_double(hp.trace), io::format_double(hp.det), io::format_double(hp.omega),
                      io::format_double(hp.dtrace_dparam), hp.criticality});
        pts.push_back({{"param", hp.param}, {"h", hp.h}, {"c", hp.c}, {"trace", hp.trace}, {"det", hp.det},
                       {"omega", hp.omega}, {"dtrace_dparam", hp.dtrace_dparam}, {"criticality", hp.criticality},
                       {"criticality_probe", extra}, {"nu_formula_printed", num(hp.nu_formula_printed)},
                       {"nu_formula_derived", num(hp.nu_formula_derived)}});
        rep.check(std::string("Hopf at ") + bif::to_string(axis) + " = " + io::format_double(hp.param) + ": |trace| < 1e-8, det > 0",
                  std::abs(hp.trace), 0.0, 1e-8, std::abs(hp.trace) < 1e-8 && hp.det > 0.0);
        rep.check("transversal crossing", hp.dtrace_dparam, 0.0, 0.0, hp.dtrace_dparam != 0.0);
    }
    json res{{"hopf_points", pts}, {"branch_termination", br.termination}};
    // the nu_max onset is evaluated at the configured parameters, not the branch overrides
    const ScaledParams& base = cfg.params.scaled;
    res["formula_printed"] = formula_json(bif::hopf_value_formula(base, Convention::Printed, C_star));
    res["formula_derived"] = formula_json(bif::hopf_value_formula(base, Convention::Derived));
    try {
        const bif::NumericHopf nh = bif::numeric_hopf_nu(base, base.eps);
        res["numeric_nu"] = {{"nu_ah", nh.nu_ah}, {"tau_hat_ah", nh.tau_hat_ah}, {"tau_tilde_ah", nh.tau_tilde_ah},
                             {"h", nh.h}, {"C", nh.C}, {"trace", nh.trace_at}, {"det", nh.det}};
        rep.check("nu_max,ah anchor 5.83e-2", nh.nu_ah, 5.83e-2, 0.0, false, false,
                  "reference value; not reproduced, see README");
        rep.check("tau_tilde_max,ah anchor 112.5", nh.tau_tilde_ah, 112.5, 0.5,
                  std::abs(nh.tau_tilde_ah - 112.5) < 0.5, false);
    } catch (const std::domain_error& e) {
        res["numeric_nu"] = {{"error", e.what()}};
    }
    rep.results() = res;
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_cusp(const Common& common, double p_min, double p_max, int np, double ct_min, double ct_max, int nct,
             int oracle_cells, long oracle_samples)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("cusp", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"p_min", p_min}, {"p_max", p_max}, {"np", np}, {"ct_min", ct_min}, {"ct_max", ct_max},
                         {"nct", nct}, {"oracle_cells", oracle_cells}, {"oracle_samples", oracle_samples},
                         {"params", params_json(p)}});
    const bif::CuspMap m = bif::cusp_scan(p, cfg.convention, p_min, p_max, np, ct_min, ct_max, nct);
    {
        auto out = rep.csv("cusp_grid.csv", "cusp_grid", {"p", "c_t", "count"});
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < nct; ++j) out.row({m.p[i], m.ct[j], double(m.count[i][j])});
    }
    {
        auto out = rep.csv("cusp_boundary.csv", "cusp_boundary", {"edge", "p", "c_t"});
        for (const auto& pt : m.lower_fold) out.row_text({"lower", io::format_double(pt[0]), io::format_double(pt[1])});
        for (const auto& pt : m.upper_fold) out.row_text({"upper", io::format_double(pt[0]), io::format_double(pt[1])});
    }
    std::mt19937_64 rng(20240917);
    std::uniform_int_distribution<int> ip(0, np - 1), ic(0, nct - 1);
    int mismatches = 0;
    for (int k = 0; k < oracle_cells; ++k) {
        const int i = ip(rng), j = ic(rng);
        ScaledParams q = p;
        q.p = m.p[i];
        q.c_t = m.ct[j];
        const gspt::Cubic cub = gspt::equilibrium_cubic(q, cfg.convention);
        const double coef[4] = {cub.a0, cub.a1, cub.a2, cub.a3};
        if (kernels::cubic_sign_changes(coef, 0.0, 100.0, oracle_samples) != m.count[i][j]) ++mismatches;
    }
    int bad = 0;
    for (int i = 0; i < np; ++i)
        for (int c : m.count[i])
            if (m.p[i] > 0.0 && (c < 1 || c > 3)) ++bad;
    rep.results().update({{"has_vertex", m.has_vertex}, {"vertex_p", num(m.vertex_p)}, {"vertex_ct", num(m.vertex_ct)},
                          {"oracle_mismatches", mismatches}, {"isa", kernels::to_string(kernels::runtime_isa())}});
    rep.check("cell counts match the brute-force sign scan", mismatches, 0, 0, mismatches == 0);
    rep.check("counts in {1, 2, 3} for p > 0", bad, 0, 0, bad == 0);
    if (m.has_vertex) {
        const bool near = std::abs(m.vertex_p / 0.02 - 1.0) <= 0.2 && std::abs(m.vertex_ct / 0.8 - 1.0) <= 0.2;
        rep.check("vertex within 20% of (0.02, 0.8): p", m.vertex_p, 0.02, 0.2, near, false);
        rep.check("vertex within 20% of (0.02, 0.8): c_t", m.vertex_ct, 0.8, 0.2, near, false);
    }
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

std::vector<double> grid(double lo, double hi, double step)
{
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
    return v;
}

int cmd_onset(const Common& common, double p_value, double ct_min, double ct_max, double ct_step, double periods)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("onset", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"p", p_value}, {"ct_min", ct_min}, {"ct_max", ct_max}, {"ct_step", ct_step},
                         {"periods", periods}, {"params", params_json(p)}});
    const bif::OnsetScan s = bif::onset_scan_ct(p, p_value, grid(ct_min, ct_max, ct_step), p.eps, periods);
    auto out = rep.csv("onset.csv", "onset_scan", {"c_t", "c_max", "c_min", "amplitude", "period"});
    for (const auto& r : s.rows) out.row({r.ct, r.c_max, r.c_min, r.amplitude, r.period});
    rep.results().update({{"has_jump", s.has_jump}, {"jump_lo", num(s.jump_lo)}, {"jump_hi", num(s.jump_hi)}});
    rep.check("amplitude jump bracketed", s.has_jump, 1, 0, s.has_jump);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_taumax_scan(const Common& common, const std::vector<double>& tt, int fit_points)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("taumax-scan", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"tau_tilde", tt}, {"fit_points", fit_points}, {"params", params_json(p)}});
    const bif::TaumaxScan s = bif::taumax_period_scan(p, tt, p.eps, fit_points);
    auto out = rep.csv("taumax_scan.csv", "taumax_scan",
                       {"tau_tilde", "period", "c_max", "c_min", "oscillating", "linear_period"});
    for (const auto& r : s.rows) out.row({r.tau_tilde, r.period, r.c_max, r.c_min, r.oscillating ? 1.0 : 0.0, r.linear_period});
    rep.results().update({{"tau_tilde_ah", s.tau_tilde_ah}, {"onset_exponent", s.onset_exponent},
                          {"relaxation_exponent", s.relaxation_exponent}, {"relaxation_r2", s.relaxation_r2},
                          {"linear_exponent", s.linear_exponent}});
    bool below_ok = true;
    for (const auto& r : s.rows)
        if (r.tau_tilde < s.tau_tilde_ah && r.oscillating) below_ok = false;
    rep.check("no oscillation below the located AH", below_ok, 1, 0, below_ok);
    rep.check("linear-period exponent 1/2", s.linear_exponent, 0.5, 1e-6, std::abs(s.linear_exponent - 0.5) < 1e-6,
              false);
    rep.check("relaxation regime linear: R^2 > 0.99", s.relaxation_r2, 0.99, 0.0, s.relaxation_r2 > 0.99, false);
    rep.check("AH anchor tau_tilde 112.5", s.tau_tilde_ah, 112.5, 0.5, std::abs(s.tau_tilde_ah - 112.5) < 0.5, false);
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int cmd_blowup_verify(const Common& common, double rho1, double beta2, unsigned seed)
{
    const RunConfig cfg = load(common);
    const auto start = std::chrono::steady_clock::now();
    Report rep("blowup-verify", cfg);
    const ScaledParams& p = cfg.params.scaled;
    rep.inputs().update({{"rho1", rho1}, {"beta2", beta2}, {"seed", seed}, {"params", params_json(p)}});
    blowup::VerifyOptions opt;
    opt.rho1 = rho1;
    opt.beta2 = beta2;
    opt.seed = seed;
    const blowup::VerifyReport r = blowup::verify(p, opt);
    for (const auto& c : r.checks) rep.check(c.name, c.measured, c.expected, c.tolerance, c.pass, c.gated, c.detail);
    const blowup::K1Points pr = blowup::k1_points(p, Convention::Printed), de = blowup::k1_points(p, Convention::Derived);
    rep.results().update({{"Q5_printed", pr.Q5}, {"Q5_derived", de.Q5}, {"eps_l1", de.eps_l1}});
    return rep.finish(common, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Closed-cell calcium model: simulation, slow-fast analysis, bifurcations and blow-up checks"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--params", common.params_path, "parameter file (default: built-in scaled defaults)")
        ->check(CLI::ExistingFile);
    app.add_option("--convention", common.convention, "printed | derived")
        ->check(CLI::IsMember({"printed", "derived"}));
    app.add_option("--out-dir", common.out_dir, "output directory");
    app.add_option("--rel-tol", common.rel_tol, "relative tolerance")->check(CLI::PositiveNumber);
    app.add_option("--abs-tol", common.abs_tol, "absolute tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--json", common.json_stdout, "print the JSON report to stdout");
    app.add_flag("--timing", common.timing, "record wall time in the report (breaks byte-identical output)");

    std::function<int()> run;

    auto* sim = app.add_subcommand("simulate", "integrate the scaled system");
    static double h0 = 0.1, c0 = 0.3, t0 = 0.0, t1 = 2e4, sim_eps = 0.0;
    static std::string method = "implicit";
    static int samples = 0;
    sim->add_option("--h0", h0);
    sim->add_option("--c0", c0);
    sim->add_option("--t0", t0);
    sim->add_option("--t1", t1);
    sim->add_option("--eps", sim_eps, "default: eps from the parameter file");
    sim->add_option("--method", method)->check(CLI::IsMember({"implicit", "explicit"}));
    sim->add_option("--samples", samples, "uniform dense samples (0: accepted steps)");
    sim->callback([&] { run = [&] { return cmd_simulate(common, h0, c0, t0, t1, sim_eps, method, samples); }; });

    auto* man = app.add_subcommand("manifold", "regime-two critical manifold h = zeta(C)");
    static double C_min = 0.05, C_max = 3.0;
    static int man_n = 300;
    man->add_option("--C-min", C_min);
    man->add_option("--C-max", C_max);
    man->add_option("--n", man_n)->check(CLI::PositiveNumber);
    man->callback([&] { run = [&] { return cmd_manifold(common, C_min, C_max, man_n); }; });

    auto* eq = app.add_subcommand("equilibria", "equilibria of the limit system and the full system");
    eq->callback([&] { run = [&] { return cmd_equilibria(common); }; });

    auto* fold = app.add_subcommand("fold", "fold point and the equilibrium/fold inequality chain");
    static double fold_C = 1.48;
    fold->add_option("--C-star", fold_C, "C* used in the chain (<= 0: cubic root)");
    fold->callback([&] { run = [&] { return cmd_fold(common, fold_C); }; });

    auto* cyc = app.add_subcommand("cycle", "locate the attracting relaxation cycle");
    static double cyc_eps = 0.0, cyc_rho = 0.1;
    cyc->add_option("--eps", cyc_eps);
    cyc->add_option("--rho1", cyc_rho, "section c = rho1");
    cyc->callback([&] { run = [&] { return cmd_cycle(common, cyc_eps, cyc_rho); }; });

    auto* conv = app.add_subcommand("converge-eps", "cycles against the singular cycle over eps");
    static std::vector<double> eps_list{1e-3, 2.5e-3, 5e-3, 1e-2};
    static bool orbits = false;
    conv->add_option("--eps", eps_list)->delimiter(',');
    conv->add_flag("--orbits", orbits, "also write one orbit file per eps");
    conv->callback([&] { run = [&] { return cmd_converge_eps(common, eps_list, orbits); }; });

    auto* ps = app.add_subcommand("period-scan", "period against tau_hat");
    static std::vector<double> taus{0.34, 0.68, 1.36, 2.72};
    ps->add_option("--tau", taus)->delimiter(',');
    ps->callback([&] { run = [&] { return cmd_period_scan(common, taus); }; });

    static std::string axis = "c_t";
    static double b_from = 0.3, b_to = 1.5, b_p = 0.0, b_ct = 0.0;
    static int b_steps = 100;
    auto* br = app.add_subcommand("branch", "equilibrium continuation");
    br->add_option("--axis", axis)->check(CLI::IsMember({"c_t", "p", "nu_max"}));
    br->add_option("--from", b_from);
    br->add_option("--to", b_to);
    br->add_option("--steps", b_steps)->check(CLI::PositiveNumber);
    br->add_option("--p", b_p, "override p");
    br->add_option("--ct", b_ct, "override c_t");
    br->callback([&] { run = [&] { return cmd_branch(common, axis, b_from, b_to, b_steps, b_p, b_ct); }; });

    auto* hopf = app.add_subcommand("hopf", "Hopf points on a branch, the Hopf-value formula and the nu_max onset");
    static bool crit = false;
    static double hopf_C = 1.48;
    hopf->add_option("--axis", axis)->check(CLI::IsMember({"c_t", "p", "nu_max"}));
    hopf->add_option("--from", b_from);
    hopf->add_option("--to", b_to);
    hopf->add_option("--steps", b_steps)->check(CLI::PositiveNumber);
    hopf->add_option("--p", b_p, "override p");
    hopf->add_option("--ct", b_ct, "override c_t");
    hopf->add_option("--C-star", hopf_C, "C* for the printed-convention formula (<= 0: cubic root)");
    hopf->add_flag("--criticality", crit, "estimate criticality by amplitude probes (slow)");
    hopf->callback(
        [&] { run = [&] { return cmd_hopf(common, axis, b_from, b_to, b_steps, b_p, b_ct, crit, hopf_C); }; });

    auto* cusp = app.add_subcommand("cusp", "equilibrium count map over (p, c_t)");
    static double p_min = 0.005, p_max = 0.05, ct_min = 0.3, ct_max = 1.5;
    static int np = 100, nct = 200, cells = 100;
    static long oracle_samples = 1000000;
    cusp->add_option("--p-min", p_min);
    cusp->add_option("--p-max", p_max);
    cusp->add_option("--np", np)->check(CLI::Range(2, 100000));
    cusp->add_option("--ct-min", ct_min);
    cusp->add_option("--ct-max", ct_max);
    cusp->add_option("--nct", nct)->check(CLI::Range(2, 100000));
    cusp->add_option("--oracle-cells", cells);
    cusp->add_option("--oracle-samples", oracle_samples);
    cusp->callback(
        [&] { run = [&] { return cmd_cusp(common, p_min, p_max, np, ct_min, ct_max, nct, cells, oracle_samples); }; });

    auto* onset = app.add_subcommand("onset", "oscillation amplitude against c_t");
    static double on_p = 0.015, on_min = 0.93, on_max = 1.0, on_step = 1e-3, on_periods = 20.0;
    onset->add_option("--p", on_p);
    onset->add_option("--ct-min", on_min);
    onset->add_option("--ct-max", on_max);
    onset->add_option("--ct-step", on_step)->check(CLI::PositiveNumber);
    onset->add_option("--periods", on_periods, "transient length in units of tau_hat/eps^2");
    onset->callback([&] { run = [&] { return cmd_onset(common, on_p, on_min, on_max, on_step, on_periods); }; });

    auto* tm = app.add_subcommand("taumax-scan", "period against tau_tilde = tau_hat / eps^2");
    static std::vector<double> tt{100, 110, 113, 115, 120, 130, 150, 200, 400, 1000, 3000, 10000, 27200, 54400, 108800};
    static int fit_points = 3;
    tm->add_option("--tau-tilde", tt)->delimiter(',');
    tm->add_option("--fit-points", fit_points);
    tm->callback([&] { run = [&] { return cmd_taumax_scan(common, tt, fit_points); }; });

    auto* bv = app.add_subcommand("blowup-verify", "chart maps, chart fields, eigenvalues and transition probes");
    static double rho1 = 0.1, beta2 = 0.1;
    static unsigned seed = 12345;
    bv->add_option("--rho1", rho1);
    bv->add_option("--beta2", beta2);
    bv->add_option("--seed", seed);
    bv->callback([&] { run = [&] { return cmd_blowup_verify(common, rho1, beta2, seed); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return run();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
