#include "calcium/bifurcation.hpp"

#include "calcium/cycles.hpp"
#include "calcium/ode.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace calcium::bif {

namespace {

const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

double sq(double x) { return x * x; }

Stability classify(double trace, double det)
{
    if (det < 0.0) return Stability::Saddle;
    return trace < 0.0 ? Stability::Stable : Stability::Unstable;
}

double dF_dc(double c, const ScaledParams& p, double eps)
{
    const double dc = kFdStep * std::max(std::abs(c), 1e-10);
    return (equilibrium_residual(c + dc, p, eps) - equilibrium_residual(c - dc, p, eps)) / (2.0 * dc);
}

double dF_dparam(double c, const ScaledParams& p, Axis axis, double mu, double eps)
{
    const double dm = kFdStep * std::max(std::abs(mu), 1e-6);
    const double fp = equilibrium_residual(c, with_param(p, axis, mu + dm, eps), eps);
    const double fm = equilibrium_residual(c, with_param(p, axis, mu - dm, eps), eps);
    return (fp - fm) / (2.0 * dm);
}

double upper_c(const ScaledParams& p) { return p.gamma * p.c_t / (1.0 + p.gamma); }

}  // namespace

const char* to_string(Axis a)
{
    switch (a) {
    case Axis::CT: return "c_t";
    case Axis::P: return "p";
    case Axis::NuMax: return "nu_max";
    }
    return "?";
}

Axis axis_from_string(const std::string& s)
{
    if (s == "c_t" || s == "ct") return Axis::CT;
    if (s == "p") return Axis::P;
    if (s == "nu_max" || s == "nu") return Axis::NuMax;
    throw std::invalid_argument("unknown continuation parameter '" + s + "' (expected c_t, p or nu_max)");
}

ScaledParams with_param(const ScaledParams& p, Axis axis, double value, double eps)
{
    ScaledParams q = p;
    switch (axis) {
    case Axis::CT: q.c_t = value; break;
    case Axis::P: q.p = value; break;
    case Axis::NuMax: q.tau_hat = std::sqrt(eps) * value; break;
    }
    return q;
}

const char* to_string(Stability s)
{
    switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Saddle: return "saddle";
    }
    return "?";
}

JacobianInfo jacobian_full(const State& s, const ScaledParams& p, double eps)
{
    const double dh = kFdStep * std::max(std::abs(s.h), 1e-8);
    const double dc = kFdStep * std::max(std::abs(s.c), 1e-8);
    const Rate hp = rhs_full({s.h + dh, s.c}, p, eps);
    const Rate hm = rhs_full({s.h - dh, s.c}, p, eps);
    const Rate cp = rhs_full({s.h, s.c + dc}, p, eps);
    const Rate cm = rhs_full({s.h, s.c - dc}, p, eps);
    const double a = (hp.dh - hm.dh) / (2 * dh), b = (cp.dh - cm.dh) / (2 * dc);
    const double c = (hp.dc - hm.dc) / (2 * dh), d = (cp.dc - cm.dc) / (2 * dc);
    return {a + d, a * d - b * c};
}

double equilibrium_residual(double c, const ScaledParams& p, double eps)
{
    const double h = gating_functions(c, p, eps).h_inf;
    return rhs_full({h, c}, p, eps).dc;
}

std::vector<State> equilibria(const ScaledParams& p, double eps)
{
    const double hi = upper_c(p);
    const double lo = 1e-8 * hi;
    const int n = 4000;
    std::vector<State> out;
    double c_prev = lo;
    double f_prev = equilibrium_residual(c_prev, p, eps);
    for (int i = 1; i <= n; ++i) {
        const double c = lo * std::pow(hi / lo, double(i) / n);
        const double f = equilibrium_residual(c, p, eps);
        if (f == 0.0 || (f_prev != 0.0 && std::signbit(f) != std::signbit(f_prev))) {
            double root = c;
            if (f != 0.0) {
                auto fun = [&](double x) { return equilibrium_residual(x, p, eps); };
                std::uintmax_t iters = 200;
                auto tol = boost::math::tools::eps_tolerance<double>(52);
                auto br = boost::math::tools::toms748_solve(fun, c_prev, c, f_prev, f, tol, iters);
                root = 0.5 * (br.first + br.second);
            }
            out.push_back({gating_functions(root, p, eps).h_inf, root});
        }
        c_prev = c;
        f_prev = f;
    }
    return out;
}

State equilibrium_newton(const ScaledParams& p, double eps, double c_seed)
{
    double c = c_seed;
    for (int it = 0; it < 60; ++it) {
        const double f = equilibrium_residual(c, p, eps);
        const double df = dF_dc(c, p, eps);
        if (df == 0.0 || !std::isfinite(df)) break;
        double step = f / df;
        // keep c positive
        while (c - step <= 0.0) step *= 0.5;
        c -= step;
        if (std::abs(step) <= 1e-14 * std::abs(c)) {
            return {gating_functions(c, p, eps).h_inf, c};
        }
    }
    if (std::abs(equilibrium_residual(c, p, eps)) < 1e-12)
        return {gating_functions(c, p, eps).h_inf, c};
    throw std::runtime_error("equilibrium Newton iteration did not converge");
}

EquilibriumBranchPoint make_point(const ScaledParams& p, Axis axis, double param, double c, double eps)
{
    const ScaledParams q = with_param(p, axis, param, eps);
    const State s{gating_functions(c, q, eps).h_inf, c};
    const JacobianInfo j = jacobian_full(s, q, eps);
    return {param, s.h, s.c, j.trace, j.det, equilibrium_residual(c, q, eps), classify(j.trace, j.det)};
}

Branch equilibrium_branch(const ScaledParams& p, Axis axis, double lo, double hi, int steps, double eps)
{
    if (steps < 2) throw std::invalid_argument("continuation needs at least 2 steps");
    if (!(lo != hi)) throw std::invalid_argument("continuation range is empty");
    Branch br{axis, eps, {}, "reached end of range"};
    const auto start = equilibria(with_param(p, axis, lo, eps), eps);
    if (start.empty()) {
        br.termination = "no equilibrium at start of range";
        return br;
    }
    const double sc = std::max(start.front().c, 1e-3);
    const double sm = std::abs(hi - lo);
    const double dir = hi > lo ? 1.0 : -1.0;
    const double pmin = std::min(lo, hi), pmax = std::max(lo, hi);

    double c = start.front().c, mu = lo;
    br.points.push_back(make_point(p, axis, mu, c, eps));

    auto tangent = [&](double cc, double mm, double tc_prev, double tm_prev) {
        const ScaledParams q = with_param(p, axis, mm, eps);
        const double fc = dF_dc(cc, q, eps) * sc;
        const double fm = dF_dparam(cc, p, axis, mm, eps) * sm;
        double tc = -fm, tm = fc;
        const double n = std::hypot(tc, tm);
        tc /= n;
        tm /= n;
        if (tc * tc_prev + tm * tm_prev < 0.0) {
            tc = -tc;
            tm = -tm;
        }
        return std::array<double, 2>{tc, tm};
    };

    auto t = tangent(c, mu, 0.0, dir);
    const double ds_max = 4.0 / steps, ds_min = 1e-9;
    double ds = 1.0 / steps;
    const int max_points = 50 * steps;

    while (static_cast<int>(br.points.size()) < max_points) {
        const double xc = c / sc + ds * t[0];
        const double xm = mu / sm + ds * t[1];
        double yc = xc, ym = xm;
        bool ok = false;
        int it = 0;
        for (; it < 20; ++it) {
            const double cc = yc * sc, mm = ym * sm;
            if (cc <= 0.0) break;
            const ScaledParams q = with_param(p, axis, mm, eps);
            const double F = equilibrium_residual(cc, q, eps);
            const double G = t[0] * (yc - xc) + t[1] * (ym - xm);
            const double a = dF_dc(cc, q, eps) * sc;
            const double b = dF_dparam(cc, p, axis, mm, eps) * sm;
            const double det = a * t[1] - b * t[0];
            if (det == 0.0 || !std::isfinite(det)) break;
            const double dyc = (F * t[1] - b * G) / det;
            const double dym = (a * G - F * t[0]) / det;
            yc -= dyc;
            ym -= dym;
            if (std::abs(dyc) + std::abs(dym) < 1e-13) {
                const ScaledParams q2 = with_param(p, axis, ym * sm, eps);
                ok = yc > 0.0 && std::abs(equilibrium_residual(yc * sc, q2, eps)) < 1e-10;
                break;
            }
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < ds_min) {
                br.termination = "corrector failed to converge";
                return br;
            }
            continue;
        }
        const double c_new = yc * sc, mu_new = ym * sm;
        if (mu_new < pmin || mu_new > pmax) {
            // land exactly on the end of the range
            const double target = mu_new > pmax ? pmax : pmin;
            try {
                const State s = equilibrium_newton(with_param(p, axis, target, eps), eps,
                                                   c + (c_new - c) * (target - mu) / (mu_new - mu));
                br.points.push_back(make_point(p, axis, target, s.c, eps));
            } catch (const std::runtime_error&) {
            }
            return br;
        }
        t = tangent(c_new, mu_new, t[0], t[1]);
        c = c_new;
        mu = mu_new;
        br.points.push_back(make_point(p, axis, mu, c, eps));
        if (it <= 3) ds = std::min(ds * 1.3, ds_max);
        else if (it >= 8) ds *= 0.5;
    }
    br.termination = "point limit reached";
    return br;
}

std::vector<HopfPoint> detect_hopf(const Branch& branch, const ScaledParams& p, double param_tol)
{
    std::vector<HopfPoint> out;
    const double eps = branch.eps;
    const Axis axis = branch.axis;
    auto trace_at = [&](double mu, double c_seed, double& c_out) {
        const ScaledParams q = with_param(p, axis, mu, eps);
        const State s = equilibrium_newton(q, eps, c_seed);
        c_out = s.c;
        return jacobian_full(s, q, eps);
    };
    for (std::size_t i = 1; i < branch.points.size(); ++i) {
        const auto& a = branch.points[i - 1];
        const auto& b = branch.points[i];
        if (!(a.det > 0.0 && b.det > 0.0)) continue;
        if (std::signbit(a.trace) == std::signbit(b.trace)) continue;
        double mlo = a.param, mhi = b.param, clo = a.c, chi = b.c;
        double tlo = a.trace;
        while (std::abs(mhi - mlo) > param_tol * std::max(1.0, std::abs(mlo))) {
            const double mid = 0.5 * (mlo + mhi);
            double cmid;
            const double tm = trace_at(mid, 0.5 * (clo + chi), cmid).trace;
            if (std::signbit(tm) == std::signbit(tlo)) {
                mlo = mid;
                clo = cmid;
                tlo = tm;
            } else {
                mhi = mid;
                chi = cmid;
            }
        }
        HopfPoint hp{};
        hp.axis = axis;
        hp.param = 0.5 * (mlo + mhi);
        double c;
        const JacobianInfo j = trace_at(hp.param, 0.5 * (clo + chi), c);
        const ScaledParams q = with_param(p, axis, hp.param, eps);
        hp.c = c;
        hp.h = gating_functions(c, q, eps).h_inf;
        hp.trace = j.trace;
        hp.det = j.det;
        hp.omega = std::sqrt(std::max(j.det, 0.0));
        const double dm = 1e-5 * std::max(std::abs(hp.param), 1e-6);
        double c1, c2;
        const double tp = trace_at(hp.param + dm, c, c1).trace;
        const double tn = trace_at(hp.param - dm, c, c2).trace;
        hp.dtrace_dparam = (tp - tn) / (2.0 * dm);
        hp.nu_formula_printed = hp.nu_formula_derived = std::numeric_limits<double>::quiet_NaN();
        try {
            hp.nu_formula_printed = hopf_value_formula(q, Convention::Printed).nu_formula;
            hp.nu_formula_derived = hopf_value_formula(q, Convention::Derived).nu_formula;
        } catch (const std::domain_error&) {
        }
        out.push_back(hp);
    }
    return out;
}

CriticalityProbe estimate_criticality(const HopfPoint& hp, const ScaledParams& p, double eps, double rel_step)
{
    CriticalityProbe probe;
    const double side = hp.dtrace_dparam > 0.0 ? 1.0 : -1.0;
    const double omega = std::max(hp.omega, 1e-12);
    for (int k : {1, 2, 4}) {
        const double mu = hp.param + side * k * rel_step * std::abs(hp.param);
        const ScaledParams q = with_param(p, hp.axis, mu, eps);
        // growth rate of the linear oscillation is about trace / 2
        const double growth = std::abs(hp.dtrace_dparam) * k * rel_step * std::abs(hp.param) / 2.0;
        const double period = 2.0 * std::numbers::pi / omega;
        const double transient = std::max(60.0 * period, 25.0 / std::max(growth, 1e-300));
        const double window = std::max(4.0 * period, 6.0 * q.tau_hat / (eps * eps));
        const SimulationStats st = oscillation_stats(q, eps, std::min(transient, 1e3 * period), window);
        probe.param.push_back(mu);
        probe.amplitude.push_back(st.amplitude);
    }
    const double a1 = probe.amplitude[0], a2 = probe.amplitude[1], a4 = probe.amplitude[2];
    auto sqrt2_step = [](double lo, double hi) { return lo > 0.0 && hi / lo > 1.2 && hi / lo < 1.7; };
    if (a1 >= 0.5 * a4 && a1 > 0.5 * hp.c) probe.hint = "subcritical";
    else if (a1 > 1e-3 * hp.c && sqrt2_step(a1, a2) && sqrt2_step(a2, a4)) probe.hint = "supercritical";
    else probe.hint = "unknown";
    return probe;
}

HopfFormula hopf_value_formula(const ScaledParams& p, Convention conv, double C_star)
{
    if (C_star <= 0.0) {
        const auto roots = gspt::equilibria_cubic(p, conv);
        if (roots.m.empty()) throw std::domain_error("no positive equilibrium of the limit system");
        C_star = std::sqrt(roots.m.back());
    }
    const DerivedConstants k = derived_constants(p);
    const double A = k.A(conv);
    const double Kh4 = std::pow(p.K_h_hat, 4);
    const double C2 = sq(C_star), C4 = sq(C2);
    const double gct = p.gamma * p.c_t;
    const double C_F2 = 2.0 * p.K_hat * sq(gct);
    HopfFormula r{};
    r.C_star = C_star;
    r.nu_formula = (Kh4 + C4) * C_star / (2.0 * A * Kh4 * (C2 - C_F2));
    r.DC_h_inf = 4.0 * C2 * C_star * Kh4 / sq(Kh4 + C4);
    const double DC_f0 = 2.0 * A / C_star * (C2 - C_F2);
    const double Dh_f0 = k.A_IPR * gct * C4;
    r.ratio = DC_f0 / Dh_f0;
    r.condition_holds = C2 > C_F2 && r.DC_h_inf > r.ratio;
    return r;
}

NumericHopf numeric_hopf_nu(const ScaledParams& p, double eps, double nu_lo, double nu_hi)
{
    const auto eqs = equilibria(p, eps);
    if (eqs.empty()) throw std::domain_error("no equilibrium");
    const double delta = std::sqrt(eps);
    const State e = eqs.back();
    RegimeTwoState z{e.h, e.c / delta, delta};
    auto jac = [&](double nu) {
        const double dh = kFdStep * std::max(z.h, 1e-8), dC = kFdStep * std::max(z.C, 1e-8);
        auto f = [&](double h, double C) { return rhs_regime2_hopf({h, C, delta}, nu, p); };
        const Rate hp = f(z.h + dh, z.C), hm = f(z.h - dh, z.C);
        const Rate cp = f(z.h, z.C + dC), cm = f(z.h, z.C - dC);
        const double a = (hp.dh - hm.dh) / (2 * dh), b = (cp.dh - cm.dh) / (2 * dC);
        const double c = (hp.dc - hm.dc) / (2 * dh), d = (cp.dc - cm.dc) / (2 * dC);
        return JacobianInfo{a + d, a * d - b * c};
    };
    double lo = nu_lo, hi = nu_hi;
    double tlo = jac(lo).trace;
    if (std::signbit(tlo) == std::signbit(jac(hi).trace))
        throw std::domain_error("trace does not change sign on the nu_max interval");
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double tm = jac(mid).trace;
        if (std::signbit(tm) == std::signbit(tlo)) {
            lo = mid;
            tlo = tm;
        } else {
            hi = mid;
        }
    }
    NumericHopf r{};
    r.nu_ah = 0.5 * (lo + hi);
    r.tau_hat_ah = delta * r.nu_ah;
    r.tau_tilde_ah = r.tau_hat_ah / sq(eps);
    r.h = z.h;
    r.C = z.C;
    const JacobianInfo j = jac(r.nu_ah);
    r.trace_at = j.trace;
    r.det = j.det;
    return r;
}

LimitJacobianCheck limit_jacobian_check(const ScaledParams& p, Convention conv, double C, double nu)
{
    const DerivedConstants k = derived_constants(p);
    const double A = k.A(conv);
    const double Kh4 = std::pow(p.K_h_hat, 4);
    const double gct = p.gamma * p.c_t;
    const double h = h_inf_C(C, p);
    const double w = (1.0 + std::pow(C, 4)) / nu;
    const double dh_inf = -4.0 * C * C * C * Kh4 / sq(Kh4 + std::pow(C, 4));
    const double DC_f0 = 4.0 * k.A_IPR * gct * C * C * C * h - 2.0 * A * C;
    const double Dh_f0 = k.A_IPR * gct * std::pow(C, 4);
    LimitJacobianCheck r{};
    r.trace_analytic = -w + DC_f0;
    r.det_analytic = -w * (DC_f0 + dh_inf * Dh_f0);

    const double dh = kFdStep * h, dC = kFdStep * C;
    auto f = [&](double hh, double CC) { return rhs_regime2_hopf_limit(hh, CC, nu, p, conv); };
    const Rate hp = f(h + dh, C), hm = f(h - dh, C), cp = f(h, C + dC), cm = f(h, C - dC);
    const double a = (hp.dh - hm.dh) / (2 * dh), b = (cp.dh - cm.dh) / (2 * dC);
    const double c = (hp.dc - hm.dc) / (2 * dh), d = (cp.dc - cm.dc) / (2 * dC);
    r.trace_fd = a + d;
    r.det_fd = a * d - b * c;
    return r;
}

CuspMap cusp_scan(const ScaledParams& base, Convention conv, double p_lo, double p_hi, int np, double ct_lo,
                  double ct_hi, int nct)
{
    if (np < 2 || nct < 2) throw std::invalid_argument("cusp scan grid must be at least 2x2");
    CuspMap m;
    for (int i = 0; i < np; ++i) m.p.push_back(p_lo + (p_hi - p_lo) * i / (np - 1));
    for (int j = 0; j < nct; ++j) m.ct.push_back(ct_lo + (ct_hi - ct_lo) * j / (nct - 1));
    m.count.assign(np, std::vector<int>(nct, 0));
    // columns are independent; each worker fills whole columns
    auto fill = [&](int first, int stride) {
        for (int i = first; i < np; i += stride) {
            ScaledParams q = base;
            q.p = m.p[i];
            for (int j = 0; j < nct; ++j) {
                q.c_t = m.ct[j];
                m.count[i][j] = gspt::equilibria_cubic(q, conv).count();
            }
        }
    };
    const int workers = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(fill, w, workers);
    for (auto& t : pool) t.join();
    for (int i = 0; i < np; ++i) {
        int lo = -1, hi = -1;
        for (int j = 0; j < nct; ++j) {
            if (m.count[i][j] > 1) {
                if (lo < 0) lo = j;
                hi = j;
            }
        }
        if (lo >= 0) {
            m.lower_fold.push_back({m.p[i], m.ct[lo]});
            m.upper_fold.push_back({m.p[i], m.ct[hi]});
        }
    }
    if (!m.lower_fold.empty()) {
        // the wedge closes at the column where it first appears
        const auto& lo = m.lower_fold.front();
        const auto& hi = m.upper_fold.front();
        m.has_vertex = true;
        m.vertex_p = lo[0];
        m.vertex_ct = 0.5 * (lo[1] + hi[1]);
    }
    return m;
}

SimulationStats oscillation_stats(const ScaledParams& p, double eps, double transient, double window, double rel_tol)
{
    ode::IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = 1e-13;
    const ode::Field f = cycles::scaled_field(p, eps);
    ode::Vec y(2);
    y << 0.1, 0.3;
    cfg.record = false;
    auto pre = ode::integrate(f, y, 0.0, transient, cfg);
    if (!pre.ok()) throw ode::IntegrationError("transient run failed: " + pre.message);
    cfg.record = true;
    auto win = ode::integrate(f, pre.y_end, 0.0, window, cfg);
    if (!win.ok()) throw ode::IntegrationError("window run failed: " + win.message);

    SimulationStats st{};
    st.c_max = -std::numeric_limits<double>::infinity();
    st.c_min = std::numeric_limits<double>::infinity();
    for (const auto& seg : win.segments) {
        for (int k = 0; k <= 8; ++k) {
            const double c = ode::Trajectory::eval_segment(seg, seg.t0 + seg.h * k / 8.0)(1);
            st.c_max = std::max(st.c_max, c);
            st.c_min = std::min(st.c_min, c);
        }
    }
    st.amplitude = st.c_max - st.c_min;
    if (st.amplitude <= 1e-3 * st.c_max) return st;

    const auto sec = ode::coordinate_section(2, 1, 0.5 * (st.c_max + st.c_min), -1);
    cfg.record = false;
    auto run = ode::integrate(f, win.y_end, 0.0, window, cfg, {sec});
    st.crossings = static_cast<int>(run.events.size());
    if (st.crossings >= 2) {
        const int n = std::min(st.crossings - 1, 5);
        st.period = (run.events.back().t - run.events[run.events.size() - 1 - n].t) / n;
    }
    return st;
}

OnsetScan onset_scan_ct(const ScaledParams& p, double p_value, const std::vector<double>& ct_list, double eps,
                        double periods)
{
    OnsetScan scan;
    ScaledParams q = p;
    q.p = p_value;
    // time unit: the slow recovery scale tau_hat / eps^2
    const double unit = q.tau_hat / (eps * eps);
    for (double ct : ct_list) {
        q.c_t = ct;
        const SimulationStats st = oscillation_stats(q, eps, periods * unit, 6.0 * unit);
        scan.rows.push_back({ct, st.c_max, st.c_min, st.period > 0.0 ? st.amplitude : 0.0, st.period});
    }
    double amax = 0.0;
    for (const auto& r : scan.rows) amax = std::max(amax, r.amplitude);
    for (std::size_t i = 1; i < scan.rows.size() && amax > 0.0; ++i) {
        if (std::abs(scan.rows[i].amplitude - scan.rows[i - 1].amplitude) > 0.5 * amax) {
            scan.has_jump = true;
            scan.jump_lo = scan.rows[i - 1].ct;
            scan.jump_hi = scan.rows[i].ct;
            break;
        }
    }
    return scan;
}

TaumaxScan taumax_period_scan(const ScaledParams& p, const std::vector<double>& tau_tilde_list, double eps,
                              int fit_points)
{
    TaumaxScan scan;
    ScaledParams q = p;
    for (double tt : tau_tilde_list) {
        q.tau_hat = tt * eps * eps;
        const double unit = std::max(tt, 1.0);
        double lin = 0.0;
        double transient = 30.0 * unit;
        const auto eqs = equilibria(q, eps);
        if (eqs.size() == 1) {
            const JacobianInfo j = jacobian_full(eqs.front(), q, eps);
            if (j.det > 0.0) lin = 2.0 * std::numbers::pi / std::sqrt(j.det);
            // slow decay close to the onset
            if (j.det > 0.0 && j.trace < 0.0)
                transient = std::min(std::max(transient, 40.0 / (-0.5 * j.trace)), 3000.0 * unit);
        }
        const SimulationStats st = oscillation_stats(q, eps, transient, 6.0 * unit);
        scan.rows.push_back({tt, lin, st.period, st.c_max, st.c_min, st.period > 0.0});
    }
    std::vector<double> llx, lly;
    for (const auto& r : scan.rows) {
        if (r.linear_period <= 0.0) continue;
        llx.push_back(std::log(r.tau_tilde));
        lly.push_back(std::log(r.linear_period));
    }
    if (llx.size() >= 2) scan.linear_exponent = cycles::linear_fit(llx, lly).slope;
    try {
        scan.tau_tilde_ah = numeric_hopf_nu(p, eps).tau_tilde_ah;
    } catch (const std::domain_error&) {
    }
    std::vector<double> lx, ly, x, y;
    for (const auto& r : scan.rows) {
        if (!r.oscillating) continue;
        lx.push_back(std::log(r.tau_tilde));
        ly.push_back(std::log(r.period));
        x.push_back(r.tau_tilde);
        y.push_back(r.period);
    }
    const int n = static_cast<int>(lx.size());
    const int k = std::min(fit_points, n);
    if (k >= 2) {
        scan.onset_exponent =
            cycles::linear_fit({lx.begin(), lx.begin() + k}, {ly.begin(), ly.begin() + k}).slope;
        scan.relaxation_exponent =
            cycles::linear_fit({lx.end() - k, lx.end()}, {ly.end() - k, ly.end()}).slope;
        scan.relaxation_r2 = cycles::linear_fit({x.end() - k, x.end()}, {y.end() - k, y.end()}).r2;
    }
    return scan;
}

}  // namespace calcium::bif
