#include "calcium/cycles.hpp"

#include "calcium/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace calcium::cycles {

namespace {

inline double sq(double x) { return x * x; }

// 5-point Gauss-Legendre on [0, 1]
constexpr double kGLx[5] = {0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842, 0.953089922969332};
constexpr double kGLw[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444, 0.239314335249683,
                            0.118463442528095};

ode::IntegratorConfig cycle_config(const CycleOptions& opt)
{
    ode::IntegratorConfig cfg;
    cfg.rel_tol = opt.rel_tol;
    cfg.abs_tol = opt.abs_tol;
    cfg.method = ode::Method::Implicit;
    return cfg;
}

ode::Vec vec2(double a, double b)
{
    ode::Vec v(2);
    v << a, b;
    return v;
}

// Gauss nodes of every segment up to t_end, with their weights.
void quadrature_nodes(const ode::Trajectory& tr, std::vector<double>& t, std::vector<ode::Vec>& y,
                      std::vector<double>& w)
{
    const double t_end = tr.t_end;
    for (const auto& s : tr.segments) {
        const double a = s.t0;
        const double b = std::min(s.t0 + s.h, t_end);
        if (b <= a) continue;
        for (int k = 0; k < 5; ++k) {
            const double tk = a + kGLx[k] * (b - a);
            t.push_back(tk);
            y.push_back(ode::Trajectory::eval_segment(s, tk));
            w.push_back(kGLw[k] * (b - a));
        }
    }
}

double point_segment_distance(const std::array<double, 2>& p, const std::array<double, 2>& a,
                              const std::array<double, 2>& b)
{
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double L2 = dx * dx + dy * dy;
    double u = L2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return std::hypot(p[0] - a[0] - u * dx, p[1] - a[1] - u * dy);
}

double directed_distance(const Curve& from, const Curve& to)
{
    double worst = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        if (to.size() == 1) best = std::hypot(p[0] - to[0][0], p[1] - to[0][1]);
        for (std::size_t j = 0; j + 1 < to.size(); ++j) best = std::min(best, point_segment_distance(p, to[j], to[j + 1]));
        worst = std::max(worst, best);
    }
    return worst;
}

Curve orbit_curve(const LimitCycle& cyc)
{
    Curve out;
    const auto& tr = cyc.orbit;
    for (const auto& s : tr.segments) {
        const double b = std::min(s.t0 + s.h, tr.t_end);
        for (int k = 0; k < 8; ++k) {
            const double tk = s.t0 + (b - s.t0) * k / 8.0;
            const ode::Vec y = ode::Trajectory::eval_segment(s, tk);
            out.push_back({y(0), y(1)});
        }
    }
    out.push_back({tr.y_end(0), tr.y_end(1)});
    return out;
}

}  // namespace

ode::Field scaled_field(const ScaledParams& p, double eps)
{
    return [p, eps](double, const ode::Vec& y, ode::Vec& dy) {
        const Rate r = rhs_full({y(0), y(1)}, p, eps);
        dy.resize(2);
        dy(0) = r.dh;
        dy(1) = r.dc;
    };
}

double return_map(const ScaledParams& p, double eps, double h, const CycleOptions& opt)
{
    const auto sec = ode::coordinate_section(2, 1, opt.rho1, -1);
    const double horizon = opt.horizon_factor * p.tau_hat / sq(eps);
    return ode::integrate_to_section(scaled_field(p, eps), vec2(h, opt.rho1), 0.0, sec, horizon, cycle_config(opt)).y(0);
}

LimitCycle find_limit_cycle(const ScaledParams& p, double eps, const CycleOptions& opt)
{
    const ode::Field f = scaled_field(p, eps);
    const auto cfg = cycle_config(opt);
    const auto sec = ode::coordinate_section(2, 1, opt.rho1, -1);
    const double horizon = opt.horizon_factor * p.tau_hat / sq(eps);

    LimitCycle cyc;
    cyc.eps = eps;
    auto next = [&](const ode::Vec& y0) {
        try {
            return ode::integrate_to_section(f, y0, 0.0, sec, horizon, cfg).y(0);
        } catch (const ode::IntegrationError& e) {
            throw NoCycleError(std::string("return map failed: ") + e.what(), cyc.iterates);
        }
    };
    cyc.iterates.push_back(next(vec2(opt.start.h, opt.start.c)));
    bool converged = false;
    for (int k = 1; k <= opt.max_returns; ++k) {
        cyc.iterates.push_back(next(vec2(cyc.iterates.back(), opt.rho1)));
        const double d = std::abs(cyc.iterates.back() - cyc.iterates[cyc.iterates.size() - 2]);
        if (!std::isfinite(d)) break;
        if (k >= opt.min_returns && d < opt.fix_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NoCycleError("return-map iterates did not converge", cyc.iterates);
    cyc.returns = static_cast<int>(cyc.iterates.size());

    // one secant step on P(h) - h, kept only if it reduces the residual
    double hstar = cyc.iterates.back();
    {
        const double ha = cyc.iterates[cyc.iterates.size() - 2];
        const double Fa = hstar - ha;
        const double Pb = next(vec2(hstar, opt.rho1));
        const double Fb = Pb - hstar;
        if (Fb != 0.0 && Fb != Fa) {
            const double x = hstar - Fb * (hstar - ha) / (Fb - Fa);
            if (std::isfinite(x) && x > 0.0) {
                const double Fx = next(vec2(x, opt.rho1)) - x;
                if (std::abs(Fx) < std::abs(Fb)) hstar = x;
            }
        }
    }

    ode::IntegratorConfig rc = cfg;
    rc.record = true;
    const ode::Vec y0 = vec2(hstar, opt.rho1);
    cyc.orbit = ode::integrate(f, y0, 0.0, horizon, rc, {sec}, 1);
    if (cyc.orbit.reason != ode::Termination::Event) throw NoCycleError("closing orbit did not return", cyc.iterates);
    cyc.period = cyc.orbit.t_end;
    cyc.section_point = {hstar, opt.rho1};
    for (std::size_t i = 0; i < cyc.orbit.t.size(); ++i) {
        cyc.t.push_back(cyc.orbit.t[i]);
        cyc.h.push_back(cyc.orbit.y[i](0));
        cyc.c.push_back(cyc.orbit.y[i](1));
    }
    cyc.closure_gap = (cyc.orbit.y_end - y0).norm();
    cyc.floquet_exponent = floquet_exponent(cyc, p, eps);
    return cyc;
}

double floquet_exponent(const ode::Trajectory& one_period, const ode::Field& f)
{
    std::vector<double> t, w;
    std::vector<ode::Vec> y;
    quadrature_nodes(one_period, t, y, w);
    double integral = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) integral += w[i] * ode::fd_jacobian(f, t[i], y[i]).trace();
    return integral / (one_period.t_end - one_period.t.front());
}

double floquet_exponent(const LimitCycle& cycle, const ScaledParams& p, double eps)
{
    std::vector<double> t, w;
    std::vector<ode::Vec> y;
    quadrature_nodes(cycle.orbit, t, y, w);
    std::vector<double> hh(t.size()), cc(t.size()), div(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        hh[i] = y[i](0);
        cc[i] = y[i](1);
    }
    kernels::divergence_batch(p, eps, hh.data(), cc.data(), div.data(), t.size());
    double integral = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) integral += w[i] * div[i];
    return integral / cycle.period;
}

std::vector<std::array<double, 2>> SingularCycle::planar() const
{
    std::vector<std::array<double, 2>> out = segments[0].hc;
    for (const auto& q : segments[1].hc) out.push_back(q);
    // Gamma_3 .. Gamma_5 blow down onto S_h, traversed from the origin to h_F
    const int n = static_cast<int>(segments[0].hc.size());
    for (int i = 0; i <= n; ++i) out.push_back({h_F * i / n, 0.0});
    return out;
}

SingularCycle singular_cycle(const ScaledParams& p, Convention conv, int samples)
{
    const gspt::FoldPoint F = gspt::fold_point(p, conv);
    const gspt::Heteroclinic het = gspt::layer_heteroclinic(p, F.h_F);
    const double Kg2 = p.K_hat * sq(p.gamma * p.c_t);
    const DerivedConstants k = derived_constants(p);
    const double a = k.A(conv) / (k.A_IPR * p.gamma * p.c_t);
    auto psi = [&](double e1) { return a * e1 * (1.0 - Kg2 * e1); };

    SingularCycle S;
    S.h_F = F.h_F;
    S.c_d = het.c_d;
    S.eps_f1 = 1.0 / (2.0 * Kg2);
    S.eps_l1 = 1.0 / Kg2;

    auto& g1 = S.segments[0];
    g1.name = "Gamma_1";
    for (std::size_t i = 0; i < het.h.size(); ++i) {
        g1.k1.push_back({het.h[i], het.c[i], 0.0});
        g1.hc.push_back({het.h[i], het.c[i]});
    }
    auto& g2 = S.segments[1];
    g2.name = "Gamma_2";
    for (int i = 0; i <= samples; ++i) {
        const double r = S.c_d * (1.0 - static_cast<double>(i) / samples);
        g2.k1.push_back({0.0, r, 0.0});
        g2.hc.push_back({0.0, r});
    }
    auto& g3 = S.segments[2];
    g3.name = "Gamma_3";
    for (int i = 0; i <= samples; ++i) {
        g3.k1.push_back({0.0, 0.0, S.eps_l1 * i / samples});
        g3.hc.push_back({0.0, 0.0});
    }
    auto& g4 = S.segments[3];
    g4.name = "Gamma_4";
    for (int i = 0; i <= samples; ++i) {
        const double e1 = S.eps_l1 + (S.eps_f1 - S.eps_l1) * i / samples;
        const double hh = i == samples ? S.h_F : psi(e1);
        g4.k1.push_back({hh, 0.0, e1});
        g4.hc.push_back({hh, 0.0});
    }
    auto& g5 = S.segments[4];
    g5.name = "Gamma_5";
    for (int i = 0; i <= samples; ++i) {
        g5.k1.push_back({S.h_F, 0.0, S.eps_f1 * (1.0 - static_cast<double>(i) / samples)});
        g5.hc.push_back({S.h_F, 0.0});
    }
    for (int i = 0; i < 5; ++i) S.Q[i] = S.segments[i].k1.front();
    auto dist = [](const Point3& u, const Point3& v) {
        return std::sqrt(sq(u.h - v.h) + sq(u.r1 - v.r1) + sq(u.eps1 - v.eps1));
    };
    // gaps[i] sits at Q_{i+2 mod 5}: the end of segment i against the start of segment i+1
    for (int i = 0; i < 5; ++i) S.gaps[i] = dist(S.segments[i].k1.back(), S.segments[(i + 1) % 5].k1.front());
    // Gamma_4 ends at the fold where psi equals h_F up to rounding
    S.gaps[3] = std::max(S.gaps[3], std::abs(psi(S.eps_f1) - S.h_F));
    return S;
}

Curve resample_arclength(const Curve& curve, int n)
{
    if (curve.size() < 2 || n < 2) return curve;
    std::vector<double> s(curve.size(), 0.0);
    for (std::size_t i = 1; i < curve.size(); ++i)
        s[i] = s[i - 1] + std::hypot(curve[i][0] - curve[i - 1][0], curve[i][1] - curve[i - 1][1]);
    const double L = s.back();
    Curve out;
    out.reserve(n);
    std::size_t j = 0;
    for (int k = 0; k < n; ++k) {
        const double sk = L * k / (n - 1);
        while (j + 2 < s.size() && s[j + 1] < sk) ++j;
        const double seg = s[j + 1] - s[j];
        const double u = seg > 0.0 ? std::clamp((sk - s[j]) / seg, 0.0, 1.0) : 0.0;
        out.push_back({curve[j][0] + u * (curve[j + 1][0] - curve[j][0]), curve[j][1] + u * (curve[j + 1][1] - curve[j][1])});
    }
    return out;
}

double hausdorff_distance(const Curve& a, const Curve& b, int start_samples)
{
    double prev = -1.0;
    int n = start_samples;
    for (;;) {
        const Curve A = resample_arclength(a, n), B = resample_arclength(b, n);
        const double d = std::max(directed_distance(A, B), directed_distance(B, A));
        if (prev >= 0.0 && std::abs(d - prev) <= 0.01 * std::max(prev, 1e-300)) return d;
        if (n >= 16384) return d;
        prev = d;
        n *= 2;
    }
}

double hausdorff_distance(const LimitCycle& cycle, const SingularCycle& gamma)
{
    return hausdorff_distance(orbit_curve(cycle), gamma.planar());
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += sq(x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += sq(y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ssr += sq(y[i] - (f.intercept + f.slope * x[i]));
    f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return f;
}

ConvergenceReport eps_convergence_sweep(const ScaledParams& p, const std::vector<double>& eps_list, Convention conv,
                                        const CycleOptions& opt)
{
    const SingularCycle gamma = singular_cycle(p, conv);
    ConvergenceReport rep;
    for (double eps : eps_list) {
        ConvergenceEntry e{eps, false, 0.0, 0.0, 0.0, ""};
        try {
            const LimitCycle cyc = find_limit_cycle(p, eps, opt);
            e.ok = true;
            e.period = cyc.period;
            e.floquet = cyc.floquet_exponent;
            e.hausdorff = hausdorff_distance(cyc, gamma);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        rep.entries.push_back(e);
    }
    std::vector<double> lx, ly;
    std::vector<std::pair<double, double>> ok;
    double fmin = std::numeric_limits<double>::infinity(), fmax = 0.0;
    for (const auto& e : rep.entries) {
        if (!e.ok) continue;
        lx.push_back(std::log(e.eps));
        ly.push_back(std::log(e.hausdorff));
        ok.emplace_back(e.eps, e.hausdorff);
        const double s = std::abs(e.floquet) * sq(e.eps);
        fmin = std::min(fmin, s);
        fmax = std::max(fmax, s);
    }
    rep.survivors = static_cast<int>(ok.size());
    rep.sufficient = ok.size() >= 4;
    if (ok.size() < 2) return rep;
    const LinearFit fit = linear_fit(lx, ly);
    rep.slope = fit.slope;
    rep.intercept = fit.intercept;
    std::sort(ok.begin(), ok.end());
    rep.monotone = true;
    for (std::size_t i = 1; i < ok.size(); ++i)
        if (ok[i].second < ok[i - 1].second) rep.monotone = false;
    rep.floquet_eps2_ratio = fmin > 0.0 ? fmax / fmin : std::numeric_limits<double>::infinity();
    return rep;
}

PeriodEstimate period_estimate(const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    const double A = k.A(conv);
    const double C0 = std::sqrt(p.K_hat) * gct;
    const double CF = std::sqrt(2.0 * p.K_hat) * gct;
    // dC/dtau per unit tau_hat; the tau_hat factor cancels in v
    auto inv_rate = [&](double C) {
        const double gap = gspt::zeta(C, p, conv) - h_inf_C(C, p);
        return 2.0 * A * (sq(C) - sq(CF)) / (k.A_IPR * gct * std::pow(C, 5) * gap * (1.0 + sq(sq(C))));
    };
    for (int i = 0; i <= 400; ++i) {
        const double C = C0 + (CF - C0) * i / 400.0;
        if (gspt::zeta(C, p, conv) - h_inf_C(C, p) >= 0.0)
            throw std::domain_error("period integrand not integrable: equilibrium on the attracting branch");
    }
    // C = C_F - (C_F - C0) s^2 removes the square-root behaviour at the fold
    auto integrand = [&](double s) { return inv_rate(CF - (CF - C0) * s * s) * 2.0 * (CF - C0) * s; };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-12, &err);
    PeriodEstimate out;
    out.order_estimate = p.tau_hat / sq(p.eps);
    out.v = v;
    out.T_est = out.order_estimate * v;
    out.quad_error = err;
    return out;
}

std::vector<PeriodScanRow> period_scan(const ScaledParams& p, const std::vector<double>& tau_list, Convention conv,
                                       const CycleOptions& opt)
{
    std::vector<PeriodScanRow> rows;
    for (double tau : tau_list) {
        ScaledParams q = p;
        q.tau_hat = tau;
        const LimitCycle cyc = find_limit_cycle(q, q.eps, opt);
        const PeriodEstimate est = period_estimate(q, conv);
        rows.push_back({tau, cyc.period, est.order_estimate, est.T_est});
    }
    return rows;
}

}  // namespace calcium::cycles
