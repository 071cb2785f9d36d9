#include "calcium/gspt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace calcium::gspt {

namespace {

inline double sq(double x) { return x * x; }
inline double p4(double x) { return sq(sq(x)); }

}  // namespace

double Decomposition::f(const State& z) const { return p4(z.c) * z.h; }

Rate Decomposition::N(const State& z) const { return {-1.0 / p_.tau_hat, j_ipr0(z.h, z.c, p_)}; }

Rate Decomposition::g(const State& z) const
{
    const Rate n = N(z);
    const double fz = f(z);
    return {n.dh * fz, n.dc * fz};
}

Rate Decomposition::G(const State& z, double eps) const
{
    const Rate full = rhs_full(z, p_, eps);
    const Rate gz = g(z);
    return {(full.dh - gz.dh) / eps, (full.dc - gz.dc) / eps};
}

Decomposition decompose(const ScaledParams& p) { return Decomposition(p); }

const char* to_string(Branch b)
{
    switch (b) {
    case Branch::Sc: return "S_c";
    case Branch::Sh: return "S_h";
    case Branch::Sa: return "S_a";
    case Branch::Sr: return "S_r";
    }
    return "?";
}

double layer_field_R2(double h, double C, const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    return k.A_IPR * gct * p4(C) * h - k.A(conv) * (sq(C) - p.K_hat * sq(gct));
}

double zeta(double C, const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    return k.A(conv) / (k.A_IPR * gct * p4(C)) * (sq(C) - sq(gct) * p.K_hat);
}

double zeta_prime(double C, const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    return -2.0 * k.A(conv) / (k.A_IPR * gct * std::pow(C, 5)) * (sq(C) - 2.0 * p.K_hat * sq(gct));
}

Branch classify_R2(double C, const ScaledParams& p)
{
    const double CF = std::sqrt(2.0 * p.K_hat) * p.gamma * p.c_t;
    return C < CF ? Branch::Sa : Branch::Sr;
}

Eigenvalue nontrivial_eigenvalue(const CriticalManifoldPoint& pt, const ScaledParams& p, Convention conv)
{
    Eigenvalue e;
    double scale = 1.0;
    switch (pt.branch) {
    case Branch::Sc:
        e.value = -p4(pt.x) / p.tau_hat;
        scale = 1.0 / p.tau_hat;
        break;
    case Branch::Sh:
        e.value = 0.0;
        break;
    case Branch::Sa:
    case Branch::Sr: {
        const double A = derived_constants(p).A(conv);
        e.value = 2.0 * A / pt.x * (sq(pt.x) - 2.0 * p.K_hat * sq(p.gamma * p.c_t));
        scale = 2.0 * A * std::max(pt.x, 1.0);
        break;
    }
    }
    e.degenerate = std::abs(e.value) < 1e-8 * scale;
    return e;
}

Rate reduced_field(const CriticalManifoldPoint& pt, const ScaledParams& p, Convention conv)
{
    if (nontrivial_eigenvalue(pt, p, conv).degenerate)
        throw std::domain_error(std::string("reduced field requested at a non-hyperbolic point of ") + to_string(pt.branch));
    if (pt.branch == Branch::Sc) {
        const double c = pt.x;
        return {0.0, -p.V_s_hat * sq(c) / (sq(p.K_s) + sq(c))};
    }
    const DerivedConstants k = derived_constants(p);
    const double C = pt.x;
    const double gct = p.gamma * p.c_t;
    const double CF2 = 2.0 * p.K_hat * sq(gct);
    const double z = zeta(C, p, conv);
    const double hi = h_inf_C(C, p);
    const double w = (1.0 + p4(C)) / p.tau_hat;
    const double dC = k.A_IPR * gct * std::pow(C, 5) * (z - hi) * w / (2.0 * k.A(conv) * (sq(C) - CF2));
    return {-(z - hi) * w, dC};
}

FoldPoint fold_point(const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    const double A = k.A(conv);
    FoldPoint F;
    F.C_F = std::sqrt(2.0 * p.K_hat) * gct;
    F.h_F = A / (4.0 * p.K_hat * k.A_IPR * std::pow(gct, 3));
    F.d2C_f0 = 12.0 * k.A_IPR * gct * sq(F.C_F) * F.h_F - 2.0 * A;
    F.dh_f0 = k.A_IPR * gct * p4(F.C_F);
    auto g = [&](double C) { return (1.0 + p4(C)) * (h_inf_C(C, p) - F.h_F) / p.tau_hat; };
    F.g = g(F.C_F);
    const double d = 1e-6 * F.C_F;
    F.dC_g = (g(F.C_F + d) - g(F.C_F - d)) / (2.0 * d);
    return F;
}

Cubic equilibrium_cubic(const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    const double A = k.A(conv);
    const double Kh4 = p4(p.K_h_hat);
    const double a = A / (gct * k.A_IPR);
    return {a, -Kh4 - A / k.A_IPR * p.K_hat * gct, Kh4 * a, -p.K_hat * Kh4 * gct * A / k.A_IPR};
}

CubicRoots solve_cubic_positive(const Cubic& q)
{
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 0) = -q.a2 / q.a3;
    comp(0, 1) = -q.a1 / q.a3;
    comp(0, 2) = -q.a0 / q.a3;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    const Eigen::EigenSolver<Eigen::Matrix3d> es(comp, false);
    const auto ev = es.eigenvalues();

    const double scale = std::max({std::abs(q.a3), std::abs(q.a2), std::abs(q.a1), std::abs(q.a0)});
    CubicRoots out;
    std::vector<double> cand;
    for (int i = 0; i < 3; ++i) {
        const double re = ev(i).real(), im = ev(i).imag();
        if (re <= 1e-9) continue;
        if (std::abs(im) < 1e-9) {
            cand.push_back(re);
        } else if (std::abs(im) < 1e-6 * std::max(1.0, re) &&
                   std::abs(q.derivative(re)) < 1e-6 * scale * std::max(1.0, re * re)) {
            // coalesced pair perturbed off the real axis by rounding: a tangency
            cand.push_back(re);
            out.double_root = true;
        }
    }
    for (double& m : cand) {
        for (int it = 0; it < 50; ++it) {
            const double d = q.derivative(m);
            if (d == 0.0) break;
            const double step = q(m) / d;
            if (!std::isfinite(step)) break;
            const double mn = m - step;
            if (mn <= 0.0) break;
            if (std::abs(step) <= 1e-16 * std::abs(m)) {
                m = mn;
                break;
            }
            m = mn;
        }
    }
    std::sort(cand.begin(), cand.end());
    for (double m : cand) {
        if (!out.m.empty() && std::abs(m - out.m.back()) < 1e-7 * std::max(1.0, m)) {
            out.double_root = true;
            continue;
        }
        out.m.push_back(m);
    }
    for (double m : out.m)
        if (std::abs(q.derivative(m)) < 1e-7 * scale * std::max(1.0, m * m)) out.double_root = true;
    return out;
}

CubicRoots equilibria_cubic(const ScaledParams& p, Convention conv) { return solve_cubic_positive(equilibrium_cubic(p, conv)); }

FoldSeparationReport check_fold_separation(const ScaledParams& p, Convention conv, double C_star)
{
    const DerivedConstants k = derived_constants(p);
    const double gct = p.gamma * p.c_t;
    const double Kh4 = p4(p.K_h_hat);
    FoldSeparationReport r;
    const CubicRoots roots = equilibria_cubic(p, conv);
    r.root_count = roots.count();
    if (C_star > 0.0) r.C_star = C_star;
    else if (!roots.m.empty()) r.C_star = std::sqrt(roots.m.back());
    r.h_star = h_inf_C(r.C_star, p);
    r.C_F = std::sqrt(2.0 * p.K_hat) * gct;
    r.lhs = 2.0 * k.A_IPR * Kh4 * gct / k.A(conv);
    const double C = r.C_star;
    r.rhs = C > 0.0 ? (Kh4 + p4(C)) * (sq(C) - sq(r.C_F)) / std::pow(C, 8) : 0.0;
    r.satisfied = r.root_count == 1 && r.C_star > r.C_F && r.lhs > r.rhs && r.rhs > 0.0;
    return r;
}

Heteroclinic layer_heteroclinic(const ScaledParams& p, double h_start, double rel_tol)
{
    if (!(h_start > 0.0)) throw std::invalid_argument("layer_heteroclinic needs h_start > 0");
    // u = h_start - h runs from 0 to h_start
    const ode::Field fld = [&p, h_start](double u, const ode::Vec& y, ode::Vec& dy) {
        dy.resize(1);
        dy(0) = p.tau_hat * j_ipr0(h_start - u, y(0), p);
    };
    ode::IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = rel_tol * 1e-2;
    cfg.method = ode::Method::ExplicitAdaptive;
    cfg.max_step = h_start / 200.0;
    const ode::Trajectory tr = ode::integrate(fld, ode::Vec::Zero(1), 0.0, h_start, cfg);
    if (!tr.ok()) throw ode::IntegrationError("heteroclinic integration failed: " + tr.message);
    Heteroclinic out;
    for (size_t i = 0; i < tr.t.size(); ++i) {
        const double c = tr.y[i](0);
        if (c < -1e-12 || c > 2.0 * p.c_t) throw ode::IntegrationError("heteroclinic left the band 0 <= c <= 2 c_t");
        out.h.push_back(std::max(h_start - tr.t[i], 0.0));
        out.c.push_back(c);
    }
    out.h.back() = 0.0;
    out.c_d = out.c.back();
    return out;
}

}  // namespace calcium::gspt
