#include "calcium/model.hpp"

#include <algorithm>
#include <cmath>

namespace calcium {

namespace {

inline double sq(double x) { return x * x; }
inline double p4(double x) { return sq(sq(x)); }

template <class P>
Gating gating_unscaled(double c, const P& p)
{
    c = std::max(c, 0.0);
    const double c4 = p4(c);
    const double Kt4 = p4(p.K_tau);
    const double Kh4 = p4(p.K_h);
    const double Kc4 = p4(p.K_c);
    const double p2 = sq(p.p), Kp2 = sq(p.K_p);
    return {p.tau_max * Kt4 / (Kt4 + c4), Kh4 / (Kh4 + c4), c4 / (Kc4 + c4), p2 / (Kp2 + p2), Kp2 / (Kp2 + p2)};
}

template <class P>
Rate rhs_unscaled(const State& s, const P& p)
{
    const double c = std::max(s.c, 0.0);
    const Gating g = gating_unscaled(c, p);
    const double PO = open_probability(s.h, c, g, p.k_beta);
    const double J_IPR = p.k_IPR * PO * (p.gamma * p.c_t - (1.0 + p.gamma) * c);
    const double den = sq(p.K_s) + sq(c);
    const double J_plus = p.V_s * sq(c) / den;
    const double J_minus = p.K * sq(p.gamma) * p.V_s * sq(p.c_t - c) / den;
    return {(g.h_inf - s.h) / g.tau_h, J_IPR - J_plus + J_minus};
}

// Common denominator of PO0 and PO1.
inline double po_den(double h, double c4, const ScaledParams& p)
{
    return sq(p.p) * (1.0 + p.k_beta) * c4 * h + p.k_beta * sq(p.K_p) * (p4(p.K_c) + c4);
}

}  // namespace

Gating gating_functions(double c, const DimensionalParams& p) { return gating_unscaled(c, p); }
Gating gating_functions(double c, const DimensionlessParams& p) { return gating_unscaled(c, p); }

Gating gating_functions(double c, const ScaledParams& p, double eps)
{
    c = std::max(c, 0.0);
    const double c4 = p4(c);
    const double e2Kh4 = sq(eps) * p4(p.K_h_hat);
    const double Kc4 = p4(p.K_c);
    const double p2 = sq(p.p), Kp2 = sq(p.K_p);
    return {p.tau_hat / (c4 + sq(eps)), e2Kh4 / (e2Kh4 + c4), c4 / (Kc4 + c4), p2 / (Kp2 + p2), Kp2 / (Kp2 + p2)};
}

double open_probability(double h, double /*c*/, const Gating& g, double k_beta)
{
    const double alpha = g.phi_pdown * (1.0 - g.m_alpha * g.h_inf);
    const double beta = g.phi_p * g.m_alpha * h;
    if (beta <= 0.0) return 0.0;
    return beta / (beta + k_beta * (beta + alpha));
}

double open_probability(double h, double c, const ScaledParams& p, double eps)
{
    return open_probability(h, c, gating_functions(c, p, eps), p.k_beta);
}

Fluxes fluxes(double h, double c, const ScaledParams& p, double eps)
{
    c = std::max(c, 0.0);
    const double PO = open_probability(h, c, p, eps);
    const double den = sq(p.K_s) + sq(c);
    return {p.k_IPR * PO * (p.gamma * p.c_t - (1.0 + p.gamma) * c), p.V_s_hat * sq(c) / den,
            p.K_hat * sq(p.gamma) * p.V_s_hat * sq(p.c_t - c) / den};
}

Rate rhs_model(const State& s, const DimensionalParams& p) { return rhs_unscaled(s, p); }
Rate rhs_model(const State& s, const DimensionlessParams& p) { return rhs_unscaled(s, p); }

Rate rhs_full(const State& s, const ScaledParams& p, double eps)
{
    const double c = std::max(s.c, 0.0);
    const double c4 = p4(c);
    const double e2 = sq(eps);
    const double e2Kh4 = e2 * p4(p.K_h_hat);
    const double h_inf = e2Kh4 / (e2Kh4 + c4);
    const double m_alpha = c4 / (p4(p.K_c) + c4);
    const double p2 = sq(p.p), Kp2 = sq(p.K_p);
    const double alpha = Kp2 / (Kp2 + p2) * (1.0 - m_alpha * h_inf);
    const double beta = p2 / (Kp2 + p2) * m_alpha * s.h;
    const double PO = beta > 0.0 ? beta / (beta + p.k_beta * (beta + alpha)) : 0.0;
    const double den = sq(p.K_s) + sq(c);
    const double dc = p.k_IPR * PO * (p.gamma * p.c_t - (1.0 + p.gamma) * c) - eps * p.V_s_hat * sq(c) / den +
                      e2 * p.K_hat * sq(p.gamma) * p.V_s_hat * sq(p.c_t - c) / den;
    const double dh = (h_inf - s.h) * (c4 + e2) / p.tau_hat;
    return {dh, dc};
}

double po0(double h, double c, const ScaledParams& p)
{
    const double c4 = p4(std::max(c, 0.0));
    return sq(p.p) * c4 * h / po_den(h, c4, p);
}

double po1(double h, double c, const ScaledParams& p)
{
    const double c4 = p4(std::max(c, 0.0));
    return p.k_beta * sq(p.K_p) * sq(p.p) * c4 * h / sq(po_den(h, c4, p));
}

double j_ipr0(double h, double c, const ScaledParams& p)
{
    c = std::max(c, 0.0);
    const double c4 = p4(c);
    return p.k_IPR * sq(p.p) / po_den(h, c4, p) * (p.gamma * p.c_t - (1.0 + p.gamma) * c);
}

double j_ipr1(double h, double c, const ScaledParams& p)
{
    c = std::max(c, 0.0);
    const double c4 = p4(c);
    return p.k_IPR * p.k_beta * sq(p.K_p) * sq(p.p) / (c4 * sq(po_den(h, c4, p))) *
           (p.gamma * p.c_t - (1.0 + p.gamma) * c);
}

Expansion rhs_expansion(const State& s, const ScaledParams& p)
{
    const double c = std::max(s.c, 0.0);
    const double h = s.h;
    const double f = p4(c) * h;
    const double den = sq(p.K_s) + sq(c);
    const double Kh4 = p4(p.K_h_hat);
    Expansion e;
    e.g = {-f / p.tau_hat, j_ipr0(h, c, p) * f};
    e.W1 = {0.0, -p.V_s_hat * sq(c) / den};
    const double ipr1 = p.k_IPR * Kh4 * po1(h, c, p) * (p.gamma * p.c_t - (1.0 + p.gamma) * c);
    e.W2 = {(Kh4 - h) / p.tau_hat, ipr1 + p.K_hat * sq(p.gamma) * p.V_s_hat * sq(p.c_t - c) / den};
    return e;
}

double h_inf_C(double C, const ScaledParams& p)
{
    const double Kh4 = p4(p.K_h_hat);
    return Kh4 / (Kh4 + p4(std::max(C, 0.0)));
}

Rate rhs_regime2(const RegimeTwoState& s, const ScaledParams& p)
{
    const double d = s.delta;
    const Rate r = rhs_full({s.h, d * s.C}, p, d * d);
    const double d3 = d * d * d;
    return {r.dh / d3, r.dc / (d3 * d)};
}

Rate rhs_regime2_hopf(const RegimeTwoState& s, double nu_max, const ScaledParams& p)
{
    ScaledParams q = p;
    q.tau_hat = s.delta * nu_max;
    return rhs_regime2(s, q);
}

Rate rhs_regime2_hopf_limit(double h, double C, double nu_max, const ScaledParams& p, Convention conv)
{
    const DerivedConstants k = derived_constants(p);
    const double A = k.A(conv);
    const double gct = p.gamma * p.c_t;
    const double C4 = p4(std::max(C, 0.0));
    return {(1.0 + C4) * (h_inf_C(C, p) - h) / nu_max,
            k.A_IPR * gct * C4 * h - A * (sq(C) - p.K_hat * sq(gct))};
}

}  // namespace calcium
