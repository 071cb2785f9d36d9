#pragma once

#include "calcium/params.hpp"

namespace calcium {

struct State {
    double h = 0.0;
    double c = 0.0;
};

// c = delta * C, delta = sqrt(eps)
struct RegimeTwoState {
    double h = 0.0;
    double C = 0.0;
    double delta = 0.05;
};

struct Rate {
    double dh = 0.0;
    double dc = 0.0;
};

struct Gating {
    double tau_h;
    double h_inf;
    double m_alpha;
    double phi_p;
    double phi_pdown;
};

// Dimensional and dimensionless tiers share the same functional form.
Gating gating_functions(double c, const DimensionalParams& p);
Gating gating_functions(double c, const DimensionlessParams& p);
// Scaled tier: K_tau = sqrt(eps), K_h = sqrt(eps) K_h_hat, so
// h_inf = eps^2 K_h_hat^4 / (eps^2 K_h_hat^4 + c^4) and tau_h = tau_hat / (c^4 + eps^2).
Gating gating_functions(double c, const ScaledParams& p, double eps);

double open_probability(double h, double c, const Gating& g, double k_beta);
double open_probability(double h, double c, const ScaledParams& p, double eps);

// Scaled fluxes without their eps weights: c' = J_IPR - eps J_plus + eps^2 J_minus.
struct Fluxes {
    double J_IPR;
    double J_SERCA_plus;
    double J_SERCA_minus;
};

Fluxes fluxes(double h, double c, const ScaledParams& p, double eps);

// Unscaled closed-cell model in the units of the given tier.
Rate rhs_model(const State& s, const DimensionalParams& p);
Rate rhs_model(const State& s, const DimensionlessParams& p);

// The scaled system; eps is independent of p.eps so it can be swept.
Rate rhs_full(const State& s, const ScaledParams& p, double eps);

// Leading IPR pieces of the expansion (the printed symbols).
double po0(double h, double c, const ScaledParams& p);
double po1(double h, double c, const ScaledParams& p);
// J0 = k_IPR PO0 (gamma c_t - (1+gamma) c) / (c^4 h), written without the removable singularity.
double j_ipr0(double h, double c, const ScaledParams& p);
double j_ipr1(double h, double c, const ScaledParams& p);

// rhs_full = g + eps W1 + eps^2 W2 + O(eps^4), g = N f with f = c^4 h, N = (-1/tau_hat, J0).
// The eps^2 IPR term carries K_h_hat^4 (it comes from m_alpha h_inf ~ eps^2 K_h_hat^4/(K_c^4+c^4)).
struct Expansion {
    Rate g;
    Rate W1;
    Rate W2;
};

Expansion rhs_expansion(const State& s, const ScaledParams& p);

// Exact change of variables c = delta C, t1 = delta^3 t applied to rhs_full.
Rate rhs_regime2(const RegimeTwoState& s, const ScaledParams& p);
// Same with tau_hat = delta nu_max.
Rate rhs_regime2_hopf(const RegimeTwoState& s, double nu_max, const ScaledParams& p);
// delta = 0 limit of the above (regular perturbation problem).
Rate rhs_regime2_hopf_limit(double h, double C, double nu_max, const ScaledParams& p, Convention conv);

// h_inf of the rescaled variable: K_h^4 / (K_h^4 + C^4).
double h_inf_C(double C, const ScaledParams& p);

}  // namespace calcium
