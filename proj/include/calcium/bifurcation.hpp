#pragma once

#include "calcium/gspt.hpp"
#include "calcium/model.hpp"

#include <string>
#include <vector>

namespace calcium::bif {

enum class Axis { CT, P, NuMax };

const char* to_string(Axis a);
Axis axis_from_string(const std::string& s);

// NuMax sets tau_hat = sqrt(eps) nu.
ScaledParams with_param(const ScaledParams& p, Axis axis, double value, double eps);

enum class Stability { Stable, Unstable, Saddle };

const char* to_string(Stability s);

struct JacobianInfo {
    double trace;
    double det;
};

// Central differences with step cbrt(machine eps) times the local scale.
JacobianInfo jacobian_full(const State& s, const ScaledParams& p, double eps);

struct EquilibriumBranchPoint {
    double param;
    double h;
    double c;
    double trace;
    double det;
    double residual;
    Stability stability;
};

struct Branch {
    Axis axis;
    double eps;
    std::vector<EquilibriumBranchPoint> points;
    std::string termination;
};

// Equilibria satisfy h = h_inf(c) and F(c) = dc/dt(h_inf(c), c) = 0.
double equilibrium_residual(double c, const ScaledParams& p, double eps);
// All equilibria at fixed parameters, ascending in c.
std::vector<State> equilibria(const ScaledParams& p, double eps);
// Newton on F from the seed; throws std::runtime_error on failure.
State equilibrium_newton(const ScaledParams& p, double eps, double c_seed);

EquilibriumBranchPoint make_point(const ScaledParams& p, Axis axis, double param, double c, double eps);

// Pseudo-arclength continuation in (c, param) from the lowest equilibrium at lo, heading to hi.
Branch equilibrium_branch(const ScaledParams& p, Axis axis, double lo, double hi, int steps, double eps);

struct HopfPoint {
    Axis axis;
    double param;
    double h;
    double c;
    double trace;
    double det;
    double omega;
    double dtrace_dparam;
    std::string criticality = "unknown";
    // leading-order nu_max formula at the located parameters (NaN when undefined)
    double nu_formula_printed;
    double nu_formula_derived;
};

// Trace sign changes with det > 0, refined by bisection in the parameter.
std::vector<HopfPoint> detect_hopf(const Branch& branch, const ScaledParams& p, double param_tol = 1e-10);

struct CriticalityProbe {
    std::vector<double> param;
    std::vector<double> amplitude;
    std::string hint;
};

// Simulates at param + s k rel_step |param| (k = 1, 2, 4) on the side where the equilibrium is unstable.
// Amplitude doubling over the quadrupled distance suggests a supercritical onset, a
// jump to full size at the first point a subcritical one.
CriticalityProbe estimate_criticality(const HopfPoint& hp, const ScaledParams& p, double eps, double rel_step = 0.01);

struct HopfFormula {
    double C_star;
    double nu_formula;        // as displayed: (K_h^4 + C^4) C / (2 A K_h^4 (C^2 - 2 K gamma^2 c_t^2))
    double DC_h_inf;          // |D_C h_inf(C*)|
    double ratio;             // D_C f0 / D_h f0 at (zeta(C*), C*)
    bool condition_holds;     // C* > C_F and |D_C h_inf| > ratio
};

// C_star <= 0 takes the largest positive cubic root.
HopfFormula hopf_value_formula(const ScaledParams& p, Convention conv, double C_star = 0.0);

struct NumericHopf {
    double nu_ah;
    double tau_hat_ah;
    double tau_tilde_ah;  // tau_hat / eps^2
    double h;
    double C;
    double trace_at;      // residual trace at nu_ah
    double det;
};

// Bisection in nu_max on the trace of rhs_regime2_hopf at its equilibrium (delta = sqrt(eps)).
NumericHopf numeric_hopf_nu(const ScaledParams& p, double eps, double nu_lo = 1e-4, double nu_hi = 10.0);

// Trace and determinant of the delta = 0 limit system at (h_inf(C), C): analytic and finite-difference.
struct LimitJacobianCheck {
    double trace_analytic, det_analytic;
    double trace_fd, det_fd;
};

LimitJacobianCheck limit_jacobian_check(const ScaledParams& p, Convention conv, double C, double nu);

struct CuspMap {
    std::vector<double> p;
    std::vector<double> ct;
    std::vector<std::vector<int>> count;  // [ip][ict]
    std::vector<std::array<double, 2>> lower_fold;  // (p, c_t) lower edge of the multi-equilibrium region
    std::vector<std::array<double, 2>> upper_fold;
    bool has_vertex = false;
    double vertex_p = 0.0;
    double vertex_ct = 0.0;
};

CuspMap cusp_scan(const ScaledParams& base, Convention conv, double p_lo, double p_hi, int np, double ct_lo,
                  double ct_hi, int nct);

struct OnsetRow {
    double ct;
    double c_max;
    double c_min;
    double amplitude;
    double period;  // 0 when no oscillation
};

struct OnsetScan {
    std::vector<OnsetRow> rows;
    bool has_jump = false;
    double jump_lo = 0.0;
    double jump_hi = 0.0;
};

struct SimulationStats {
    double c_max;
    double c_min;
    double amplitude;
    double period;  // mean of the last crossing intervals, 0 if not oscillating
    int crossings;
};

// Long run from a fixed start; statistics over the final window.
SimulationStats oscillation_stats(const ScaledParams& p, double eps, double transient, double window,
                                  double rel_tol = 1e-9);

OnsetScan onset_scan_ct(const ScaledParams& p, double p_value, const std::vector<double>& ct_list, double eps,
                        double periods = 20.0);

struct TaumaxRow {
    double tau_tilde;
    double linear_period;  // 2 pi / sqrt(det) at the equilibrium
    double period;
    double c_max;
    double c_min;
    bool oscillating;
};

struct TaumaxScan {
    std::vector<TaumaxRow> rows;
    double onset_exponent = 0.0;       // log-log slope over the first oscillating points
    double relaxation_exponent = 0.0;  // log-log slope over the last points
    double relaxation_r2 = 0.0;        // linear fit of T against tau_tilde over the last points
    double linear_exponent = 0.0;      // log-log slope of the linear period over all rows
    double tau_tilde_ah = 0.0;
};

TaumaxScan taumax_period_scan(const ScaledParams& p, const std::vector<double>& tau_tilde_list, double eps,
                              int fit_points = 3);

}  // namespace calcium::bif
