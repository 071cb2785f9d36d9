#pragma once

#include "calcium/model.hpp"
#include "calcium/ode.hpp"

#include <string>
#include <vector>

namespace calcium::gspt {

// rhs_full(z, eps) = N(z) f(z) + eps G(z, eps)
class Decomposition {
public:
    explicit Decomposition(const ScaledParams& p) : p_(p) {}

    double f(const State& z) const;
    Rate N(const State& z) const;
    Rate g(const State& z) const;  // N f
    Rate G(const State& z, double eps) const;

private:
    ScaledParams p_;
};

Decomposition decompose(const ScaledParams& p);

enum class Branch { Sc, Sh, Sa, Sr };

const char* to_string(Branch b);

// For Sc/Sh, x is c; for Sa/Sr (regime two manifold h = zeta(C)), x is C.
struct CriticalManifoldPoint {
    double h = 0.0;
    double x = 0.0;
    Branch branch = Branch::Sc;
};

struct Eigenvalue {
    double value = 0.0;
    bool degenerate = false;
};

Eigenvalue nontrivial_eigenvalue(const CriticalManifoldPoint& pt, const ScaledParams& p, Convention conv);

// Leading-order regime-two layer field f0(h, C) = A_IPR gamma c_t C^4 h - A (C^2 - K gamma^2 c_t^2).
double layer_field_R2(double h, double C, const ScaledParams& p, Convention conv);

// Sc: (0, -J_plus(c)) in slow time. Sa/Sr: (dh, dC) of the reduced flow on h = zeta(C).
// Throws std::domain_error at non-hyperbolic points.
Rate reduced_field(const CriticalManifoldPoint& pt, const ScaledParams& p, Convention conv);

double zeta(double C, const ScaledParams& p, Convention conv);
double zeta_prime(double C, const ScaledParams& p, Convention conv);
Branch classify_R2(double C, const ScaledParams& p);

struct FoldPoint {
    double h_F;
    double C_F;
    double d2C_f0;  // 4 A
    double dh_f0;   // 4 A_IPR K^2 gamma^5 c_t^5
    double g;       // slow h-rate (1 + C^4)(h_inf - h)/tau_hat at F
    double dC_g;
};

FoldPoint fold_point(const ScaledParams& p, Convention conv);

struct Cubic {
    double a3, a2, a1, a0;
    double operator()(double m) const { return ((a3 * m + a2) * m + a1) * m + a0; }
    double derivative(double m) const { return (3.0 * a3 * m + 2.0 * a2) * m + a1; }
};

Cubic equilibrium_cubic(const ScaledParams& p, Convention conv);

struct CubicRoots {
    std::vector<double> m;  // distinct positive real roots, ascending
    bool double_root = false;
    int count() const { return static_cast<int>(m.size()); }
};

CubicRoots solve_cubic_positive(const Cubic& q);
CubicRoots equilibria_cubic(const ScaledParams& p, Convention conv);

struct FoldSeparationReport {
    int root_count = 0;
    double C_star = 0.0;
    double h_star = 0.0;
    double C_F = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
};

// Unique equilibrium on the attracting side of the fold, with
// lhs = 2 A_IPR K_h^4 gamma c_t / A  >  rhs = (K_h^4 + C*^4)(C*^2 - C_F^2) / C*^8.
// C_star <= 0 uses the unique cubic root; otherwise the given value.
FoldSeparationReport check_fold_separation(const ScaledParams& p, Convention conv, double C_star = 0.0);

struct Heteroclinic {
    std::vector<double> h;
    std::vector<double> c;
    double c_d = 0.0;
};

// dc/dh = -tau_hat J0(h, c), from (h_start, 0+) down to h = 0.
Heteroclinic layer_heteroclinic(const ScaledParams& p, double h_start, double rel_tol = 1e-12);

}  // namespace calcium::gspt
