#pragma once

#include "calcium/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace calcium::blowup {

using Vec3 = std::array<double, 3>;

// Blown-down point of the extended system (h, c, eps).
struct Extended {
    double h, c, eps;
};

// Cylindrical charts: K1 (c = r1, eps = r1^2 eps1), K2 (c = r2 c2, eps = r2^2).
struct CylK1 {
    double h, r1, eps1;
};
struct CylK2 {
    double h, c2, r2;
};

Extended blow_down(const CylK1& q);
Extended blow_down(const CylK2& q);
CylK1 to_cyl_k1(const Extended& x);  // c > 0
CylK2 to_cyl_k2(const Extended& x);  // eps > 0

// kappa_12 (K2 -> K1, c2 > 0) and kappa_21 (K1 -> K2, eps1 > 0). Throw std::domain_error outside the overlap.
CylK1 cyl_k2_to_k1(const CylK2& q);
CylK2 cyl_k1_to_k2(const CylK1& q);

// Spherical charts around the origin of K1: SK1 (h = s1 h1, r = s1, eps1 = s1 e1), SK2 (h = s2 h2, r = s2 r2, eps1 = s2).
struct SphK1 {
    double h1, eps1, s1;
};
struct SphK2 {
    double h2, r2, s2;
};

CylK1 blow_down(const SphK1& q);
CylK1 blow_down(const SphK2& q);
SphK1 to_sph_k1(const CylK1& q);  // r1 > 0
SphK2 to_sph_k2(const CylK1& q);  // eps1 > 0
SphK1 sph_k2_to_k1(const SphK2& q);  // r2 > 0
SphK2 sph_k1_to_k2(const SphK1& q);  // eps1 > 0

// K1 field after division by r1^3:
//   h' = r1 phi(h, eps1), r1' = r1 psi(h, r1, eps1), eps1' = -2 eps1 psi(h, r1, eps1).
double h_inf_K1(double eps1, const ScaledParams& p);
double phi_K1(double h, double eps1, const ScaledParams& p);
double psi_K1(double h, double r1, double eps1, const ScaledParams& p);
Vec3 field_K1(const CylK1& q, const ScaledParams& p);

// rhs_full pushed forward to K1 coordinates and divided by r1^3 (r1 > 0, eps1 > 0).
Vec3 pushforward_K1(const CylK1& q, const ScaledParams& p);

// K2 field after division by r2^3: (dh, dc2, 0) = rhs_regime2 with C = c2, delta = r2.
Vec3 field_K2(const CylK2& q, const ScaledParams& p);

// Spherical chart fields after division by s1 (SK1) and s2 (SK2); component order as in the structs.
Vec3 field_sph_K1(const SphK1& q, const ScaledParams& p);
Vec3 field_sph_K2(const SphK2& q, const ScaledParams& p);
// SK2 divided by -psi_bar_2 > 0 near p_s: h2' = -2 h2 - r2 phi_bar/psi_bar, r2' = -3 r2, s2' = 2 s2.
Vec3 field_sph_K2_desingularized(const SphK2& q, const ScaledParams& p);

// Central-difference Jacobian and its eigenvalues (real parts, ascending).
using Field3 = Vec3 (*)(const Vec3&, const ScaledParams&);
std::array<std::array<double, 3>, 3> fd_jacobian3(Field3 f, const Vec3& x, const ScaledParams& p);
std::vector<double> eigenvalues3(const std::array<std::array<double, 3>, 3>& J);

Vec3 field_K1_vec(const Vec3& x, const ScaledParams& p);
Vec3 field_sph_K1_vec(const Vec3& x, const ScaledParams& p);
Vec3 field_sph_K2_vec(const Vec3& x, const ScaledParams& p);

struct EigenCheck {
    std::string name;
    Vec3 point;
    std::vector<double> expected;  // ascending
    std::vector<double> computed;  // ascending
    double error;                  // max |computed - expected| / max(1, max |expected|)
};

// Distinguished points in K1 under a convention for A.
struct K1Points {
    Vec3 Q3;
    Vec3 Q5;      // (h_F, 0, eps_f1)
    double eps_l1;
};

K1Points k1_points(const ScaledParams& p, Convention conv);
// Curve of equilibria on r1 = 0.
double Psi(double eps1, const ScaledParams& p, Convention conv);

struct K1Structure {
    std::vector<EigenCheck> l_h;   // {-2 A_IPR g c_t h, A_IPR g c_t h, 0}
    std::vector<EigenCheck> l_c;   // {-r1/tau_hat, 0, 0}
    std::vector<EigenCheck> S;     // {0, 0, 2 A eps1 (1 - 2 K g^2 c_t^2 eps1)} with derived A
    double S_field_residual;       // max |field| on the Psi curve (derived A)
    double Q3_max_abs_eigenvalue;
    K1Points printed;
    K1Points derived;
};

K1Structure k1_equilibrium_structure(const ScaledParams& p, int samples = 10);

struct SphericalStructure {
    EigenCheck p_s;                      // formula with A = V_s/K_s^2
    std::vector<double> p_s_printed;     // {-2, -3, 2} x printed A, reported only
    std::vector<EigenCheck> L_c;         // {-1/tau_hat, 0, 0} on s1 > 0 (SK1)
};

SphericalStructure spherical_structure(const ScaledParams& p, int samples = 10);

struct Pi6Result {
    double r1_in;
    double h_in;
    double h_out;
    double eps1_out;
    double eps1_formula;      // beta2 (r1/rho1)^2
    double rel_error;
    double drift_prediction;  // -(rho1 - r1) / (tau_hat A_IPR gamma c_t)
    double drift_quadrature;  // integral of phi/psi dr1 with h frozen and eps1 r1^2 conserved
    double time;
};

// From (h_in, r1, beta2) to the section r1 = rho1 under the K1 field.
Pi6Result transition_probe_pi6(double h_in, double r1, double rho1, double beta2, const ScaledParams& p,
                               double rel_tol = 1e-12);

struct Pi41Result {
    double s2_in;
    double h2_in;
    double h2_out;
    double r2_out;
    double r2_conserved;  // from r2^2 s2^3 = const: beta2 (s2/beta2)^(3/2)
    double r2_printed;    // beta2 (s2/beta2)^2
    double rel_error;     // against r2_conserved
    double time;
};

// From (h2, beta2, s2) to s2 = beta2 under the desingularized SK2 field.
Pi41Result transition_probe_pi41(double h2_in, double s2, double beta2, const ScaledParams& p,
                                 double rel_tol = 1e-12);

struct CenterManifoldFit {
    double coefficient;  // leading coefficient of h1 = a s1 e1^2 (1 + b e1 + c e1^2 + d s1)
    double expected;     // K_h_hat^4
    double rel_error;
    int samples;
};

CenterManifoldFit center_manifold_fit(const ScaledParams& p);

struct Check {
    std::string name;
    double measured;
    double expected;
    double tolerance;
    bool pass;
    bool gated = true;  // false: reported only
    std::string detail;
};

struct VerifyReport {
    std::vector<Check> checks;
    bool pass() const;
};

struct VerifyOptions {
    double rho1 = 0.1;
    double beta2 = 0.1;
    unsigned seed = 12345;
    int random_points = 100;
};

VerifyReport verify(const ScaledParams& p, const VerifyOptions& opt = {});

}  // namespace calcium::blowup
