#pragma once

#include "calcium/gspt.hpp"
#include "calcium/model.hpp"
#include "calcium/ode.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace calcium::cycles {

class NoCycleError : public std::runtime_error {
public:
    NoCycleError(const std::string& what, std::vector<double> iterates)
        : std::runtime_error(what), iterates_(std::move(iterates))
    {
    }
    const std::vector<double>& iterates() const { return iterates_; }

private:
    std::vector<double> iterates_;
};

struct CycleOptions {
    double rho1 = 0.1;        // section {c = rho1, dc/dt < 0}
    State start{0.1, 0.3};
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    double fix_tol = 1e-8;    // on the h coordinate of the section point
    int min_returns = 3;
    int max_returns = 60;
    double horizon_factor = 40.0;  // per return, in units of tau_hat / eps^2
};

struct LimitCycle {
    std::vector<double> t;  // t[0] = 0 at the section point
    std::vector<double> h;
    std::vector<double> c;
    double period = 0.0;
    double floquet_exponent = 0.0;
    double eps = 0.0;
    double closure_gap = 0.0;
    State section_point;
    int returns = 0;
    std::vector<double> iterates;  // h at successive section crossings
    ode::Trajectory orbit;         // one period, dense
};

ode::Field scaled_field(const ScaledParams& p, double eps);

LimitCycle find_limit_cycle(const ScaledParams& p, double eps, const CycleOptions& opt = {});

// (1/T) times the integral of the divergence over one period, Gauss-Legendre on every dense segment.
double floquet_exponent(const ode::Trajectory& one_period, const ode::Field& f);
double floquet_exponent(const LimitCycle& cycle, const ScaledParams& p, double eps);

// Return map h -> h' on {c = rho1, dc/dt < 0}.
double return_map(const ScaledParams& p, double eps, double h, const CycleOptions& opt);

struct Point3 {
    double h, r1, eps1;  // chart K1 coordinates
};

struct SingularSegment {
    std::string name;
    std::vector<Point3> k1;               // chart K1 representation
    std::vector<std::array<double, 2>> hc;  // blown-down (h, c)
};

struct SingularCycle {
    std::array<SingularSegment, 5> segments;
    std::array<Point3, 5> Q;  // Q1..Q5
    double c_d = 0.0;
    double h_F = 0.0;
    double eps_f1 = 0.0;
    double eps_l1 = 0.0;
    std::array<double, 5> gaps{};  // |end of segment i - start of segment i+1|, in K1 coordinates

    // Blown-down closed curve in (h, c): Gamma_l, then down S_c, then along S_h.
    std::vector<std::array<double, 2>> planar() const;
};

SingularCycle singular_cycle(const ScaledParams& p, Convention conv, int samples = 400);

using Curve = std::vector<std::array<double, 2>>;

Curve resample_arclength(const Curve& curve, int n);
// Symmetric Hausdorff distance of two polylines, refined until the value changes < 1%.
double hausdorff_distance(const Curve& a, const Curve& b, int start_samples = 2048);
double hausdorff_distance(const LimitCycle& cycle, const SingularCycle& gamma);

struct ConvergenceEntry {
    double eps;
    bool ok;
    double hausdorff;
    double floquet;
    double period;
    std::string error;
};

struct ConvergenceReport {
    std::vector<ConvergenceEntry> entries;
    double slope = 0.0;      // d log(distance) / d log(eps)
    double intercept = 0.0;
    bool monotone = false;
    double floquet_eps2_ratio = 0.0;  // max / min of |Lambda| eps^2
    int survivors = 0;
    bool sufficient = false;  // at least 4 converged cycles
};

ConvergenceReport eps_convergence_sweep(const ScaledParams& p, const std::vector<double>& eps_list, Convention conv,
                                        const CycleOptions& opt = {});

struct PeriodEstimate {
    double order_estimate;  // eps^-2 tau_hat
    double v;               // tau_hat-free quadrature factor
    double T_est;           // order_estimate * v
    double quad_error;
};

PeriodEstimate period_estimate(const ScaledParams& p, Convention conv);

struct LinearFit {
    double slope;
    double intercept;
    double r2;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct PeriodScanRow {
    double tau_hat;
    double period;
    double order_estimate;
    double T_est;
};

std::vector<PeriodScanRow> period_scan(const ScaledParams& p, const std::vector<double>& tau_list, Convention conv,
                                       const CycleOptions& opt = {});

}  // namespace calcium::cycles
