#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace calcium::ode {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Field = std::function<void(double t, const Vec& y, Vec& dy)>;

enum class Method {
    Implicit,          // Radau IIA, order 5
    ExplicitAdaptive,  // Dormand-Prince 5(4)
};

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 0.0;  // 0: 10 ulp of |t|
    long max_steps = 5'000'000;
    Method method = Method::Implicit;
    double first_step = 0.0;  // 0: automatic
    bool record = true;       // keep samples and dense output

    void validate() const;
};

enum class Termination { Time, Event, Failure };

const char* to_string(Termination t);

// Crossing of { y : normal . y = offset } with sign(d/dt (normal . y)) = direction.
struct Section {
    Vec normal;
    double offset = 0.0;
    int direction = +1;

    double operator()(const Vec& y) const { return normal.dot(y) - offset; }
};

Section coordinate_section(int n, int index, double value, int direction);

struct SectionEvent {
    double t = 0.0;
    Vec y;
    int section = 0;
};

class Trajectory {
public:
    struct Segment {
        double t0;
        double h;
        int kind;  // 0 Radau collocation, 1 Dormand-Prince
        Mat coef;
    };

    std::vector<double> t;
    std::vector<Vec> y;
    std::vector<Segment> segments;
    std::vector<SectionEvent> events;
    Termination reason = Termination::Time;
    std::string message;
    long steps = 0;
    long rejected = 0;
    long fevals = 0;
    double t_end = 0.0;
    Vec y_end;

    bool ok() const { return reason != Termination::Failure; }
    // Dense evaluation inside [t.front(), t.back()] (requires record).
    Vec eval(double tq) const;
    static Vec eval_segment(const Segment& s, double tq);
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// stop_after_events: 0 never stops on events, k > 0 stops at the k-th detected crossing.
Trajectory integrate(const Field& f, const Vec& y0, double t0, double t1, const IntegratorConfig& cfg,
                     const std::vector<Section>& sections = {}, int stop_after_events = 0);

constexpr double kEventTol = 1e-12;

// Throws IntegrationError when no crossing happens before t0 + horizon or the crossing is tangential.
SectionEvent integrate_to_section(const Field& f, const Vec& y0, double t0, const Section& section,
                                  double horizon, const IntegratorConfig& cfg);

// Central differences, step sqrt(machine eps) (1 + |y_j|).
Mat fd_jacobian(const Field& f, double t, const Vec& y);

struct TangentResult {
    Vec y;
    Vec v;
    Trajectory trajectory;  // of the augmented system [y; v]
};

// Solves y' = f(y), v' = Df(y) v jointly.
TangentResult propagate_tangent(const Field& f, const Vec& y0, const Vec& v0, double t0, double t1,
                                const IntegratorConfig& cfg);

}  // namespace calcium::ode
