#include "calcium/cycles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace calcium;
using namespace calcium::cycles;

TEST_CASE("relaxation cycle at the default parameters")
{
    const ScaledParams p;
    const LimitCycle cyc = find_limit_cycle(p, p.eps);
    CHECK(cyc.period > 1.5e4);
    CHECK(cyc.period < 2.5e4);
    CHECK(cyc.closure_gap < 1e-6);
    CHECK(cyc.floquet_exponent < 0.0);
    CHECK(cyc.t.front() == 0.0);
    CHECK(cyc.t.back() == doctest::Approx(cyc.period));
    CHECK(cyc.section_point.c == doctest::Approx(0.1));
    // fixed point of the return map
    CycleOptions opt;
    CHECK(return_map(p, p.eps, cyc.section_point.h, opt) == doctest::Approx(cyc.section_point.h).epsilon(1e-7));
    // the cycle is the same from another start
    opt.start = {0.5, 0.05};
    const LimitCycle other = find_limit_cycle(p, p.eps, opt);
    CHECK(other.period == doctest::Approx(cyc.period).epsilon(1e-6));
}

TEST_CASE("no cycle when the equilibrium is stable")
{
    const ScaledParams p;
    CHECK_THROWS_AS(find_limit_cycle(p, 1e-2), NoCycleError);
}

TEST_CASE("Floquet exponent of the Hopf normal form cycle is -2")
{
    const ode::Field f = [](double, const ode::Vec& y, ode::Vec& dy) {
        const double r2 = y.squaredNorm();
        dy.resize(2);
        dy << y(0) * (1.0 - r2) - y(1), y(1) * (1.0 - r2) + y(0);
    };
    ode::Vec y0(2);
    y0 << 1.0, 0.0;
    ode::IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    const ode::Trajectory tr = ode::integrate(f, y0, 0.0, 2.0 * std::numbers::pi, cfg);
    CHECK(floquet_exponent(tr, f) == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("Hausdorff distance of concentric circles")
{
    auto circle = [](double r, int n) {
        Curve c;
        for (int i = 0; i <= n; ++i) {
            const double a = 2.0 * std::numbers::pi * i / n;
            c.push_back({r * std::cos(a), r * std::sin(a)});
        }
        return c;
    };
    CHECK(hausdorff_distance(circle(1.0, 100), circle(1.1, 37)) == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(hausdorff_distance(circle(1.0, 50), circle(1.0, 50)) < 1e-12);
    const Curve r = resample_arclength({{0.0, 0.0}, {1.0, 0.0}, {1.2, 0.0}, {5.0, 0.0}}, 100);
    REQUIRE(r.size() >= 100);
    double lo = 1e9, hi = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) {
        const double d = std::hypot(r[i][0] - r[i - 1][0], r[i][1] - r[i - 1][1]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    CHECK(hi - lo < 1e-9);
}

TEST_CASE("singular cycle is closed")
{
    const ScaledParams p;
    const SingularCycle s = singular_cycle(p, Convention::Derived);
    CHECK(s.h_F == doctest::Approx(0.22777).epsilon(1e-4));
    CHECK(s.eps_f1 == doctest::Approx(1.0 / (2.0 * p.K_hat * p.gamma * p.gamma * p.c_t * p.c_t)));
    for (double g : s.gaps) CHECK(g < 1e-6);
    const auto pl = s.planar();
    REQUIRE(pl.size() > 10);
    CHECK(std::hypot(pl.front()[0] - pl.back()[0], pl.front()[1] - pl.back()[1]) < 1e-6);
}

TEST_CASE("linear fit and period estimate")
{
    const LinearFit f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    const ScaledParams p;
    const PeriodEstimate e = period_estimate(p, Convention::Derived);
    CHECK(e.order_estimate == doctest::Approx(p.tau_hat / (p.eps * p.eps)));
    CHECK(e.T_est == doctest::Approx(e.order_estimate * e.v));
    CHECK(e.quad_error < 1e-8);
}

TEST_CASE("period grows with tau_hat")
{
    const ScaledParams p;
    const auto rows = period_scan(p, {0.17, 0.34}, Convention::Printed);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].period > rows[0].period);
    CHECK(rows[1].order_estimate == doctest::Approx(2.0 * rows[0].order_estimate));
}
