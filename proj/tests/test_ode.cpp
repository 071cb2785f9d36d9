#include "calcium/ode.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace calcium::ode;

namespace {

Vec vec(std::initializer_list<double> v)
{
    Vec y(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) y(i++) = x;
    return y;
}

Field oscillator()
{
    return [](double, const Vec& y, Vec& dy) {
        dy.resize(2);
        dy << y(1), -y(0);
    };
}

// y' = -L (y - cos t) - sin t, solution cos t + (y0 - 1) e^{-L t}
Field stiff(double L)
{
    return [L](double t, const Vec& y, Vec& dy) {
        dy.resize(1);
        dy(0) = -L * (y(0) - std::cos(t)) - std::sin(t);
    };
}

IntegratorConfig config(Method m, double tol)
{
    IntegratorConfig c;
    c.method = m;
    c.rel_tol = tol;
    c.abs_tol = tol * 1e-2;
    return c;
}

}  // namespace

TEST_CASE("harmonic oscillator over ten periods")
{
    for (Method m : {Method::Implicit, Method::ExplicitAdaptive}) {
        const double T = 20.0 * std::numbers::pi;
        const Trajectory tr = integrate(oscillator(), vec({1.0, 0.0}), 0.0, T, config(m, 1e-10));
        REQUIRE(tr.ok());
        CHECK(tr.t_end == doctest::Approx(T));
        CHECK(std::abs(tr.y_end(0) - 1.0) < 1e-7);
        CHECK(std::abs(tr.y_end(1)) < 1e-7);
        for (double t : {1.0, 7.3, 40.0, 61.0}) {
            const Vec y = tr.eval(t);
            CHECK(std::abs(y(0) - std::cos(t)) < 1e-7);
            CHECK(std::abs(y(1) + std::sin(t)) < 1e-7);
        }
    }
}

TEST_CASE("error decreases with tolerance")
{
    for (Method m : {Method::Implicit, Method::ExplicitAdaptive}) {
        double prev = 1.0;
        for (double tol : {1e-6, 1e-8, 1e-10}) {
            const Trajectory tr = integrate(oscillator(), vec({1.0, 0.0}), 0.0, 10.0, config(m, tol));
            const double err = std::hypot(tr.y_end(0) - std::cos(10.0), tr.y_end(1) + std::sin(10.0));
            CHECK(err < prev);
            CHECK(err < 100.0 * tol);
            prev = err;
        }
    }
}

TEST_CASE("implicit method takes large steps on a stiff problem")
{
    const double L = 1e6;
    const Trajectory im = integrate(stiff(L), vec({2.0}), 0.0, 10.0, config(Method::Implicit, 1e-8));
    REQUIRE(im.ok());
    CHECK(std::abs(im.y_end(0) - std::cos(10.0)) < 1e-6);
    CHECK(im.steps < 2000);
    IntegratorConfig ex = config(Method::ExplicitAdaptive, 1e-8);
    ex.max_steps = 20000;
    const Trajectory er = integrate(stiff(L), vec({2.0}), 0.0, 10.0, ex);
    CHECK(er.steps > 10 * im.steps);
}

TEST_CASE("section events are located on the exact crossing")
{
    const Section s = coordinate_section(2, 0, 0.0, -1);
    const Trajectory tr = integrate(oscillator(), vec({1.0, 0.0}), 0.0, 20.0, config(Method::Implicit, 1e-10), {s});
    REQUIRE(tr.events.size() == 3);
    for (std::size_t k = 0; k < tr.events.size(); ++k) {
        const double expected = std::numbers::pi / 2 + 2.0 * std::numbers::pi * k;
        CHECK(tr.events[k].t == doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::abs(tr.events[k].y(0)) < 1e-9);
    }
    const Trajectory stop =
        integrate(oscillator(), vec({1.0, 0.0}), 0.0, 20.0, config(Method::Implicit, 1e-10), {s}, 2);
    CHECK(stop.reason == Termination::Event);
    CHECK(stop.t_end == doctest::Approx(2.5 * std::numbers::pi).epsilon(1e-9));

    const SectionEvent e = integrate_to_section(oscillator(), vec({0.0, 1.0}), 0.0, coordinate_section(2, 1, 0.0, -1),
                                                10.0, config(Method::ExplicitAdaptive, 1e-10));
    CHECK(e.t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
    CHECK_THROWS_AS(integrate_to_section(oscillator(), vec({0.0, 1.0}), 0.0, coordinate_section(2, 0, 5.0, 1), 10.0,
                                         config(Method::Implicit, 1e-8)),
                    IntegrationError);
}

TEST_CASE("tangent propagation equals the flow derivative")
{
    // Van der Pol, mu = 1
    const Field f = [](double, const Vec& y, Vec& dy) {
        dy.resize(2);
        dy << y(1), (1.0 - y(0) * y(0)) * y(1) - y(0);
    };
    const IntegratorConfig cfg = config(Method::Implicit, 1e-11);
    const Vec y0 = vec({1.5, 0.2});
    const TangentResult tr = propagate_tangent(f, y0, vec({1.0, 0.0}), 0.0, 3.0, cfg);
    const double d = 1e-6;
    const Vec yp = integrate(f, y0 + vec({d, 0.0}), 0.0, 3.0, cfg).y_end;
    const Vec ym = integrate(f, y0 - vec({d, 0.0}), 0.0, 3.0, cfg).y_end;
    const Vec fd = (yp - ym) / (2 * d);
    CHECK((tr.v - fd).norm() < 1e-5 * fd.norm());
}

TEST_CASE("finite-difference Jacobian of a linear field")
{
    Mat A(2, 2);
    A << 1.0, -2.0, 3.5, 0.25;
    const Field f = [A](double, const Vec& y, Vec& dy) { dy = A * y; };
    const Mat J = fd_jacobian(f, 0.0, vec({0.3, -2.0}));
    CHECK((J - A).norm() < 1e-8);
}

TEST_CASE("configuration validation")
{
    IntegratorConfig c;
    c.rel_tol = -1.0;
    CHECK_THROWS(c.validate());
    IntegratorConfig ok;
    CHECK_NOTHROW(ok.validate());
}
