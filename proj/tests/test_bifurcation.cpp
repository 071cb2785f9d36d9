#include "calcium/bifurcation.hpp"
#include "calcium/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace calcium;
using namespace calcium::bif;

namespace {

// Independent central-difference trace and determinant.
JacobianInfo oracle_jacobian(double h, double c, const ScaledParams& p, double eps)
{
    const double dh = 1e-7 * std::max(h, 1e-3), dc = 1e-7 * std::max(c, 1e-3);
    const Rate hp = rhs_full({h + dh, c}, p, eps), hm = rhs_full({h - dh, c}, p, eps);
    const Rate cp = rhs_full({h, c + dc}, p, eps), cm = rhs_full({h, c - dc}, p, eps);
    const double a = (hp.dh - hm.dh) / (2 * dh), b = (cp.dh - cm.dh) / (2 * dc);
    const double e = (hp.dc - hm.dc) / (2 * dh), d = (cp.dc - cm.dc) / (2 * dc);
    return {a + d, a * d - b * e};
}

int folds(const Branch& br)
{
    int n = 0;
    for (std::size_t i = 2; i < br.points.size(); ++i) {
        const double a = br.points[i - 1].param - br.points[i - 2].param;
        const double b = br.points[i].param - br.points[i - 1].param;
        if (a * b < 0.0) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("equilibrium at the default parameters")
{
    const ScaledParams p;
    const auto eq = equilibria(p, p.eps);
    REQUIRE(eq.size() == 1);
    CHECK(eq[0].h == doctest::Approx(0.079157).epsilon(1e-4));
    CHECK(eq[0].c == doctest::Approx(0.073873).epsilon(1e-4));
    const Rate r = rhs_full(eq[0], p, p.eps);
    CHECK(std::abs(r.dh) < 1e-12);
    CHECK(std::abs(r.dc) < 1e-12);
    const JacobianInfo j = jacobian_full(eq[0], p, p.eps), o = oracle_jacobian(eq[0].h, eq[0].c, p, p.eps);
    CHECK(j.trace == doctest::Approx(o.trace).epsilon(1e-5));
    CHECK(j.det == doctest::Approx(o.det).epsilon(1e-5));
    CHECK(j.trace > 0.0);
}

TEST_CASE("branch points are equilibria and Newton returns to them from a perturbed seed")
{
    ScaledParams p;
    p.p = 0.025;
    const Branch br = equilibrium_branch(p, Axis::CT, 0.3, 1.5, 100, p.eps);
    CHECK(br.termination == "reached end of range");
    CHECK(br.points.back().param == doctest::Approx(1.5));
    CHECK(folds(br) == 2);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    for (const auto& pt : br.points) {
        CHECK(std::abs(pt.residual) < 1e-10);
        const ScaledParams q = with_param(p, Axis::CT, pt.param, p.eps);
        const Rate r = rhs_full({pt.h, pt.c}, q, p.eps);
        CHECK(std::abs(r.dh) < 1e-9);
        CHECK(std::abs(r.dc) < 1e-9);
    }
    for (std::size_t i = 0; i < br.points.size(); i += 7) {
        const auto& pt = br.points[i];
        const ScaledParams q = with_param(p, Axis::CT, pt.param, p.eps);
        const State s = equilibrium_newton(q, p.eps, pt.c * (1.0 + u(rng)));
        // a nearby seed can fall into another equilibrium inside the fold region
        bool matched = false;
        for (const State& e : equilibria(q, p.eps)) matched |= std::abs(e.c - s.c) < 1e-9 * std::max(s.c, 1e-3);
        CHECK(matched);
    }
}

TEST_CASE("Hopf points in c_t")
{
    for (auto [pv, expected] : {std::pair{0.015, 0.95926}, std::pair{0.025, 0.63934}}) {
        ScaledParams p;
        p.p = pv;
        const Branch br = equilibrium_branch(p, Axis::CT, 0.3, 1.5, 100, p.eps);
        const auto hopfs = detect_hopf(br, p);
        REQUIRE(hopfs.size() >= 1);
        bool found = false;
        for (const auto& hp : hopfs) {
            const ScaledParams q = with_param(p, Axis::CT, hp.param, p.eps);
            const JacobianInfo o = oracle_jacobian(hp.h, hp.c, q, p.eps);
            CHECK(std::abs(o.trace) < 1e-6);
            CHECK(o.det > 0.0);
            CHECK(hp.omega == doctest::Approx(std::sqrt(o.det)).epsilon(1e-4));
            CHECK(hp.dtrace_dparam != 0.0);
            found |= std::abs(hp.param - expected) < 1e-4;
        }
        CHECK(found);
    }
}

TEST_CASE("delta = 0 Jacobian: analytic against finite differences")
{
    const ScaledParams p;
    for (Convention conv : {Convention::Printed, Convention::Derived})
        for (double C : {0.9, 1.2, 1.48, 2.0})
            for (double nu : {0.005, 0.02, 0.1}) {
                const LimitJacobianCheck j = limit_jacobian_check(p, conv, C, nu);
                CHECK(j.trace_fd == doctest::Approx(j.trace_analytic).epsilon(1e-5));
                CHECK(j.det_fd == doctest::Approx(j.det_analytic).epsilon(1e-5));
            }
}

TEST_CASE("Hopf-value formula arithmetic")
{
    const ScaledParams p;
    const double C = 1.48, Kh4 = std::pow(p.K_h_hat, 4);
    const double A = p.K_hat * p.gamma * p.gamma * p.V_s_hat / (p.K_s * p.K_s);
    const double expected = (Kh4 + std::pow(C, 4)) * C / (2.0 * A * Kh4 * (C * C - 2.0 * p.K_hat * std::pow(p.gamma * p.c_t, 2)));
    const HopfFormula f = hopf_value_formula(p, Convention::Printed, C);
    CHECK(f.nu_formula == doctest::Approx(expected).epsilon(1e-12));
    CHECK(f.nu_formula == doctest::Approx(0.07298).epsilon(1e-4));
    CHECK(f.DC_h_inf == doctest::Approx(4.0 * Kh4 * std::pow(C, 3) / std::pow(Kh4 + std::pow(C, 4), 2)));
    CHECK(f.DC_h_inf == doctest::Approx(0.20).epsilon(0.03));
    CHECK(f.condition_holds);
    const HopfFormula d = hopf_value_formula(p, Convention::Derived);
    CHECK(d.C_star == doctest::Approx(1.4158).epsilon(1e-4));
}

TEST_CASE("numeric Hopf in nu_max")
{
    const ScaledParams p;
    const NumericHopf nh = numeric_hopf_nu(p, p.eps);
    const double delta = std::sqrt(p.eps);
    CHECK(nh.tau_hat_ah == doctest::Approx(delta * nh.nu_ah));
    CHECK(nh.tau_tilde_ah == doctest::Approx(nh.tau_hat_ah / (p.eps * p.eps)));
    // the same point on the full system: trace of the unscaled Jacobian vanishes there
    ScaledParams q = p;
    q.tau_hat = nh.tau_hat_ah;
    const auto eq = equilibria(q, p.eps);
    REQUIRE(eq.size() == 1);
    CHECK(eq[0].c / delta == doctest::Approx(nh.C).epsilon(1e-8));
    const JacobianInfo o = oracle_jacobian(eq[0].h, eq[0].c, q, p.eps);
    CHECK(std::abs(o.trace) < 1e-6 * std::sqrt(o.det));
    q.tau_hat = 1.01 * nh.tau_hat_ah;
    const JacobianInfo above = oracle_jacobian(eq[0].h, eq[0].c, q, p.eps);
    CHECK(above.trace > 0.0);
    // the nu_max branch passes through the same point
    const Branch br = equilibrium_branch(p, Axis::NuMax, 0.005, 0.03, 50, p.eps);
    const auto hopfs = detect_hopf(br, p);
    REQUIRE(hopfs.size() == 1);
    CHECK(hopfs[0].param == doctest::Approx(nh.nu_ah).epsilon(1e-6));
}

TEST_CASE("cusp map cells match the brute-force sign scan")
{
    const ScaledParams p;
    for (Convention conv : {Convention::Printed, Convention::Derived}) {
        const CuspMap m = cusp_scan(p, conv, 0.005, 0.06, 23, 0.3, 1.5, 41);
        std::mt19937_64 rng(8);
        std::uniform_int_distribution<int> ip(0, 22), ic(0, 40);
        for (int k = 0; k < 100; ++k) {
            const int i = ip(rng), j = ic(rng);
            ScaledParams q = p;
            q.p = m.p[i];
            q.c_t = m.ct[j];
            const gspt::Cubic cub = gspt::equilibrium_cubic(q, conv);
            const double coef[4] = {cub.a0, cub.a1, cub.a2, cub.a3};
            CHECK(kernels::cubic_sign_changes(kernels::Isa::Scalar, coef, 0.0, 100.0, 1000000) == m.count[i][j]);
        }
    }
}

TEST_CASE("cusp vertex is stable under grid refinement")
{
    const ScaledParams p;
    const CuspMap a = cusp_scan(p, Convention::Derived, 0.0, 0.06, 61, 0.3, 1.5, 121);
    const CuspMap b = cusp_scan(p, Convention::Derived, 0.0, 0.06, 121, 0.3, 1.5, 241);
    REQUIRE(a.has_vertex);
    REQUIRE(b.has_vertex);
    CHECK(std::abs(a.vertex_p - b.vertex_p) <= 0.06 / 60 + 1e-12);
    CHECK(std::abs(a.vertex_ct - b.vertex_ct) <= 0.05);
    CHECK(b.vertex_p == doctest::Approx(0.02).epsilon(0.2));
    CHECK(b.vertex_ct == doctest::Approx(0.8).epsilon(0.2));
    // the wedge opens toward larger p and smaller c_t
    for (std::size_t k = 1; k < b.lower_fold.size(); ++k) CHECK(b.lower_fold[k][0] >= b.lower_fold[k - 1][0]);
    // single equilibrium above the wedge at p = 0.05
    const CuspMap c = cusp_scan(p, Convention::Derived, 0.05, 0.05, 2, 0.5, 1.5, 101);
    for (int n : c.count[0]) CHECK(n == 1);
}

TEST_CASE("oscillation statistics reproduce the cycle period")
{
    const ScaledParams p;
    const double unit = p.tau_hat / (p.eps * p.eps);
    const SimulationStats s = oscillation_stats(p, p.eps, 4.0 * unit, 4.0 * unit);
    CHECK(s.period == doctest::Approx(15834.8).epsilon(0.01));
    CHECK(s.amplitude > 0.3);
}

TEST_CASE("axis names")
{
    CHECK(axis_from_string("c_t") == Axis::CT);
    CHECK(axis_from_string("nu_max") == Axis::NuMax);
    CHECK(std::string(to_string(Axis::P)) == "p");
    CHECK_THROWS(axis_from_string("x"));
    const ScaledParams p;
    CHECK(with_param(p, Axis::NuMax, 0.02, p.eps).tau_hat == doctest::Approx(0.02 * std::sqrt(p.eps)));
}
