#include "calcium/gspt.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace calcium;
using namespace calcium::gspt;

TEST_CASE("rhs_full = N f + eps G")
{
    const ScaledParams p;
    const Decomposition d = decompose(p);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uh(0.0, 1.0), uc(0.0, 1.0), ue(1e-4, 1e-2);
    for (int k = 0; k < 200; ++k) {
        const State z{uh(rng), uc(rng)};
        const double eps = ue(rng);
        const Rate full = rhs_full(z, p, eps);
        const Rate N = d.N(z), G = d.G(z, eps);
        const double f = d.f(z);
        CHECK(f == doctest::Approx(std::pow(z.c, 4) * z.h));
        CHECK(N.dh * f + eps * G.dh == doctest::Approx(full.dh).epsilon(1e-12).scale(1e-12));
        CHECK(N.dc * f + eps * G.dc == doctest::Approx(full.dc).epsilon(1e-12).scale(1e-12));
        CHECK(d.g(z).dh == doctest::Approx(N.dh * f));
    }
}

TEST_CASE("critical manifold of regime two is the zero set of the layer field")
{
    const ScaledParams p;
    for (Convention conv : {Convention::Printed, Convention::Derived}) {
        for (double C = 0.2; C < 3.0; C += 0.05) {
            const double z = zeta(C, p, conv);
            CHECK(std::abs(layer_field_R2(z, C, p, conv)) < 1e-10 * (1.0 + 324.0 * C * C));
            const double d = 1e-6;
            const double fd = (zeta(C + d, p, conv) - zeta(C - d, p, conv)) / (2 * d);
            CHECK(zeta_prime(C, p, conv) == doctest::Approx(fd).epsilon(1e-6).scale(1e-6));
        }
    }
}

TEST_CASE("nontrivial eigenvalue is the layer-field derivative across the manifold")
{
    const ScaledParams p;
    for (Convention conv : {Convention::Printed, Convention::Derived}) {
        for (double C : {0.3, 0.5, 0.9, 1.4, 2.5}) {
            const double z = zeta(C, p, conv);
            const double d = 1e-6;
            const double fd = (layer_field_R2(z, C + d, p, conv) - layer_field_R2(z, C - d, p, conv)) / (2 * d);
            const Branch b = classify_R2(C, p);
            const Eigenvalue ev = nontrivial_eigenvalue({z, C, b}, p, conv);
            CHECK(ev.value == doctest::Approx(fd).epsilon(1e-6));
            CHECK((b == Branch::Sa) == (ev.value < 0.0));
        }
    }
    // S_c: -c^4 / tau_hat from the eps = 0 field
    for (double c : {0.1, 0.4, 0.8}) {
        const double d = 1e-7;
        const double fd = (rhs_full({0.0 + d, c}, p, 0.0).dh - rhs_full({0.0 - d, c}, p, 0.0).dh) / (2 * d);
        CHECK(nontrivial_eigenvalue({0.0, c, Branch::Sc}, p, Convention::Printed).value ==
              doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("fold point")
{
    const ScaledParams p;
    const double CF = p.gamma * p.c_t * std::sqrt(2.0 * p.K_hat);
    for (Convention conv : {Convention::Printed, Convention::Derived}) {
        const FoldPoint f = fold_point(p, conv);
        CHECK(f.C_F == doctest::Approx(CF).epsilon(1e-12));
        CHECK(std::abs(zeta_prime(f.C_F, p, conv)) < 1e-9);
        CHECK(f.h_F == doctest::Approx(zeta(f.C_F, p, conv)));
        CHECK(nontrivial_eigenvalue({f.h_F, f.C_F, Branch::Sa}, p, conv).degenerate);
        CHECK_THROWS_AS(reduced_field({f.h_F, f.C_F, Branch::Sa}, p, conv), std::domain_error);
    }
    CHECK(fold_point(p, Convention::Printed).h_F == doctest::Approx(0.05236).epsilon(1e-4));
    CHECK(fold_point(p, Convention::Derived).h_F == doctest::Approx(0.22777).epsilon(1e-4));
}

TEST_CASE("cubic roots are the equilibria of the limit system")
{
    const ScaledParams p;
    for (Convention conv : {Convention::Printed, Convention::Derived}) {
        const CubicRoots r = equilibria_cubic(p, conv);
        REQUIRE(r.count() == 1);
        const double C = std::sqrt(r.m[0]);
        CHECK(zeta(C, p, conv) == doctest::Approx(h_inf_C(C, p)).epsilon(1e-9));
    }
    CHECK(std::sqrt(equilibria_cubic(p, Convention::Derived).m[0]) == doctest::Approx(1.4158).epsilon(1e-4));
    const CubicRoots three = solve_cubic_positive({1.0, -6.0, 11.0, -6.0});
    REQUIRE(three.count() == 3);
    CHECK(three.m[0] == doctest::Approx(1.0));
    CHECK(three.m[1] == doctest::Approx(2.0));
    CHECK(three.m[2] == doctest::Approx(3.0));
    CHECK(solve_cubic_positive({1.0, 1.0, 1.0, 1.0}).count() == 0);
}

TEST_CASE("equilibrium and fold inequality chain at C* = 1.48")
{
    const ScaledParams p;
    const FoldSeparationReport a = check_fold_separation(p, Convention::Printed, 1.48);
    CHECK(a.lhs == doctest::Approx(17.01).epsilon(5e-4));
    CHECK(a.rhs == doctest::Approx(0.391).epsilon(5e-4));
    CHECK(a.satisfied);
}

TEST_CASE("layer heteroclinic follows dc/dh = -tau_hat J0")
{
    const ScaledParams p;
    const double hF = fold_point(p, Convention::Derived).h_F;
    const Heteroclinic het = layer_heteroclinic(p, hF);
    REQUIRE(het.h.size() > 10);
    CHECK(het.h.front() == doctest::Approx(hF));
    CHECK(std::abs(het.h.back()) < 1e-12);
    CHECK(het.c_d == doctest::Approx(het.c.back()));
    for (std::size_t i = 1; i + 1 < het.h.size(); ++i) {
        CHECK(het.h[i] < het.h[i - 1]);
        CHECK(het.c[i] > het.c[i - 1]);
    }
    // explicit midpoint integration of the same equation as an oracle
    double h = hF, c = 0.0;
    const int n = 200000;
    const double dh = -hF / n;
    auto rate = [&](double hh, double cc) { return -p.tau_hat * j_ipr0(hh, cc, p); };
    for (int i = 0; i < n; ++i) {
        const double k1 = rate(h, c);
        const double k2 = rate(h + 0.5 * dh, c + 0.5 * dh * k1);
        c += dh * k2;
        h += dh;
    }
    CHECK(het.c_d == doctest::Approx(c).epsilon(1e-6));
}
