#include "calcium/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace calcium;

namespace {

// Closed-cell field written directly from the flux definitions.
Rate reference_field(double h, double c, const ScaledParams& p, double eps)
{
    const double Kh = std::sqrt(eps) * p.K_h_hat, Ktau = std::sqrt(eps);
    const double tau_max = p.tau_hat / (eps * eps);
    const double tau_h = tau_max * std::pow(Ktau, 4) / (std::pow(Ktau, 4) + std::pow(c, 4));
    const double h_inf = std::pow(Kh, 4) / (std::pow(Kh, 4) + std::pow(c, 4));
    const double m_a = std::pow(c, 4) / (std::pow(p.K_c, 4) + std::pow(c, 4));
    const double phi_p = p.p * p.p / (p.K_p * p.K_p + p.p * p.p);
    const double phi_pd = p.K_p * p.K_p / (p.K_p * p.K_p + p.p * p.p);
    const double a = phi_pd * (1.0 - m_a * h_inf);
    const double b = phi_p * m_a * h;
    const double PO = b / (b + p.k_beta * (b + a));
    const double J_ipr = p.k_IPR * PO * (p.gamma * p.c_t - (1.0 + p.gamma) * c);
    const double J_p = p.V_s_hat * c * c / (p.K_s * p.K_s + c * c);
    const double J_m = p.K_hat * p.gamma * p.gamma * p.V_s_hat * (p.c_t - c) * (p.c_t - c) / (p.K_s * p.K_s + c * c);
    return {(h_inf - h) / tau_h, J_ipr - eps * J_p + eps * eps * J_m};
}

}  // namespace

TEST_CASE("scaled field matches the flux definitions")
{
    const ScaledParams p;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uh(0.01, 1.0), uc(0.01, 0.9), ue(1e-4, 1e-2);
    for (int k = 0; k < 200; ++k) {
        const double h = uh(rng), c = uc(rng), eps = ue(rng);
        const Rate a = rhs_full({h, c}, p, eps);
        const Rate b = reference_field(h, c, p, eps);
        CHECK(a.dh == doctest::Approx(b.dh).epsilon(1e-12));
        CHECK(a.dc == doctest::Approx(b.dc).epsilon(1e-12));
    }
}

TEST_CASE("dimensionless model equals the scaled model")
{
    const DimensionlessParams t;
    const ScaledParams s = hat_scale(t);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uh(0.01, 1.0), uc(0.01, 0.9);
    for (int k = 0; k < 100; ++k) {
        const State z{uh(rng), uc(rng)};
        const Rate a = rhs_model(z, t);
        const Rate b = rhs_full(z, s, s.eps);
        CHECK(b.dh == doctest::Approx(a.dh).epsilon(1e-11));
        CHECK(b.dc == doctest::Approx(a.dc).epsilon(1e-11));
    }
}

TEST_CASE("gating functions at the scaled tier")
{
    const ScaledParams p;
    const double eps = p.eps;
    const Gating g = gating_functions(0.3, p, eps);
    CHECK(g.h_inf == doctest::Approx(std::pow(eps * p.K_h_hat * p.K_h_hat, 2) /
                                     (std::pow(eps * p.K_h_hat * p.K_h_hat, 2) + std::pow(0.3, 4))));
    CHECK(g.tau_h == doctest::Approx(p.tau_hat / (std::pow(0.3, 4) + eps * eps)));
    CHECK(g.phi_p + g.phi_pdown == doctest::Approx(1.0));
    CHECK(open_probability(0.0, 0.3, p, eps) == 0.0);
    const double po = open_probability(0.5, 0.3, p, eps);
    CHECK(po > 0.0);
    CHECK(po < 1.0 / (1.0 + p.k_beta));
}

TEST_CASE("expansion residual is O(eps^4): Richardson factor 16")
{
    const ScaledParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uh(0.05, 0.9), uc(0.2, 0.9);
    for (int k = 0; k < 20; ++k) {
        const State z{uh(rng), uc(rng)};
        const Expansion e = rhs_expansion(z, p);
        auto residual = [&](double eps) {
            const Rate r = rhs_full(z, p, eps);
            const double dh = r.dh - (e.g.dh + eps * e.W1.dh + eps * eps * e.W2.dh);
            const double dc = r.dc - (e.g.dc + eps * e.W1.dc + eps * eps * e.W2.dc);
            return std::hypot(dh, dc);
        };
        double eps = 0.02;
        for (int j = 0; j < 3; ++j, eps /= 2) {
            const double ratio = residual(eps) / residual(eps / 2);
            CHECK(ratio == doctest::Approx(16.0).epsilon(0.2));
        }
    }
}

TEST_CASE("regime-two field is the rescaled scaled field")
{
    const ScaledParams p;
    const double delta = std::sqrt(p.eps);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uh(0.01, 0.9), uC(0.2, 3.0);
    for (int k = 0; k < 100; ++k) {
        const double h = uh(rng), C = uC(rng);
        const Rate full = rhs_full({h, delta * C}, p, p.eps);
        const Rate r2 = rhs_regime2({h, C, delta}, p);
        // c = delta C and t1 = delta^3 t
        CHECK(r2.dh == doctest::Approx(full.dh / std::pow(delta, 3)).epsilon(1e-11));
        CHECK(r2.dc == doctest::Approx(full.dc / std::pow(delta, 4)).epsilon(1e-11));
    }
}

TEST_CASE("Hopf-scaled regime-two field tends to its delta = 0 limit linearly")
{
    ScaledParams p;
    const double nu = 0.02, h = 0.1, C = 1.4;
    auto gap = [&](double delta) {
        const Rate a = rhs_regime2_hopf({h, C, delta}, nu, p);
        const Rate b = rhs_regime2_hopf_limit(h, C, nu, p, Convention::Derived);
        return std::hypot(a.dh - b.dh, a.dc - b.dc);
    };
    const double r = gap(1e-3) / gap(5e-4);
    CHECK(r == doctest::Approx(2.0).epsilon(0.05));
    CHECK(gap(1e-5) / gap(1e-3) == doctest::Approx(1e-2).epsilon(0.05));
}

TEST_CASE("h_inf in the rescaled variable")
{
    const ScaledParams p;
    CHECK(h_inf_C(0.0, p) == doctest::Approx(1.0));
    CHECK(h_inf_C(p.K_h_hat, p) == doctest::Approx(0.5));
}
