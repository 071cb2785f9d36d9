// One line per acceptance criterion; exit status 1 if any fails.
#include "calcium/bifurcation.hpp"
#include "calcium/blowup.hpp"
#include "calcium/cycles.hpp"
#include "calcium/gspt.hpp"
#include "calcium/kernels.hpp"
#include "calcium/model.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace calcium;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%-4s %s  %s  [%s] (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), s);
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

bool within(double x, double target, double rel) { return std::abs(x - target) <= rel * std::abs(target); }

}  // namespace

int main()
{
    const ScaledParams p;

    criterion("A1", "relaxation cycle, period 2e4 +-25%, <= 2 min", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const cycles::LimitCycle cyc = cycles::find_limit_cycle(p, p.eps);
        const double s = seconds_since(t0);
        std::ostringstream d;
        d << "period " << cyc.period << ", floquet " << cyc.floquet_exponent << ", closure " << cyc.closure_gap
          << ", " << s << " s";
        return Outcome{within(cyc.period, 2e4, 0.25) && cyc.floquet_exponent < 0.0 && cyc.closure_gap < 1e-6 &&
                           s <= 120.0,
                       d.str()};
    });

    criterion("A2", "order estimate 5.44e4 +-1%, simulated/estimate in [0.2, 1]", [&] {
        const cycles::PeriodEstimate pe = cycles::period_estimate(p, Convention::Printed);
        const cycles::PeriodEstimate de = cycles::period_estimate(p, Convention::Derived);
        const double T = cycles::find_limit_cycle(p, p.eps).period;
        const double ratio = T / pe.order_estimate;
        std::ostringstream d;
        d << "eps^-2 tau_hat " << pe.order_estimate << ", T/order " << ratio << "; T/T_est derived v "
          << T / de.T_est << " (v " << de.v << "), printed v " << T / pe.T_est << " (v " << pe.v << ")";
        return Outcome{within(pe.order_estimate, 5.44e4, 0.01) && ratio >= 0.2 && ratio <= 1.0, d.str()};
    });

    criterion("A3", "period linear in tau_hat over a factor 8: R^2 > 0.99, intercept < 10%", [&] {
        const auto rows = cycles::period_scan(p, {0.34, 0.68, 1.36, 2.72}, Convention::Printed);
        std::vector<double> x, y;
        for (const auto& r : rows) {
            x.push_back(r.tau_hat);
            y.push_back(r.period);
        }
        const cycles::LinearFit f = cycles::linear_fit(x, y);
        const double frac = std::abs(f.intercept) / *std::min_element(y.begin(), y.end());
        std::ostringstream d;
        d << "R^2 " << f.r2 << ", slope " << f.slope << ", intercept " << f.intercept << " = " << frac
          << " of smallest period";
        return Outcome{rows.size() == 4 && f.r2 > 0.99 && frac < 0.1, d.str()};
    });

    criterion("A4", "C_F within 0.01 of 0.68; chain 17.01 and 0.391 to 3 s.f.", [&] {
        const gspt::FoldPoint f = gspt::fold_point(p, Convention::Printed);
        const gspt::FoldSeparationReport a = gspt::check_fold_separation(p, Convention::Printed, 1.48);
        auto sf3 = [](double v, double ref) {
            const double scale = std::pow(10.0, std::floor(std::log10(std::abs(ref))) - 2);
            return std::round(v / scale) == std::round(ref / scale);
        };
        std::ostringstream d;
        d << "C_F " << f.C_F << ", lhs " << a.lhs << ", rhs " << a.rhs;
        return Outcome{std::abs(f.C_F - 0.68) <= 0.01 && sf3(a.lhs, 17.01) && sf3(a.rhs, 0.391) && a.satisfied,
                       d.str()};
    });

    criterion("A5", "Hopf in c_t at 0.96 (p = 0.015) and 0.63 (p = 0.025), +-0.02, <= 5 min each", [&] {
        bool ok = true;
        std::ostringstream d;
        for (auto [pv, target] : {std::pair{0.015, 0.96}, std::pair{0.025, 0.63}}) {
            const auto t0 = std::chrono::steady_clock::now();
            ScaledParams q = p;
            q.p = pv;
            const bif::Branch br = bif::equilibrium_branch(q, bif::Axis::CT, 0.3, 1.5, 100, q.eps);
            const auto hopfs = bif::detect_hopf(br, q);
            const double s = seconds_since(t0);
            bool found = false;
            for (const auto& hp : hopfs) {
                d << "p " << pv << ": c_t " << hp.param << " (trace " << hp.trace << ", det " << hp.det << "); ";
                found |= std::abs(hp.param - target) <= 0.02 && std::abs(hp.trace) < 1e-8 && hp.det > 0.0;
            }
            ok &= found && s <= 300.0;
        }
        return Outcome{ok, d.str()};
    });

    criterion("A6", "cusp vertex within 20% of (0.02, 0.8); cells match brute-force sign scan", [&] {
        const Convention conv = Convention::Derived;
        const bif::CuspMap m = bif::cusp_scan(p, conv, 0.0, 0.06, 121, 0.3, 1.5, 241);
        std::mt19937_64 rng(20240917);
        std::uniform_int_distribution<int> ip(0, 120), ic(0, 240);
        int mismatch = 0;
        for (int k = 0; k < 100; ++k) {
            const int i = ip(rng), j = ic(rng);
            ScaledParams q = p;
            q.p = m.p[i];
            q.c_t = m.ct[j];
            const gspt::Cubic cub = gspt::equilibrium_cubic(q, conv);
            const double coef[4] = {cub.a0, cub.a1, cub.a2, cub.a3};
            if (kernels::cubic_sign_changes(coef, 0.0, 100.0, 1000000) != m.count[i][j]) ++mismatch;
        }
        const bif::CuspMap pm = bif::cusp_scan(p, Convention::Printed, 0.0, 0.06, 121, 0.3, 1.5, 241);
        std::ostringstream d;
        d << "derived vertex (" << m.vertex_p << ", " << m.vertex_ct << "), oracle mismatches " << mismatch
          << "; printed vertex (" << pm.vertex_p << ", " << pm.vertex_ct << ")";
        return Outcome{m.has_vertex && within(m.vertex_p, 0.02, 0.2) && within(m.vertex_ct, 0.8, 0.2) && mismatch == 0,
                       d.str()};
    });

    const std::vector<double> sweep{1e-3, 2.5e-3, 5e-3, 1e-2};
    cycles::ConvergenceReport conv_report;
    bool have_sweep = false;
    auto run_sweep = [&]() -> const cycles::ConvergenceReport& {
        if (!have_sweep) {
            conv_report = cycles::eps_convergence_sweep(p, sweep, Convention::Derived);
            have_sweep = true;
        }
        return conv_report;
    };

    criterion("A7", "Hausdorff exponent in [0.2, 0.55] over eps in {1e-3, 2.5e-3, 5e-3, 1e-2}, monotone", [&] {
        const auto& r = run_sweep();
        std::ostringstream d;
        for (const auto& e : r.entries)
            d << "eps " << e.eps << ": " << (e.ok ? fmt("%.4g", e.hausdorff) : "no cycle") << "; ";
        d << "exponent " << r.slope << ", monotone " << r.monotone << ", converged " << r.survivors << "/4";
        return Outcome{r.survivors == 4 && r.slope >= 0.2 && r.slope <= 0.55 && r.monotone, d.str()};
    });

    criterion("A8", "Floquet exponent < 0 for every eps, max/min of Lambda eps^2 < 5", [&] {
        const auto& r = run_sweep();
        bool neg = r.survivors == 4;
        std::ostringstream d;
        for (const auto& e : r.entries) {
            d << "eps " << e.eps << ": " << (e.ok ? fmt("%.4g", e.floquet) : "no cycle") << "; ";
            if (e.ok && !(e.floquet < 0.0)) neg = false;
        }
        d << "max/min |Lambda| eps^2 " << r.floquet_eps2_ratio;
        return Outcome{neg && r.floquet_eps2_ratio < 5.0, d.str()};
    });

    criterion("A9", "blow-up suite: round trips, pushforwards, eigenvalues, transition laws, <= 1 min", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const blowup::VerifyReport r = blowup::verify(p);
        // the transition law for the spherical passage as stated: r2_out = beta2 (s2/beta2)^2
        const blowup::Pi41Result t = blowup::transition_probe_pi41(0.0, 0.01, 0.1, p);
        const double quad_err = std::abs(t.r2_out - t.r2_printed) / t.r2_printed;
        const double s = seconds_since(t0);
        int failed = 0;
        std::ostringstream d;
        for (const auto& c : r.checks)
            if (c.gated && !c.pass) {
                ++failed;
                d << "failed: " << c.name << "; ";
            }
        d << r.checks.size() << " checks, " << failed << " gated failures; quadratic r2 law rel. error " << quad_err
          << " (3/2-power law " << t.rel_error << "); " << s << " s";
        return Outcome{r.pass() && quad_err < 1e-8 && s <= 60.0, d.str()};
    });

    criterion("A10", "Hopf-value formula arithmetic at C* = 1.48; numeric AH located and reported", [&] {
        const bif::HopfFormula f = bif::hopf_value_formula(p, Convention::Printed, 1.48);
        const double C = 1.48, Kh4 = std::pow(p.K_h_hat, 4);
        const double A = derived_constants(p).A_SERCA;
        const double ref = (Kh4 + std::pow(C, 4)) * C / (2.0 * A * Kh4 * (C * C - 2.0 * p.K_hat * std::pow(p.gamma * p.c_t, 2)));
        const bif::NumericHopf nh = bif::numeric_hopf_nu(p, p.eps);
        std::ostringstream d;
        d << "formula " << f.nu_formula << " (recomputed " << ref << ", reference 5.42e-2); numeric nu_ah "
          << nh.nu_ah << " (reference 5.83e-2, ratio " << 5.83e-2 / nh.nu_ah << "), tau_tilde_ah " << nh.tau_tilde_ah
          << " (reference 112.5), residual trace " << nh.trace_at;
        const bool arithmetic = std::abs(f.nu_formula - ref) <= 1e-12 * ref;
        const bool located = std::abs(nh.trace_at) < 1e-6 * std::sqrt(nh.det) && nh.det > 0.0;
        return Outcome{arithmetic && located, d.str()};
    });

    criterion("A11", "expansion residual O(eps^4): factor 16 +-20% per halving", [&] {
        std::mt19937_64 rng(4242);
        std::uniform_real_distribution<double> uh(0.05, 0.9), uc(0.2, 0.9);
        double lo = 1e9, hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            const State z{uh(rng), uc(rng)};
            const Expansion e = rhs_expansion(z, p);
            auto res = [&](double eps) {
                const Rate r = rhs_full(z, p, eps);
                return std::hypot(r.dh - (e.g.dh + eps * e.W1.dh + eps * eps * e.W2.dh),
                                  r.dc - (e.g.dc + eps * e.W1.dc + eps * eps * e.W2.dc));
            };
            double eps = 0.02;
            for (int j = 0; j < 3; ++j, eps /= 2) {
                const double ratio = res(eps) / res(eps / 2);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        std::ostringstream d;
        d << "ratios in [" << lo << ", " << hi << "] over 20 states x 3 halvings";
        return Outcome{lo >= 16.0 * 0.8 && hi <= 16.0 * 1.2, d.str()};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
