#include "calcium/params.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace calcium {

const char* to_string(Convention c) { return c == Convention::Printed ? "printed" : "derived"; }

Convention convention_from_string(const std::string& s)
{
    if (s == "printed") return Convention::Printed;
    if (s == "derived") return Convention::Derived;
    throw std::invalid_argument("unknown convention '" + s + "' (expected printed|derived)");
}

const char* to_string(Tier t)
{
    switch (t) {
    case Tier::Dimensional: return "dimensional";
    case Tier::Dimensionless: return "dimensionless";
    case Tier::Scaled: return "scaled";
    }
    return "?";
}

namespace {

void require_positive(const std::map<std::string, double>& m, const char* tier)
{
    for (const auto& [k, v] : m)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(tier) + " parameter " + k + " must be positive and finite");
}

std::string fnv1a(const std::map<std::string, double>& m, const char* tier)
{
    std::string text = tier;
    char buf[64];
    for (const auto& [k, v] : m) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        text += ";" + k + "=" + buf;
    }
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

void DimensionalParams::validate() const
{
    require_positive(to_map(*this), "dimensional");
    if (gamma <= 1.0) throw std::invalid_argument("dimensional parameter gamma must exceed 1");
}

void DimensionlessParams::validate() const
{
    require_positive(to_map(*this), "dimensionless");
    if (gamma <= 1.0) throw std::invalid_argument("dimensionless parameter gamma must exceed 1");
}

void ScaledParams::validate() const
{
    require_positive(to_map(*this), "scaled");
    if (gamma <= 1.0) throw std::invalid_argument("scaled parameter gamma must exceed 1");
}

DerivedConstants derived_constants(const ScaledParams& sp)
{
    DerivedConstants d;
    const double Kc4 = std::pow(sp.K_c, 4);
    d.A_IPR = sp.k_IPR * sp.p * sp.p / (sp.k_beta * Kc4 * sp.K_p * sp.K_p);
    d.A_SERCA = sp.K_hat * sp.gamma * sp.gamma * sp.V_s_hat / (sp.K_s * sp.K_s);
    d.A_SERCA_alt = sp.V_s_hat / (sp.K_s * sp.K_s);
    return d;
}

DimensionlessParams nondimensionalize(const DimensionalParams& dp)
{
    return nondimensionalize(dp, dp.c_t, 1.0 / (dp.gamma * dp.k_IPR));
}

DimensionlessParams nondimensionalize(const DimensionalParams& dp, double Q_c, double T)
{
    DimensionlessParams tp;
    tp.k_beta = dp.k_beta;
    tp.K_c = dp.K_c / Q_c;
    tp.K_h = dp.K_h / Q_c;
    tp.K_p = dp.K_p / Q_c;
    tp.K_tau = dp.K_tau / Q_c;
    tp.K_s = dp.K_s / Q_c;
    tp.k_IPR = T * dp.k_IPR;
    tp.tau_max = dp.tau_max / T;
    tp.c_t = dp.c_t / Q_c;
    tp.p = dp.p / Q_c;
    tp.V_s = T / Q_c * dp.V_s;
    tp.K = dp.K;
    tp.gamma = dp.gamma;
    tp.Q_c = Q_c;
    tp.T = T;
    return tp;
}

DimensionalParams redimensionalize(const DimensionlessParams& tp)
{
    const double Q = tp.Q_c, T = tp.T;
    DimensionalParams dp;
    dp.k_beta = tp.k_beta;
    dp.K_c = tp.K_c * Q;
    dp.K_h = tp.K_h * Q;
    dp.K_p = tp.K_p * Q;
    dp.K_tau = tp.K_tau * Q;
    dp.K_s = tp.K_s * Q;
    dp.k_IPR = tp.k_IPR / T;
    dp.tau_max = tp.tau_max * T;
    dp.c_t = tp.c_t * Q;
    dp.p = tp.p * Q;
    dp.V_s = tp.V_s * Q / T;
    dp.K = tp.K;
    dp.gamma = tp.gamma;
    return dp;
}

ScaledParams hat_scale(const DimensionlessParams& tp)
{
    const double Kt = tp.K_tau;
    const double Kt2 = Kt * Kt;
    ScaledParams sp;
    sp.k_beta = tp.k_beta;
    sp.K_c = tp.K_c;
    sp.K_s = tp.K_s;
    sp.K_p = tp.K_p;
    sp.k_IPR = tp.k_IPR;
    sp.p = tp.p;
    sp.c_t = tp.c_t;
    sp.gamma = tp.gamma;
    sp.eps = Kt2;
    sp.tau_hat = Kt2 * Kt2 * tp.tau_max;
    sp.K_h_hat = tp.K_h / Kt;
    sp.V_s_hat = tp.V_s / Kt2;
    sp.K_hat = tp.K / Kt2;
    return sp;
}

DimensionlessParams unhat(const ScaledParams& sp, double Q_c, double T)
{
    const double Kt = std::sqrt(sp.eps);
    const double Kt2 = sp.eps;
    DimensionlessParams tp;
    tp.k_beta = sp.k_beta;
    tp.K_c = sp.K_c;
    tp.K_s = sp.K_s;
    tp.K_p = sp.K_p;
    tp.k_IPR = sp.k_IPR;
    tp.p = sp.p;
    tp.c_t = sp.c_t;
    tp.gamma = sp.gamma;
    tp.K_tau = Kt;
    tp.tau_max = sp.tau_hat / (Kt2 * Kt2);
    tp.K_h = sp.K_h_hat * Kt;
    tp.V_s = sp.V_s_hat * Kt2;
    tp.K = sp.K_hat * Kt2;
    tp.Q_c = Q_c;
    tp.T = T;
    return tp;
}

std::map<std::string, double> to_map(const DimensionalParams& p)
{
    return {{"k_beta", p.k_beta}, {"K_c", p.K_c},     {"K_h", p.K_h},         {"K_p", p.K_p},
            {"K_tau", p.K_tau},   {"K_s", p.K_s},     {"k_IPR", p.k_IPR},     {"tau_max", p.tau_max},
            {"c_t", p.c_t},       {"p", p.p},         {"V_s", p.V_s},         {"K", p.K},
            {"gamma", p.gamma}};
}

std::map<std::string, double> to_map(const DimensionlessParams& p)
{
    auto m = to_map(DimensionalParams{p.k_beta, p.K_c, p.K_h, p.K_p, p.K_tau, p.K_s, p.k_IPR, p.tau_max,
                                      p.c_t, p.p, p.V_s, p.K, p.gamma});
    m["Q_c"] = p.Q_c;
    m["T"] = p.T;
    return m;
}

std::map<std::string, double> to_map(const ScaledParams& p)
{
    return {{"k_beta", p.k_beta}, {"K_c", p.K_c},         {"K_s", p.K_s},         {"K_p", p.K_p},
            {"k_IPR", p.k_IPR},   {"p", p.p},             {"c_t", p.c_t},         {"gamma", p.gamma},
            {"tau_hat", p.tau_hat}, {"K_h_hat", p.K_h_hat}, {"V_s_hat", p.V_s_hat}, {"K_hat", p.K_hat},
            {"eps", p.eps}};
}

std::string fingerprint(const ScaledParams& p) { return fnv1a(to_map(p), "scaled"); }
std::string fingerprint(const DimensionalParams& p) { return fnv1a(to_map(p), "dimensional"); }
std::string fingerprint(const DimensionlessParams& p) { return fnv1a(to_map(p), "dimensionless"); }

}  // namespace calcium
