#pragma once

#include <string>
#include <cstdint>
#include <map>

namespace calcium {

enum class Convention { Printed, Derived };

const char* to_string(Convention c);
Convention convention_from_string(const std::string& s);

enum class Tier { Dimensional, Dimensionless, Scaled };

const char* to_string(Tier t);

// Concentrations in uM, rates in 1/s, times in s.
struct DimensionalParams {
    double k_beta = 0.4;
    double K_c = 0.2;
    double K_h = 0.08;
    double K_p = 0.2;
    double K_tau = 0.1;
    double K_s = 0.2;
    double k_IPR = 10.0;
    double tau_max = 1000.0;
    double c_t = 2.0;
    double p = 0.05;
    double V_s = 0.9;
    double K = 0.00001957;
    double gamma = 5.5;

    void validate() const;
};

struct DimensionlessParams {
    double k_beta = 0.4;
    double K_c = 0.1;
    double K_h = 0.04;
    double K_p = 0.1;
    double K_tau = 0.05;
    double K_s = 0.1;
    double k_IPR = 0.18;
    double tau_max = 55000.0;
    double c_t = 1.0;
    double p = 0.025;
    double V_s = 0.0081;
    double K = 0.000019;
    double gamma = 5.5;
    double Q_c = 2.0;
    double T = 1.0 / 55.0;

    void validate() const;
};

struct ScaledParams {
    double k_beta = 0.4;
    double K_c = 0.1;
    double K_s = 0.1;
    double K_p = 0.1;
    double k_IPR = 0.18;
    double p = 0.025;
    double c_t = 1.0;
    double gamma = 5.5;
    double tau_hat = 0.34;
    double K_h_hat = 0.8;
    double V_s_hat = 3.24;
    double K_hat = 0.0076;
    double eps = 0.0025;

    void validate() const;
};

struct DerivedConstants {
    double A_IPR;
    double A_SERCA;      // K gamma^2 V_s / K_s^2
    double A_SERCA_alt;  // V_s / K_s^2

    double A(Convention c) const { return c == Convention::Printed ? A_SERCA : A_SERCA_alt; }
};

DerivedConstants derived_constants(const ScaledParams& sp);

// Reference scales default to Q_c = c_t and T = 1/(gamma k_IPR).
DimensionlessParams nondimensionalize(const DimensionalParams& dp);
DimensionlessParams nondimensionalize(const DimensionalParams& dp, double Q_c, double T);
DimensionalParams redimensionalize(const DimensionlessParams& tp);

ScaledParams hat_scale(const DimensionlessParams& tp);
// Q_c and T are not part of the scaled tier; they are supplied back here.
DimensionlessParams unhat(const ScaledParams& sp, double Q_c = 2.0, double T = 1.0 / 55.0);

// Flat key/value views, in a fixed key order.
std::map<std::string, double> to_map(const DimensionalParams& p);
std::map<std::string, double> to_map(const DimensionlessParams& p);
std::map<std::string, double> to_map(const ScaledParams& p);

// FNV-1a over the canonical "key=value" text of the resolved tier.
std::string fingerprint(const ScaledParams& p);
std::string fingerprint(const DimensionalParams& p);
std::string fingerprint(const DimensionlessParams& p);

}  // namespace calcium
