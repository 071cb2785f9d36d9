#pragma once

#include "calcium/params.hpp"

#include <stdexcept>
#include <string>

namespace calcium {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

// The tier the file was written in plus every tier derived from it.
struct ParamSet {
    Tier tier = Tier::Scaled;
    DimensionalParams dimensional;
    DimensionlessParams dimensionless;
    ScaledParams scaled;
};

struct RunConfig {
    ParamSet params;
    Convention convention = Convention::Printed;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::string out_dir = ".";
    std::string source = "<defaults>";

    void validate() const;
};

/*
 * Format:
 *   tier = dimensional | dimensionless | scaled     (mandatory, before any section)
 *   [<tier>]      key = value lines for that tier; omitted keys keep their defaults
 *   [run]         convention, rel_tol, abs_tol, out_dir
 * '#' starts a comment. Unknown keys, keys of another tier and a section whose
 * name differs from the declared tier are errors.
 */
RunConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
RunConfig parse_config(const std::string& path);

ParamSet resolve(const DimensionalParams& p);
ParamSet resolve(const DimensionlessParams& p);
ParamSet resolve(const ScaledParams& p);

std::string default_config_text();

}  // namespace calcium
