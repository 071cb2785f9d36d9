#include "calcium/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace calcium {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line)
{
}

void RunConfig::validate() const
{
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (abs_tol > rel_tol || rel_tol >= 1.0) throw std::invalid_argument("need 0 < abs_tol <= rel_tol < 1");
    params.scaled.validate();
}

ParamSet resolve(const DimensionalParams& p)
{
    p.validate();
    ParamSet s;
    s.tier = Tier::Dimensional;
    s.dimensional = p;
    s.dimensionless = nondimensionalize(p);
    s.scaled = hat_scale(s.dimensionless);
    return s;
}

ParamSet resolve(const DimensionlessParams& p)
{
    p.validate();
    ParamSet s;
    s.tier = Tier::Dimensionless;
    s.dimensionless = p;
    s.dimensional = redimensionalize(p);
    s.scaled = hat_scale(p);
    return s;
}

ParamSet resolve(const ScaledParams& p)
{
    p.validate();
    ParamSet s;
    s.tier = Tier::Scaled;
    s.scaled = p;
    s.dimensionless = unhat(p);
    s.dimensional = redimensionalize(s.dimensionless);
    return s;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool set_field(std::map<std::string, double*>& fields, const std::string& key, double v)
{
    auto it = fields.find(key);
    if (it == fields.end()) return false;
    *it->second = v;
    return true;
}

std::map<std::string, double*> fields_of(DimensionalParams& p)
{
    return {{"k_beta", &p.k_beta}, {"K_c", &p.K_c}, {"K_h", &p.K_h},     {"K_p", &p.K_p},
            {"K_tau", &p.K_tau},   {"K_s", &p.K_s}, {"k_IPR", &p.k_IPR}, {"tau_max", &p.tau_max},
            {"c_t", &p.c_t},       {"p", &p.p},     {"V_s", &p.V_s},     {"K", &p.K},
            {"gamma", &p.gamma}};
}

std::map<std::string, double*> fields_of(DimensionlessParams& p)
{
    return {{"k_beta", &p.k_beta}, {"K_c", &p.K_c}, {"K_h", &p.K_h},     {"K_p", &p.K_p},
            {"K_tau", &p.K_tau},   {"K_s", &p.K_s}, {"k_IPR", &p.k_IPR}, {"tau_max", &p.tau_max},
            {"c_t", &p.c_t},       {"p", &p.p},     {"V_s", &p.V_s},     {"K", &p.K},
            {"gamma", &p.gamma},   {"Q_c", &p.Q_c}, {"T", &p.T}};
}

std::map<std::string, double*> fields_of(ScaledParams& p)
{
    return {{"k_beta", &p.k_beta},   {"K_c", &p.K_c},         {"K_s", &p.K_s},         {"K_p", &p.K_p},
            {"k_IPR", &p.k_IPR},     {"p", &p.p},             {"c_t", &p.c_t},         {"gamma", &p.gamma},
            {"tau_hat", &p.tau_hat}, {"K_h_hat", &p.K_h_hat}, {"V_s_hat", &p.V_s_hat}, {"K_hat", &p.K_hat},
            {"eps", &p.eps}};
}

Tier tier_from(const std::string& s, const std::string& src, int line)
{
    if (s == "dimensional") return Tier::Dimensional;
    if (s == "dimensionless") return Tier::Dimensionless;
    if (s == "scaled") return Tier::Scaled;
    throw ConfigError(src, line, "invalid tier '" + s + "' (expected dimensional|dimensionless|scaled)");
}

double parse_number(const std::string& s, const std::string& src, int line, const std::string& key)
{
    if (s.empty()) throw ConfigError(src, line, "missing value for '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError(src, line, "invalid number '" + s + "' for '" + key + "'");
    return v;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source)
{
    RunConfig cfg;
    cfg.source = source;
    DimensionalParams dp;
    DimensionlessParams tp;
    ScaledParams sp;
    auto fd = fields_of(dp);
    auto ft = fields_of(tp);
    auto fs = fields_of(sp);

    bool have_tier = false;
    Tier tier = Tier::Scaled;
    std::string section;
    std::set<std::string> seen;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(source, line, "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section == "run") continue;
            if (!have_tier) throw ConfigError(source, line, "section [" + section + "] before the mandatory 'tier' key");
            const Tier st = tier_from(section, source, line);
            if (st != tier)
                throw ConfigError(source, line, std::string("tier mismatch: section [") + section +
                                                    "] in a file declared tier = " + to_string(tier));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, line, "empty key");

        if (section.empty()) {
            if (key != "tier") throw ConfigError(source, line, "key '" + key + "' outside a section (only 'tier' allowed)");
            if (have_tier) throw ConfigError(source, line, "duplicate 'tier' key");
            tier = tier_from(val, source, line);
            have_tier = true;
            continue;
        }
        if (section == "run") {
            if (key == "convention") {
                try {
                    cfg.convention = convention_from_string(val);
                } catch (const std::exception& e) {
                    throw ConfigError(source, line, e.what());
                }
            } else if (key == "rel_tol") {
                cfg.rel_tol = parse_number(val, source, line, key);
            } else if (key == "abs_tol") {
                cfg.abs_tol = parse_number(val, source, line, key);
            } else if (key == "out_dir") {
                cfg.out_dir = val;
            } else {
                throw ConfigError(source, line, "unknown key '" + key + "' in [run]");
            }
            continue;
        }
        if (!seen.insert(key).second) throw ConfigError(source, line, "duplicate key '" + key + "'");
        const double v = parse_number(val, source, line, key);
        bool ok = false;
        switch (tier) {
        case Tier::Dimensional: ok = set_field(fd, key, v); break;
        case Tier::Dimensionless: ok = set_field(ft, key, v); break;
        case Tier::Scaled: ok = set_field(fs, key, v); break;
        }
        if (!ok) {
            std::string owner;
            if (fd.count(key)) owner = "dimensional";
            else if (ft.count(key)) owner = "dimensionless";
            else if (fs.count(key)) owner = "scaled";
            if (!owner.empty())
                throw ConfigError(source, line, "tier mismatch: key '" + key + "' belongs to tier " + owner +
                                                    ", file declared tier = " + to_string(tier));
            throw ConfigError(source, line, "unknown key '" + key + "'");
        }
    }
    if (!have_tier) throw ConfigError(source, line, "missing mandatory 'tier' key");

    try {
        switch (tier) {
        case Tier::Dimensional: cfg.params = resolve(dp); break;
        case Tier::Dimensionless: cfg.params = resolve(tp); break;
        case Tier::Scaled: cfg.params = resolve(sp); break;
        }
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(source, line, e.what());
    }
    return cfg;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError(path, 0, "cannot open parameter file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string default_config_text()
{
    return "tier = scaled\n"
           "\n"
           "[scaled]\n"
           "k_beta = 0.4\n"
           "K_c = 0.1\n"
           "K_s = 0.1\n"
           "K_p = 0.1\n"
           "k_IPR = 0.18\n"
           "p = 0.025\n"
           "c_t = 1\n"
           "gamma = 5.5\n"
           "tau_hat = 0.34\n"
           "K_h_hat = 0.8\n"
           "V_s_hat = 3.24\n"
           "K_hat = 0.0076\n"
           "eps = 0.0025\n"
           "\n"
           "[run]\n"
           "convention = printed\n"
           "rel_tol = 1e-9\n"
           "abs_tol = 1e-12\n";
}

}  // namespace calcium
