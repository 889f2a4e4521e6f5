#pragma once

// Run configuration: an INI file with sections domain, basis, kernel, grid, checks, multiplier, mc
// and output. Every field is addressed as "section.name" both in files and in overrides.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/basis.hpp"
#include "polyheat/domain.hpp"
#include "polyheat/errors.hpp"

namespace polyheat::cli {

/// Invalid configuration value; field() is the "section.name" key at fault.
class ConfigError : public ArgumentError {
public:
    ConfigError(std::string field, const std::string &message);
    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

struct RunConfig {
    std::string domain = "interval";
    std::size_t dimension = 2; // ball only
    double alpha = -0.5;
    double beta = -0.5;
    double gamma = 0.0;
    std::vector<double> kappa{0.5, 0.5, 0.5};

    std::size_t max_degree = 0; // 0 selects default_max_degree
    Precision precision = Precision::Double;
    Construction construction = Construction::Product;

    double epsilon = 1e-10;
    double t_min = 0.0; // 0 selects 30 / lambda_cap

    std::size_t per_axis = 8;
    double margin = 0.05;
    std::vector<double> times{0.05, 0.1, 0.2, 0.5};
    std::vector<double> radii{0.02, 0.05, 0.1, 0.2, 0.4, 0.7};
    std::vector<double> epsilons{0.2, 0.1, 0.05, 0.02, 0.01};

    std::size_t eigen_degree = 40; // levels checked by the ops suite, at most the basis degree
    std::size_t polynomials = 20;
    unsigned poly_degree = 5;
    std::size_t chart_samples = 100;
    std::size_t correspondence_k = 30;

    double bump_radius = 4.0;
    unsigned bump_order = 0; // 0 selects n + 2
    std::vector<double> deltas{0.05, 0.1};
    double sinc_band = 2.0;
    unsigned sinc_order = 3;

    std::uint64_t mc_samples = 200'000;
    std::optional<std::uint64_t> seed;

    std::string output_dir = "polyheat-out";

    /// Assigns one field from its text form. Throws ConfigError for unknown keys and unparsable values.
    void set(const std::string &key, const std::string &value);
    /// Every field as (key, text) in file order; unset optional fields render as an empty string.
    std::vector<std::pair<std::string, std::string>> entries() const;
    static std::vector<std::string> keys();

    /// Throws ConfigError naming the first offending field.
    void validate() const;
    DomainSpec spec() const;
    std::size_t resolved_degree() const;
    unsigned resolved_bump_order() const;

    nlohmann::json to_json() const;
    /// INI text that load_config reads back to an equal configuration.
    std::string to_ini() const;
};

RunConfig load_config(const std::string &path);
RunConfig parse_config(std::istream &in);
/// Applies "key=value" overrides in order.
void apply_overrides(RunConfig &config, const std::vector<std::string> &overrides);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

} // namespace polyheat::cli
