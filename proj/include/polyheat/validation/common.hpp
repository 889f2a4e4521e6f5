#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/domain.hpp"
#include "polyheat/polynomial.hpp"
#include "polyheat/volume.hpp"

namespace polyheat::validation {

inline constexpr int kReportSchemaVersion = 1;

/// Shortest round-trip style rendering for messages (ostream default precision).
std::string format_number(double v);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;

    nlohmann::json to_json() const;
};

/// Ordinary least squares y = slope x + intercept. R^2 is 1 for a perfect fit and for constant y.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// V(x, r) from ball_volume with a fixed budget; each query derives its own stream from (seed, x, r).
struct VolumeOracle {
    DomainSpec spec;
    VolumeBudget budget;

    VolumeEstimate operator()(std::span<const double> x, double r) const;
    nlohmann::json to_json() const;
};

/// rho-distance from x to the boundary: arcsin of the smallest lifted coordinate that vanishes there.
double boundary_distance(const DomainSpec &spec, std::span<const double> x);

/// Nodes of the domain's Gauss rule with `per_axis` points per axis, keeping those at
/// rho-distance >= margin from the boundary. Sorted lexicographically.
std::vector<Point> interior_grid(const DomainSpec &spec, std::size_t per_axis, double margin = 0.05);

/// count values from lo to hi, geometrically spaced.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// All monomials of degree <= degree with coefficients uniform in [-1, 1].
MultiPoly random_multipoly(std::size_t n, unsigned degree, std::uint64_t seed);

/// count points uniform in the chart domain (rejection sampling) with boundary_gap > min_gap.
std::vector<Point> random_interior_points(const DomainSpec &spec, std::size_t count, std::uint64_t seed,
                                          double min_gap = 1e-3);

nlohmann::json point_json(std::span<const double> x);

} // namespace polyheat::validation
