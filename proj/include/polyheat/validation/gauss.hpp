#pragma once

// Two-sided Gaussian bound certification, doubling and weight oscillation scans.

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/heat_kernel.hpp"
#include "polyheat/validation/common.hpp"

namespace polyheat::validation {

struct GaussScanOptions {
    double threshold = 4.0;      // admissible rows have threshold <= rho^2/t <= max_ratio
    double max_ratio = 25.0;
    double diagonal_ratio = 0.25; // near-diagonal rows have rho^2/t <= diagonal_ratio
    double exponent_spread = 25.0;
    double diagonal_spread = 20.0;

    nlohmann::json to_json() const;
};

struct GaussRow {
    Point x;
    Point y;
    double t = 0.0;
    double rho = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double kernel = 0.0;
    double tail = 0.0;
    double n_value = 0.0;  // kernel sqrt(vx vy)
    double exponent = 0.0; // -t ln(n_value) / rho^2, admissible rows only
    bool admissible = false;
    bool diagonal = false;
};

struct GaussBoundReport {
    std::vector<GaussRow> rows;
    GaussScanOptions options;
    std::size_t admissible = 0;
    std::size_t excluded = 0;   // admissible but kernel <= tail
    std::size_t violations = 0; // kernel + tail <= 0
    double e_min = 0.0;
    double e_max = 0.0;
    double c2_hat = 0.0; // 1 / e_max
    double c4_hat = 0.0; // 1 / e_min
    std::size_t diagonal = 0;
    double n_lo = 0.0;
    double n_hi = 0.0;
    bool bounded = false;

    nlohmann::json to_json() const;
};

/// Rows over all unordered pairs of `points` (diagonal included) and all times.
GaussBoundReport gauss_ratio_scan(const HeatKernelEvaluator &ev, const VolumeOracle &vol,
                                  std::span<const Point> points, std::span<const double> times,
                                  const GaussScanOptions &options = {});

struct DoublingRow {
    Point x;
    double r = 0.0;
    double v_r = 0.0;
    double v_2r = 0.0;
    double stderr_r = 0.0;
    double ratio = 0.0;
    double comparability_r = 0.0;  // V(x, r) / Vhat(x, r), NaN beyond the surrogate range
    double comparability_2r = 0.0; // V(x, 2r) / Vhat(x, 2r), NaN beyond the surrogate range
};

struct DoublingReport {
    DomainSpec spec;
    std::vector<DoublingRow> rows;
    double max_ratio = 0.0;
    double cap = 0.0;
    double surrogate_range = 0.0;
    double comparability_min = 0.0;
    double comparability_max = 0.0;
    double spread = 0.0;
    double spread_limit = 30.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Doubling cap from the surrogate ratio with a factor-2 margin: 2^{n+1} 4^{|gamma|} (ball),
/// 2^{n+1} 4^{sum |kappa_i|} (simplex), 4 * 4^{|alpha+1/2| + |beta+1/2|} (interval).
double doubling_cap(const DomainSpec &spec);

/// Largest radius at which the volume surrogate is asserted: 1 on the simplex, pi otherwise.
double surrogate_range(const DomainSpec &spec);

/// radii in (0, pi/2]. Comparability is collected only at radii within surrogate_range. Throws PrecisionError when a Monte Carlo stderr exceeds 5% of V(x, r).
DoublingReport doubling_scan(const VolumeOracle &vol, std::span<const Point> points, std::span<const double> radii,
                             double spread_limit = 30.0);

struct WeightOscillationRow {
    Point x;
    double r = 0.0;
    double theta = 0.0; // rho-distance to the boundary
    double ratio = 0.0; // sup / inf of the sphere weight over B(x, r)
};

struct WeightOscillationReport {
    DomainSpec spec;
    double separation = 2.0;
    std::vector<WeightOscillationRow> rows;
    double max_ratio = 0.0;
    double bound = 0.0; // (2 pi)^{2|gamma|}
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Ball only. Rows for r <= pi/4 with boundary distance >= separation * r. The weight y_{n+1}^{2 gamma}
/// depends on the boundary distance theta alone, which ranges over [theta - r, min(theta + r, pi/2)]
/// inside the ball, so sup and inf are exact.
WeightOscillationReport weight_oscillation_scan(const DomainSpec &spec, std::span<const Point> points,
                                                std::span<const double> radii, double separation = 2.0);

} // namespace polyheat::validation
