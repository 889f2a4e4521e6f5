#pragma once

// Localization of compactly supported multipliers and the finite speed surrogate for SincPower.

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/heat_kernel.hpp"
#include "polyheat/validation/common.hpp"

namespace polyheat::validation {

struct LocalizationOptions {
    double fit_lo = 2.0; // fit over rho/delta in [fit_lo, fit_hi]
    double fit_hi = 20.0;
    std::size_t bins = 12;
    double tail_fraction = 0.1; // rows with tail > tail_fraction |kernel| are excluded
    double max_excluded = 0.2;
    double exponent_margin = 0.5;
    double min_r2 = 0.98;

    nlohmann::json to_json() const;
};

struct LocalizationRow {
    Point x;
    Point y;
    double rho = 0.0;
    double kernel = 0.0;
    double tail = 0.0;
    double scaled = 0.0; // |kernel| sqrt(V(x, delta) V(y, delta))
    double d = 0.0;      // scaled (1 + rho/delta)^m
    bool excluded = false;
};

struct LocalizationReport {
    MultiplierSpec phi;
    double delta = 0.0;
    unsigned m = 0;
    LocalizationOptions options;
    std::vector<LocalizationRow> rows;
    std::size_t excluded = 0;
    double c_m_hat = 0.0; // max D
    double diagonal_max = 0.0;
    std::vector<double> envelope_s;     // 1 + rho/delta at the bin maxima
    std::vector<double> envelope_value; // bin maxima of scaled
    LinearFit fit;                      // log envelope against log(1 + rho/delta)
    double decay_exponent = 0.0;        // -fit.slope
    bool pass = false;

    nlohmann::json to_json() const;
};

/// D(x, y) = |Phi(delta sqrt(-L))(x, y)| sqrt(V(x, delta) V(y, delta)) (1 + rho/delta)^m over all unordered pairs.
/// The decay exponent is fitted to the per-bin maxima (upper envelope) over log-spaced bins of 1 + rho/delta.
/// Requires m >= n + 1. Throws RefusalError when more than max_excluded of the rows are excluded.
LocalizationReport localization_check(const HeatKernelEvaluator &ev, const MultiplierSpec &phi, double delta,
                                      unsigned m, const VolumeOracle &vol, std::span<const Point> points,
                                      const LocalizationOptions &options = {});

struct FiniteSpeedOptions {
    double threshold = 1e-8;
    double tail_limit = 1e-12;

    nlohmann::json to_json() const;
};

struct FiniteSpeedReport {
    MultiplierSpec phi;
    double delta = 0.0;
    FiniteSpeedOptions options;
    std::size_t pairs = 0;
    double max_rho = 0.0;
    double r_star = 0.0;
    double c_star = 0.0; // r_star / (delta m A)
    double max_tail = 0.0;
    double max_beyond = 0.0; // max |kernel| over rho > r_star
    std::vector<double> profile_rho;  // running max of |kernel| over rho >= profile_rho
    std::vector<double> profile_max;
    bool degenerate = false;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Smallest grid radius r* with max_{rho > r*} |kernel| <= threshold. Throws RefusalError when a
/// truncation tail exceeds tail_limit.
FiniteSpeedReport finite_speed_scan(const HeatKernelEvaluator &ev, const MultiplierSpec &phi, double delta,
                                    std::span<const Point> points, const FiniteSpeedOptions &options = {});

} // namespace polyheat::validation
