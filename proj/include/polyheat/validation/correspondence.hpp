#pragma once

// Interval (alpha, beta) against the one-dimensional simplex with kappa = (beta + 1/2, alpha + 1/2)
// under x1 = (x + 1)/2.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/domain.hpp"

namespace polyheat::validation {

struct CorrespondenceCheck {
    std::string name;
    std::string identity;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CorrespondenceReport {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t max_k = 0;
    std::vector<CorrespondenceCheck> checks;
    bool pass = false;

    nlohmann::json to_json() const;
};

struct CorrespondenceOptions {
    std::size_t grid_points = 20;
    std::vector<double> times{0.2, 0.5, 1.0};
    std::size_t random_polynomials = 10;
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
};

/// The simplex spec paired with Interval(alpha, beta).
DomainSpec simplex_partner(double alpha, double beta);

/// Four relative residuals: operator conjugation on random polynomials, eigenfunctions
/// P_k(x) = +-2^{-(alpha+beta+1)/2} P~_k(x1), distance halving rho = 2 rho~, and heat-kernel
/// scaling e^{tL}(x, y) = 2^{-(alpha+beta+1)} e^{tL~}(x1, y1).
CorrespondenceReport jacobi_simplex_correspondence(double alpha, double beta, std::size_t max_k,
                                                   const CorrespondenceOptions &options = {});

} // namespace polyheat::validation
