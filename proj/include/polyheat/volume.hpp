#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "polyheat/domain.hpp"

namespace polyheat {

enum class VolumeMethod { Exact1D, MonteCarlo };

std::string to_string(VolumeMethod method);

/// V(x, r) = mu(B(x, r)).
struct VolumeEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    VolumeMethod method = VolumeMethod::Exact1D;
    std::uint64_t samples = 0;

    nlohmann::json to_json() const;
};

struct VolumeBudget {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0x9d2c5680ULL;
};

/// Interval: exact incomplete-Beta integral. Ball with gamma >= 0 and simplex (n >= 2) with all kappa_i >= 0:
/// uniform samples of the spherical cap around the lift, weighted by the sphere density. Negative
/// exponents: Monte Carlo restricted to the coordinate shell that can meet the ball, sampled exactly
/// from the conditioned measure.
VolumeEstimate ball_volume(const DomainSpec &spec, std::span<const double> x, double r,
                           const VolumeBudget &budget = {});

} // namespace polyheat
