#pragma once

// Spectral heat and multiplier kernels
//   sum_k phi_k P_k(x, y),   P_k(x, y) = sum_j P_kj(x) P_kj(y),
// truncated at the smallest level K whose certified tail
//   sum_{k > K} env_k sqrt(C_k(x) C_k(y))      (Cauchy-Schwarz on the level kernels)
// is below the policy epsilon. Levels past the built basis are covered by an extrapolated bound.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "polyheat/basis.hpp"
#include "polyheat/polynomial.hpp"
#include "polyheat/quadrature.hpp"

namespace polyheat {

struct TruncationPolicy {
    double epsilon = 1e-10;
    double t_min = 0.0;
    std::size_t hard_cap = 0;

    /// t_min = 30 / lambda_cap, hard_cap = max_degree.
    static TruncationPolicy defaults(const OrthonormalBasis &basis, double epsilon = 1e-10);
    void validate() const;
    nlohmann::json to_json() const;
};

struct KernelValue {
    double value = 0.0;
    double tail = 0.0;
    std::size_t levels = 0; // levels 0..levels-1 were summed
};

enum class MultiplierFamily { HeatExp, SmoothBump, SincPower };

std::string to_string(MultiplierFamily f);
MultiplierFamily parse_multiplier_family(const std::string &name);

struct MultiplierSpec {
    MultiplierFamily family = MultiplierFamily::HeatExp;
    double radius = 1.0;   // SmoothBump support [-R, R]
    unsigned order = 4;    // smoothness order m (SmoothBump) or power m (SincPower)
    double band = 1.0;     // SincPower A

    static MultiplierSpec heat_exp();
    static MultiplierSpec smooth_bump(double radius, unsigned order);
    static MultiplierSpec sinc_power(double band, unsigned order);

    /// Phi(u), even in u, Phi(0) = 1.
    double operator()(double u) const;
    /// Nonincreasing bound: |Phi(v)| <= envelope(u) for all v >= u >= 0.
    double envelope(double u) const;
    /// Spectral support radius for compactly supported Phi.
    std::optional<double> support() const;
    /// Fourier support radius m A of SincPower.
    double fourier_support() const;
    void validate() const;
    std::string describe() const;
    nlohmann::json to_json() const;
};

class HeatKernelEvaluator {
public:
    explicit HeatKernelEvaluator(std::shared_ptr<const OrthonormalBasis> basis);
    HeatKernelEvaluator(std::shared_ptr<const OrthonormalBasis> basis, TruncationPolicy policy);

    const OrthonormalBasis &basis() const noexcept { return *basis_; }
    std::shared_ptr<const OrthonormalBasis> basis_ptr() const noexcept { return basis_; }
    const EigenTable &eigen() const noexcept { return basis_->eigen(); }
    const TruncationPolicy &policy() const noexcept { return policy_; }
    const DomainSpec &spec() const noexcept { return basis_->spec(); }

    /// Basis values and Christoffel diagonals at x, reusable across kernel evaluations.
    BasisSample sample(std::span<const double> x) const;

    KernelValue heat_kernel(double t, std::span<const double> x, std::span<const double> y) const;
    KernelValue heat_kernel(double t, const BasisSample &x, const BasisSample &y) const;

    KernelValue multiplier_kernel(const MultiplierSpec &phi, double delta, std::span<const double> x,
                                  std::span<const double> y) const;
    KernelValue multiplier_kernel(const MultiplierSpec &phi, double delta, const BasisSample &x,
                                  const BasisSample &y) const;

    /// Smallest t (within a factor 1.05) at which the heat tail at (x, y) meets epsilon.
    double achievable_t(const BasisSample &x, const BasisSample &y) const;

    /// int e^{tL}(x, y) dmu(y).
    double mass_check(double t, std::span<const double> x) const;
    double mass_check(double t, std::span<const double> x, const QuadratureRule &quad) const;
    /// |e^{(s+t)L}(x, z) - int e^{sL}(x, y) e^{tL}(y, z) dmu(y)|.
    double semigroup_check(double s, double t, std::span<const double> x, std::span<const double> z) const;
    double semigroup_check(double s, double t, std::span<const double> x, std::span<const double> z,
                           const QuadratureRule &quad) const;
    /// |int (e^{tL} f) g dmu - int f (e^{tL} g) dmu| / max(|lhs|, |rhs|, 1), with e^{tL} applied by
    /// integrating the pointwise kernel against the basis quadrature.
    double self_adjointness_check(double t, const MultiPoly &f, const MultiPoly &g) const;

private:
    void require_time(double t) const;
    KernelValue heat_sum(double t, const BasisSample &x, const BasisSample &y) const;

    std::shared_ptr<const OrthonormalBasis> basis_;
    TruncationPolicy policy_;
};

} // namespace polyheat
