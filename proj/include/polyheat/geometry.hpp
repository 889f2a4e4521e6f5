#pragma once

// Distances, sphere charts, metric tensors, weights, masses and volume surrogates.

#include <span>

#include <Eigen/Dense>

#include "polyheat/domain.hpp"

namespace polyheat {

/// Tolerance for accepting points on or marginally outside the closed domain.
inline constexpr double kContainmentTolerance = 1e-12;
/// Points closer than this to the boundary are refused by the metric evaluators.
inline constexpr double kBoundaryProximity = 1e-12;

bool in_domain(const DomainSpec &spec, std::span<const double> x, double tol = kContainmentTolerance);
/// Throws ArgumentError naming the violated constraint.
void require_in_domain(const DomainSpec &spec, std::span<const double> x);

/// Smallest of the factors that vanish on the boundary: 1 - |x|^2 (ball, interval),
/// min(x_i, 1 - |x|) (simplex).
double boundary_gap(const DomainSpec &spec, std::span<const double> x);

/// Unit-sphere point in R^{n+1}. Ball and interval use (x, sqrt(1-|x|^2));
/// the simplex uses (sqrt x_1, ..., sqrt x_n, sqrt(1-|x|)).
Point chart_lift(const DomainSpec &spec, std::span<const double> x);

/// Great-circle angle between two unit vectors, accurate near 0 and pi.
double sphere_angle(std::span<const double> u, std::span<const double> v);

/// Intrinsic distance rho(x, y) in [0, pi].
double distance(const DomainSpec &spec, std::span<const double> x, std::span<const double> y);

/// Density of the weighted measure with respect to Lebesgue measure.
double weight_density(const DomainSpec &spec, std::span<const double> x);

Eigen::MatrixXd metric_tensor(const DomainSpec &spec, std::span<const double> x);
Eigen::MatrixXd inverse_metric(const DomainSpec &spec, std::span<const double> x);
double metric_det(const DomainSpec &spec, std::span<const double> x);

/// Induced metric of a graph chart x -> (x, psi(x)) from the gradient of psi:
/// det g = 1 + |grad psi|^2 and g^{-1} = I - grad psi grad psi^T / (1 + |grad psi|^2).
double graph_metric_det(const Eigen::VectorXd &grad_psi);
Eigen::MatrixXd graph_inverse_metric(const Eigen::VectorXd &grad_psi);

/// det(diag(a) + 1 1^T) = prod a + sum_j prod_{k != j} a_k.
double perturbed_identity_det(std::span<const double> a);

/// mu(domain) from the closed Beta-function forms.
double total_mass(const DomainSpec &spec);
double log_total_mass(const DomainSpec &spec);

/// Closed-form comparability surrogate for the metric-ball volume, r in (0, pi].
double volume_surrogate(const DomainSpec &spec, std::span<const double> x, double r);

} // namespace polyheat
