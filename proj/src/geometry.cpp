#include "polyheat/geometry.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "polyheat/errors.hpp"

namespace polyheat {

namespace {

double sum_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

double sum_sq(std::span<const double> x)
{
    double s = 0.0;
    for (const double v : x) {
        s += v * v;
    }
    return s;
}

void require_dimension(const DomainSpec &spec, std::span<const double> x)
{
    if (x.size() != spec.dimension()) {
        throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", domain " + spec.describe() +
                            " has dimension " + std::to_string(spec.dimension()));
    }
}

void require_interior(const DomainSpec &spec, std::span<const double> x)
{
    require_in_domain(spec, x);
    if (boundary_gap(spec, x) < kBoundaryProximity) {
        throw SingularityError("metric is singular within 1e-12 of the boundary of " + spec.describe());
    }
}

/// b^e for b >= 0, refusing 0^negative.
double boundary_power(double base, double exponent)
{
    if (exponent == 0.0) {
        return 1.0;
    }
    if (base <= 0.0) {
        if (exponent < 0.0) {
            throw SingularityError("boundary-singularity: weight has a negative exponent on the boundary");
        }
        return 0.0;
    }
    return std::pow(base, exponent);
}

} // namespace

bool in_domain(const DomainSpec &spec, std::span<const double> x, double tol)
{
    if (x.size() != spec.dimension()) {
        return false;
    }
    for (const double v : x) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    switch (spec.kind()) {
    case DomainKind::Interval:
        return std::abs(x[0]) <= 1.0 + tol;
    case DomainKind::Ball:
        return sum_sq(x) <= 1.0 + tol;
    case DomainKind::Simplex:
        for (const double v : x) {
            if (v < -tol) {
                return false;
            }
        }
        return sum_of(x) <= 1.0 + tol;
    }
    return false;
}

void require_in_domain(const DomainSpec &spec, std::span<const double> x)
{
    require_dimension(spec, x);
    if (!in_domain(spec, x)) {
        std::string pt;
        for (std::size_t i = 0; i < x.size(); ++i) {
            pt += (i ? ", " : "") + std::to_string(x[i]);
        }
        throw ArgumentError("point (" + pt + ") lies outside the closed domain " + spec.describe());
    }
}

double boundary_gap(const DomainSpec &spec, std::span<const double> x)
{
    switch (spec.kind()) {
    case DomainKind::Interval:
    case DomainKind::Ball:
        return 1.0 - sum_sq(x);
    case DomainKind::Simplex: {
        double g = 1.0 - sum_of(x);
        for (const double v : x) {
            g = std::min(g, v);
        }
        return g;
    }
    }
    return 0.0;
}

Point chart_lift(const DomainSpec &spec, std::span<const double> x)
{
    require_in_domain(spec, x);
    const std::size_t n = spec.dimension();
    Point u(n + 1);
    if (spec.kind() == DomainKind::Simplex) {
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = std::sqrt(std::max(0.0, x[i]));
        }
        u[n] = std::sqrt(std::max(0.0, 1.0 - sum_of(x)));
    } else {
        std::copy(x.begin(), x.end(), u.begin());
        u[n] = std::sqrt(std::max(0.0, 1.0 - sum_sq(x)));
    }
    // Marginally outside points were accepted; renormalize onto the sphere.
    const double norm = std::sqrt(sum_sq(u));
    for (double &v : u) {
        v /= norm;
    }
    return u;
}

double sphere_angle(std::span<const double> u, std::span<const double> v)
{
    double dm = 0.0;
    double dp = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dm += (u[i] - v[i]) * (u[i] - v[i]);
        dp += (u[i] + v[i]) * (u[i] + v[i]);
    }
    return 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
}

double distance(const DomainSpec &spec, std::span<const double> x, std::span<const double> y)
{
    const Point u = chart_lift(spec, x);
    const Point v = chart_lift(spec, y);
    return sphere_angle(u, v);
}

double weight_density(const DomainSpec &spec, std::span<const double> x)
{
    require_in_domain(spec, x);
    switch (spec.kind()) {
    case DomainKind::Interval:
        return boundary_power(1.0 - x[0], spec.alpha()) * boundary_power(1.0 + x[0], spec.beta());
    case DomainKind::Ball:
        return boundary_power(1.0 - sum_sq(x), spec.gamma() - 0.5);
    case DomainKind::Simplex: {
        const auto &k = spec.kappa();
        const std::size_t n = spec.dimension();
        double w = boundary_power(1.0 - sum_of(x), k[n] - 0.5);
        for (std::size_t i = 0; i < n; ++i) {
            w *= boundary_power(x[i], k[i] - 0.5);
        }
        return w;
    }
    }
    return 0.0;
}

Eigen::MatrixXd metric_tensor(const DomainSpec &spec, std::span<const double> x)
{
    require_interior(spec, x);
    const auto n = static_cast<Eigen::Index>(spec.dimension());
    Eigen::MatrixXd g(n, n);
    if (spec.kind() == DomainKind::Simplex) {
        const double rem = 1.0 - sum_of(x);
        g.setConstant(1.0 / (4.0 * rem));
        for (Eigen::Index i = 0; i < n; ++i) {
            g(i, i) += 1.0 / (4.0 * x[i]);
        }
    } else {
        const double rem = 1.0 - sum_sq(x);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                g(i, j) = (i == j ? 1.0 : 0.0) + x[i] * x[j] / rem;
            }
        }
    }
    return g;
}

Eigen::MatrixXd inverse_metric(const DomainSpec &spec, std::span<const double> x)
{
    require_interior(spec, x);
    const auto n = static_cast<Eigen::Index>(spec.dimension());
    Eigen::MatrixXd h(n, n);
    const bool simplex = spec.kind() == DomainKind::Simplex;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (simplex) {
                h(i, j) = 4.0 * ((i == j ? x[i] : 0.0) - x[i] * x[j]);
            } else {
                h(i, j) = (i == j ? 1.0 : 0.0) - x[i] * x[j];
            }
        }
    }
    return h;
}

double metric_det(const DomainSpec &spec, std::span<const double> x)
{
    require_interior(spec, x);
    if (spec.kind() == DomainKind::Simplex) {
        const std::size_t n = spec.dimension();
        double d = std::pow(4.0, -static_cast<double>(n)) / (1.0 - sum_of(x));
        for (const double v : x) {
            d /= v;
        }
        return d;
    }
    return 1.0 / (1.0 - sum_sq(x));
}

double graph_metric_det(const Eigen::VectorXd &grad_psi) { return 1.0 + grad_psi.squaredNorm(); }

Eigen::MatrixXd graph_inverse_metric(const Eigen::VectorXd &grad_psi)
{
    const auto n = grad_psi.size();
    return Eigen::MatrixXd::Identity(n, n) - grad_psi * grad_psi.transpose() / (1.0 + grad_psi.squaredNorm());
}

double perturbed_identity_det(std::span<const double> a)
{
    const std::size_t n = a.size();
    if (n == 0) {
        return 1.0;
    }
    // suffix[j] = prod_{k >= j} a_k; products skipping one index avoid dividing by a_j.
    std::vector<double> suffix(n + 1, 1.0);
    for (std::size_t j = n; j-- > 0;) {
        suffix[j] = suffix[j + 1] * a[j];
    }
    double prefix = 1.0;
    double skip_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        skip_sum += prefix * suffix[j + 1];
        prefix *= a[j];
    }
    return suffix[0] + skip_sum;
}

double log_total_mass(const DomainSpec &spec)
{
    switch (spec.kind()) {
    case DomainKind::Interval: {
        const double a = spec.alpha();
        const double b = spec.beta();
        return (a + b + 1.0) * std::numbers::ln2 + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
               std::lgamma(a + b + 2.0);
    }
    case DomainKind::Ball: {
        // (1/2) B(gamma + 1/2, n/2) |S^{n-1}| = pi^{n/2} Gamma(gamma + 1/2) / Gamma(gamma + 1/2 + n/2)
        const double g = spec.gamma() + 0.5;
        const double h = 0.5 * static_cast<double>(spec.dimension());
        return h * std::log(std::numbers::pi) + std::lgamma(g) - std::lgamma(g + h);
    }
    case DomainKind::Simplex: {
        // prod_i B(kappa_i + 1/2, sum_{j > i} (kappa_j + 1/2)) telescopes to a Dirichlet normalizer.
        double s = 0.0;
        double total = 0.0;
        for (const double k : spec.kappa()) {
            s += std::lgamma(k + 0.5);
            total += k + 0.5;
        }
        return s - std::lgamma(total);
    }
    }
    return 0.0;
}

double total_mass(const DomainSpec &spec) { return std::exp(log_total_mass(spec)); }

double volume_surrogate(const DomainSpec &spec, std::span<const double> x, double r)
{
    require_in_domain(spec, x);
    if (!(r > 0.0) || r > std::numbers::pi) {
        throw ArgumentError("volume surrogate needs 0 < r <= pi, got r = " + std::to_string(r));
    }
    const double r2 = r * r;
    switch (spec.kind()) {
    case DomainKind::Interval:
        return r * std::pow(std::max(0.0, 1.0 - x[0]) + r2, spec.alpha() + 0.5) *
               std::pow(std::max(0.0, 1.0 + x[0]) + r2, spec.beta() + 0.5);
    case DomainKind::Ball:
        return std::pow(r, static_cast<double>(spec.dimension())) *
               std::pow(std::max(0.0, 1.0 - sum_sq(x)) + r2, spec.gamma());
    case DomainKind::Simplex: {
        const auto &k = spec.kappa();
        const std::size_t n = spec.dimension();
        double v = std::pow(r, static_cast<double>(n)) * std::pow(std::max(0.0, 1.0 - sum_of(x)) + r2, k[n]);
        for (std::size_t i = 0; i < n; ++i) {
            v *= std::pow(std::max(0.0, x[i]) + r2, k[i]);
        }
        return v;
    }
    }
    return 0.0;
}

} // namespace polyheat
