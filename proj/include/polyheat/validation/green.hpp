#pragma once

// Green's identity, boundary flux decay and the chart form of the weighted Laplacian.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/polynomial.hpp"
#include "polyheat/quadrature.hpp"
#include "polyheat/validation/common.hpp"

namespace polyheat::validation {

/// Smooth bounded test function with its Euclidean gradient in chart coordinates.
struct TestFunction {
    std::string name;
    std::function<double(std::span<const double>)> value;
    std::function<Point(std::span<const double>)> gradient;
    int degree = -1; // polynomial degree, -1 otherwise

    static TestFunction polynomial(const MultiPoly &h);
    /// exp(1 - 1/(1 - |x - c|^2 / R^2)) inside the Euclidean ball of radius R, 0 outside.
    static TestFunction bump(Point center, double radius);
    /// exp(1 - 1/(1 - (x_axis - c)^2 / R^2)) for |x_axis - c| < R, 0 otherwise; constant in the other coordinates.
    static TestFunction ridge(std::size_t axis, double center, double radius);
};

/// Factor c with Delta_w f = c L f in chart coordinates: 4 on the simplex, 1 otherwise.
double chart_operator_scale(const DomainSpec &spec);
/// L f for the domain's operator.
MultiPoly apply_operator(const DomainSpec &spec, const MultiPoly &f);

struct GreenResult {
    double lhs = 0.0; // int h (c L f) dmu
    double rhs = 0.0; // -int <grad f, grad h>_g dmu
    double residual = 0.0;

    nlohmann::json to_json() const;
};

GreenResult green_identity_check(const DomainSpec &spec, const MultiPoly &f, const TestFunction &h,
                                 const QuadratureRule &quad);
/// Quadrature exact for polynomial h; degree deg f + 320 otherwise.
GreenResult green_identity_check(const DomainSpec &spec, const MultiPoly &f, const TestFunction &h);

struct FluxFace {
    std::string name;
    double expected_slope = 0.0;
    std::vector<double> j_values;
    LinearFit fit;
    bool zero = false; // |J| below 1e-14 for every epsilon
};

struct FluxReport {
    DomainSpec spec;
    std::vector<double> epsilons;
    std::vector<double> j_values; // signed total flux
    std::vector<FluxFace> faces;
    std::string dominating_face;
    double fitted_slope = 0.0;   // dominating face
    double expected_slope = 0.0; // dominating face
    double r2 = 0.0;
    LinearFit total_fit;
    bool exact_zero = false;
    double slope_tolerance = 0.1;
    double min_r2 = 0.98;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Flux of w h g^{-1} grad f through the boundary of the shrunken domain V_eps. Ball: the sphere
/// |x|^2 = 1 - eps. Interval: the points +-sqrt(1 - eps). Simplex: the faces x_i = eps and
/// |x| = 1 - eps. The dominating face is the nonzero face with the smallest expected rate.
FluxReport boundary_flux_decay(const DomainSpec &spec, const MultiPoly &f, const TestFunction &h,
                               std::span<const double> epsilons, int sphere_degree = 40);

struct ChartLaplacianResult {
    double max_residual = 0.0;
    double metric_mismatch = 0.0; // lift-derived metric against metric_tensor / metric_det
    std::size_t samples = 0;

    nlohmann::json to_json() const;
};

/// Chart-side (w sqrt g)^{-1} d_i (w sqrt g g^{ij} d_j f) with the metric and weight derived from the sphere
/// lift by forward-mode differentiation, against c L f. Residual is max |a - b| over max |b|.
/// Throws RefusalError for samples within 1e-8 of the boundary.
ChartLaplacianResult chart_laplacian_check(const DomainSpec &spec, const MultiPoly &f, std::span<const Point> samples);

} // namespace polyheat::validation
