#include "polyheat/validation/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "polyheat/basis.hpp"
#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/heat_kernel.hpp"
#include "polyheat/polynomial.hpp"
#include "polyheat/validation/common.hpp"

namespace polyheat::validation {

namespace {

CorrespondenceCheck make_check(std::string name, std::string identity, double residual, double tol)
{
    return {std::move(name), std::move(identity), residual, tol, residual <= tol};
}

} // namespace

nlohmann::json CorrespondenceReport::to_json() const
{
    nlohmann::json cj = nlohmann::json::array();
    for (const auto &c : checks) {
        cj.push_back({{"name", c.name},
                      {"identity", c.identity},
                      {"max_residual", c.max_residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"report", "correspondence"},
            {"alpha", alpha},
            {"beta", beta},
            {"max_k", max_k},
            {"checks", cj},
            {"pass", pass}};
}

DomainSpec simplex_partner(double alpha, double beta) { return DomainSpec::simplex({beta + 0.5, alpha + 0.5}); }

CorrespondenceReport jacobi_simplex_correspondence(double alpha, double beta, std::size_t max_k,
                                                   const CorrespondenceOptions &options)
{
    const DomainSpec jspec = DomainSpec::interval(alpha, beta);
    const DomainSpec tspec = simplex_partner(alpha, beta);
    if (options.grid_points < 2) {
        throw ArgumentError("correspondence grid needs at least 2 points");
    }
    CorrespondenceReport rep{alpha, beta, max_k};
    const double tol = options.tolerance;
    const double ab1 = alpha + beta + 1.0;

    // (i) L~ (f o chi^{-1}) = (L f) o chi^{-1} with chi^{-1}(x1) = 2 x1 - 1.
    double op = 0.0;
    for (std::size_t p = 0; p < options.random_polynomials; ++p) {
        const unsigned deg = static_cast<unsigned>(std::min<std::size_t>(max_k, 12));
        const MultiPoly f = random_multipoly(1, deg, options.seed + p);
        const MultiPoly lhs = apply_simplex_operator(compose_affine(f, 2.0, -1.0), tspec.kappa());
        const MultiPoly rhs = compose_affine(apply_jacobi_operator(f, alpha, beta), 2.0, -1.0);
        op = std::max(op, relative_coefficient_residual(lhs, rhs));
    }
    rep.checks.push_back(make_check("operator", "L~ g(x1) = L f(x), g(x1) = f(2 x1 - 1)", op, tol));

    std::vector<double> grid(options.grid_points);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid[j] = std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(grid.size()));
    }
    auto to_unit = [](double x) { return 0.5 * (x + 1.0); };

    // (ii) eigenfunctions.
    const auto jb = std::make_shared<const OrthonormalBasis>(OrthonormalBasis::build(jspec, max_k));
    const auto tb = std::make_shared<const OrthonormalBasis>(OrthonormalBasis::build(tspec, max_k));
    const double one = 1.0;
    const auto jend = jb->evaluate(std::span(&one, 1));
    const auto tend = tb->evaluate(std::span(&one, 1));
    const double factor = std::pow(2.0, -0.5 * ab1);
    double eig = 0.0;
    std::vector<double> peak(max_k + 1, 0.0);
    std::vector<double> diff(max_k + 1, 0.0);
    for (const double x : grid) {
        const double x1 = to_unit(x);
        const auto pj = jb->evaluate(std::span(&x, 1));
        const auto pt = tb->evaluate(std::span(&x1, 1));
        for (std::size_t k = 0; k <= max_k; ++k) {
            const double sign = (jend[k] > 0.0) == (tend[k] > 0.0) ? 1.0 : -1.0;
            peak[k] = std::max(peak[k], std::abs(pj[k]));
            diff[k] = std::max(diff[k], std::abs(pj[k] - sign * factor * pt[k]));
        }
    }
    eig = *std::max_element(diff.begin(), diff.end()) / *std::max_element(peak.begin(), peak.end());
    rep.checks.push_back(make_check("eigenfunctions", "P_k(x) = +-2^{-(alpha+beta+1)/2} P~_k(x1)", eig, tol));

    // (iii) distances.
    double dmax = 0.0;
    double dscale = 0.0;
    for (const double x : grid) {
        for (const double y : grid) {
            const double x1 = to_unit(x);
            const double y1 = to_unit(y);
            const double a = distance(jspec, std::span(&x, 1), std::span(&y, 1));
            const double b = 2.0 * distance(tspec, std::span(&x1, 1), std::span(&y1, 1));
            dmax = std::max(dmax, std::abs(a - b));
            dscale = std::max(dscale, a);
        }
    }
    rep.checks.push_back(make_check("distance", "rho(x, y) = 2 rho~(x1, y1)", dmax / dscale, tol));

    // (iv) heat kernels.
    const HeatKernelEvaluator je(jb);
    const HeatKernelEvaluator te(tb);
    const double kscale = std::pow(2.0, -ab1);
    double kmax = 0.0;
    double kpeak = 0.0;
    for (const double t : options.times) {
        for (const double x : grid) {
            for (const double y : grid) {
                const double x1 = to_unit(x);
                const double y1 = to_unit(y);
                const double a = je.heat_kernel(t, std::span(&x, 1), std::span(&y, 1)).value;
                const double b = kscale * te.heat_kernel(t, std::span(&x1, 1), std::span(&y1, 1)).value;
                kmax = std::max(kmax, std::abs(a - b));
                kpeak = std::max(kpeak, std::abs(a));
            }
        }
    }
    rep.checks.push_back(
        make_check("heat_kernel", "e^{tL}(x, y) = 2^{-(alpha+beta+1)} e^{tL~}(x1, y1)", kmax / kpeak, tol));

    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto &c) { return c.pass; });
    return rep;
}

} // namespace polyheat::validation
