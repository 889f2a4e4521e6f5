#include "polyheat/validation/common.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/quadrature.hpp"

namespace polyheat::validation {

std::string format_number(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

nlohmann::json LinearFit::to_json() const
{
    return {{"slope", slope}, {"intercept", intercept}, {"r2", r2}, {"count", count}};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw ArgumentError("line fit needs at least two (x, y) pairs of equal length");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw ArgumentError("line fit needs at least two distinct x values");
    }
    LinearFit f;
    f.count = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

VolumeEstimate VolumeOracle::operator()(std::span<const double> x, double r) const
{
    return ball_volume(spec, x, r, budget);
}

nlohmann::json VolumeOracle::to_json() const
{
    return {{"spec", spec.to_json()}, {"samples", budget.samples}, {"seed", budget.seed}};
}

double boundary_distance(const DomainSpec &spec, std::span<const double> x)
{
    const Point u = chart_lift(spec, x);
    const std::size_t n = spec.dimension();
    double m = u[n];
    if (spec.kind() == DomainKind::Simplex) {
        for (std::size_t i = 0; i < n; ++i) {
            m = std::min(m, u[i]);
        }
    }
    return std::asin(std::clamp(m, 0.0, 1.0));
}

std::vector<Point> interior_grid(const DomainSpec &spec, std::size_t per_axis, double margin)
{
    if (per_axis == 0) {
        throw ArgumentError("grid needs at least one point per axis");
    }
    const QuadratureRule rule = quadrature(spec, static_cast<int>(2 * per_axis - 1));
    std::vector<Point> out;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto x = rule.node(q);
        if (boundary_distance(spec, x) >= margin) {
            out.emplace_back(x.begin(), x.end());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
        throw ArgumentError("log spacing needs 0 < lo <= hi and a positive count");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = lo * std::pow(hi / lo, s);
    }
    out.back() = count == 1 ? lo : hi;
    return out;
}

std::vector<Point> random_interior_points(const DomainSpec &spec, std::size_t count, std::uint64_t seed,
                                          double min_gap)
{
    if (!(min_gap >= 0.0 && min_gap < 0.25)) {
        throw ArgumentError("interior sample gap must lie in [0, 1/4), got " + format_number(min_gap));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool simplex = spec.kind() == DomainKind::Simplex;
    std::vector<Point> out;
    out.reserve(count);
    Point x(spec.dimension());
    while (out.size() < count) {
        for (auto &v : x) {
            v = simplex ? u(rng) : 2.0 * u(rng) - 1.0;
        }
        if (in_domain(spec, x) && boundary_gap(spec, x) > min_gap) {
            out.push_back(x);
        }
    }
    return out;
}

MultiPoly random_multipoly(std::size_t n, unsigned degree, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<std::pair<MultiIndex, double>> terms;
    std::vector<unsigned> e(n, 0);
    // Odometer over exponent vectors with total degree <= degree.
    while (true) {
        terms.emplace_back(MultiIndex(e), coef(rng));
        std::size_t i = 0;
        for (; i < n; ++i) {
            ++e[i];
            unsigned total = 0;
            for (const unsigned v : e) {
                total += v;
            }
            if (total <= degree) {
                break;
            }
            e[i] = 0;
        }
        if (i == n) {
            break;
        }
    }
    return MultiPoly::from_terms(n, terms);
}

nlohmann::json point_json(std::span<const double> x) { return nlohmann::json(std::vector<double>(x.begin(), x.end())); }

} // namespace polyheat::validation
