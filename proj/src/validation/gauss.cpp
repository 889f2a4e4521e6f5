#include "polyheat/validation/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/parallel.hpp"

namespace polyheat::validation {

nlohmann::json GaussScanOptions::to_json() const
{
    return {{"threshold", threshold},
            {"max_ratio", max_ratio},
            {"diagonal_ratio", diagonal_ratio},
            {"exponent_spread", exponent_spread},
            {"diagonal_spread", diagonal_spread}};
}

nlohmann::json GaussBoundReport::to_json() const
{
    nlohmann::json grid = nlohmann::json::array();
    for (const auto &r : rows) {
        if (!r.admissible && !r.diagonal) {
            continue;
        }
        grid.push_back({{"x", point_json(r.x)},
                        {"y", point_json(r.y)},
                        {"t", r.t},
                        {"rho", r.rho},
                        {"V_x", r.vx},
                        {"V_y", r.vy},
                        {"kernel", r.kernel},
                        {"tail", r.tail},
                        {"N", r.n_value},
                        {"E", r.admissible ? nlohmann::json(r.exponent) : nlohmann::json(nullptr)},
                        {"diagonal", r.diagonal}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"report", "gauss"},
            {"options", options.to_json()},
            {"rows_scanned", rows.size()},
            {"admissible", admissible},
            {"excluded", excluded},
            {"violations", violations},
            {"E_min", e_min},
            {"E_max", e_max},
            {"c2_hat", c2_hat},
            {"c4_hat", c4_hat},
            {"diagonal", diagonal},
            {"n_lo", n_lo},
            {"n_hi", n_hi},
            {"bounded", bounded},
            {"grid", grid}};
}

GaussBoundReport gauss_ratio_scan(const HeatKernelEvaluator &ev, const VolumeOracle &vol,
                                  std::span<const Point> points, std::span<const double> times,
                                  const GaussScanOptions &options)
{
    if (options.threshold < 4.0) {
        throw ArgumentError("gauss scan threshold must be at least 4, got " + format_number(options.threshold));
    }
    if (points.empty() || times.empty()) {
        throw ArgumentError("gauss scan needs at least one point and one time");
    }
    for (const double t : times) {
        if (t < ev.policy().t_min) {
            throw RefusalError("gauss scan time " + format_number(t) + " is below t_min = " +
                               format_number(ev.policy().t_min));
        }
    }
    const std::size_t P = points.size();
    std::vector<BasisSample> samples(P);
    parallel_for(P, [&](std::size_t i) { samples[i] = ev.sample(points[i]); });
    std::vector<double> rho(P * P);
    for (std::size_t i = 0; i < P; ++i) {
        for (std::size_t j = i; j < P; ++j) {
            rho[i * P + j] = i == j ? 0.0 : distance(ev.spec(), points[i], points[j]);
        }
    }

    GaussBoundReport rep;
    rep.options = options;
    for (const double t : times) {
        std::vector<double> v(P);
        parallel_for(P, [&](std::size_t i) { v[i] = vol(points[i], std::sqrt(t)).value; });
        const std::size_t base = rep.rows.size();
        rep.rows.resize(base + P * (P + 1) / 2);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < P; ++i) {
            for (std::size_t j = i; j < P; ++j) {
                pairs.emplace_back(i, j);
            }
        }
        parallel_for(pairs.size(), [&](std::size_t p) {
            const auto [i, j] = pairs[p];
            GaussRow &row = rep.rows[base + p];
            row.x = points[i];
            row.y = points[j];
            row.t = t;
            row.rho = rho[i * P + j];
            row.vx = v[i];
            row.vy = v[j];
            const KernelValue k = ev.heat_kernel(t, samples[i], samples[j]);
            row.kernel = k.value;
            row.tail = k.tail;
            row.n_value = k.value * std::sqrt(v[i] * v[j]);
            const double ratio = row.rho * row.rho / t;
            row.admissible = ratio >= options.threshold && ratio <= options.max_ratio;
            row.diagonal = ratio <= options.diagonal_ratio;
            if (row.admissible && k.value > k.tail) {
                row.exponent = -t * std::log(row.n_value) / (row.rho * row.rho);
            }
        });
    }

    rep.e_min = std::numeric_limits<double>::infinity();
    rep.e_max = -std::numeric_limits<double>::infinity();
    rep.n_lo = std::numeric_limits<double>::infinity();
    rep.n_hi = 0.0;
    for (const auto &row : rep.rows) {
        if (!row.admissible && !row.diagonal) {
            continue;
        }
        if (row.kernel + row.tail <= 0.0) {
            ++rep.violations;
            continue;
        }
        if (row.admissible) {
            ++rep.admissible;
            if (row.kernel <= row.tail) {
                ++rep.excluded;
                continue;
            }
            rep.e_min = std::min(rep.e_min, row.exponent);
            rep.e_max = std::max(rep.e_max, row.exponent);
        }
        if (row.diagonal && row.kernel > row.tail) {
            ++rep.diagonal;
            rep.n_lo = std::min(rep.n_lo, row.n_value);
            rep.n_hi = std::max(rep.n_hi, row.n_value);
        }
    }
    const bool have_e = rep.admissible > rep.excluded;
    if (!have_e) {
        rep.e_min = rep.e_max = 0.0;
    }
    if (rep.diagonal == 0) {
        rep.n_lo = 0.0;
    }
    rep.c2_hat = have_e && rep.e_max > 0.0 ? 1.0 / rep.e_max : 0.0;
    rep.c4_hat = have_e && rep.e_min > 0.0 ? 1.0 / rep.e_min : 0.0;
    rep.bounded = rep.violations == 0 && have_e && rep.e_min > 0.0 && std::isfinite(rep.e_max) &&
                  rep.e_max <= options.exponent_spread * rep.e_min && rep.diagonal > 0 && rep.n_lo > 0.0 &&
                  rep.n_hi <= options.diagonal_spread * rep.n_lo;
    return rep;
}

nlohmann::json DoublingReport::to_json() const
{
    nlohmann::json grid = nlohmann::json::array();
    for (const auto &r : rows) {
        grid.push_back({{"x", point_json(r.x)},
                        {"r", r.r},
                        {"V_r", r.v_r},
                        {"V_2r", r.v_2r},
                        {"stderr_r", r.stderr_r},
                        {"ratio", r.ratio},
                        {"V_over_Vhat_r", r.comparability_r},
                        {"V_over_Vhat_2r", r.comparability_2r}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"report", "doubling"},
            {"spec", spec.to_json()},
            {"max_ratio", max_ratio},
            {"cap", cap},
            {"surrogate_range", surrogate_range},
            {"comparability_min", comparability_min},
            {"comparability_max", comparability_max},
            {"spread", spread},
            {"spread_limit", spread_limit},
            {"pass", pass},
            {"grid", grid}};
}

double doubling_cap(const DomainSpec &spec)
{
    const double n = static_cast<double>(spec.dimension());
    switch (spec.kind()) {
    case DomainKind::Interval:
        return 4.0 * std::pow(4.0, std::abs(spec.alpha() + 0.5) + std::abs(spec.beta() + 0.5));
    case DomainKind::Ball:
        return std::pow(2.0, n + 1.0) * std::pow(4.0, std::abs(spec.gamma()));
    case DomainKind::Simplex: {
        double s = 0.0;
        for (const double k : spec.kappa()) {
            s += std::abs(k);
        }
        return std::pow(2.0, n + 1.0) * std::pow(4.0, s);
    }
    }
    return 0.0;
}

double surrogate_range(const DomainSpec &spec) { return spec.kind() == DomainKind::Simplex ? 1.0 : std::numbers::pi; }

DoublingReport doubling_scan(const VolumeOracle &vol, std::span<const Point> points, std::span<const double> radii,
                             double spread_limit)
{
    for (const double r : radii) {
        if (!(r > 0.0) || r > std::numbers::pi / 2) {
            throw ArgumentError("doubling radii must lie in (0, pi/2], got " + format_number(r));
        }
    }
    DoublingReport rep{vol.spec};
    rep.spread_limit = spread_limit;
    rep.cap = doubling_cap(vol.spec);
    rep.surrogate_range = surrogate_range(vol.spec);
    rep.rows.resize(points.size() * radii.size());
    parallel_for(rep.rows.size(), [&](std::size_t q) {
        const Point &x = points[q / radii.size()];
        const double r = radii[q % radii.size()];
        const VolumeEstimate a = vol(x, r);
        const VolumeEstimate b = vol(x, 2.0 * r);
        if (a.stderr_ > 0.05 * a.value) {
            throw PrecisionError("volume estimate at r = " + format_number(r) + " has stderr " +
                                 format_number(a.stderr_) + " above 5% of " + format_number(a.value) +
                                 "; raise the sample budget");
        }
        DoublingRow &row = rep.rows[q];
        row.x = x;
        row.r = r;
        row.v_r = a.value;
        row.v_2r = b.value;
        row.stderr_r = a.stderr_;
        row.ratio = b.value / a.value;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.comparability_r = r <= rep.surrogate_range ? a.value / volume_surrogate(vol.spec, x, r) : nan;
        row.comparability_2r = 2.0 * r <= rep.surrogate_range ? b.value / volume_surrogate(vol.spec, x, 2.0 * r) : nan;
    });
    rep.comparability_min = std::numeric_limits<double>::infinity();
    rep.comparability_max = 0.0;
    for (const auto &row : rep.rows) {
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        for (const double c : {row.comparability_r, row.comparability_2r}) {
            if (std::isnan(c)) {
                continue;
            }
            rep.comparability_min = std::min(rep.comparability_min, c);
            rep.comparability_max = std::max(rep.comparability_max, c);
        }
    }
    rep.spread = rep.comparability_max > 0.0 ? rep.comparability_max / rep.comparability_min : 0.0;
    rep.pass = !rep.rows.empty() && rep.max_ratio <= rep.cap && rep.spread <= spread_limit;
    return rep;
}

nlohmann::json WeightOscillationReport::to_json() const
{
    nlohmann::json grid = nlohmann::json::array();
    for (const auto &r : rows) {
        grid.push_back({{"x", point_json(r.x)}, {"r", r.r}, {"theta", r.theta}, {"ratio", r.ratio}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"report", "weight_oscillation"},
            {"spec", spec.to_json()},
            {"separation", separation},
            {"max_ratio", max_ratio},
            {"bound", bound},
            {"pass", pass},
            {"grid", grid}};
}

WeightOscillationReport weight_oscillation_scan(const DomainSpec &spec, std::span<const Point> points,
                                                std::span<const double> radii, double separation)
{
    if (spec.kind() != DomainKind::Ball) {
        throw ArgumentError("weight oscillation scan is certified for the ball only");
    }
    if (!(separation > 1.0)) {
        throw ArgumentError("weight oscillation separation N must exceed 1");
    }
    WeightOscillationReport rep{spec, separation};
    const double g = spec.gamma();
    rep.bound = std::pow(2.0 * std::numbers::pi, 2.0 * std::abs(g));
    for (const auto &x : points) {
        const double theta = boundary_distance(spec, x);
        for (const double r : radii) {
            if (r > std::numbers::pi / 4 || theta < separation * r) {
                continue;
            }
            const double lo = std::sin(theta - r);
            const double hi = std::sin(std::min(theta + r, std::numbers::pi / 2));
            const double ratio = std::pow(hi / lo, 2.0 * std::abs(g));
            rep.rows.push_back({x, r, theta, ratio});
            rep.max_ratio = std::max(rep.max_ratio, ratio);
        }
    }
    rep.pass = !rep.rows.empty() && rep.max_ratio <= rep.bound;
    return rep;
}

} // namespace polyheat::validation
