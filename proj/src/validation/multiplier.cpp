#include "polyheat/validation/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/parallel.hpp"

namespace polyheat::validation {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> unordered_pairs(std::size_t count)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i; j < count; ++j) {
            out.emplace_back(i, j);
        }
    }
    return out;
}

} // namespace

nlohmann::json LocalizationOptions::to_json() const
{
    return {{"fit_lo", fit_lo},
            {"fit_hi", fit_hi},
            {"bins", bins},
            {"tail_fraction", tail_fraction},
            {"max_excluded", max_excluded},
            {"exponent_margin", exponent_margin},
            {"min_r2", min_r2}};
}

nlohmann::json LocalizationReport::to_json() const
{
    nlohmann::json grid = nlohmann::json::array();
    for (const auto &r : rows) {
        grid.push_back({{"x", point_json(r.x)},
                        {"y", point_json(r.y)},
                        {"rho", r.rho},
                        {"kernel", r.kernel},
                        {"tail", r.tail},
                        {"scaled", r.scaled},
                        {"D", r.d},
                        {"excluded", r.excluded}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"report", "localization"},
            {"phi", phi.to_json()},
            {"delta", delta},
            {"m", m},
            {"options", options.to_json()},
            {"excluded", excluded},
            {"c_m_hat", c_m_hat},
            {"diagonal_max", diagonal_max},
            {"envelope_s", envelope_s},
            {"envelope_value", envelope_value},
            {"fit", fit.to_json()},
            {"decay_exponent", decay_exponent},
            {"pass", pass},
            {"grid", grid}};
}

LocalizationReport localization_check(const HeatKernelEvaluator &ev, const MultiplierSpec &phi, double delta,
                                      unsigned m, const VolumeOracle &vol, std::span<const Point> points,
                                      const LocalizationOptions &options)
{
    const std::size_t n = ev.spec().dimension();
    if (m < n + 1) {
        throw ArgumentError("localization order m = " + std::to_string(m) + " must be at least n + 1 = " +
                            std::to_string(n + 1));
    }
    if (phi.family != MultiplierFamily::SmoothBump) {
        throw ArgumentError("localization check expects a smooth_bump multiplier, got " + phi.describe());
    }
    const std::size_t P = points.size();
    std::vector<BasisSample> samples(P);
    std::vector<double> v(P);
    parallel_for(P, [&](std::size_t i) {
        samples[i] = ev.sample(points[i]);
        v[i] = vol(points[i], delta).value;
    });
    const auto pairs = unordered_pairs(P);
    LocalizationReport rep{phi, delta, m, options};
    rep.rows.resize(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        LocalizationRow &row = rep.rows[p];
        row.x = points[i];
        row.y = points[j];
        row.rho = i == j ? 0.0 : distance(ev.spec(), points[i], points[j]);
        const KernelValue k = ev.multiplier_kernel(phi, delta, samples[i], samples[j]);
        row.kernel = k.value;
        row.tail = k.tail;
        row.scaled = std::abs(k.value) * std::sqrt(v[i] * v[j]);
        row.d = row.scaled * std::pow(1.0 + row.rho / delta, static_cast<double>(m));
        row.excluded = k.tail > options.tail_fraction * std::abs(k.value);
    });

    const double lo = std::log1p(options.fit_lo);
    const double hi = std::log1p(options.fit_hi);
    std::vector<double> best(options.bins, -1.0);
    std::vector<double> best_s(options.bins, 0.0);
    for (const auto &row : rep.rows) {
        if (row.excluded) {
            ++rep.excluded;
            continue;
        }
        rep.c_m_hat = std::max(rep.c_m_hat, row.d);
        if (row.rho == 0.0) {
            rep.diagonal_max = std::max(rep.diagonal_max, row.scaled);
        }
        const double ls = std::log1p(row.rho / delta);
        if (ls < lo || ls > hi) {
            continue;
        }
        const auto b = std::min(options.bins - 1,
                                static_cast<std::size_t>((ls - lo) / (hi - lo) * static_cast<double>(options.bins)));
        if (row.scaled > best[b]) {
            best[b] = row.scaled;
            best_s[b] = 1.0 + row.rho / delta;
        }
    }
    if (static_cast<double>(rep.excluded) > options.max_excluded * static_cast<double>(rep.rows.size())) {
        throw RefusalError("localization: " + std::to_string(rep.excluded) + " of " + std::to_string(rep.rows.size()) +
                           " grid pairs are dominated by the truncation tail; raise max_degree");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t b = 0; b < options.bins; ++b) {
        if (best[b] > 0.0) {
            rep.envelope_s.push_back(best_s[b]);
            rep.envelope_value.push_back(best[b]);
            lx.push_back(std::log(best_s[b]));
            ly.push_back(std::log(best[b]));
        }
    }
    if (lx.size() < 3) {
        throw ArgumentError("localization grid covers fewer than 3 bins of rho/delta in [" +
                            format_number(options.fit_lo) + ", " + format_number(options.fit_hi) + "]");
    }
    rep.fit = fit_line(lx, ly);
    rep.decay_exponent = -rep.fit.slope;
    rep.pass = std::isfinite(rep.c_m_hat) && rep.decay_exponent >= static_cast<double>(m) - options.exponent_margin &&
               rep.fit.r2 >= options.min_r2;
    return rep;
}

nlohmann::json FiniteSpeedOptions::to_json() const { return {{"threshold", threshold}, {"tail_limit", tail_limit}}; }

nlohmann::json FiniteSpeedReport::to_json() const
{
    return {{"schema_version", kReportSchemaVersion},
            {"report", "finite_speed"},
            {"phi", phi.to_json()},
            {"delta", delta},
            {"options", options.to_json()},
            {"pairs", pairs},
            {"max_rho", max_rho},
            {"r_star", r_star},
            {"c_star", c_star},
            {"max_tail", max_tail},
            {"max_beyond", max_beyond},
            {"profile_rho", profile_rho},
            {"profile_max", profile_max},
            {"degenerate", degenerate},
            {"pass", pass}};
}

FiniteSpeedReport finite_speed_scan(const HeatKernelEvaluator &ev, const MultiplierSpec &phi, double delta,
                                    std::span<const Point> points, const FiniteSpeedOptions &options)
{
    if (phi.family != MultiplierFamily::SincPower) {
        throw ArgumentError("finite speed scan expects a sinc_power multiplier, got " + phi.describe());
    }
    const std::size_t P = points.size();
    std::vector<BasisSample> samples(P);
    parallel_for(P, [&](std::size_t i) { samples[i] = ev.sample(points[i]); });
    const auto pairs = unordered_pairs(P);
    std::vector<double> rho(pairs.size());
    std::vector<double> mag(pairs.size());
    std::vector<double> tail(pairs.size());
    std::vector<std::size_t> levels(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        rho[p] = i == j ? 0.0 : distance(ev.spec(), points[i], points[j]);
        const KernelValue k = ev.multiplier_kernel(phi, delta, samples[i], samples[j]);
        mag[p] = std::abs(k.value);
        tail[p] = k.tail;
        levels[p] = k.levels;
    });
    FiniteSpeedReport rep{phi, delta, options, pairs.size()};
    rep.max_tail = pairs.empty() ? 0.0 : *std::max_element(tail.begin(), tail.end());
    if (rep.max_tail > options.tail_limit) {
        throw RefusalError("finite speed scan: truncation tail " + format_number(rep.max_tail) + " exceeds " +
                           format_number(options.tail_limit) + "; raise max_degree or the power m");
    }
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rho[a] > rho[b]; });
    rep.max_rho = pairs.empty() ? 0.0 : rho[order.front()];
    double running = 0.0;
    bool found = false;
    for (const std::size_t p : order) {
        if (!found && mag[p] > options.threshold) {
            rep.r_star = rho[p];
            rep.max_beyond = running;
            found = true;
        }
        running = std::max(running, mag[p]);
        if (rep.profile_rho.empty() || rep.profile_rho.back() - rho[p] > 1e-3 * rep.max_rho) {
            rep.profile_rho.push_back(rho[p]);
            rep.profile_max.push_back(running);
        } else {
            rep.profile_max.back() = running;
        }
    }
    const bool single_level = std::all_of(levels.begin(), levels.end(), [](std::size_t l) { return l <= 1; });
    rep.degenerate = single_level || !found || rep.r_star >= rep.max_rho;
    rep.c_star = rep.r_star / (delta * phi.fourier_support());
    rep.pass = !rep.degenerate && std::isfinite(rep.c_star);
    return rep;
}

} // namespace polyheat::validation
