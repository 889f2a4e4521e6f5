#include "polyheat/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/rng.hpp"

namespace polyheat {

namespace {

using std::numbers::pi;

/// Beta(a, b) conditioned on [lo, hi]; upper-tail intervals work with complements for accuracy.
class TruncatedBeta {
public:
    TruncatedBeta(double a, double b, double lo, double hi) : a_(a), b_(b), lo_(lo), hi_(hi)
    {
        lo_ = std::clamp(lo_, 0.0, 1.0);
        hi_ = std::clamp(hi_, 0.0, 1.0);
        if (!(hi_ > lo_)) {
            empty_ = true;
            return;
        }
        const double f_lo = boost::math::ibeta(a_, b_, lo_);
        complement_ = f_lo > 0.5;
        if (complement_) {
            p_lo_ = boost::math::ibetac(a_, b_, hi_);
            p_hi_ = boost::math::ibetac(a_, b_, lo_);
        } else {
            p_lo_ = f_lo;
            p_hi_ = boost::math::ibeta(a_, b_, hi_);
        }
    }

    double probability() const { return empty_ ? 0.0 : std::max(0.0, p_hi_ - p_lo_); }

    double sample(double u) const
    {
        const double p = p_lo_ + u * (p_hi_ - p_lo_);
        const double v = complement_ ? boost::math::ibetac_inv(a_, b_, p) : boost::math::ibeta_inv(a_, b_, p);
        return std::clamp(v, lo_, hi_);
    }

private:
    double a_;
    double b_;
    double lo_;
    double hi_;
    bool empty_ = false;
    bool complement_ = false;
    double p_lo_ = 0.0;
    double p_hi_ = 0.0;
};

double sq_sin(double angle)
{
    const double s = std::sin(std::clamp(angle, 0.0, pi / 2));
    return s * s;
}

VolumeEstimate interval_volume(const DomainSpec &spec, double x, double r)
{
    const double theta = std::acos(std::clamp(x, -1.0, 1.0));
    const double y_lo = std::cos(std::min(pi, theta + r));
    const double y_hi = std::cos(std::max(0.0, theta - r));
    // u = (1 + y) / 2 carries density proportional to u^beta (1 - u)^alpha.
    const TruncatedBeta tb(spec.beta() + 1.0, spec.alpha() + 1.0, 0.5 * (1.0 + y_lo), 0.5 * (1.0 + y_hi));
    return {total_mass(spec) * tb.probability(), 0.0, VolumeMethod::Exact1D, 0};
}

// Uniform samples of the spherical cap of angle r around u in S^n, each carrying weight(v); the weight
// must be bounded for the estimate to have finite variance.
template <class Weight>
VolumeEstimate sphere_cap_mc(std::size_t n, const Point &u, double r, std::uint64_t count, std::uint64_t key,
                             Weight weight)
{
    const double h = 0.5 * static_cast<double>(n);
    // (1 - cos psi)/2 ~ Beta(n/2, n/2) under the uniform measure on S^n.
    const double half = std::sin(0.5 * std::min(r, pi));
    const TruncatedBeta height(h, h, 0.0, half * half);
    const double sphere_area = 2.0 * std::pow(pi, h + 0.5) / std::tgamma(h + 0.5);
    const double cap_area = sphere_area * height.probability();
    CounterRng rng(key);
    std::normal_distribution<double> normal;
    Point e(n + 1);
    Point v(n + 1);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const double b = height.sample((static_cast<double>(i) + rng.uniform()) / static_cast<double>(count));
        const double c = 1.0 - 2.0 * b;
        const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
        double dot = 0.0;
        for (std::size_t d = 0; d <= n; ++d) {
            e[d] = normal(rng);
            dot += e[d] * u[d];
        }
        double norm2 = 0.0;
        for (std::size_t d = 0; d <= n; ++d) {
            e[d] -= dot * u[d];
            norm2 += e[d] * e[d];
        }
        const double scale = sn / std::sqrt(norm2);
        for (std::size_t d = 0; d <= n; ++d) {
            v[d] = c * u[d] + scale * e[d];
        }
        const double w = weight(v);
        sum += w;
        sum_sq += w * w;
    }
    const double cnt = static_cast<double>(count);
    const double mean = sum / cnt;
    const double var = std::max(0.0, sum_sq / cnt - mean * mean);
    return {cap_area * mean, cap_area * std::sqrt(var / cnt), VolumeMethod::MonteCarlo, count};
}

// Ball, gamma >= 0: sphere weight v_{n+1}^{2 gamma} on the upper hemisphere.
VolumeEstimate ball_cap_mc(const DomainSpec &spec, std::span<const double> x, double r, const VolumeBudget &budget)
{
    const std::size_t n = spec.dimension();
    const double g2 = 2.0 * spec.gamma();
    return sphere_cap_mc(n, chart_lift(spec, x), r, budget.samples, query_key(budget.seed, x, r),
                         [n, g2](const Point &v) {
                             const double top = v[n];
                             if (top <= 0.0) {
                                 return 0.0;
                             }
                             return g2 == 0.0 ? 1.0 : std::pow(top, g2);
                         });
}

// Simplex, all kappa_i >= 0: sphere weight 2^n prod |v_i|^{2 kappa_i} on the positive orthant.
VolumeEstimate simplex_cap_mc(const DomainSpec &spec, std::span<const double> x, double r,
                              const VolumeBudget &budget)
{
    const std::size_t n = spec.dimension();
    const std::vector<double> k2 = [&] {
        std::vector<double> out;
        for (const double k : spec.kappa()) {
            out.push_back(2.0 * k);
        }
        return out;
    }();
    const double scale = std::ldexp(1.0, static_cast<int>(n));
    return sphere_cap_mc(n, chart_lift(spec, x), r, budget.samples, query_key(budget.seed, x, r),
                         [&k2, scale](const Point &v) {
                             double w = scale;
                             for (std::size_t d = 0; d < v.size(); ++d) {
                                 if (v[d] <= 0.0) {
                                     return 0.0;
                                 }
                                 if (k2[d] != 0.0) {
                                     w *= std::pow(v[d], k2[d]);
                                 }
                             }
                             return w;
                         });
}

VolumeEstimate ball_mc(const DomainSpec &spec, std::span<const double> x, double r, const VolumeBudget &budget)
{
    if (spec.gamma() >= 0.0) {
        return ball_cap_mc(spec, x, r, budget);
    }
    const std::size_t n = spec.dimension();
    double r2 = 0.0;
    for (const double v : x) {
        r2 += v * v;
    }
    // Angle from the north pole of the lifted point; |theta_y - theta_x| <= rho(x, y).
    const double theta = std::asin(std::sqrt(std::min(1.0, r2)));
    const TruncatedBeta shell(0.5 * static_cast<double>(n), spec.gamma() + 0.5, sq_sin(theta - r), sq_sin(theta + r));
    const double shell_mass = total_mass(spec) * shell.probability();
    const std::uint64_t count = budget.samples;
    CounterRng rng(query_key(budget.seed, x, r));
    std::normal_distribution<double> normal;
    const Point u = chart_lift(spec, x);
    Point v(n + 1);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const double s = shell.sample((static_cast<double>(i) + rng.uniform()) / static_cast<double>(count));
        const double rad = std::sqrt(s);
        double norm2 = 0.0;
        if (n == 1) {
            v[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
            norm2 = 1.0;
        } else {
            for (std::size_t d = 0; d < n; ++d) {
                v[d] = normal(rng);
                norm2 += v[d] * v[d];
            }
        }
        const double scale = rad / std::sqrt(norm2);
        for (std::size_t d = 0; d < n; ++d) {
            v[d] *= scale;
        }
        v[n] = std::sqrt(std::max(0.0, 1.0 - s));
        if (sphere_angle(u, v) < r) {
            ++hits;
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(count);
    return {shell_mass * p, shell_mass * std::sqrt(p * (1.0 - p) / static_cast<double>(count)),
            VolumeMethod::MonteCarlo, count};
}

VolumeEstimate simplex_mc(const DomainSpec &spec, std::span<const double> x, double r, const VolumeBudget &budget)
{
    const auto &kk = spec.kappa();
    // n = 1 stays on the shell sampler, whose single window probability is exact.
    if (spec.dimension() > 1 && std::all_of(kk.begin(), kk.end(), [](double k) { return k >= 0.0; })) {
        return simplex_cap_mc(spec, x, r, budget);
    }
    const std::size_t n = spec.dimension();
    const auto &kappa = spec.kappa();
    // Coordinate windows: |asin sqrt(y_i) - asin sqrt(x_i)| <= rho(x, y) for every lifted coordinate.
    std::vector<double> lo(n + 1);
    std::vector<double> hi(n + 1);
    double rest = 1.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double xi = i < n ? std::max(0.0, x[i]) : std::max(0.0, rest);
        if (i < n) {
            rest -= x[i];
        }
        const double a = std::asin(std::sqrt(std::min(1.0, xi)));
        lo[i] = sq_sin(a - r);
        hi[i] = sq_sin(a + r);
    }
    std::vector<double> tail(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        tail[i] = tail[i + 1] + kappa[i + 1] + 0.5;
    }
    const std::uint64_t count = budget.samples;
    CounterRng rng(query_key(budget.seed, x, r));
    const Point u = chart_lift(spec, x);
    Point y(n);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t s = 0; s < count; ++s) {
        double rem = 1.0;
        double weight = 1.0;
        for (std::size_t i = 0; i < n && weight > 0.0; ++i) {
            // Stick-breaking: x_i = u_i * rem with u_i ~ Beta(kappa_i + 1/2, sum_{j>i}(kappa_j + 1/2)).
            const TruncatedBeta tb(kappa[i] + 0.5, tail[i], lo[i] / rem, hi[i] / rem);
            const double pr = tb.probability();
            weight *= pr;
            if (pr <= 0.0) {
                break;
            }
            const double w = i == 0 ? (static_cast<double>(s) + rng.uniform()) / static_cast<double>(count)
                                    : rng.uniform();
            const double ui = tb.sample(w);
            y[i] = ui * rem;
            rem *= 1.0 - ui;
        }
        if (weight <= 0.0) {
            continue;
        }
        if (sphere_angle(u, chart_lift(spec, y)) < r) {
            sum += weight;
            sum_sq += weight * weight;
        }
    }
    const double cnt = static_cast<double>(count);
    const double mean = sum / cnt;
    const double var = std::max(0.0, sum_sq / cnt - mean * mean);
    const double mass = total_mass(spec);
    return {mass * mean, mass * std::sqrt(var / cnt), VolumeMethod::MonteCarlo, count};
}

} // namespace

std::string to_string(VolumeMethod method) { return method == VolumeMethod::Exact1D ? "exact_1d" : "monte_carlo"; }

nlohmann::json VolumeEstimate::to_json() const
{
    return {{"value", value}, {"stderr", stderr_}, {"method", to_string(method)}, {"samples", samples}};
}

VolumeEstimate ball_volume(const DomainSpec &spec, std::span<const double> x, double r, const VolumeBudget &budget)
{
    require_in_domain(spec, x);
    if (!(r > 0.0)) {
        throw ArgumentError("ball_volume needs r > 0, got r = " + std::to_string(r));
    }
    if (spec.kind() == DomainKind::Interval) {
        return interval_volume(spec, x[0], r);
    }
    if (r >= pi) {
        return {total_mass(spec), 0.0, VolumeMethod::MonteCarlo, 0};
    }
    if (budget.samples == 0) {
        throw ArgumentError("Monte Carlo volume needs a positive sample budget");
    }
    return spec.kind() == DomainKind::Ball ? ball_mc(spec, x, r, budget) : simplex_mc(spec, x, r, budget);
}

} // namespace polyheat
