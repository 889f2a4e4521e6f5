#include "polyheat/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "polyheat/errors.hpp"
#include "polyheat/parallel.hpp"

namespace polyheat {

namespace {

/// Ratio test window for the extrapolated heat tail.
constexpr std::size_t kRatioWindow = 5;
constexpr double kMaxRatio = 0.9;

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

double level_kernel(const OrthonormalBasis &b, std::size_t k, const BasisSample &x, const BasisSample &y)
{
    double s = 0.0;
    for (std::size_t m = b.level_begin(k); m < b.level_end(k); ++m) {
        s += x.values[m] * y.values[m];
    }
    return s;
}

/// Sum phi_k P_k(x, y) up to the smallest K with sum_{k > K} bound_k + beyond <= epsilon.
/// Returns nullopt when even the full sum misses epsilon.
std::optional<KernelValue> truncated_sum(const OrthonormalBasis &b, std::span<const double> phi,
                                         std::span<const double> bound, double beyond, double epsilon,
                                         const BasisSample &x, const BasisSample &y, bool allow_miss)
{
    const std::size_t cap = phi.size() - 1;
    std::vector<double> suffix(cap + 1);
    double acc = beyond;
    for (std::size_t k = cap + 1; k-- > 0;) {
        suffix[k] = acc;
        acc += bound[k];
    }
    std::size_t K = 0;
    while (K < cap && suffix[K] > epsilon) {
        ++K;
    }
    if (suffix[K] > epsilon && !allow_miss) {
        return std::nullopt;
    }
    KernelValue out;
    for (std::size_t k = 0; k <= K; ++k) {
        if (phi[k] != 0.0) {
            out.value += phi[k] * level_kernel(b, k, x, y);
        }
    }
    out.tail = suffix[K];
    out.levels = K + 1;
    return out;
}

} // namespace

TruncationPolicy TruncationPolicy::defaults(const OrthonormalBasis &basis, double epsilon)
{
    TruncationPolicy p;
    p.epsilon = epsilon;
    p.hard_cap = basis.max_degree();
    if (p.hard_cap == 0) {
        throw ArgumentError("heat kernels need a basis of max_degree >= 1");
    }
    p.t_min = 30.0 / basis.lambda(p.hard_cap);
    return p;
}

void TruncationPolicy::validate() const
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ArgumentError("truncation epsilon must be positive, got " + fmt(epsilon));
    }
    if (!(t_min > 0.0) || !std::isfinite(t_min)) {
        throw ArgumentError("truncation t_min must be positive, got " + fmt(t_min));
    }
    if (hard_cap == 0) {
        throw ArgumentError("truncation hard_cap must be at least 1");
    }
}

nlohmann::json TruncationPolicy::to_json() const
{
    return {{"epsilon", epsilon}, {"t_min", t_min}, {"hard_cap", hard_cap}};
}

std::string to_string(MultiplierFamily f)
{
    switch (f) {
    case MultiplierFamily::HeatExp:
        return "heat_exp";
    case MultiplierFamily::SmoothBump:
        return "smooth_bump";
    case MultiplierFamily::SincPower:
        return "sinc_power";
    }
    return "unknown";
}

MultiplierFamily parse_multiplier_family(const std::string &name)
{
    if (name == "heat_exp") {
        return MultiplierFamily::HeatExp;
    }
    if (name == "smooth_bump") {
        return MultiplierFamily::SmoothBump;
    }
    if (name == "sinc_power") {
        return MultiplierFamily::SincPower;
    }
    throw ArgumentError("unknown multiplier family '" + name + "' (expected heat_exp, smooth_bump or sinc_power)");
}

MultiplierSpec MultiplierSpec::heat_exp() { return {}; }

MultiplierSpec MultiplierSpec::smooth_bump(double radius, unsigned order)
{
    MultiplierSpec s;
    s.family = MultiplierFamily::SmoothBump;
    s.radius = radius;
    s.order = order;
    s.validate();
    return s;
}

MultiplierSpec MultiplierSpec::sinc_power(double band, unsigned order)
{
    MultiplierSpec s;
    s.family = MultiplierFamily::SincPower;
    s.band = band;
    s.order = order;
    s.validate();
    return s;
}

double MultiplierSpec::operator()(double u) const
{
    u = std::abs(u);
    switch (family) {
    case MultiplierFamily::HeatExp:
        return std::exp(-u * u);
    case MultiplierFamily::SmoothBump: {
        if (u >= radius) {
            return 0.0;
        }
        const double z = u / radius;
        return std::exp(1.0 - 1.0 / (1.0 - z * z));
    }
    case MultiplierFamily::SincPower: {
        const double v = 0.5 * band * u;
        if (v == 0.0) {
            return 1.0;
        }
        return std::pow(std::sin(v) / v, 2.0 * order);
    }
    }
    return 0.0;
}

double MultiplierSpec::envelope(double u) const
{
    u = std::abs(u);
    if (family == MultiplierFamily::SincPower) {
        const double v = 0.5 * band * u;
        return v <= 1.0 ? 1.0 : std::pow(v, -2.0 * order);
    }
    return (*this)(u);
}

std::optional<double> MultiplierSpec::support() const
{
    if (family == MultiplierFamily::SmoothBump) {
        return radius;
    }
    return std::nullopt;
}

double MultiplierSpec::fourier_support() const
{
    return family == MultiplierFamily::SincPower ? order * band : std::numeric_limits<double>::infinity();
}

void MultiplierSpec::validate() const
{
    if (family == MultiplierFamily::SmoothBump && !(radius > 0.0 && std::isfinite(radius))) {
        throw ArgumentError("smooth_bump radius must be positive, got " + fmt(radius));
    }
    if (family == MultiplierFamily::SincPower && !(band > 0.0 && std::isfinite(band))) {
        throw ArgumentError("sinc_power band must be positive, got " + fmt(band));
    }
    if (family != MultiplierFamily::HeatExp && order == 0) {
        throw ArgumentError("multiplier order m must be at least 1");
    }
}

std::string MultiplierSpec::describe() const
{
    std::ostringstream os;
    switch (family) {
    case MultiplierFamily::HeatExp:
        os << "heat_exp";
        break;
    case MultiplierFamily::SmoothBump:
        os << "smooth_bump(R=" << radius << ", m=" << order << ")";
        break;
    case MultiplierFamily::SincPower:
        os << "sinc_power(A=" << band << ", m=" << order << ")";
        break;
    }
    return os.str();
}

nlohmann::json MultiplierSpec::to_json() const
{
    nlohmann::json j{{"family", to_string(family)}};
    if (family == MultiplierFamily::SmoothBump) {
        j["radius"] = radius;
        j["order"] = order;
    } else if (family == MultiplierFamily::SincPower) {
        j["band"] = band;
        j["order"] = order;
    }
    return j;
}

HeatKernelEvaluator::HeatKernelEvaluator(std::shared_ptr<const OrthonormalBasis> basis)
    : HeatKernelEvaluator(basis, TruncationPolicy::defaults(*basis))
{
}

HeatKernelEvaluator::HeatKernelEvaluator(std::shared_ptr<const OrthonormalBasis> basis, TruncationPolicy policy)
    : basis_(std::move(basis)), policy_(policy)
{
    if (!basis_) {
        throw ArgumentError("heat kernel evaluator needs a basis");
    }
    policy_.validate();
    if (policy_.hard_cap > basis_->max_degree()) {
        throw ArgumentError("truncation hard_cap " + std::to_string(policy_.hard_cap) + " exceeds basis max_degree " +
                            std::to_string(basis_->max_degree()));
    }
}

BasisSample HeatKernelEvaluator::sample(std::span<const double> x) const { return basis_->sample(x); }

void HeatKernelEvaluator::require_time(double t) const
{
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw ArgumentError("heat kernel time must be positive and finite, got t = " + fmt(t));
    }
    if (t < policy_.t_min) {
        throw RefusalError("t = " + fmt(t) + " is below t_min = " + fmt(policy_.t_min) + " for max_degree " +
                           std::to_string(policy_.hard_cap) + "; the tail target " + fmt(policy_.epsilon) +
                           " is achievable for t >= " + fmt(policy_.t_min) + " (or build a larger basis)");
    }
}

KernelValue HeatKernelEvaluator::heat_sum(double t, const BasisSample &x, const BasisSample &y) const
{
    const std::size_t cap = policy_.hard_cap;
    std::vector<double> phi(cap + 1);
    std::vector<double> bound(cap + 1);
    std::vector<double> envelope(cap + 1);
    double dx = 0.0;
    double dy = 0.0;
    for (std::size_t k = 0; k <= cap; ++k) {
        phi[k] = std::exp(-basis_->lambda(k) * t);
        bound[k] = phi[k] * std::sqrt(x.christoffel[k] * y.christoffel[k]);
        dx = std::max(dx, x.christoffel[k]);
        dy = std::max(dy, y.christoffel[k]);
        envelope[k] = phi[k] * std::sqrt(dx * dy);
    }
    // Geometric extrapolation past the cap from the envelope ratio over the last levels.
    double q = 0.0;
    for (std::size_t k = cap > kRatioWindow ? cap - kRatioWindow : 0; k < cap; ++k) {
        if (envelope[k] > 0.0) {
            q = std::max(q, envelope[k + 1] / envelope[k]);
        }
    }
    if (q > kMaxRatio) {
        throw RefusalError("heat kernel tail at t = " + fmt(t) + " decays with ratio " + fmt(q) + " > " +
                           fmt(kMaxRatio) + " at max_degree " + std::to_string(cap) +
                           "; epsilon is met for t >= " + fmt(achievable_t(x, y)) + " (or build a larger basis)");
    }
    const double beyond = envelope[cap] * q / (1.0 - q);
    auto r = truncated_sum(*basis_, phi, bound, beyond, policy_.epsilon, x, y, false);
    if (!r) {
        throw RefusalError("heat kernel tail bound at t = " + fmt(t) + " exceeds epsilon = " + fmt(policy_.epsilon) +
                           " with all " + std::to_string(cap + 1) + " levels; epsilon is met for t >= " +
                           fmt(achievable_t(x, y)) + " (or build a larger basis)");
    }
    return *r;
}

double HeatKernelEvaluator::achievable_t(const BasisSample &x, const BasisSample &y) const
{
    double t = policy_.t_min;
    for (int i = 0; i < 400; ++i, t *= 1.05) {
        try {
            const auto cap = policy_.hard_cap;
            // Probe the full tail directly; heat_sum would recurse on failure.
            double dx = 0.0;
            double dy = 0.0;
            double tail = 0.0;
            std::vector<double> env(cap + 1);
            for (std::size_t k = 0; k <= cap; ++k) {
                dx = std::max(dx, x.christoffel[k]);
                dy = std::max(dy, y.christoffel[k]);
                env[k] = std::exp(-basis_->lambda(k) * t) * std::sqrt(dx * dy);
            }
            double q = 0.0;
            for (std::size_t k = cap > kRatioWindow ? cap - kRatioWindow : 0; k < cap; ++k) {
                if (env[k] > 0.0) {
                    q = std::max(q, env[k + 1] / env[k]);
                }
            }
            if (q <= kMaxRatio) {
                tail = env[cap] * q / (1.0 - q);
                if (tail <= policy_.epsilon) {
                    return t;
                }
            }
        } catch (const std::exception &) {
        }
    }
    return std::numeric_limits<double>::infinity();
}

KernelValue HeatKernelEvaluator::heat_kernel(double t, std::span<const double> x, std::span<const double> y) const
{
    require_time(t);
    return heat_sum(t, sample(x), sample(y));
}

KernelValue HeatKernelEvaluator::heat_kernel(double t, const BasisSample &x, const BasisSample &y) const
{
    require_time(t);
    return heat_sum(t, x, y);
}

KernelValue HeatKernelEvaluator::multiplier_kernel(const MultiplierSpec &phi, double delta, std::span<const double> x,
                                                   std::span<const double> y) const
{
    return multiplier_kernel(phi, delta, sample(x), sample(y));
}

KernelValue HeatKernelEvaluator::multiplier_kernel(const MultiplierSpec &phi, double delta, const BasisSample &x,
                                                   const BasisSample &y) const
{
    phi.validate();
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ArgumentError("multiplier scale delta must be positive, got " + fmt(delta));
    }
    const std::size_t cap = policy_.hard_cap;
    if (phi.family == MultiplierFamily::HeatExp) {
        return heat_sum(delta * delta, x, y);
    }
    std::vector<double> w(cap + 1);
    std::vector<double> bound(cap + 1);
    for (std::size_t k = 0; k <= cap; ++k) {
        const double u = delta * std::sqrt(basis_->lambda(k));
        w[k] = phi(u);
        bound[k] = phi.envelope(u) * std::sqrt(x.christoffel[k] * y.christoffel[k]);
    }
    if (phi.family == MultiplierFamily::SmoothBump) {
        if (delta * std::sqrt(basis_->lambda(cap)) < phi.radius) {
            throw CapacityError("spectral band of " + phi.describe() + " at delta = " + fmt(delta) +
                                " extends past max_degree " + std::to_string(cap) + " (delta sqrt(lambda_cap) = " +
                                fmt(delta * std::sqrt(basis_->lambda(cap))) +
                                " < R); raise max_degree or delta");
        }
        KernelValue out;
        for (std::size_t k = 0; k <= cap && w[k] != 0.0; ++k) {
            out.value += w[k] * level_kernel(*basis_, k, x, y);
            out.levels = k + 1;
        }
        return out;
    }
    // SincPower: power-law tail. Past the cap, C_k is bounded by its growth over the last octave.
    const std::size_t half = std::max<std::size_t>(1, cap / 2);
    double dx_half = 0.0;
    double dy_half = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    for (std::size_t k = 0; k <= cap; ++k) {
        dx = std::max(dx, x.christoffel[k]);
        dy = std::max(dy, y.christoffel[k]);
        if (k == half) {
            dx_half = dx;
            dy_half = dy;
        }
    }
    double growth = 0.0;
    if (cap > half && dx_half > 0.0 && dy_half > 0.0) {
        growth = 0.5 * std::log(dx * dy / (dx_half * dy_half)) / std::log(static_cast<double>(cap) / half);
    }
    growth = std::max(0.0, growth);
    const double s = 2.0 * phi.order - growth;
    if (s <= 1.05) {
        throw RefusalError("sinc_power of order " + std::to_string(phi.order) +
                           " decays too slowly against Christoffel growth k^" + fmt(growth) +
                           " to bound the tail; raise m");
    }
    const double c = static_cast<double>(cap);
    const double mu = std::min(1.0, basis_->lambda(cap) / (c * c));
    const double beyond = std::sqrt(dx * dy) * std::pow(c, -growth) *
                          std::pow(2.0 / (phi.band * delta * std::sqrt(mu)), 2.0 * phi.order) *
                          std::pow(c, 1.0 - s) / (s - 1.0);
    return *truncated_sum(*basis_, w, bound, beyond, policy_.epsilon, x, y, true);
}

double HeatKernelEvaluator::mass_check(double t, std::span<const double> x) const
{
    return mass_check(t, x, basis_->quadrature());
}

double HeatKernelEvaluator::mass_check(double t, std::span<const double> x, const QuadratureRule &quad) const
{
    require_time(t);
    const BasisSample sx = sample(x);
    std::vector<double> terms(quad.size());
    parallel_for(quad.size(), [&](std::size_t q) {
        terms[q] = quad.weight(q) * heat_sum(t, sx, sample(quad.node(q))).value;
    });
    double s = 0.0;
    for (const double v : terms) {
        s += v;
    }
    return s;
}

double HeatKernelEvaluator::semigroup_check(double s, double t, std::span<const double> x,
                                            std::span<const double> z) const
{
    return semigroup_check(s, t, x, z, basis_->quadrature());
}

double HeatKernelEvaluator::semigroup_check(double s, double t, std::span<const double> x, std::span<const double> z,
                                            const QuadratureRule &quad) const
{
    require_time(s);
    require_time(t);
    const BasisSample sx = sample(x);
    const BasisSample sz = sample(z);
    const double direct = heat_sum(s + t, sx, sz).value;
    std::vector<double> terms(quad.size());
    parallel_for(quad.size(), [&](std::size_t q) {
        const BasisSample sy = sample(quad.node(q));
        terms[q] = quad.weight(q) * heat_sum(s, sx, sy).value * heat_sum(t, sy, sz).value;
    });
    double composed = 0.0;
    for (const double v : terms) {
        composed += v;
    }
    return std::abs(direct - composed);
}

double HeatKernelEvaluator::self_adjointness_check(double t, const MultiPoly &f, const MultiPoly &g) const
{
    require_time(t);
    const QuadratureRule &quad = basis_->quadrature();
    const std::size_t Q = quad.size();
    std::vector<BasisSample> nodes(Q);
    std::vector<double> fv(Q);
    std::vector<double> gv(Q);
    parallel_for(Q, [&](std::size_t q) {
        nodes[q] = sample(quad.node(q));
        fv[q] = poly_eval(f, quad.node(q));
        gv[q] = poly_eval(g, quad.node(q));
    });
    // (e^{tL} f)(y_q) and (e^{tL} g)(y_q), each row summed with its own kernel evaluations.
    std::vector<double> tf(Q);
    std::vector<double> tg(Q);
    parallel_for(Q, [&](std::size_t q) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t r = 0; r < Q; ++r) {
            const double k = heat_sum(t, nodes[q], nodes[r]).value;
            a += quad.weight(r) * k * fv[r];
            b += quad.weight(r) * k * gv[r];
        }
        tf[q] = a;
        tg[q] = b;
    });
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
        lhs += quad.weight(q) * tf[q] * gv[q];
        rhs += quad.weight(q) * fv[q] * tg[q];
    }
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

} // namespace polyheat
