#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "polyheat/geometry.hpp"
#include "polyheat/volume.hpp"

using namespace polyheat;
using std::numbers::pi;

namespace {

// V(x, r) on the disc by integrating the angular arc length in s = |y|^2.
double disc_volume(double gamma, double rx, double r)
{
    const double cx = std::sqrt(1.0 - rx * rx);
    auto arc = [&](double s) {
        if (s <= 0.0) {
            return cx > std::cos(r) ? 2.0 * pi : 0.0;
        }
        const double c = (std::cos(r) - std::sqrt(1.0 - s) * cx) / (std::sqrt(s) * rx);
        if (c <= -1.0) {
            return 2.0 * pi;
        }
        if (c >= 1.0) {
            return 0.0;
        }
        return 2.0 * std::acos(c);
    };
    const double th = std::asin(rx);
    const double lo = std::pow(std::sin(std::max(0.0, th - r)), 2);
    const double hi = std::pow(std::sin(std::min(pi / 2, th + r)), 2);
    boost::math::quadrature::tanh_sinh<double> ts;
    // The second argument is the signed offset to the nearer endpoint (negative on the left half);
    // it keeps 1 - s accurate near s = 1.
    return ts.integrate(
        [&](double s, double sc) {
            const double one_minus = sc > 0 ? sc + (1.0 - hi) : 1.0 - s;
            return 0.5 * std::pow(one_minus, gamma - 0.5) * arc(s);
        },
        lo, hi);
}

// Rejection estimate from plain Dirichlet sampling, independent of the library sampler.
std::pair<double, double> dirichlet_volume(const DomainSpec &spec, const Point &x, double r, int count)
{
    std::mt19937_64 rng(4242);
    const auto &kappa = spec.kappa();
    std::vector<std::gamma_distribution<double>> g;
    for (const double k : kappa) {
        g.emplace_back(k + 0.5, 1.0);
    }
    int hits = 0;
    Point y(spec.dimension());
    for (int s = 0; s < count; ++s) {
        std::vector<double> z(kappa.size());
        double total = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] = g[i](rng);
            total += z[i];
        }
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = z[i] / total;
        }
        double sum = 0.0;
        for (const double v : y) {
            sum += v;
        }
        if (sum > 1.0) {
            continue;
        }
        if (distance(spec, x, y) < r) {
            ++hits;
        }
    }
    const double p = static_cast<double>(hits) / count;
    const double m = total_mass(spec);
    return {m * p, m * std::sqrt(p * (1 - p) / count)};
}

} // namespace

TEST_CASE("whole-domain radius gives the total mass")
{
    for (const auto &spec : {DomainSpec::ball(2, 0.3), DomainSpec::simplex({0.1, 0.2, 0.3}), DomainSpec::interval(0.7, -0.3)}) {
        const Point x(spec.dimension(), 0.2);
        const auto v = ball_volume(spec, x, pi);
        CHECK(v.value == doctest::Approx(total_mass(spec)).epsilon(1e-13));
        CHECK(v.stderr_ == 0.0);
    }
    CHECK_THROWS_AS(ball_volume(DomainSpec::ball(2, 0.0), Point{0.0, 0.0}, 0.0), ArgumentError);
}

TEST_CASE("interval volume is exact arc length for the Chebyshev weight")
{
    const auto spec = DomainSpec::interval(-0.5, -0.5);
    for (const double th : {0.01, 0.3, 1.0, 2.5}) {
        const auto v = ball_volume(spec, Point{1.0}, th);
        CHECK(v.value == doctest::Approx(th).epsilon(1e-12));
        CHECK(v.method == VolumeMethod::Exact1D);
    }
    for (const double th0 : {0.4, 1.2, 2.9}) {
        for (const double r : {0.05, 0.3, 1.0}) {
            const double expected = std::min(pi, th0 + r) - std::max(0.0, th0 - r);
            CHECK(ball_volume(spec, Point{std::cos(th0)}, r).value == doctest::Approx(expected).epsilon(1e-11));
        }
    }
}

TEST_CASE("interval volume matches direct weighted integration")
{
    boost::math::quadrature::tanh_sinh<double> ts;
    for (const auto [a, b] : {std::pair{0.7, -0.3}, {-0.9, 1.5}, {2.0, 0.0}}) {
        const auto spec = DomainSpec::interval(a, b);
        for (const double x : {-0.95, -0.2, 0.6, 0.999}) {
            for (const double r : {0.02, 0.4, 1.3}) {
                const double th = std::acos(x);
                const double lo = std::cos(std::min(pi, th + r));
                const double hi = std::cos(std::max(0.0, th - r));
                const double ref = ts.integrate(
                    [&](double y, double yc) {
                        const double one_minus = yc > 0 ? yc + (1.0 - hi) : 1.0 - y;
                        const double one_plus = yc < 0 ? -yc + (1.0 + lo) : 1.0 + y;
                        return std::pow(one_minus, a) * std::pow(one_plus, b);
                    },
                    lo, hi);
                CHECK(ball_volume(spec, Point{x}, r).value == doctest::Approx(ref).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("disc volume near the center is the flat area")
{
    const auto spec = DomainSpec::ball(2, 0.5);
    const auto v = ball_volume(spec, Point{0.0, 0.0}, 0.1, {100000, 1});
    CHECK(std::abs(v.value / (pi * 0.01) - 1.0) <= 0.05);
    // At the center the window is exactly the metric ball, |y| < sin r.
    CHECK(v.value == doctest::Approx(pi * std::pow(std::sin(0.1), 2)).epsilon(1e-12));
}

TEST_CASE("disc Monte Carlo agrees with the arc-length integral")
{
    for (const double gamma : {-0.4, 0.0, 1.0}) {
        const auto spec = DomainSpec::ball(2, gamma);
        for (const double rx : {0.3, 0.8, 0.99}) {
            for (const double r : {0.05, 0.2, 0.8}) {
                const auto v = ball_volume(spec, Point{rx, 0.0}, r, {200000, 7});
                const double ref = disc_volume(gamma, rx, r);
                // The arc-length integrand has square-root endpoints, so the oracle is good to about 1e-6.
                CHECK(std::abs(v.value - ref) <= 4.5 * v.stderr_ + 1e-5 * ref);
                CHECK(v.stderr_ <= 0.05 * ref);
            }
        }
    }
}

TEST_CASE("unweighted cap volume inside the hemisphere is exact")
{
    const auto spec = DomainSpec::ball(2, 0.0);
    for (const double rx : {0.0, 0.3, 0.8}) {
        for (const double r : {0.02, 0.2, 0.5}) {
            if (std::asin(rx) + r >= pi / 2) {
                continue;
            }
            const auto v = ball_volume(spec, Point{rx, 0.0}, r, {1000, 3});
            CHECK(v.value == doctest::Approx(2.0 * pi * (1.0 - std::cos(r))).epsilon(1e-12));
        }
    }
}

TEST_CASE("ball n = 1 Monte Carlo agrees with the interval formula")
{
    // The ball n = 1 with gamma is the interval with alpha = beta = gamma - 1/2.
    const auto ball = DomainSpec::ball(1, 0.8);
    const auto interval = DomainSpec::interval(0.3, 0.3);
    for (const double x : {-0.7, 0.1, 0.95}) {
        const auto v = ball_volume(ball, Point{x}, 0.3, {100000, 3});
        const auto e = ball_volume(interval, Point{x}, 0.3);
        CHECK(std::abs(v.value - e.value) <= 4.5 * v.stderr_ + 1e-12);
    }
}

TEST_CASE("simplex n = 1 Monte Carlo agrees with the Beta window")
{
    const auto spec = DomainSpec::simplex({0.2, 1.1});
    for (const double x : {0.01, 0.4, 0.9}) {
        for (const double r : {0.05, 0.3}) {
            const double a = std::asin(std::sqrt(x));
            const double lo = std::pow(std::sin(std::max(0.0, a - r)), 2);
            const double hi = std::pow(std::sin(std::min(pi / 2, a + r)), 2);
            const double ref = total_mass(spec) * (boost::math::ibeta(0.7, 1.6, hi) - boost::math::ibeta(0.7, 1.6, lo));
            const auto v = ball_volume(spec, Point{x}, r, {50000, 5});
            CHECK(std::abs(v.value - ref) <= 1e-9 * ref);
        }
    }
}

TEST_CASE("simplex n = 2 importance sampler agrees with plain Dirichlet rejection")
{
    const auto spec = DomainSpec::simplex({0.25, 0.5, 1.0});
    for (const auto &x : {Point{0.2, 0.3}, Point{0.02, 0.9}, Point{0.6, 0.05}}) {
        for (const double r : {0.15, 0.5}) {
            const auto v = ball_volume(spec, x, r, {100000, 9});
            const auto [ref, ref_err] = dirichlet_volume(spec, x, r, 400000);
            CHECK(std::abs(v.value - ref) <= 4.5 * std::hypot(v.stderr_, ref_err));
        }
    }
}

TEST_CASE("Monte Carlo is reproducible per seed")
{
    const auto spec = DomainSpec::ball(2, 0.25);
    const Point x{0.5, 0.1};
    const auto a = ball_volume(spec, x, 0.3, {20000, 11});
    const auto b = ball_volume(spec, x, 0.3, {20000, 11});
    const auto c = ball_volume(spec, x, 0.3, {20000, 12});
    CHECK(a.value == b.value);
    CHECK(a.value != c.value);
}
