#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "polyheat/geometry.hpp"
#include "polyheat/quadrature.hpp"

using namespace polyheat;

namespace {

void for_each_exponent(std::size_t n, int degree, const std::function<void(const std::vector<int> &)> &fn)
{
    std::vector<int> e(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == n) {
            fn(e);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[i] = k;
            rec(i + 1, left - k);
        }
    };
    rec(0, degree);
}

double monomial(std::span<const double> x, const std::vector<int> &e)
{
    double v = 1.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        v *= std::pow(x[i], e[i]);
    }
    return v;
}

// Dirichlet moment of the simplex weight.
double simplex_moment(const std::vector<double> &kappa, const std::vector<int> &e)
{
    double lg = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        const double a = kappa[i] + 0.5 + (i < e.size() ? e[i] : 0);
        lg += std::lgamma(a);
        total += a;
    }
    return std::exp(lg - std::lgamma(total));
}

// Ball moment: zero unless every exponent is even.
double ball_moment(std::size_t n, double gamma, const std::vector<int> &e)
{
    double lg = std::lgamma(gamma + 0.5);
    int deg = 0;
    for (const int a : e) {
        if (a % 2) {
            return 0.0;
        }
        lg += std::lgamma(0.5 * (a + 1));
        deg += a;
    }
    return std::exp(lg - std::lgamma(gamma + 0.5 + 0.5 * (deg + static_cast<int>(n))));
}

} // namespace

TEST_CASE("Gauss-Jacobi rule against tanh-sinh moments")
{
    boost::math::quadrature::tanh_sinh<double> ts;
    for (const auto [a, b] : {std::pair{-0.5, -0.5}, {0.0, 0.0}, {-0.9, 1.5}, {0.7, -0.3}, {3.0, -0.9}}) {
        const auto g = gauss_jacobi(12, a, b);
        for (int k = 0; k <= 23; ++k) {
            double q = 0.0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                q += g.weights[i] * std::pow(g.nodes[i], k);
            }
            const double ref = ts.integrate(
                [&](double x, double xc) {
                    // xc is the signed offset from the nearest endpoint (a - x on the left half, b - x on the right).
                    const double one_minus = x > 0 ? xc : 1.0 - x;
                    const double one_plus = x < 0 ? -xc : 1.0 + x;
                    return std::pow(x, k) * std::pow(one_minus, a) * std::pow(one_plus, b);
                },
                -1.0, 1.0);
            CHECK(std::abs(q - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("quadrature weight sums")
{
    CHECK(quadrature(DomainSpec::interval(-0.5, -0.5), 0).weight_sum() ==
          doctest::Approx(std::numbers::pi).epsilon(1e-14));
    CHECK(quadrature(DomainSpec::ball(1, 0.5), 0).weight_sum() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quadrature(DomainSpec::simplex({0.5, 0.5}), 0).weight_sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto &spec : {DomainSpec::ball(2, -0.4), DomainSpec::ball(3, 1.0), DomainSpec::simplex({-0.4, 0.0, 1.0}),
                             DomainSpec::interval(-0.9, 1.5)}) {
        const auto q = quadrature(spec, 9);
        CHECK(std::abs(q.weight_sum() - total_mass(spec)) <= 1e-12 * total_mass(spec));
        for (std::size_t i = 0; i < q.size(); ++i) {
            CHECK(q.weight(i) > 0.0);
            CHECK(in_domain(spec, q.node(i)));
        }
    }
}

TEST_CASE("monomial moments: ball")
{
    for (const std::size_t n : {1U, 2U, 3U}) {
        for (const double gamma : {-0.4, 0.0, 0.25, 1.0}) {
            const auto spec = DomainSpec::ball(n, gamma);
            const int degree = n == 3 ? 10 : 16;
            const auto q = quadrature(spec, degree);
            const double mass = total_mass(spec);
            for_each_exponent(n, degree, [&](const std::vector<int> &e) {
                const double ref = ball_moment(n, gamma, e);
                const double got = q.integrate([&](std::span<const double> x) { return monomial(x, e); });
                CHECK(std::abs(got - ref) <= 1e-11 * std::max(std::abs(ref), 1e-3 * mass));
            });
        }
    }
}

TEST_CASE("monomial moments: simplex")
{
    for (const auto &kappa : {std::vector<double>{0.5, 0.5}, std::vector<double>{-0.4, 0.0, 1.0},
                              std::vector<double>{1.0, -0.4, 0.0}, std::vector<double>{0.2, 0.3, 0.7, -0.1}}) {
        const auto spec = DomainSpec::simplex(kappa);
        const int degree = spec.dimension() == 3 ? 10 : 16;
        const auto q = quadrature(spec, degree);
        for_each_exponent(spec.dimension(), degree, [&](const std::vector<int> &e) {
            const double ref = simplex_moment(kappa, e);
            const double got = q.integrate([&](std::span<const double> x) { return monomial(x, e); });
            CHECK(std::abs(got - ref) <= 1e-11 * ref);
        });
    }
}

TEST_CASE("capacity error for oversized rules")
{
    CHECK_THROWS_AS(quadrature(DomainSpec::ball(3, 0.0), 600), CapacityError);
    CHECK_THROWS_AS(quadrature(DomainSpec::ball(2, 0.0), -1), ArgumentError);
}
