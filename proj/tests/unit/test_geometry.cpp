#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polyheat/geometry.hpp"

using namespace polyheat;
using std::numbers::pi;

namespace {

Point random_interior(const DomainSpec &spec, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = spec.dimension();
    for (;;) {
        Point x(n);
        for (auto &v : x) {
            v = spec.kind() == DomainKind::Simplex ? 0.5 * (u(rng) + 1.0) : u(rng);
        }
        if (in_domain(spec, x) && boundary_gap(spec, x) > 1e-3) {
            return x;
        }
    }
}

double lu_det(const Eigen::MatrixXd &m) { return m.fullPivLu().determinant(); }

} // namespace

TEST_CASE("domain parameter validation")
{
    CHECK_THROWS_AS(DomainSpec::ball(2, -0.6), ParameterError);
    CHECK_THROWS_AS(DomainSpec::interval(-1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(DomainSpec::simplex({0.5, -0.5}), ParameterError);
    CHECK_THROWS_AS(DomainSpec::simplex({0.5}), ArgumentError);
    try {
        DomainSpec::ball(2, -0.6);
    } catch (const ParameterError &e) {
        CHECK(std::string(e.what()).find("γ > −1/2") != std::string::npos);
    }
    const auto s = DomainSpec::simplex({0.1, 0.2, 0.3});
    CHECK(s.dimension() == 2);
    CHECK(DomainSpec::from_json(s.to_json()) == s);
}

TEST_CASE("distance examples")
{
    const auto ball = DomainSpec::ball(2, 0.5);
    CHECK(distance(ball, Point{1.0, 0.0}, Point{-1.0, 0.0}) == doctest::Approx(pi).epsilon(1e-15));
    const auto simplex = DomainSpec::simplex({0.5, 0.5});
    CHECK(distance(simplex, Point{0.0}, Point{1.0}) == doctest::Approx(pi / 2).epsilon(1e-15));
    const auto interval = DomainSpec::interval(-0.5, -0.5);
    CHECK(distance(interval, Point{-1.0}, Point{1.0}) == doctest::Approx(pi).epsilon(1e-15));
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double x = -1.0 + 2.0 * i / 19.0;
            const double y = -1.0 + 2.0 * j / 19.0;
            const double rho = distance(interval, Point{x}, Point{y});
            CHECK(rho == doctest::Approx(std::abs(std::acos(x) - std::acos(y))).epsilon(1e-12).scale(1.0));
            const double rho_t = distance(simplex, Point{(x + 1) / 2}, Point{(y + 1) / 2});
            CHECK(std::abs(rho_t - rho / 2) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(distance(ball, Point{1.0, 0.5}, Point{0.0, 0.0}), ArgumentError);
}

TEST_CASE("distance axioms and chart isometry")
{
    std::mt19937_64 rng(11);
    for (const auto &spec : {DomainSpec::ball(2, 0.0), DomainSpec::ball(3, 1.0), DomainSpec::simplex({0.2, 0.3, 1.0}),
                             DomainSpec::interval(0.7, -0.3)}) {
        for (int t = 0; t < 200; ++t) {
            const auto x = random_interior(spec, rng);
            const auto y = random_interior(spec, rng);
            const auto z = random_interior(spec, rng);
            const double dxy = distance(spec, x, y);
            CHECK(dxy == distance(spec, y, x));
            CHECK(distance(spec, x, x) == 0.0);
            CHECK(dxy <= distance(spec, x, z) + distance(spec, z, y) + 1e-12);
            const auto u = chart_lift(spec, x);
            const auto v = chart_lift(spec, y);
            double dot = 0.0;
            double nu = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                dot += u[i] * v[i];
                nu += u[i] * u[i];
            }
            CHECK(std::abs(std::sqrt(nu) - 1.0) <= 1e-14);
            CHECK(std::abs(std::acos(std::clamp(dot, -1.0, 1.0)) - dxy) <= 1e-7);
            if (dxy > 1e-3 && dxy < pi - 1e-3) {
                CHECK(std::abs(std::acos(dot) - dxy) <= 1e-12);
            }
        }
    }
}

TEST_CASE("chart lift examples")
{
    const auto ball = DomainSpec::ball(2, 0.5);
    CHECK(chart_lift(ball, Point{0.0, 0.0}) == Point{0.0, 0.0, 1.0});
    const auto l = chart_lift(ball, Point{0.6, 0.0});
    CHECK(l[0] == doctest::Approx(0.6));
    CHECK(l[2] == doctest::Approx(0.8).epsilon(1e-15));
    const auto s = chart_lift(DomainSpec::simplex({0.5, 0.5}), Point{0.5});
    CHECK(s[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(s[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("weight density examples")
{
    CHECK(weight_density(DomainSpec::ball(2, 0.5), Point{0.3, 0.2}) == 1.0);
    CHECK(weight_density(DomainSpec::interval(-0.5, -0.5), Point{0.0}) == 1.0);
    CHECK(weight_density(DomainSpec::simplex({1, 1, 1}), Point{0.25, 0.25}) ==
          doctest::Approx(0.5 * 0.5 * std::sqrt(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(weight_density(DomainSpec::interval(-0.5, 0.0), Point{1.0}), SingularityError);
    CHECK(weight_density(DomainSpec::interval(0.5, 0.0), Point{1.0}) == 0.0);
}

TEST_CASE("metric examples")
{
    const auto ball = DomainSpec::ball(2, 0.25);
    CHECK(metric_tensor(ball, Point{0.0, 0.0}).isApprox(Eigen::Matrix2d::Identity()));
    const auto g = metric_tensor(ball, Point{0.6, 0.0});
    CHECK(g(0, 0) == doctest::Approx(1.5625).epsilon(1e-15));
    CHECK(g(1, 1) == 1.0);
    CHECK(g(0, 1) == 0.0);
    const auto h = inverse_metric(ball, Point{0.6, 0.0});
    CHECK(h(0, 0) == doctest::Approx(0.64).epsilon(1e-15));
    CHECK(metric_det(ball, Point{0.0, 0.0}) == 1.0);
    CHECK(metric_det(ball, Point{0.6, 0.0}) == doctest::Approx(1.5625).epsilon(1e-15));
    const auto s1 = DomainSpec::simplex({0.5, 0.5});
    CHECK(metric_tensor(s1, Point{0.5})(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(inverse_metric(s1, Point{0.5})(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metric_det(DomainSpec::simplex({1, 1, 1}), Point{0.25, 0.25}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(metric_tensor(ball, Point{1.0, 0.0}), SingularityError);
    CHECK_THROWS_AS(metric_det(s1, Point{0.0}), SingularityError);
}

TEST_CASE("metric identities at random interior points")
{
    std::mt19937_64 rng(3);
    for (const auto &spec : {DomainSpec::ball(1, 0.0), DomainSpec::ball(2, 0.3), DomainSpec::ball(3, 0.3),
                             DomainSpec::simplex({0.5, 0.5}), DomainSpec::simplex({0.2, 0.3, 1.0}),
                             DomainSpec::simplex({0.2, 0.3, 1.0, 0.0}), DomainSpec::interval(0.2, 0.1)}) {
        for (int t = 0; t < 100; ++t) {
            const auto x = random_interior(spec, rng);
            const auto g = metric_tensor(spec, x);
            const auto h = inverse_metric(spec, x);
            const auto n = g.rows();
            CHECK((g * h - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12 * g.cwiseAbs().maxCoeff());
            const double det = metric_det(spec, x);
            CHECK(std::abs(lu_det(g) - det) <= 1e-10 * det);
            if (spec.kind() != DomainKind::Simplex) {
                // Graph chart psi = sqrt(1 - |x|^2): grad psi = -x / psi.
                double r2 = 0.0;
                for (const double v : x) {
                    r2 += v * v;
                }
                Eigen::VectorXd grad(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    grad[i] = -x[static_cast<std::size_t>(i)] / std::sqrt(1.0 - r2);
                }
                CHECK(std::abs(graph_metric_det(grad) - det) <= 1e-10 * det);
                CHECK((graph_inverse_metric(grad) - h).cwiseAbs().maxCoeff() <= 1e-12);
            } else {
                // g = (diag(a) + 1 1^T) / (4 (1 - |x|)) with a_i = (1 - |x|) / x_i.
                double s = 0.0;
                for (const double v : x) {
                    s += v;
                }
                std::vector<double> a;
                for (const double v : x) {
                    a.push_back((1.0 - s) / v);
                }
                const double via_lemma = perturbed_identity_det(a) * std::pow(4.0 * (1.0 - s), -static_cast<double>(n));
                CHECK(std::abs(via_lemma - det) <= 1e-10 * det);
            }
        }
    }
}

TEST_CASE("perturbed identity determinant")
{
    CHECK(perturbed_identity_det(std::vector<double>{1, 1}) == 3.0);
    CHECK(perturbed_identity_det(std::vector<double>{2, 3}) == 11.0);
    CHECK(perturbed_identity_det(std::vector<double>{0, 0, 0}) == 0.0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 8);
        std::vector<double> a(n);
        Eigen::MatrixXd m = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = u(rng);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += a[i];
        }
        const double ref = lu_det(m);
        CHECK(std::abs(perturbed_identity_det(a) - ref) <= 1e-12 * std::abs(ref));
    }
}

TEST_CASE("total mass closed forms")
{
    CHECK(total_mass(DomainSpec::interval(-0.5, -0.5)) == doctest::Approx(pi).epsilon(1e-14));
    CHECK(total_mass(DomainSpec::ball(1, 0.5)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(total_mass(DomainSpec::simplex({0.5, 0.5})) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(total_mass(DomainSpec::ball(2, 0.5)) == doctest::Approx(pi).epsilon(1e-14));
    CHECK(total_mass(DomainSpec::ball(3, 0.5)) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
    CHECK(total_mass(DomainSpec::simplex({0.5, 0.5, 0.5})) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(total_mass(DomainSpec::interval(0.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("volume surrogate examples")
{
    CHECK(volume_surrogate(DomainSpec::ball(2, 0.0), Point{0.0, 0.0}, 0.4) == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(volume_surrogate(DomainSpec::interval(-0.5, -0.5), Point{0.3}, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(volume_surrogate(DomainSpec::simplex({0.5, 0.5}), Point{0.0}, 0.3) ==
          doctest::Approx(0.3 * std::sqrt(1.09) * 0.3).epsilon(1e-14));
    CHECK_THROWS_AS(volume_surrogate(DomainSpec::ball(2, 0.0), Point{0.0, 0.0}, 0.0), ArgumentError);
    CHECK_THROWS_AS(volume_surrogate(DomainSpec::ball(2, 0.0), Point{0.0, 0.0}, 3.2), ArgumentError);
}
