#include <doctest.h>

#include <random>

#include "polyheat/polynomial.hpp"

using namespace polyheat;

namespace {

MultiPoly random_poly(std::size_t n, unsigned degree, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<std::pair<MultiIndex, double>> terms;
    for (int t = 0; t < 12; ++t) {
        std::vector<unsigned> e(n, 0);
        unsigned left = degree;
        for (std::size_t i = 0; i < n; ++i) {
            e[i] = std::uniform_int_distribution<unsigned>(0, left)(rng);
            left -= e[i];
        }
        terms.emplace_back(MultiIndex(e), coef(rng));
    }
    return MultiPoly::from_terms(n, terms);
}

MultiPoly x(std::size_t n, std::size_t i) { return MultiPoly::variable(n, i); }
MultiPoly c(std::size_t n, double v) { return MultiPoly::constant(n, v); }

// Operators assembled from partial derivatives and products, independent of the monomial rules.
MultiPoly ball_by_composition(const MultiPoly &f, double gamma)
{
    const std::size_t n = f.dimension();
    MultiPoly out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto di = poly_partial(f, i);
        out = out + poly_partial(di, i) - (static_cast<double>(n) + 2 * gamma) * (x(n, i) * di);
        for (std::size_t j = 0; j < n; ++j) {
            out = out - x(n, i) * x(n, j) * poly_partial(di, j);
        }
    }
    return out;
}

MultiPoly simplex_by_composition(const MultiPoly &f, const std::vector<double> &kappa)
{
    const std::size_t n = f.dimension();
    double ks = 0.0;
    for (const double k : kappa) {
        ks += k;
    }
    MultiPoly out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto di = poly_partial(f, i);
        out = out + x(n, i) * poly_partial(di, i);
        for (std::size_t j = 0; j < n; ++j) {
            out = out - x(n, i) * x(n, j) * poly_partial(di, j);
        }
        out = out + (c(n, kappa[i] + 0.5) - (ks + 0.5 * static_cast<double>(n + 1)) * x(n, i)) * di;
    }
    return out;
}

MultiPoly jacobi_by_composition(const MultiPoly &f, double a, double b)
{
    const auto d1 = poly_partial(f, 0);
    const auto d2 = poly_partial(d1, 0);
    return (c(1, 1.0) - x(1, 0) * x(1, 0)) * d2 + (b - a) * d1 - (a + b + 2) * (x(1, 0) * d1);
}

} // namespace

TEST_CASE("poly_eval examples")
{
    CHECK(poly_eval(c(2, 1.0), std::vector<double>{0.3, 0.4}) == 1.0);
    CHECK(poly_eval(x(2, 0) * x(2, 1), std::vector<double>{2.0, 3.0}) == 6.0);
    const MultiPoly p = x(1, 0) * x(1, 0) - c(1, 0.5);
    CHECK(poly_eval(p, std::vector<double>{0.5}) == doctest::Approx(0.5 * 0.5 - 0.5).epsilon(1e-15));
    CHECK_THROWS_AS(poly_eval(p, std::vector<double>{0.5, 1.0}), ArgumentError);
}

TEST_CASE("poly_partial examples")
{
    const MultiPoly f = x(2, 0) * x(2, 0) * x(2, 1);
    CHECK(poly_partial(f, 0) == 2.0 * (x(2, 0) * x(2, 1)));
    CHECK(poly_partial(x(2, 0), 1).is_zero());
    const MultiPoly g = 3.0 * (x(1, 0) * x(1, 0) * x(1, 0)) - x(1, 0);
    CHECK(poly_partial(g, 0) == 9.0 * (x(1, 0) * x(1, 0)) - c(1, 1.0));
    CHECK_THROWS_AS(poly_partial(g, 1), ArgumentError);
}

TEST_CASE("zero pruning and canonical order")
{
    const MultiPoly p = x(2, 0) - x(2, 0);
    CHECK(p.is_zero());
    CHECK(p.degree() == -1);
    const MultiPoly q = x(2, 1) * x(2, 1) + x(2, 0) * x(2, 1) + x(2, 0) * x(2, 0) + c(2, 1.0);
    std::vector<std::vector<unsigned>> order;
    for (const auto &[idx, coef] : q.terms()) {
        order.emplace_back(idx.exponents().begin(), idx.exponents().end());
    }
    const std::vector<std::vector<unsigned>> expected{{0, 0}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(order == expected);
    const MultiPoly tiny = MultiPoly::constant(1, 1e-301);
    CHECK(tiny.is_zero());
    const MultiPoly small = MultiPoly::constant(1, 1e-250);
    CHECK_FALSE(small.is_zero());
}

TEST_CASE("Jacobi operator examples")
{
    CHECK(apply_jacobi_operator(c(1, 1.0), 0.3, 0.7).is_zero());
    CHECK(apply_jacobi_operator(x(1, 0), -0.5, -0.5) == -x(1, 0));
    CHECK(apply_jacobi_operator(x(1, 0) * x(1, 0), 0.0, 0.0) == c(1, 2.0) - 6.0 * (x(1, 0) * x(1, 0)));
    CHECK_THROWS_AS(apply_jacobi_operator(x(1, 0), -1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(apply_jacobi_operator(x(2, 0), 0.0, 0.0), ArgumentError);
}

TEST_CASE("ball operator examples")
{
    CHECK(apply_ball_operator(c(3, 2.0), 0.1).is_zero());
    CHECK(apply_ball_operator(x(2, 0), 0.5) == -3.0 * x(2, 0));
    for (const double g : {-0.3, 0.0, 0.7, 2.5}) {
        const auto lx = apply_ball_operator(x(1, 0), g);
        CHECK(lx.coefficient(MultiIndex{1}) == doctest::Approx(-(1 + 2 * g)).epsilon(1e-15));
        CHECK(lx.size() == 1);
    }
    CHECK_THROWS_AS(apply_ball_operator(x(2, 0), -0.5), ParameterError);
}

TEST_CASE("simplex operator examples")
{
    const std::vector<double> k1{0.5, 0.5};
    CHECK(apply_simplex_operator(c(1, 1.0), k1).is_zero());
    const MultiPoly p = x(1, 0) - c(1, 0.5);
    CHECK(relative_coefficient_residual(apply_simplex_operator(p, k1), -2.0 * p) <= 1e-14);
    const std::vector<double> k2{0.5, 0.5, 0.5};
    const auto l = apply_simplex_operator(x(2, 0), k2);
    CHECK(relative_coefficient_residual(l, simplex_by_composition(x(2, 0), k2)) <= 1e-14);
    CHECK(l == c(2, 1.0) - 3.0 * x(2, 0));
    CHECK_THROWS_AS(apply_simplex_operator(x(2, 0), std::vector<double>{0.5, 0.5}), ArgumentError);
    CHECK_THROWS_AS(apply_simplex_operator(x(1, 0), std::vector<double>{0.5, -0.5}), ParameterError);
}

TEST_CASE("operators match derivative composition on random polynomials")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f1 = random_poly(1, 9, rng);
        CHECK(relative_coefficient_residual(apply_jacobi_operator(f1, 0.7, -0.3), jacobi_by_composition(f1, 0.7, -0.3)) <=
              1e-14);
        for (std::size_t n : {1U, 2U, 3U}) {
            const auto f = random_poly(n, 8, rng);
            CHECK(relative_coefficient_residual(apply_ball_operator(f, 0.25), ball_by_composition(f, 0.25)) <= 1e-14);
            std::vector<double> kappa(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                kappa[i] = -0.4 + 0.6 * static_cast<double>(i);
            }
            CHECK(relative_coefficient_residual(apply_simplex_operator(f, kappa), simplex_by_composition(f, kappa)) <=
                  1e-14);
        }
    }
}

TEST_CASE("degree preservation and linearity")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_poly(2, 7, rng);
        const auto h = random_poly(2, 5, rng);
        CHECK(apply_ball_operator(f, 1.0).degree() <= f.degree());
        const std::vector<double> k{0.1, 0.2, 0.3};
        CHECK(apply_simplex_operator(f, k).degree() <= f.degree());
        const auto lhs = apply_ball_operator(2.0 * f - 3.0 * h, 0.4);
        const auto rhs = 2.0 * apply_ball_operator(f, 0.4) - 3.0 * apply_ball_operator(h, 0.4);
        CHECK(relative_coefficient_residual(lhs, rhs) <= 1e-14);
    }
}

TEST_CASE("affine composition")
{
    // (2x + 1)^2 = 4x^2 + 4x + 1
    const auto p = compose_affine(x(1, 0) * x(1, 0), 2.0, 1.0);
    CHECK(p == 4.0 * (x(1, 0) * x(1, 0)) + 4.0 * x(1, 0) + c(1, 1.0));
}

TEST_CASE("JSON round trip")
{
    const MultiPoly p = 3.5 * (x(2, 0) * x(2, 1)) - c(2, 0.25);
    const auto j = to_json(p);
    CHECK(j["dimension"] == 2);
    CHECK(j["terms"][0][0] == nlohmann::json::array({0, 0}));
    CHECK(multipoly_from_json(j) == p);
}
