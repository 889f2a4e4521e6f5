#pragma once

// Exact multivariate polynomials in coefficient form and the three weighted
// second-order operators (Jacobi, ball, simplex) applied at coefficient level.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/errors.hpp"

namespace polyheat {

/// Exponent vector of a monomial x^a = x_1^{a_1} ... x_n^{a_n}.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<unsigned> exponents)
        : exps_(std::move(exponents)), degree_(std::accumulate(exps_.begin(), exps_.end(), 0U)) {}
    MultiIndex(std::initializer_list<unsigned> exponents) : MultiIndex(std::vector<unsigned>(exponents)) {}

    static MultiIndex zero(std::size_t n) { return MultiIndex(std::vector<unsigned>(n, 0U)); }
    static MultiIndex unit(std::size_t n, std::size_t axis, unsigned power = 1)
    {
        std::vector<unsigned> e(n, 0U);
        e.at(axis) = power;
        return MultiIndex(std::move(e));
    }

    std::size_t dimension() const noexcept { return exps_.size(); }
    unsigned degree() const noexcept { return degree_; }
    unsigned operator[](std::size_t i) const { return exps_[i]; }
    std::span<const unsigned> exponents() const noexcept { return exps_; }

    /// Copy with exponent on `axis` shifted by `delta`; caller guarantees the result is non-negative.
    MultiIndex shifted(std::size_t axis, int delta) const
    {
        auto e = exps_;
        e[axis] = static_cast<unsigned>(static_cast<int>(e[axis]) + delta);
        return MultiIndex(std::move(e));
    }

    friend bool operator==(const MultiIndex &, const MultiIndex &) = default;

private:
    std::vector<unsigned> exps_;
    unsigned degree_ = 0;
};

/// Canonical term order: total degree ascending, ties broken x_1-major
/// (x_1^2 < x_1 x_2 < x_2^2). Used for iteration and serialization.
struct GradedLexLess {
    bool operator()(const MultiIndex &a, const MultiIndex &b) const noexcept
    {
        if (a.degree() != b.degree()) {
            return a.degree() < b.degree();
        }
        const auto ea = a.exponents();
        const auto eb = b.exponents();
        return std::lexicographical_compare(eb.begin(), eb.end(), ea.begin(), ea.end());
    }
};

/// Coefficients with magnitude below this are true zeros and are not stored.
inline constexpr double kZeroCoefficient = 1e-300;

template <typename T>
class BasicMultiPoly {
public:
    using Scalar = T;
    using TermMap = std::map<MultiIndex, T, GradedLexLess>;

    explicit BasicMultiPoly(std::size_t dimension) : dim_(dimension)
    {
        if (dimension == 0) {
            throw ArgumentError("polynomial dimension must be positive");
        }
    }

    /// Sums duplicate indices and drops zero coefficients.
    BasicMultiPoly(std::size_t dimension, std::initializer_list<std::pair<MultiIndex, T>> terms)
        : BasicMultiPoly(dimension)
    {
        for (const auto &[idx, c] : terms) {
            accumulate(idx, c);
        }
        prune();
    }

    static BasicMultiPoly constant(std::size_t n, T c)
    {
        BasicMultiPoly p(n);
        p.accumulate(MultiIndex::zero(n), c);
        p.prune();
        return p;
    }

    static BasicMultiPoly variable(std::size_t n, std::size_t axis)
    {
        if (axis >= n) {
            throw ArgumentError("variable axis out of range");
        }
        BasicMultiPoly p(n);
        p.terms_.emplace(MultiIndex::unit(n, axis), T(1));
        return p;
    }

    template <typename Range>
    static BasicMultiPoly from_terms(std::size_t n, const Range &terms)
    {
        BasicMultiPoly p(n);
        for (const auto &[idx, c] : terms) {
            p.accumulate(idx, static_cast<T>(c));
        }
        p.prune();
        return p;
    }

    std::size_t dimension() const noexcept { return dim_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    const TermMap &terms() const noexcept { return terms_; }

    /// Total degree; -1 for the zero polynomial.
    int degree() const noexcept { return terms_.empty() ? -1 : static_cast<int>(terms_.rbegin()->first.degree()); }

    T coefficient(const MultiIndex &idx) const
    {
        const auto it = terms_.find(idx);
        return it == terms_.end() ? T(0) : it->second;
    }

    T max_abs_coefficient() const noexcept
    {
        T m(0);
        for (const auto &[idx, c] : terms_) {
            m = std::max(m, static_cast<T>(std::abs(c)));
        }
        return m;
    }

    template <typename U>
    BasicMultiPoly<U> cast() const
    {
        return BasicMultiPoly<U>::from_terms(dim_, terms_);
    }

    BasicMultiPoly operator-() const
    {
        BasicMultiPoly out(*this);
        for (auto &[idx, c] : out.terms_) {
            c = -c;
        }
        return out;
    }

    friend BasicMultiPoly operator+(const BasicMultiPoly &a, const BasicMultiPoly &b)
    {
        a.require_same_dimension(b);
        BasicMultiPoly out(a);
        for (const auto &[idx, c] : b.terms_) {
            out.accumulate(idx, c);
        }
        out.prune();
        return out;
    }

    friend BasicMultiPoly operator-(const BasicMultiPoly &a, const BasicMultiPoly &b) { return a + (-b); }

    friend BasicMultiPoly operator*(T s, const BasicMultiPoly &p)
    {
        BasicMultiPoly out(p.dim_);
        for (const auto &[idx, c] : p.terms_) {
            out.accumulate(idx, s * c);
        }
        out.prune();
        return out;
    }

    friend BasicMultiPoly operator*(const BasicMultiPoly &p, T s) { return s * p; }

    friend BasicMultiPoly operator*(const BasicMultiPoly &a, const BasicMultiPoly &b)
    {
        a.require_same_dimension(b);
        BasicMultiPoly out(a.dim_);
        std::vector<unsigned> e(a.dim_);
        for (const auto &[ia, ca] : a.terms_) {
            for (const auto &[ib, cb] : b.terms_) {
                for (std::size_t i = 0; i < a.dim_; ++i) {
                    e[i] = ia[i] + ib[i];
                }
                out.accumulate(MultiIndex(e), ca * cb);
            }
        }
        out.prune();
        return out;
    }

    friend bool operator==(const BasicMultiPoly &, const BasicMultiPoly &) = default;

private:
    template <typename U>
    friend class BasicMultiPoly;

    void accumulate(const MultiIndex &idx, T c)
    {
        if (idx.dimension() != dim_) {
            throw ArgumentError("monomial dimension " + std::to_string(idx.dimension()) +
                                " does not match polynomial dimension " + std::to_string(dim_));
        }
        terms_[idx] += c;
    }

    void prune()
    {
        std::erase_if(terms_, [](const auto &kv) { return std::abs(kv.second) < T(kZeroCoefficient); });
    }

    void require_same_dimension(const BasicMultiPoly &other) const
    {
        if (other.dim_ != dim_) {
            throw ArgumentError("polynomial dimension mismatch");
        }
    }

    std::size_t dim_;
    TermMap terms_;
};

using MultiPoly = BasicMultiPoly<double>;
using ExtendedMultiPoly = BasicMultiPoly<long double>;

/// Evaluates p at x using per-axis power tables.
template <typename T, typename X>
T poly_eval(const BasicMultiPoly<T> &p, std::span<const X> x)
{
    const std::size_t n = p.dimension();
    if (x.size() != n) {
        throw ArgumentError("poly_eval: point has dimension " + std::to_string(x.size()) + ", polynomial has " +
                            std::to_string(n));
    }
    if (p.is_zero()) {
        return T(0);
    }
    const auto deg = static_cast<std::size_t>(p.degree());
    std::vector<T> powers(n * (deg + 1));
    for (std::size_t i = 0; i < n; ++i) {
        T v(1);
        for (std::size_t k = 0; k <= deg; ++k) {
            powers[i * (deg + 1) + k] = v;
            v *= static_cast<T>(x[i]);
        }
    }
    T sum(0);
    for (const auto &[idx, c] : p.terms()) {
        T m = c;
        for (std::size_t i = 0; i < n; ++i) {
            m *= powers[i * (deg + 1) + idx[i]];
        }
        sum += m;
    }
    return sum;
}

template <typename T>
T poly_eval(const BasicMultiPoly<T> &p, const std::vector<double> &x)
{
    return poly_eval<T, double>(p, std::span<const double>(x));
}

/// Exact partial derivative along a zero-based axis.
template <typename T>
BasicMultiPoly<T> poly_partial(const BasicMultiPoly<T> &p, std::size_t axis)
{
    if (axis >= p.dimension()) {
        throw ArgumentError("poly_partial: axis " + std::to_string(axis) + " out of range for dimension " +
                            std::to_string(p.dimension()));
    }
    std::vector<std::pair<MultiIndex, T>> out;
    for (const auto &[idx, c] : p.terms()) {
        if (idx[axis] > 0) {
            out.emplace_back(idx.shifted(axis, -1), c * static_cast<T>(idx[axis]));
        }
    }
    return BasicMultiPoly<T>::from_terms(p.dimension(), out);
}

/// (1 - x^2) p'' + (beta - alpha) p' - (alpha + beta + 2) x p'.
template <typename T>
BasicMultiPoly<T> apply_jacobi_operator(const BasicMultiPoly<T> &p, T alpha, T beta)
{
    if (p.dimension() != 1) {
        throw ArgumentError("apply_jacobi_operator: polynomial must be univariate");
    }
    if (!(alpha > T(-1)) || !(beta > T(-1))) {
        throw ParameterError("Jacobi operator requires alpha > -1 and beta > -1");
    }
    std::vector<std::pair<MultiIndex, T>> out;
    out.reserve(3 * p.size());
    for (const auto &[idx, c] : p.terms()) {
        const auto a = static_cast<T>(idx[0]);
        if (idx[0] >= 2) {
            out.emplace_back(idx.shifted(0, -2), c * a * (a - 1));
        }
        if (idx[0] >= 1) {
            out.emplace_back(idx.shifted(0, -1), c * (beta - alpha) * a);
        }
        out.emplace_back(idx, -c * a * (a - 1 + alpha + beta + 2));
    }
    return BasicMultiPoly<T>::from_terms(1, out);
}

/// sum_i d_i^2 - sum_{i,j} x_i x_j d_i d_j - (n + 2 gamma) sum_i x_i d_i on the unit ball.
template <typename T>
BasicMultiPoly<T> apply_ball_operator(const BasicMultiPoly<T> &p, T gamma)
{
    if (!(gamma > T(-0.5))) {
        throw ParameterError("ball operator requires gamma > -1/2");
    }
    const std::size_t n = p.dimension();
    std::vector<std::pair<MultiIndex, T>> out;
    out.reserve((n + 1) * p.size());
    for (const auto &[idx, c] : p.terms()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (idx[i] >= 2) {
                const auto ai = static_cast<T>(idx[i]);
                out.emplace_back(idx.shifted(i, -2), c * ai * (ai - 1));
            }
        }
        // x_i x_j d_i d_j and x_i d_i are diagonal on monomials.
        const auto k = static_cast<T>(idx.degree());
        out.emplace_back(idx, -c * k * (k + static_cast<T>(n) + 2 * gamma - 1));
    }
    return BasicMultiPoly<T>::from_terms(n, out);
}

/// sum_i x_i d_i^2 - sum_{i,j} x_i x_j d_i d_j + sum_i (kappa_i + 1/2 - (|kappa| + (n+1)/2) x_i) d_i
/// on the simplex; `kappa` has n + 1 entries.
template <typename T>
BasicMultiPoly<T> apply_simplex_operator(const BasicMultiPoly<T> &p, std::span<const T> kappa)
{
    const std::size_t n = p.dimension();
    if (kappa.size() != n + 1) {
        throw ArgumentError("apply_simplex_operator: kappa must have n + 1 = " + std::to_string(n + 1) + " entries");
    }
    for (const auto k : kappa) {
        if (!(k > T(-0.5))) {
            throw ParameterError("simplex operator requires every kappa_i > -1/2");
        }
    }
    const T kappa_sum = std::accumulate(kappa.begin(), kappa.end(), T(0));
    std::vector<std::pair<MultiIndex, T>> out;
    out.reserve((n + 1) * p.size());
    for (const auto &[idx, c] : p.terms()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (idx[i] >= 1) {
                const auto ai = static_cast<T>(idx[i]);
                out.emplace_back(idx.shifted(i, -1), c * ai * (ai - 1 + kappa[i] + T(0.5)));
            }
        }
        const auto k = static_cast<T>(idx.degree());
        out.emplace_back(idx, -c * k * (k - 1 + kappa_sum + static_cast<T>(n + 1) / 2));
    }
    return BasicMultiPoly<T>::from_terms(n, out);
}

template <typename T>
BasicMultiPoly<T> apply_simplex_operator(const BasicMultiPoly<T> &p, const std::vector<T> &kappa)
{
    return apply_simplex_operator(p, std::span<const T>(kappa));
}

/// Univariate substitution p(scale * x + shift), exact by binomial expansion.
template <typename T>
BasicMultiPoly<T> compose_affine(const BasicMultiPoly<T> &p, T scale, T shift)
{
    if (p.dimension() != 1) {
        throw ArgumentError("compose_affine: polynomial must be univariate");
    }
    std::vector<std::pair<MultiIndex, T>> out;
    for (const auto &[idx, c] : p.terms()) {
        const unsigned d = idx[0];
        // (scale x + shift)^d = sum_j C(d,j) scale^j shift^{d-j} x^j
        T binom(1);
        for (unsigned j = 0; j <= d; ++j) {
            T term = c * binom;
            for (unsigned r = 0; r < j; ++r) {
                term *= scale;
            }
            for (unsigned r = j; r < d; ++r) {
                term *= shift;
            }
            out.emplace_back(MultiIndex{j}, term);
            binom = binom * static_cast<T>(d - j) / static_cast<T>(j + 1);
        }
    }
    return BasicMultiPoly<T>::from_terms(1, out);
}

/// Largest |coefficient| of a - b relative to the largest |coefficient| of b (absolute when b = 0).
template <typename T>
T relative_coefficient_residual(const BasicMultiPoly<T> &a, const BasicMultiPoly<T> &b)
{
    const T scale = b.max_abs_coefficient();
    const T diff = (a - b).max_abs_coefficient();
    return scale > T(0) ? diff / scale : diff;
}

nlohmann::json to_json(const MultiPoly &p);
MultiPoly multipoly_from_json(const nlohmann::json &j);

} // namespace polyheat
