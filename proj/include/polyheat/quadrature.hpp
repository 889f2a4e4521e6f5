#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/domain.hpp"

namespace polyheat {

/// Upper bound on the node count of a single rule.
inline constexpr std::size_t kMaxQuadratureNodes = 4'000'000;

/// Monic three-term recurrence p_{k+1} = (x - a_k) p_k - b_k p_{k-1} for the Jacobi weight
/// (1-x)^alpha (1+x)^beta on [-1, 1]; b_0 is the total mass of the weight.
template <typename T>
struct JacobiRecurrence {
    std::vector<T> a;
    std::vector<T> b;
};

template <typename T>
JacobiRecurrence<T> jacobi_recurrence(std::size_t count, T alpha, T beta)
{
    JacobiRecurrence<T> r;
    r.a.resize(count);
    r.b.resize(count);
    const T ab = alpha + beta;
    for (std::size_t k = 0; k < count; ++k) {
        const T kk = static_cast<T>(k);
        const T s = 2 * kk + ab;
        if (k == 0) {
            r.a[k] = (beta - alpha) / (ab + 2);
            r.b[k] = std::exp((ab + 1) * std::log(T(2)) + std::lgamma(alpha + 1) + std::lgamma(beta + 1) -
                              std::lgamma(ab + 2));
            continue;
        }
        r.a[k] = (beta * beta - alpha * alpha) / (s * (s + 2));
        if (k == 1) {
            r.b[k] = 4 * (1 + alpha) * (1 + beta) / ((2 + ab) * (2 + ab) * (3 + ab));
        } else {
            r.b[k] = 4 * kk * (kk + alpha) * (kk + beta) * (kk + ab) / (s * s * (s + 1) * (s - 1));
        }
    }
    return r;
}

/// One-dimensional rule: nodes and positive weights.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// npts-point Gauss rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta; exact to degree 2 npts - 1.
GaussRule gauss_jacobi(std::size_t npts, double alpha, double beta);
/// npts-point Gauss rule on [0, 1] for the weight u^p (1-u)^q.
GaussRule gauss_jacobi_unit(std::size_t npts, double p, double q);

class QuadratureRule {
public:
    QuadratureRule(std::size_t dimension, std::vector<double> nodes, std::vector<double> weights, int exact_degree);

    std::size_t dimension() const noexcept { return dim_; }
    std::size_t size() const noexcept { return weights_.size(); }
    int exact_degree() const noexcept { return exact_degree_; }
    std::span<const double> node(std::size_t i) const { return {nodes_.data() + i * dim_, dim_}; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double> &weights() const noexcept { return weights_; }
    double weight_sum() const;

    template <typename F>
    double integrate(F &&f) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            s += weights_[i] * f(node(i));
        }
        return s;
    }

    nlohmann::json to_json() const;

private:
    std::size_t dim_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    int exact_degree_;
};

/// Rule integrating every polynomial of total degree <= exact_degree against the weighted measure.
QuadratureRule quadrature(const DomainSpec &spec, int exact_degree);

} // namespace polyheat
