#include "polyheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"

namespace polyheat {

namespace {

struct OrthoValues {
    long double p_n;     // orthonormal p_n(x)
    long double dp_n;    // derivative of p_n
    long double sum_sq;  // sum_{k < n} p_k(x)^2
};

OrthoValues orthonormal_at(const JacobiRecurrence<long double> &rec, std::size_t n, long double x)
{
    long double prev = 0.0L;
    long double dprev = 0.0L;
    long double cur = 1.0L / std::sqrt(rec.b[0]);
    long double dcur = 0.0L;
    long double sum_sq = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
        sum_sq += cur * cur;
        const long double sb = k == 0 ? 0.0L : std::sqrt(rec.b[k]);
        const long double inv = 1.0L / std::sqrt(rec.b[k + 1]);
        const long double next = ((x - rec.a[k]) * cur - sb * prev) * inv;
        const long double dnext = ((x - rec.a[k]) * dcur + cur - sb * dprev) * inv;
        prev = cur;
        dprev = dcur;
        cur = next;
        dcur = dnext;
    }
    return {cur, dcur, sum_sq};
}

/// Points and weights of a rule on S^{m-1} in R^m, antipodally symmetric and exact to `degree`.
void sphere_rule(std::size_t m, int degree, std::vector<double> &pts, std::vector<double> &wts)
{
    pts.clear();
    wts.clear();
    if (m == 1) {
        pts = {1.0, -1.0};
        wts = {1.0, 1.0};
        return;
    }
    if (m == 2) {
        std::size_t count = static_cast<std::size_t>(std::max(degree, 0)) + 1;
        count += count % 2;
        const double w = 2.0 * std::numbers::pi / static_cast<double>(count);
        for (std::size_t j = 0; j < count; ++j) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(count);
            pts.push_back(std::cos(th));
            pts.push_back(std::sin(th));
            wts.push_back(w);
        }
        return;
    }
    // omega = (t, sqrt(1 - t^2) omega'), d omega = (1 - t^2)^{(m-3)/2} dt d omega'.
    const std::size_t nt = static_cast<std::size_t>(std::max(degree, 0) + 2) / 2;
    const double e = 0.5 * static_cast<double>(m - 3);
    const GaussRule tr = gauss_jacobi(nt, e, e);
    std::vector<double> sub_pts;
    std::vector<double> sub_wts;
    sphere_rule(m - 1, degree, sub_pts, sub_wts);
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = tr.nodes[i];
        const double c = std::sqrt(std::max(0.0, 1.0 - t * t));
        for (std::size_t j = 0; j < sub_wts.size(); ++j) {
            pts.push_back(t);
            for (std::size_t d = 0; d < m - 1; ++d) {
                pts.push_back(c * sub_pts[j * (m - 1) + d]);
            }
            wts.push_back(tr.weights[i] * sub_wts[j]);
        }
    }
}

void require_capacity(double count, const DomainSpec &spec, int degree)
{
    if (count > static_cast<double>(kMaxQuadratureNodes)) {
        throw CapacityError("quadrature of exact degree " + std::to_string(degree) + " on " + spec.describe() +
                            " needs " + std::to_string(static_cast<long long>(count)) + " nodes (cap " +
                            std::to_string(kMaxQuadratureNodes) + "); lower the degree");
    }
}

} // namespace

GaussRule gauss_jacobi(std::size_t npts, double alpha, double beta)
{
    if (npts == 0) {
        throw ArgumentError("gauss_jacobi needs at least one node");
    }
    if (!(alpha > -1.0) || !(beta > -1.0)) {
        throw ParameterError("Gauss-Jacobi weight requires alpha > -1 and beta > -1");
    }
    const auto rec = jacobi_recurrence<long double>(npts + 1, alpha, beta);
    const auto n = static_cast<Eigen::Index>(npts);
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 0; k < n; ++k) {
        diag[k] = static_cast<double>(rec.a[static_cast<std::size_t>(k)]);
        if (k + 1 < n) {
            sub[k] = static_cast<double>(std::sqrt(rec.b[static_cast<std::size_t>(k + 1)]));
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw PrecisionError("Golub-Welsch eigenvalue iteration failed for " + std::to_string(npts) + " nodes");
    }
    GaussRule rule;
    rule.nodes.resize(npts);
    rule.weights.resize(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        long double x = es.eigenvalues()[static_cast<Eigen::Index>(i)];
        for (int it = 0; it < 3; ++it) {
            const auto v = orthonormal_at(rec, npts, x);
            if (v.dp_n == 0.0L) {
                break;
            }
            const long double step = v.p_n / v.dp_n;
            x = std::clamp(x - step, -1.0L, 1.0L);
            if (std::abs(step) < 1e-19L) {
                break;
            }
        }
        rule.nodes[i] = static_cast<double>(x);
        rule.weights[i] = static_cast<double>(1.0L / orthonormal_at(rec, npts, x).sum_sq);
    }
    return rule;
}

GaussRule gauss_jacobi_unit(std::size_t npts, double p, double q)
{
    // u = (1 + x) / 2: u^p (1-u)^q du = 2^{-(p+q+1)} (1+x)^p (1-x)^q dx.
    GaussRule rule = gauss_jacobi(npts, q, p);
    const double scale = std::pow(2.0, -(p + q + 1.0));
    for (std::size_t i = 0; i < npts; ++i) {
        rule.nodes[i] = 0.5 * (1.0 + rule.nodes[i]);
        rule.weights[i] *= scale;
    }
    return rule;
}

QuadratureRule::QuadratureRule(std::size_t dimension, std::vector<double> nodes, std::vector<double> weights,
                               int exact_degree)
    : dim_(dimension), nodes_(std::move(nodes)), weights_(std::move(weights)), exact_degree_(exact_degree)
{
    if (nodes_.size() != dim_ * weights_.size()) {
        throw ArgumentError("quadrature node array does not match weight count");
    }
}

double QuadratureRule::weight_sum() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

nlohmann::json QuadratureRule::to_json() const
{
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i) {
        const auto p = node(i);
        nodes.push_back(std::vector<double>(p.begin(), p.end()));
    }
    return {{"dimension", dim_}, {"exact_degree", exact_degree_}, {"nodes", std::move(nodes)}, {"weights", weights_}};
}

QuadratureRule quadrature(const DomainSpec &spec, int exact_degree)
{
    if (exact_degree < 0) {
        throw ArgumentError("quadrature exact_degree must be >= 0");
    }
    const std::size_t n = spec.dimension();
    switch (spec.kind()) {
    case DomainKind::Interval: {
        const auto npts = static_cast<std::size_t>(exact_degree + 2) / 2;
        require_capacity(static_cast<double>(npts), spec, exact_degree);
        GaussRule g = gauss_jacobi(npts, spec.alpha(), spec.beta());
        return QuadratureRule(1, std::move(g.nodes), std::move(g.weights), exact_degree);
    }
    case DomainKind::Ball: {
        // x = sqrt(s) omega: dx (1-|x|^2)^{gamma-1/2} = (1/2) s^{n/2-1} (1-s)^{gamma-1/2} ds d omega,
        // and the angular average of a degree-D polynomial is a polynomial of degree D/2 in s.
        const auto nr = static_cast<std::size_t>(exact_degree / 2 + 2) / 2;
        std::vector<double> sp;
        std::vector<double> sw;
        const double sphere_count = n == 1 ? 2.0
                                    : n == 2 ? static_cast<double>(exact_degree + 2)
                                             : std::pow(static_cast<double>(exact_degree + 2) / 2.0,
                                                        static_cast<double>(n - 2)) *
                                                   static_cast<double>(exact_degree + 2);
        require_capacity(static_cast<double>(nr) * sphere_count, spec, exact_degree);
        sphere_rule(n, exact_degree, sp, sw);
        const GaussRule rr = gauss_jacobi_unit(nr, 0.5 * static_cast<double>(n) - 1.0, spec.gamma() - 0.5);
        std::vector<double> nodes;
        std::vector<double> weights;
        nodes.reserve(nr * sw.size() * n);
        weights.reserve(nr * sw.size());
        for (std::size_t i = 0; i < nr; ++i) {
            const double rad = std::sqrt(rr.nodes[i]);
            for (std::size_t j = 0; j < sw.size(); ++j) {
                for (std::size_t d = 0; d < n; ++d) {
                    nodes.push_back(rad * sp[j * n + d]);
                }
                weights.push_back(0.5 * rr.weights[i] * sw[j]);
            }
        }
        return QuadratureRule(n, std::move(nodes), std::move(weights), exact_degree);
    }
    case DomainKind::Simplex: {
        // Stick-breaking x_i = u_i prod_{j<i}(1 - u_j); the weight factors into
        // u_i^{kappa_i - 1/2} (1 - u_i)^{sum_{j>i}(kappa_j + 1/2) - 1}.
        const auto q = static_cast<std::size_t>(exact_degree + 2) / 2;
        require_capacity(std::pow(static_cast<double>(q), static_cast<double>(n)), spec, exact_degree);
        const auto &k = spec.kappa();
        std::vector<GaussRule> axes;
        for (std::size_t i = 0; i < n; ++i) {
            double tail = 0.0;
            for (std::size_t j = i + 1; j <= n; ++j) {
                tail += k[j] + 0.5;
            }
            axes.push_back(gauss_jacobi_unit(q, k[i] - 0.5, tail - 1.0));
        }
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) {
            total *= q;
        }
        std::vector<double> nodes(total * n);
        std::vector<double> weights(total);
        std::vector<std::size_t> digit(n, 0);
        for (std::size_t idx = 0; idx < total; ++idx) {
            double rem = 1.0;
            double w = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double u = axes[i].nodes[digit[i]];
                nodes[idx * n + i] = rem * u;
                rem *= 1.0 - u;
                w *= axes[i].weights[digit[i]];
            }
            weights[idx] = w;
            for (std::size_t i = n; i-- > 0;) {
                if (++digit[i] < q) {
                    break;
                }
                digit[i] = 0;
            }
        }
        return QuadratureRule(n, std::move(nodes), std::move(weights), exact_degree);
    }
    }
    throw ArgumentError("unreachable domain kind");
}

} // namespace polyheat
