#pragma once

// Graded orthonormal polynomial eigenbases of the Jacobi, ball and simplex operators.
//
// Two constructions are available.
//
// Product (default): the measure factors coordinate by coordinate, and every member is a product
//   P_nu(x) = prod_i h_i(nu_i; M_i)(x),   M_i = nu_{i+1} + ... + nu_n,
// of homogenized one-dimensional orthonormal Jacobi polynomials. On the ball the i-th factor is
// g(x_i / sqrt(s_i)) s_i^{nu_i / 2} with s_i = 1 - x_1^2 - ... - x_{i-1}^2 and a Gegenbauer weight whose
// parameter grows with M_i; on the simplex it is q(x_i / r_i) r_i^{nu_i} with r_i = 1 - x_1 - ... - x_{i-1}.
// Each factor is evaluated by its three-term recurrence without division, so evaluation is stable
// at any degree and up to the boundary.
//
// GramSchmidt: every member after the constant is stored as a recurrence
//   P_m = (x_axis * P_parent - sum_{j in [span_begin, m)} c_j P_j) / norm,
// found by orthogonalizing the candidates x_a P_{k-1,j} in the sqrt-weighted value space of a
// quadrature rule exact to degree 2K + 2. Levels are orthogonalized against levels k-2 and k-1, and
// against all lower levels whenever the measured drift exceeds 1e-12. Evaluating these recurrences
// loses accuracy geometrically with the degree near vertices, so the caps are lower.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "polyheat/domain.hpp"
#include "polyheat/polynomial.hpp"
#include "polyheat/quadrature.hpp"

namespace polyheat {

enum class Precision { Double, Extended };
enum class Construction { Product, GramSchmidt };

std::string to_string(Precision p);
Precision parse_precision(const std::string &name);
std::string to_string(Construction c);
Construction parse_construction(const std::string &name);

/// lambda_k in closed form; lambda_0 = 0.
double eigenvalue(const DomainSpec &spec, std::size_t k);

/// N_k = binomial(k + n - 1, k); N_0 = 1.
std::size_t level_size(const DomainSpec &spec, std::size_t k);

/// Degree used when none is requested: interval 200, n = 2 40, n = 3 25, larger n 12.
std::size_t default_max_degree(const DomainSpec &spec);
/// Largest degree build accepts.
std::size_t max_degree_capacity(const DomainSpec &spec, Precision precision,
                                Construction construction = Construction::Product);

struct EigenTable {
    DomainSpec spec;
    std::vector<double> lambdas;
};

EigenTable eigen_table(const DomainSpec &spec, std::size_t max_degree);

/// Values of every member at one point, and the Christoffel diagonal C_k(x) of each level.
struct BasisSample {
    std::vector<double> values;
    std::vector<double> christoffel;
};

class OrthonormalBasis {
public:
    struct Recipe {
        std::size_t parent = 0;
        std::size_t axis = 0;
        std::size_t span_begin = 0;
        std::size_t coeff_offset = 0; // into the shared coefficient array; count is (member - span_begin)
        long double inv_norm = 1.0L;
    };

    static OrthonormalBasis build(const DomainSpec &spec, std::size_t max_degree,
                                  Precision precision = Precision::Double,
                                  Construction construction = Construction::Product);

    const DomainSpec &spec() const noexcept { return spec_; }
    std::size_t max_degree() const noexcept { return max_degree_; }
    Precision precision() const noexcept { return precision_; }
    Construction construction() const noexcept { return construction_; }
    std::size_t size() const noexcept { return level_begin_.back(); }
    std::size_t level_begin(std::size_t k) const { return level_begin_.at(k); }
    std::size_t level_end(std::size_t k) const { return level_begin_.at(k + 1); }
    std::size_t level_count(std::size_t k) const { return level_end(k) - level_begin(k); }
    std::size_t level_of(std::size_t member) const;
    const EigenTable &eigen() const noexcept { return eigen_; }
    double lambda(std::size_t k) const { return eigen_.lambdas.at(k); }
    /// Product construction: the index nu of a member (members of a level are in graded order).
    const MultiIndex &multi_index(std::size_t member) const;

    /// Values of the members of levels 0..degree at x (out.size() >= level_end(degree)).
    void evaluate(std::span<const double> x, std::size_t degree, std::span<double> out) const;
    std::vector<double> evaluate(std::span<const double> x) const;
    BasisSample sample(std::span<const double> x) const;

    /// sum_j P_kj(x) P_kj(y).
    double projection_kernel(std::size_t k, std::span<const double> x, std::span<const double> y) const;
    /// sum_j P_kj(x)^2.
    double christoffel_diag(std::size_t k, std::span<const double> x) const;

    /// Coefficient forms of every member of levels 0..max_level, computed by expanding the
    /// recurrences in extended precision.
    std::vector<ExtendedMultiPoly> extended_polynomials(std::size_t max_level) const;
    std::vector<MultiPoly> polynomials(std::size_t max_level) const;

    /// Rule of exact degree 2K + 2 used for orthogonalization (built on first use for the interval).
    const QuadratureRule &quadrature() const;
    /// sqrt(w_q) P_m(node_q), rows = nodes, columns = members.
    const Eigen::MatrixXd &weighted_node_values() const;

    /// max |G - I| over the Gram matrix of the members of levels 0..degree, using the build quadrature.
    double gram_residual(std::size_t degree) const;
    double gram_residual() const { return gram_residual(max_degree_); }

    /// GramSchmidt construction only; empty for the product construction.
    const std::vector<Recipe> &recipes() const noexcept { return recipes_; }
    std::span<const long double> recipe_coefficients(std::size_t member) const;

    nlohmann::json to_json(bool include_polynomials = false) const;
    static OrthonormalBasis from_json(const nlohmann::json &j);

private:
    struct NodeCache;

    /// Recurrence coefficients of one homogenized factor: h_j = ((xi - a_{j-1} r) h_{j-1} - c_{j-1} r^2 h_{j-2}) / c_j.
    struct Factor {
        std::vector<long double> a;
        std::vector<long double> c;
        long double h0 = 1.0L;
        std::vector<double> ad;
        std::vector<double> cd;
    };

    OrthonormalBasis(DomainSpec spec, std::size_t max_degree, Precision precision, Construction construction);
    void finalize_coefficients();
    void build_product();
    std::size_t factor_index(std::size_t axis, std::size_t tail) const;
    std::size_t table_offset(std::size_t axis, std::size_t tail) const;

    template <typename S>
    void evaluate_product(std::span<const double> x, std::size_t degree, std::span<double> out) const;
    template <typename S>
    void evaluate_recipes(std::span<const double> x, std::size_t degree, std::span<double> out) const;
    std::vector<ExtendedMultiPoly> expand_product(std::size_t max_level) const;
    std::vector<ExtendedMultiPoly> expand_recipes(std::size_t max_level) const;

    template <typename S>
    static void build_gram_schmidt(OrthonormalBasis &basis);

    DomainSpec spec_;
    std::size_t max_degree_;
    Precision precision_;
    Construction construction_;
    EigenTable eigen_;
    std::vector<std::size_t> level_begin_;
    // Product construction.
    std::vector<MultiIndex> members_;
    std::vector<Factor> factors_;
    std::vector<std::size_t> member_offsets_; // n entries per member into the evaluation table
    std::vector<std::size_t> table_offsets_;
    std::size_t table_size_ = 0;
    // GramSchmidt construction.
    std::vector<Recipe> recipes_;
    long double constant_value_ = 1.0L;
    std::vector<long double> coeffs_ld_;
    std::vector<double> coeffs_;
    std::vector<double> inv_norm_;
    std::shared_ptr<NodeCache> cache_;
};

/// Per-level maximum of |L P_kj + lambda_k P_kj| / |lambda_k P_kj| over coefficients
/// (absolute for k = 0), using the exact operators in coefficient form.
std::vector<double> verify_eigenrelation(const OrthonormalBasis &basis, std::size_t max_level);
std::vector<double> verify_eigenrelation(const OrthonormalBasis &basis);

} // namespace polyheat
