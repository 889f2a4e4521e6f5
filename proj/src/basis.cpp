#include "polyheat/basis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"

namespace polyheat {

namespace {

constexpr double kGramTolerance = 1e-8;
constexpr double kReorthTrigger = 1e-12;
/// Largest node table (nodes x members) materialized for Gram checks and kernel integrals.
constexpr double kMaxNodeTable = 8.0e7;

long double eigenvalue_ld(const DomainSpec &spec, std::size_t k)
{
    const auto kk = static_cast<long double>(k);
    const auto n = static_cast<long double>(spec.dimension());
    switch (spec.kind()) {
    case DomainKind::Interval:
        return kk * (kk + static_cast<long double>(spec.alpha()) + static_cast<long double>(spec.beta()) + 1.0L);
    case DomainKind::Ball:
        return kk * (kk + n + 2.0L * static_cast<long double>(spec.gamma()) - 1.0L);
    case DomainKind::Simplex: {
        long double ks = 0.0L;
        for (const double v : spec.kappa()) {
            ks += static_cast<long double>(v);
        }
        return kk * (kk + ks + (n - 1.0L) / 2.0L);
    }
    }
    return 0.0L;
}

std::string level_message(const DomainSpec &spec, std::size_t k, const std::string &what)
{
    std::ostringstream os;
    os << "basis for " << spec.describe() << " failed at level " << k << ": " << what
       << "; lower max_degree or select extended precision";
    return os.str();
}

} // namespace

struct OrthonormalBasis::NodeCache {
    std::once_flag once;
    std::optional<QuadratureRule> quad;
    Eigen::MatrixXd values;
};

std::string to_string(Precision p) { return p == Precision::Double ? "double" : "extended"; }

std::string to_string(Construction c) { return c == Construction::Product ? "product" : "gram_schmidt"; }

Construction parse_construction(const std::string &name)
{
    if (name == "product") {
        return Construction::Product;
    }
    if (name == "gram_schmidt") {
        return Construction::GramSchmidt;
    }
    throw ArgumentError("unknown basis construction '" + name + "' (expected product or gram_schmidt)");
}

Precision parse_precision(const std::string &name)
{
    if (name == "double") {
        return Precision::Double;
    }
    if (name == "extended") {
        return Precision::Extended;
    }
    throw ArgumentError("unknown precision '" + name + "' (expected double or extended)");
}

double eigenvalue(const DomainSpec &spec, std::size_t k) { return static_cast<double>(eigenvalue_ld(spec, k)); }

std::size_t level_size(const DomainSpec &spec, std::size_t k)
{
    const std::size_t n = spec.dimension();
    // binomial(k + n - 1, n - 1), built incrementally to stay exact.
    std::size_t c = 1;
    for (std::size_t i = 1; i < n; ++i) {
        c = c * (k + i) / i;
    }
    return c;
}

std::size_t default_max_degree(const DomainSpec &spec)
{
    if (spec.kind() == DomainKind::Interval) {
        return 200;
    }
    switch (spec.dimension()) {
    case 1:
        return 100;
    case 2:
        return 40;
    case 3:
        return 25;
    default:
        return 12;
    }
}

std::size_t max_degree_capacity(const DomainSpec &spec, Precision precision, Construction construction)
{
    const bool ext = precision == Precision::Extended;
    if (construction == Construction::Product) {
        switch (spec.dimension()) {
        case 1:
            return 20000;
        case 2:
            return 400;
        case 3:
            return 120;
        case 4:
            return 48;
        default:
            return 24;
        }
    }
    switch (spec.dimension()) {
    case 1:
        return 400;
    case 2:
        return ext ? 40 : 30;
    case 3:
        return ext ? 25 : 20;
    default:
        return ext ? 12 : 10;
    }
}

EigenTable eigen_table(const DomainSpec &spec, std::size_t max_degree)
{
    EigenTable t{spec, {}};
    t.lambdas.reserve(max_degree + 1);
    for (std::size_t k = 0; k <= max_degree; ++k) {
        t.lambdas.push_back(eigenvalue(spec, k));
    }
    return t;
}

OrthonormalBasis::OrthonormalBasis(DomainSpec spec, std::size_t max_degree, Precision precision,
                                   Construction construction)
    : spec_(std::move(spec)), max_degree_(max_degree), precision_(precision), construction_(construction),
      eigen_(eigen_table(spec_, max_degree)), cache_(std::make_shared<NodeCache>())
{
    level_begin_.push_back(0);
    for (std::size_t k = 0; k <= max_degree_; ++k) {
        level_begin_.push_back(level_begin_.back() + level_size(spec_, k));
    }
    constant_value_ = std::exp(-0.5L * static_cast<long double>(log_total_mass(spec_)));
}

OrthonormalBasis OrthonormalBasis::build(const DomainSpec &spec, std::size_t max_degree, Precision precision,
                                         Construction construction)
{
    const std::size_t cap = max_degree_capacity(spec, precision, construction);
    if (max_degree > cap) {
        throw CapacityError("max_degree " + std::to_string(max_degree) + " exceeds the capacity " +
                            std::to_string(cap) + " for " + spec.describe() + " (" + to_string(construction) +
                            " construction, " + to_string(precision) + " precision); lower the degree");
    }
    OrthonormalBasis basis(spec, max_degree, precision, construction);
    if (construction == Construction::Product) {
        basis.build_product();
        return basis;
    }
    basis.recipes_.push_back({});
    if (precision == Precision::Extended) {
        build_gram_schmidt<long double>(basis);
    } else {
        build_gram_schmidt<double>(basis);
    }
    basis.finalize_coefficients();
    return basis;
}

std::size_t OrthonormalBasis::factor_index(std::size_t axis, std::size_t tail) const
{
    return axis * (max_degree_ + 1) + tail;
}

std::size_t OrthonormalBasis::table_offset(std::size_t axis, std::size_t tail) const
{
    return table_offsets_[factor_index(axis, tail)];
}

void OrthonormalBasis::build_product()
{
    const std::size_t n = spec_.dimension();
    const std::size_t K = max_degree_;
    factors_.assign(n * (K + 1), {});
    table_offsets_.assign(n * (K + 1), 0);
    table_size_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // The last axis has no later coordinates, so only tail 0 occurs.
        const std::size_t tails = i + 1 == n ? 1 : K + 1;
        for (std::size_t M = 0; M < tails; ++M) {
            long double alpha = 0.0L;
            long double beta = 0.0L;
            long double scale = 1.0L;
            switch (spec_.kind()) {
            case DomainKind::Interval:
                alpha = spec_.alpha();
                beta = spec_.beta();
                break;
            case DomainKind::Ball:
                // Gegenbauer weight (1 - t^2)^(g - 1/2), g = gamma + (n - 1 - i)/2 + M.
                alpha = beta = static_cast<long double>(spec_.gamma()) +
                               0.5L * static_cast<long double>(n - 1 - i) + static_cast<long double>(M);
                alpha -= 0.5L;
                beta -= 0.5L;
                break;
            case DomainKind::Simplex: {
                // u^(kappa_i - 1/2) (1 - u)^(A_i + 2M) on [0, 1], read on t = 2u - 1.
                long double tail_sum = -1.0L;
                for (std::size_t l = i + 1; l <= n; ++l) {
                    tail_sum += static_cast<long double>(spec_.kappa()[l]) + 0.5L;
                }
                alpha = tail_sum + 2.0L * static_cast<long double>(M);
                beta = static_cast<long double>(spec_.kappa()[i]) - 0.5L;
                scale = std::exp(0.5L * (alpha + beta + 1.0L) * std::log(2.0L));
                break;
            }
            }
            const std::size_t len = K - M + 1;
            const auto rec = jacobi_recurrence<long double>(len + 1, alpha, beta);
            Factor &f = factors_[factor_index(i, M)];
            f.a = rec.a;
            f.c.resize(rec.b.size());
            for (std::size_t j = 0; j < rec.b.size(); ++j) {
                f.c[j] = std::sqrt(rec.b[j]);
            }
            f.h0 = scale / f.c[0];
            f.ad.assign(f.a.begin(), f.a.end());
            f.cd.assign(f.c.begin(), f.c.end());
            table_offsets_[factor_index(i, M)] = table_size_;
            table_size_ += len;
        }
    }
    // Members in graded order: nu with |nu| = k sorted by the polynomial term order.
    members_.reserve(size());
    member_offsets_.reserve(size() * n);
    for (std::size_t k = 0; k <= K; ++k) {
        std::vector<MultiIndex> level;
        std::vector<unsigned> e(n, 0);
        std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
            if (i + 1 == n) {
                e[i] = left;
                level.emplace_back(e);
                return;
            }
            for (unsigned v = 0; v <= left; ++v) {
                e[i] = v;
                rec(i + 1, left - v);
            }
        };
        rec(0, static_cast<unsigned>(k));
        std::sort(level.begin(), level.end(), GradedLexLess{});
        for (auto &nu : level) {
            const auto ex = nu.exponents();
            std::size_t tail = 0;
            std::vector<std::size_t> offs(n);
            for (std::size_t i = n; i-- > 0;) {
                offs[i] = table_offset(i, tail) + ex[i];
                tail += ex[i];
            }
            member_offsets_.insert(member_offsets_.end(), offs.begin(), offs.end());
            members_.push_back(std::move(nu));
        }
    }
}

const MultiIndex &OrthonormalBasis::multi_index(std::size_t member) const
{
    if (construction_ != Construction::Product) {
        throw ArgumentError("multi-indices are defined for the product construction only");
    }
    return members_.at(member);
}

template <typename S>
void OrthonormalBasis::build_gram_schmidt(OrthonormalBasis &basis)
{
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

    const DomainSpec &spec = basis.spec_;
    const std::size_t n = spec.dimension();
    const std::size_t K = basis.max_degree_;
    const std::size_t M = basis.level_begin_.back();
    QuadratureRule rule = polyheat::quadrature(spec, static_cast<int>(2 * K + 2));
    const auto Q = static_cast<Eigen::Index>(rule.size());
    if (static_cast<double>(Q) * static_cast<double>(M) > kMaxNodeTable) {
        throw CapacityError(level_message(spec, K, "node table of " + std::to_string(Q) + " x " + std::to_string(M) +
                                                       " values exceeds the memory cap"));
    }

    Vec sw(Q);
    Mat X(Q, static_cast<Eigen::Index>(n));
    for (Eigen::Index q = 0; q < Q; ++q) {
        sw[q] = std::sqrt(static_cast<S>(rule.weight(static_cast<std::size_t>(q))));
        const auto p = rule.node(static_cast<std::size_t>(q));
        for (std::size_t a = 0; a < n; ++a) {
            X(q, static_cast<Eigen::Index>(a)) = static_cast<S>(p[a]);
        }
    }

    Mat vals(Q, static_cast<Eigen::Index>(M));
    vals.col(0) = sw * static_cast<S>(basis.constant_value_);
    const S g0 = std::abs(vals.col(0).squaredNorm() - S(1));
    if (g0 > S(kGramTolerance)) {
        throw PrecisionError(level_message(spec, 0, "constant member is not normalized"));
    }

    for (std::size_t k = 1; k <= K; ++k) {
        const std::size_t saved_coeffs = basis.coeffs_ld_.size();
        for (bool full_span = k <= 2;; full_span = true) {
            const auto sb = static_cast<Eigen::Index>(full_span ? 0 : basis.level_begin_[k - 2]);
            const auto lb = static_cast<Eigen::Index>(basis.level_begin_[k]);
            const Eigen::Index s = lb - sb;
            const auto nk = static_cast<Eigen::Index>(basis.level_count(k));
            const auto pb = static_cast<Eigen::Index>(basis.level_begin_[k - 1]);
            const auto np = static_cast<Eigen::Index>(basis.level_count(k - 1));
            const Eigen::Index nc = np * static_cast<Eigen::Index>(n);

            const auto B = vals.middleCols(sb, s);
            Mat C(Q, nc);
            std::vector<std::pair<std::size_t, std::size_t>> origin(static_cast<std::size_t>(nc));
            for (Eigen::Index j = 0; j < np; ++j) {
                for (std::size_t a = 0; a < n; ++a) {
                    const Eigen::Index c = j * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(a);
                    C.col(c) = X.col(static_cast<Eigen::Index>(a)).cwiseProduct(vals.col(pb + j));
                    origin[static_cast<std::size_t>(c)] = {static_cast<std::size_t>(pb + j), a};
                }
            }
            const Vec orig_norm = C.colwise().norm().transpose();

            // Block classical Gram-Schmidt against the span, applied twice.
            Mat H = B.transpose() * C;
            C.noalias() -= B * H;
            Mat H2 = B.transpose() * C;
            C.noalias() -= B * H2;
            H += H2;

            Mat W = Mat::Zero(nk, nc);
            std::vector<bool> used(static_cast<std::size_t>(nc), false);
            for (Eigen::Index j = 0; j < nk; ++j) {
                Eigen::Index best = -1;
                S best_norm = S(-1);
                const Vec norms = C.colwise().norm().transpose();
                for (Eigen::Index c = 0; c < nc; ++c) {
                    if (!used[static_cast<std::size_t>(c)] && norms[c] > best_norm) {
                        best_norm = norms[c];
                        best = c;
                    }
                }
                if (best < 0 || best_norm <= S(1e-8) * orig_norm[best]) {
                    throw PrecisionError(level_message(spec, k, "candidate set rank deficient after " + std::to_string(j) +
                                                                    " of " + std::to_string(nk) + " members"));
                }
                Vec r = C.col(best);
                const Vec hb = B.transpose() * r;
                r.noalias() -= B * hb;
                H.col(best) += hb;
                const auto Qk = vals.middleCols(lb, j);
                if (j > 0) {
                    const Vec hw = Qk.transpose() * r;
                    r.noalias() -= Qk * hw;
                    W.col(best).head(j) += hw;
                }
                const S nrm = r.norm();
                const auto [parent, axis] = origin[static_cast<std::size_t>(best)];

                Recipe rec;
                rec.parent = parent;
                rec.axis = axis;
                rec.span_begin = static_cast<std::size_t>(sb);
                rec.coeff_offset = basis.coeffs_ld_.size();
                rec.inv_norm = static_cast<long double>(S(1) / nrm);
                for (Eigen::Index i = 0; i < s; ++i) {
                    basis.coeffs_ld_.push_back(static_cast<long double>(H(i, best)));
                }
                for (Eigen::Index i = 0; i < j; ++i) {
                    basis.coeffs_ld_.push_back(static_cast<long double>(W(i, best)));
                }
                basis.recipes_.push_back(rec);

                // Store the values the recurrence itself produces, so node values and pointwise evaluation agree.
                Vec v = X.col(static_cast<Eigen::Index>(axis)).cwiseProduct(vals.col(static_cast<Eigen::Index>(parent)));
                v.noalias() -= B * H.col(best);
                if (j > 0) {
                    v.noalias() -= Qk * W.col(best).head(j);
                }
                v *= S(1) / nrm;
                vals.col(lb + j) = v;
                used[static_cast<std::size_t>(best)] = true;

                const Eigen::Matrix<S, 1, Eigen::Dynamic> h = v.transpose() * C;
                C.noalias() -= v * h;
                W.row(j) += h;
            }
            S leftover(0);
            for (Eigen::Index c = 0; c < nc; ++c) {
                if (!used[static_cast<std::size_t>(c)]) {
                    leftover = std::max(leftover, C.col(c).norm() / orig_norm[c]);
                }
            }
            if (leftover > S(1e-6)) {
                std::ostringstream os;
                os << "candidates keep a relative residual " << static_cast<double>(leftover)
                   << " outside the " << nk << " selected directions";
                throw PrecisionError(level_message(spec, k, os.str()));
            }
            const Mat G = vals.leftCols(lb + nk).transpose() * vals.middleCols(lb, nk);
            S dev(0);
            for (Eigen::Index i = 0; i < G.rows(); ++i) {
                for (Eigen::Index j = 0; j < nk; ++j) {
                    dev = std::max(dev, std::abs(G(i, j) - (i == lb + j ? S(1) : S(0))));
                }
            }
            if (dev > S(kReorthTrigger) && !full_span) {
                // Round-off in levels below k - 2 is not removed by the short span and grows geometrically;
                // rebuild this level against every lower level, which resets the drift.
                basis.recipes_.resize(static_cast<std::size_t>(lb));
                basis.coeffs_ld_.resize(saved_coeffs);
                continue;
            }
            if (dev > S(kGramTolerance)) {
                std::ostringstream os;
                os << "Gram residual " << static_cast<double>(dev) << " exceeds " << kGramTolerance;
                throw PrecisionError(level_message(spec, k, os.str()));
            }
            break;
        }
    }

    auto cache = basis.cache_;
    std::call_once(cache->once, [&] {
        cache->quad.emplace(std::move(rule));
        cache->values = vals.template cast<double>();
    });
}

void OrthonormalBasis::finalize_coefficients()
{
    coeffs_.assign(coeffs_ld_.begin(), coeffs_ld_.end());
    inv_norm_.resize(recipes_.size());
    for (std::size_t m = 0; m < recipes_.size(); ++m) {
        inv_norm_[m] = static_cast<double>(recipes_[m].inv_norm);
    }
}

std::size_t OrthonormalBasis::level_of(std::size_t member) const
{
    if (member >= size()) {
        throw ArgumentError("member index out of range");
    }
    const auto it = std::upper_bound(level_begin_.begin(), level_begin_.end(), member);
    return static_cast<std::size_t>(it - level_begin_.begin()) - 1;
}

std::span<const long double> OrthonormalBasis::recipe_coefficients(std::size_t member) const
{
    if (member >= size()) {
        throw ArgumentError("member index out of range");
    }
    if (member == 0 || recipes_.empty()) {
        return {};
    }
    const auto &r = recipes_[member];
    return {coeffs_ld_.data() + r.coeff_offset, member - r.span_begin};
}

template <typename S>
void OrthonormalBasis::evaluate_product(std::span<const double> x, std::size_t degree, std::span<double> out) const
{
    const std::size_t n = spec_.dimension();
    std::vector<S> table(table_size_);
    S prefix(0);
    for (std::size_t i = 0; i < n; ++i) {
        const S xi = static_cast<S>(x[i]);
        S xi_t = xi;
        S r(1);
        S r2(1);
        switch (spec_.kind()) {
        case DomainKind::Interval:
            break;
        case DomainKind::Ball:
            r2 = S(1) - prefix;
            r = std::sqrt(std::max(r2, S(0)));
            prefix += xi * xi;
            break;
        case DomainKind::Simplex:
            r = S(1) - prefix;
            r2 = r * r;
            xi_t = S(2) * xi - r;
            prefix += xi;
            break;
        }
        const std::size_t tails = i + 1 == n ? 1 : degree + 1;
        for (std::size_t M = 0; M < tails; ++M) {
            const Factor &f = factors_[factor_index(i, M)];
            S *h = table.data() + table_offset(i, M);
            const std::size_t top = degree - M;
            h[0] = static_cast<S>(f.h0);
            if constexpr (std::is_same_v<S, double>) {
                const double *a = f.ad.data();
                const double *c = f.cd.data();
                if (top >= 1) {
                    h[1] = (xi_t - a[0] * r) * h[0] / c[1];
                }
                for (std::size_t j = 2; j <= top; ++j) {
                    h[j] = ((xi_t - a[j - 1] * r) * h[j - 1] - c[j - 1] * r2 * h[j - 2]) / c[j];
                }
            } else {
                const long double *a = f.a.data();
                const long double *c = f.c.data();
                if (top >= 1) {
                    h[1] = (xi_t - a[0] * r) * h[0] / c[1];
                }
                for (std::size_t j = 2; j <= top; ++j) {
                    h[j] = ((xi_t - a[j - 1] * r) * h[j - 1] - c[j - 1] * r2 * h[j - 2]) / c[j];
                }
            }
        }
    }
    const std::size_t end = level_end(degree);
    const std::size_t *offs = member_offsets_.data();
    for (std::size_t m = 0; m < end; ++m, offs += n) {
        S v = table[offs[0]];
        for (std::size_t i = 1; i < n; ++i) {
            v *= table[offs[i]];
        }
        out[m] = static_cast<double>(v);
    }
}

template <typename S>
void OrthonormalBasis::evaluate_recipes(std::span<const double> x, std::size_t degree, std::span<double> out) const
{
    const std::size_t end = level_end(degree);
    std::vector<S> buf;
    S *vals = nullptr;
    if constexpr (std::is_same_v<S, double>) {
        vals = out.data();
    } else {
        buf.resize(end);
        vals = buf.data();
    }
    vals[0] = static_cast<S>(constant_value_);
    for (std::size_t m = 1; m < end; ++m) {
        const Recipe &r = recipes_[m];
        S acc = static_cast<S>(x[r.axis]) * vals[r.parent];
        const std::size_t cnt = m - r.span_begin;
        const S *v = vals + r.span_begin;
        if constexpr (std::is_same_v<S, double>) {
            const double *c = coeffs_.data() + r.coeff_offset;
            for (std::size_t i = 0; i < cnt; ++i) {
                acc -= c[i] * v[i];
            }
            vals[m] = acc * inv_norm_[m];
        } else {
            const long double *c = coeffs_ld_.data() + r.coeff_offset;
            for (std::size_t i = 0; i < cnt; ++i) {
                acc -= c[i] * v[i];
            }
            vals[m] = acc * r.inv_norm;
        }
    }
    if constexpr (!std::is_same_v<S, double>) {
        for (std::size_t m = 0; m < end; ++m) {
            out[m] = static_cast<double>(vals[m]);
        }
    }
}

void OrthonormalBasis::evaluate(std::span<const double> x, std::size_t degree, std::span<double> out) const
{
    require_in_domain(spec_, x);
    if (degree > max_degree_) {
        throw ArgumentError("requested degree " + std::to_string(degree) + " exceeds basis max_degree " +
                            std::to_string(max_degree_));
    }
    if (out.size() < level_end(degree)) {
        throw ArgumentError("output buffer too small for basis evaluation");
    }
    const bool ext = precision_ == Precision::Extended;
    if (construction_ == Construction::Product) {
        ext ? evaluate_product<long double>(x, degree, out) : evaluate_product<double>(x, degree, out);
    } else {
        ext ? evaluate_recipes<long double>(x, degree, out) : evaluate_recipes<double>(x, degree, out);
    }
}

std::vector<double> OrthonormalBasis::evaluate(std::span<const double> x) const
{
    std::vector<double> out(size());
    evaluate(x, max_degree_, out);
    return out;
}

BasisSample OrthonormalBasis::sample(std::span<const double> x) const
{
    BasisSample s;
    s.values = evaluate(x);
    s.christoffel.resize(max_degree_ + 1);
    for (std::size_t k = 0; k <= max_degree_; ++k) {
        double c = 0.0;
        for (std::size_t m = level_begin_[k]; m < level_begin_[k + 1]; ++m) {
            c += s.values[m] * s.values[m];
        }
        s.christoffel[k] = c;
    }
    return s;
}

double OrthonormalBasis::projection_kernel(std::size_t k, std::span<const double> x, std::span<const double> y) const
{
    if (k > max_degree_) {
        throw ArgumentError("level " + std::to_string(k) + " exceeds basis max_degree " + std::to_string(max_degree_));
    }
    std::vector<double> vx(level_end(k));
    std::vector<double> vy(level_end(k));
    evaluate(x, k, vx);
    evaluate(y, k, vy);
    double s = 0.0;
    for (std::size_t m = level_begin_[k]; m < level_begin_[k + 1]; ++m) {
        s += vx[m] * vy[m];
    }
    return s;
}

double OrthonormalBasis::christoffel_diag(std::size_t k, std::span<const double> x) const
{
    if (k > max_degree_) {
        throw ArgumentError("level " + std::to_string(k) + " exceeds basis max_degree " + std::to_string(max_degree_));
    }
    std::vector<double> vx(level_end(k));
    evaluate(x, k, vx);
    double s = 0.0;
    for (std::size_t m = level_begin_[k]; m < level_begin_[k + 1]; ++m) {
        s += vx[m] * vx[m];
    }
    return s;
}

std::vector<ExtendedMultiPoly> OrthonormalBasis::extended_polynomials(std::size_t max_level) const
{
    if (max_level > max_degree_) {
        throw ArgumentError("max_level exceeds basis max_degree");
    }
    return construction_ == Construction::Product ? expand_product(max_level) : expand_recipes(max_level);
}

std::vector<ExtendedMultiPoly> OrthonormalBasis::expand_product(std::size_t max_level) const
{
    using P = ExtendedMultiPoly;
    const std::size_t n = spec_.dimension();
    std::vector<P> table(table_size_, P(n));
    P prefix(n);
    const P one = P::constant(n, 1.0L);
    for (std::size_t i = 0; i < n; ++i) {
        const P xi = P::variable(n, i);
        P xi_t = xi;
        P r = one;
        P r2 = one;
        switch (spec_.kind()) {
        case DomainKind::Interval:
            break;
        case DomainKind::Ball:
            // r = sqrt(s_i) is not polynomial; the Gegenbauer factors have a = 0 so only r^2 appears.
            r = P(n);
            r2 = one - prefix;
            prefix = prefix + xi * xi;
            break;
        case DomainKind::Simplex:
            r = one - prefix;
            r2 = r * r;
            xi_t = 2.0L * xi - r;
            prefix = prefix + xi;
            break;
        }
        const std::size_t tails = i + 1 == n ? 1 : max_level + 1;
        for (std::size_t M = 0; M < tails; ++M) {
            const Factor &f = factors_[factor_index(i, M)];
            P *h = table.data() + table_offset(i, M);
            const std::size_t top = max_level - M;
            h[0] = P::constant(n, f.h0);
            for (std::size_t j = 1; j <= top; ++j) {
                P next = (xi_t - f.a[j - 1] * r) * h[j - 1];
                if (j >= 2) {
                    next = next - (f.c[j - 1] * r2) * h[j - 2];
                }
                h[j] = (1.0L / f.c[j]) * next;
            }
        }
    }
    const std::size_t end = level_end(max_level);
    std::vector<P> out;
    out.reserve(end);
    for (std::size_t m = 0; m < end; ++m) {
        P v = table[member_offsets_[m * n]];
        for (std::size_t i = 1; i < n; ++i) {
            v = v * table[member_offsets_[m * n + i]];
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<ExtendedMultiPoly> OrthonormalBasis::expand_recipes(std::size_t max_level) const
{
    const std::size_t n = spec_.dimension();
    // Monomials of degree <= max_level in canonical order, with multiplication-by-x_a tables.
    std::vector<MultiIndex> monos;
    {
        std::vector<unsigned> e(n, 0);
        std::vector<MultiIndex> all;
        std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
            if (i == n) {
                all.emplace_back(e);
                return;
            }
            for (unsigned v = 0; v <= left; ++v) {
                e[i] = v;
                rec(i + 1, left - v);
            }
        };
        rec(0, static_cast<unsigned>(max_level));
        std::sort(all.begin(), all.end(), GradedLexLess{});
        monos = std::move(all);
    }
    std::map<MultiIndex, std::size_t, GradedLexLess> index;
    for (std::size_t i = 0; i < monos.size(); ++i) {
        index.emplace(monos[i], i);
    }
    const std::size_t nm = monos.size();
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> shift(n * nm, npos);
    for (std::size_t i = 0; i < nm; ++i) {
        if (monos[i].degree() < max_level) {
            for (std::size_t a = 0; a < n; ++a) {
                shift[a * nm + i] = index.at(monos[i].shifted(a, 1));
            }
        }
    }
    const std::size_t end = level_end(max_level);
    std::vector<long double> coef(end * nm, 0.0L);
    coef[0] = constant_value_;
    for (std::size_t m = 1; m < end; ++m) {
        const Recipe &r = recipes_[m];
        long double *row = coef.data() + m * nm;
        const long double *c = coeffs_ld_.data() + r.coeff_offset;
        for (std::size_t j = r.span_begin; j < m; ++j) {
            const long double cj = c[j - r.span_begin];
            const long double *src = coef.data() + j * nm;
            for (std::size_t i = 0; i < nm; ++i) {
                row[i] -= cj * src[i];
            }
        }
        const long double *par = coef.data() + r.parent * nm;
        for (std::size_t i = 0; i < nm; ++i) {
            if (par[i] != 0.0L) {
                row[shift[r.axis * nm + i]] += par[i];
            }
        }
        for (std::size_t i = 0; i < nm; ++i) {
            row[i] *= r.inv_norm;
        }
    }
    std::vector<ExtendedMultiPoly> out;
    out.reserve(end);
    std::vector<std::pair<MultiIndex, long double>> terms;
    for (std::size_t m = 0; m < end; ++m) {
        terms.clear();
        for (std::size_t i = 0; i < nm; ++i) {
            if (coef[m * nm + i] != 0.0L) {
                terms.emplace_back(monos[i], coef[m * nm + i]);
            }
        }
        out.push_back(ExtendedMultiPoly::from_terms(n, terms));
    }
    return out;
}

std::vector<MultiPoly> OrthonormalBasis::polynomials(std::size_t max_level) const
{
    std::vector<MultiPoly> out;
    for (const auto &p : extended_polynomials(max_level)) {
        out.push_back(p.cast<double>());
    }
    return out;
}

const QuadratureRule &OrthonormalBasis::quadrature() const
{
    weighted_node_values();
    return *cache_->quad;
}

const Eigen::MatrixXd &OrthonormalBasis::weighted_node_values() const
{
    std::call_once(cache_->once, [this] {
        QuadratureRule rule = polyheat::quadrature(spec_, static_cast<int>(2 * max_degree_ + 2));
        const auto Q = static_cast<Eigen::Index>(rule.size());
        if (static_cast<double>(Q) * static_cast<double>(size()) > kMaxNodeTable) {
            throw CapacityError("node table for " + spec_.describe() + " at degree " + std::to_string(max_degree_) +
                                " exceeds the memory cap; build a smaller basis for quadrature checks");
        }
        Eigen::MatrixXd vals(Q, static_cast<Eigen::Index>(size()));
        std::vector<double> buf(size());
        for (Eigen::Index q = 0; q < Q; ++q) {
            evaluate(rule.node(static_cast<std::size_t>(q)), max_degree_, buf);
            const double sw = std::sqrt(rule.weight(static_cast<std::size_t>(q)));
            for (std::size_t m = 0; m < size(); ++m) {
                vals(q, static_cast<Eigen::Index>(m)) = sw * buf[m];
            }
        }
        cache_->quad.emplace(std::move(rule));
        cache_->values = std::move(vals);
    });
    return cache_->values;
}

double OrthonormalBasis::gram_residual(std::size_t degree) const
{
    if (degree > max_degree_) {
        throw ArgumentError("degree exceeds basis max_degree");
    }
    const auto &v = weighted_node_values();
    const auto m = static_cast<Eigen::Index>(level_end(degree));
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    G.selfadjointView<Eigen::Lower>().rankUpdate(v.leftCols(m).transpose());
    G -= Eigen::MatrixXd::Identity(m, m);
    return G.triangularView<Eigen::Lower>().toDenseMatrix().cwiseAbs().maxCoeff();
}

nlohmann::json OrthonormalBasis::to_json(bool include_polynomials) const
{
    nlohmann::json j{{"spec", spec_.to_json()},
                     {"max_degree", max_degree_},
                     {"precision", to_string(precision_)},
                     {"construction", to_string(construction_)},
                     {"size", size()}};
    if (construction_ == Construction::Product) {
        nlohmann::json idx = nlohmann::json::array();
        for (const auto &nu : members_) {
            idx.push_back(std::vector<unsigned>(nu.exponents().begin(), nu.exponents().end()));
        }
        j["multi_indices"] = std::move(idx);
    } else {
        nlohmann::json recipes = nlohmann::json::array();
        for (std::size_t m = 1; m < size(); ++m) {
            const auto &r = recipes_[m];
            const auto c = recipe_coefficients(m);
            recipes.push_back({r.parent, r.axis, r.span_begin, static_cast<double>(r.inv_norm),
                               std::vector<double>(c.begin(), c.end())});
        }
        j["constant"] = static_cast<double>(constant_value_);
        j["recipes"] = std::move(recipes);
    }
    if (include_polynomials) {
        const auto polys = polynomials(max_degree_);
        nlohmann::json levels = nlohmann::json::array();
        for (std::size_t k = 0; k <= max_degree_; ++k) {
            nlohmann::json level = nlohmann::json::array();
            for (std::size_t m = level_begin_[k]; m < level_begin_[k + 1]; ++m) {
                level.push_back(polyheat::to_json(polys[m]));
            }
            levels.push_back(std::move(level));
        }
        j["levels"] = std::move(levels);
    }
    return j;
}

OrthonormalBasis OrthonormalBasis::from_json(const nlohmann::json &j)
{
    const auto spec = DomainSpec::from_json(j.at("spec"));
    const auto K = j.at("max_degree").get<std::size_t>();
    const auto precision = parse_precision(j.at("precision").get<std::string>());
    const auto construction = parse_construction(j.value("construction", std::string("product")));
    if (construction == Construction::Product) {
        // The product basis is determined by the domain and degree.
        return build(spec, K, precision, construction);
    }
    OrthonormalBasis basis(spec, K, precision, construction);
    basis.constant_value_ = j.at("constant").get<double>();
    basis.recipes_.push_back({});
    const auto &recipes = j.at("recipes");
    if (recipes.size() + 1 != basis.level_begin_.back()) {
        throw ArgumentError("basis JSON has " + std::to_string(recipes.size() + 1) + " members, expected " +
                            std::to_string(basis.level_begin_.back()));
    }
    for (std::size_t m = 1; m <= recipes.size(); ++m) {
        const auto &e = recipes[m - 1];
        Recipe r;
        r.parent = e.at(0).get<std::size_t>();
        r.axis = e.at(1).get<std::size_t>();
        r.span_begin = e.at(2).get<std::size_t>();
        r.inv_norm = e.at(3).get<double>();
        r.coeff_offset = basis.coeffs_ld_.size();
        const auto c = e.at(4).get<std::vector<double>>();
        if (r.parent >= m || r.span_begin > m || c.size() != m - r.span_begin || r.axis >= basis.spec_.dimension()) {
            throw ArgumentError("malformed recipe for basis member " + std::to_string(m));
        }
        basis.coeffs_ld_.insert(basis.coeffs_ld_.end(), c.begin(), c.end());
        basis.recipes_.push_back(r);
    }
    basis.finalize_coefficients();
    return basis;
}

std::vector<double> verify_eigenrelation(const OrthonormalBasis &basis, std::size_t max_level)
{
    const auto polys = basis.extended_polynomials(max_level);
    const DomainSpec &spec = basis.spec();
    std::vector<long double> kappa;
    if (spec.kind() == DomainKind::Simplex) {
        kappa.assign(spec.kappa().begin(), spec.kappa().end());
    }
    std::vector<double> out(max_level + 1, 0.0);
    for (std::size_t k = 0; k <= max_level; ++k) {
        const long double lam = eigenvalue_ld(spec, k);
        long double worst = 0.0L;
        for (std::size_t m = basis.level_begin(k); m < basis.level_end(k); ++m) {
            const auto &p = polys[m];
            ExtendedMultiPoly lp(spec.dimension());
            switch (spec.kind()) {
            case DomainKind::Interval:
                lp = apply_jacobi_operator<long double>(p, spec.alpha(), spec.beta());
                break;
            case DomainKind::Ball:
                lp = apply_ball_operator<long double>(p, spec.gamma());
                break;
            case DomainKind::Simplex:
                lp = apply_simplex_operator<long double>(p, kappa);
                break;
            }
            const ExtendedMultiPoly scaled = lam * p;
            const long double res = (lp + scaled).max_abs_coefficient();
            worst = std::max(worst, k == 0 ? res : res / scaled.max_abs_coefficient());
        }
        out[k] = static_cast<double>(worst);
    }
    return out;
}

std::vector<double> verify_eigenrelation(const OrthonormalBasis &basis)
{
    return verify_eigenrelation(basis, basis.max_degree());
}

} // namespace polyheat
