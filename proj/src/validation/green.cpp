#include "polyheat/validation/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"

namespace polyheat::validation {

namespace {

using Dual = boost::math::differentiation::autodiff_fvar<double, 1>;

constexpr double kZeroFlux = 1e-14;
constexpr double kChartProximity = 1e-8;

std::vector<MultiPoly> gradient_polys(const MultiPoly &f)
{
    std::vector<MultiPoly> g;
    for (std::size_t i = 0; i < f.dimension(); ++i) {
        g.push_back(poly_partial(f, i));
    }
    return g;
}

Point eval_all(const std::vector<MultiPoly> &ps, std::span<const double> x)
{
    Point out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        out[i] = poly_eval(ps[i], x);
    }
    return out;
}

/// g^{-1} grad f at x.
Point metric_gradient(const DomainSpec &spec, const std::vector<MultiPoly> &grad, std::span<const double> x)
{
    const Eigen::MatrixXd ginv = inverse_metric(spec, x);
    const Point df = eval_all(grad, x);
    Point out(df.size(), 0.0);
    for (std::size_t i = 0; i < df.size(); ++i) {
        for (std::size_t j = 0; j < df.size(); ++j) {
            out[i] += ginv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * df[j];
        }
    }
    return out;
}

/// Integral of fn over {y_k > lo, sum y < total} in dimension d by nested tanh-sinh.
template <typename F>
double integrate_region(std::size_t d, double total, double lo, F &&fn)
{
    std::vector<double> y(d);
    boost::math::quadrature::tanh_sinh<double> ts;
    std::function<double(std::size_t, double)> level = [&](std::size_t l, double remaining) -> double {
        if (l == d) {
            return fn(std::span<const double>(y));
        }
        const double hi = remaining - static_cast<double>(d - 1 - l) * lo;
        if (!(hi > lo)) {
            return 0.0;
        }
        auto inner = [&](double v) {
            y[l] = v;
            return level(l + 1, remaining - v);
        };
        return ts.integrate(inner, lo, hi, 1e-11);
    };
    return level(0, total);
}

struct Lifted {
    std::vector<std::vector<Dual>> jac; // (n+1) x n
    Dual weight;                        // sphere weight at the lifted point
};

Lifted lift_derivatives(const DomainSpec &spec, const std::vector<Dual> &x)
{
    const std::size_t n = x.size();
    Lifted out;
    out.jac.assign(n + 1, std::vector<Dual>(n, Dual(0.0)));
    if (spec.kind() == DomainKind::Simplex) {
        Dual r(1.0);
        for (const auto &v : x) {
            r -= v;
        }
        const auto &k = spec.kappa();
        out.weight = pow(r, k[n]);
        for (std::size_t i = 0; i < n; ++i) {
            out.jac[i][i] = 0.5 / sqrt(x[i]);
            out.jac[n][i] = -0.5 / sqrt(r);
            out.weight *= pow(x[i], k[i]);
        }
        return out;
    }
    Dual s2(1.0);
    for (const auto &v : x) {
        s2 -= v * v;
    }
    const Dual s = sqrt(s2);
    for (std::size_t i = 0; i < n; ++i) {
        out.jac[i][i] = Dual(1.0);
        out.jac[n][i] = -x[i] / s;
    }
    if (spec.kind() == DomainKind::Ball) {
        out.weight = pow(s2, spec.gamma());
    } else {
        out.weight = pow(1.0 - x[0], spec.alpha() + 0.5) * pow(1.0 + x[0], spec.beta() + 0.5);
    }
    return out;
}

/// Inverse and determinant by Gauss-Jordan with partial pivoting on the values.
std::pair<std::vector<std::vector<Dual>>, Dual> invert(std::vector<std::vector<Dual>> a)
{
    const std::size_t n = a.size();
    std::vector<std::vector<Dual>> inv(n, std::vector<Dual>(n, Dual(0.0)));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = Dual(1.0);
    }
    Dual det(1.0);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(static_cast<double>(a[r][c])) > std::abs(static_cast<double>(a[p][c]))) {
                p = r;
            }
        }
        if (p != c) {
            std::swap(a[p], a[c]);
            std::swap(inv[p], inv[c]);
            det = -det;
        }
        const Dual piv = a[c][c];
        det *= piv;
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            const Dual m = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= m * a[c][j];
                inv[r][j] -= m * inv[c][j];
            }
        }
    }
    return {inv, det};
}

} // namespace

TestFunction TestFunction::polynomial(const MultiPoly &h)
{
    auto grad = gradient_polys(h);
    TestFunction t;
    t.name = "polynomial(degree " + std::to_string(h.degree()) + ")";
    t.value = [h](std::span<const double> x) { return poly_eval(h, x); };
    t.gradient = [grad](std::span<const double> x) { return eval_all(grad, x); };
    t.degree = std::max(0, h.degree());
    return t;
}

TestFunction TestFunction::bump(Point center, double radius)
{
    if (!(radius > 0.0)) {
        throw ArgumentError("bump radius must be positive");
    }
    auto s_of = [center, radius](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += (x[i] - center[i]) * (x[i] - center[i]);
        }
        return s / (radius * radius);
    };
    TestFunction t;
    t.name = "bump(radius " + format_number(radius) + ")";
    t.value = [s_of](std::span<const double> x) {
        const double s = s_of(x);
        return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s));
    };
    t.gradient = [s_of, center, radius](std::span<const double> x) {
        const double s = s_of(x);
        Point g(x.size(), 0.0);
        if (s >= 1.0) {
            return g;
        }
        const double v = std::exp(1.0 - 1.0 / (1.0 - s));
        const double ds = -v / ((1.0 - s) * (1.0 - s));
        for (std::size_t i = 0; i < x.size(); ++i) {
            g[i] = ds * 2.0 * (x[i] - center[i]) / (radius * radius);
        }
        return g;
    };
    return t;
}

TestFunction TestFunction::ridge(std::size_t axis, double center, double radius)
{
    if (!(radius > 0.0)) {
        throw ArgumentError("ridge radius must be positive");
    }
    TestFunction t;
    t.name = "ridge(axis " + std::to_string(axis) + ", center " + format_number(center) + ", radius " +
             format_number(radius) + ")";
    auto s_of = [axis, center, radius](std::span<const double> x) {
        if (axis >= x.size()) {
            throw ArgumentError("ridge axis " + std::to_string(axis) + " out of range");
        }
        const double u = (x[axis] - center) / radius;
        return u * u;
    };
    t.value = [s_of](std::span<const double> x) {
        const double s = s_of(x);
        return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s));
    };
    t.gradient = [s_of, axis, center, radius](std::span<const double> x) {
        const double s = s_of(x);
        Point g(x.size(), 0.0);
        if (s < 1.0) {
            const double v = std::exp(1.0 - 1.0 / (1.0 - s));
            g[axis] = -v / ((1.0 - s) * (1.0 - s)) * 2.0 * (x[axis] - center) / (radius * radius);
        }
        return g;
    };
    return t;
}

double chart_operator_scale(const DomainSpec &spec) { return spec.kind() == DomainKind::Simplex ? 4.0 : 1.0; }

MultiPoly apply_operator(const DomainSpec &spec, const MultiPoly &f)
{
    switch (spec.kind()) {
    case DomainKind::Interval:
        return apply_jacobi_operator(f, spec.alpha(), spec.beta());
    case DomainKind::Ball:
        return apply_ball_operator(f, spec.gamma());
    case DomainKind::Simplex:
        return apply_simplex_operator(f, spec.kappa());
    }
    return f;
}

nlohmann::json GreenResult::to_json() const { return {{"lhs", lhs}, {"rhs", rhs}, {"residual", residual}}; }

GreenResult green_identity_check(const DomainSpec &spec, const MultiPoly &f, const TestFunction &h,
                                 const QuadratureRule &quad)
{
    if (f.dimension() != spec.dimension()) {
        throw ArgumentError("green check: polynomial dimension does not match the domain");
    }
    const MultiPoly lf = chart_operator_scale(spec) * apply_operator(spec, f);
    const auto grad = gradient_polys(f);
    GreenResult r;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const auto x = quad.node(q);
        const double w = quad.weight(q);
        r.lhs += w * h.value(x) * poly_eval(lf, x);
        const Point gf = metric_gradient(spec, grad, x);
        const Point gh = h.gradient(x);
        double ip = 0.0;
        for (std::size_t i = 0; i < gf.size(); ++i) {
            ip += gf[i] * gh[i];
        }
        r.rhs -= w * ip;
    }
    r.residual = std::abs(r.lhs - r.rhs) / std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
    return r;
}

GreenResult green_identity_check(const DomainSpec &spec, const MultiPoly &f, const TestFunction &h)
{
    const int df = std::max(0, f.degree());
    const int degree = h.degree >= 0 ? df + h.degree + 2 : df + 320;
    return green_identity_check(spec, f, h, quadrature(spec, degree));
}

nlohmann::json FluxReport::to_json() const
{
    nlohmann::json fj = nlohmann::json::array();
    for (const auto &f : faces) {
        fj.push_back({{"name", f.name},
                      {"expected_slope", f.expected_slope},
                      {"J_values", f.j_values},
                      {"zero", f.zero},
                      {"fit", f.zero ? nlohmann::json(nullptr) : f.fit.to_json()}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"report", "flux"},
            {"spec", spec.to_json()},
            {"epsilons", epsilons},
            {"J_values", j_values},
            {"faces", fj},
            {"dominating_face", dominating_face},
            {"fitted_slope", fitted_slope},
            {"expected_slope", expected_slope},
            {"r2", r2},
            {"exact_zero", exact_zero},
            {"slope_tolerance", slope_tolerance},
            {"min_r2", min_r2},
            {"pass", pass}};
}

FluxReport boundary_flux_decay(const DomainSpec &spec, const MultiPoly &f, const TestFunction &h,
                               std::span<const double> epsilons, int sphere_degree)
{
    if (epsilons.size() < 4) {
        throw ArgumentError("flux decay needs at least 4 epsilons");
    }
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0 && epsilons[i] < 0.5)) {
            throw ArgumentError("flux epsilons must lie in (0, 1/2)");
        }
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
            throw ArgumentError("flux epsilons must be strictly decreasing");
        }
    }
    if (epsilons.front() < 10.0 * epsilons.back()) {
        throw ArgumentError("flux epsilons must span at least a decade");
    }
    const std::size_t n = spec.dimension();
    const auto grad = gradient_polys(f);
    // w h (g^{-1} grad f) . normal
    auto density = [&](std::span<const double> x, std::span<const double> normal) {
        const Point v = metric_gradient(spec, grad, x);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += v[i] * normal[i];
        }
        return s * h.value(x) * weight_density(spec, x);
    };

    FluxReport rep{spec, {epsilons.begin(), epsilons.end()}};
    std::vector<std::function<double(double)>> face_flux;
    if (spec.kind() == DomainKind::Interval) {
        rep.faces.push_back({"x = +sqrt(1-eps)", spec.alpha() + 1.0});
        rep.faces.push_back({"x = -sqrt(1-eps)", spec.beta() + 1.0});
        for (const double sign : {1.0, -1.0}) {
            face_flux.push_back([&, sign](double eps) {
                const double x = sign * std::sqrt(1.0 - eps);
                const double nn = sign;
                return density(std::span(&x, 1), std::span(&nn, 1));
            });
        }
    } else if (spec.kind() == DomainKind::Ball) {
        rep.faces.push_back({"|x|^2 = 1-eps", spec.gamma() + 0.5});
        std::vector<Point> dirs;
        std::vector<double> wts;
        if (n == 1) {
            dirs = {{1.0}, {-1.0}};
            wts = {1.0, 1.0};
        } else {
            const QuadratureRule rule = quadrature(DomainSpec::ball(n - 1, 0.0), sphere_degree);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const auto u = rule.node(q);
                double s = 1.0;
                for (const double v : u) {
                    s -= v * v;
                }
                for (const double sign : {1.0, -1.0}) {
                    Point d(u.begin(), u.end());
                    d.push_back(sign * std::sqrt(std::max(0.0, s)));
                    dirs.push_back(std::move(d));
                    wts.push_back(rule.weight(q));
                }
            }
        }
        face_flux.push_back([&, dirs, wts](double eps) {
            const double rho = std::sqrt(1.0 - eps);
            const double jac = std::pow(rho, static_cast<double>(n) - 1.0);
            double s = 0.0;
            Point x(n);
            for (std::size_t q = 0; q < dirs.size(); ++q) {
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] = rho * dirs[q][i];
                }
                s += wts[q] * jac * density(x, dirs[q]);
            }
            return s;
        });
    } else {
        const auto &k = spec.kappa();
        for (std::size_t i = 0; i < n; ++i) {
            rep.faces.push_back({"x_" + std::to_string(i + 1) + " = eps", k[i] + 0.5});
            face_flux.push_back([&, i](double eps) {
                Point x(n);
                Point normal(n, 0.0);
                normal[i] = -1.0;
                return integrate_region(n - 1, 1.0 - 2.0 * eps, eps, [&](std::span<const double> y) {
                    for (std::size_t j = 0, m = 0; j < n; ++j) {
                        x[j] = j == i ? eps : y[m++];
                    }
                    return density(x, normal);
                });
            });
        }
        rep.faces.push_back({"|x| = 1-eps", k[n] + 0.5});
        face_flux.push_back([&](double eps) {
            Point x(n);
            // Normal (1..1)/sqrt(n) against the area element sqrt(n) dx'.
            const Point ones(n, 1.0);
            return integrate_region(n - 1, 1.0 - 2.0 * eps, eps, [&](std::span<const double> y) {
                double s = 0.0;
                for (std::size_t j = 0; j + 1 < n; ++j) {
                    x[j] = y[j];
                    s += y[j];
                }
                x[n - 1] = 1.0 - eps - s;
                return density(x, ones);
            });
        });
    }

    rep.j_values.assign(epsilons.size(), 0.0);
    for (std::size_t fi = 0; fi < rep.faces.size(); ++fi) {
        auto &face = rep.faces[fi];
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
            const double j = face_flux[fi](epsilons[e]);
            face.j_values.push_back(j);
            rep.j_values[e] += j;
        }
        face.zero = std::all_of(face.j_values.begin(), face.j_values.end(),
                                [](double v) { return std::abs(v) < kZeroFlux; });
        if (!face.zero) {
            std::vector<double> lx;
            std::vector<double> ly;
            for (std::size_t e = 0; e < epsilons.size(); ++e) {
                if (face.j_values[e] != 0.0) {
                    lx.push_back(std::log(epsilons[e]));
                    ly.push_back(std::log(std::abs(face.j_values[e])));
                }
            }
            if (lx.size() >= 2) {
                face.fit = fit_line(lx, ly);
            }
        }
    }
    rep.exact_zero = std::all_of(rep.faces.begin(), rep.faces.end(), [](const FluxFace &f) { return f.zero; });
    if (rep.exact_zero) {
        rep.pass = true;
        return rep;
    }
    const FluxFace *dom = nullptr;
    for (const auto &face : rep.faces) {
        if (!face.zero && (dom == nullptr || face.expected_slope < dom->expected_slope)) {
            dom = &face;
        }
    }
    rep.dominating_face = dom->name;
    rep.fitted_slope = dom->fit.slope;
    rep.expected_slope = dom->expected_slope;
    rep.r2 = dom->fit.r2;
    {
        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
            if (rep.j_values[e] != 0.0) {
                lx.push_back(std::log(epsilons[e]));
                ly.push_back(std::log(std::abs(rep.j_values[e])));
            }
        }
        if (lx.size() >= 2) {
            rep.total_fit = fit_line(lx, ly);
        }
    }
    rep.pass = std::abs(rep.fitted_slope - rep.expected_slope) <= rep.slope_tolerance && rep.r2 >= rep.min_r2;
    return rep;
}

nlohmann::json ChartLaplacianResult::to_json() const
{
    return {{"max_residual", max_residual}, {"metric_mismatch", metric_mismatch}, {"samples", samples}};
}

ChartLaplacianResult chart_laplacian_check(const DomainSpec &spec, const MultiPoly &f, std::span<const Point> samples)
{
    const std::size_t n = spec.dimension();
    if (f.dimension() != n) {
        throw ArgumentError("chart check: polynomial dimension does not match the domain");
    }
    const MultiPoly lf = chart_operator_scale(spec) * apply_operator(spec, f);
    const auto grad = gradient_polys(f);
    std::vector<std::vector<MultiPoly>> hess(n);
    for (std::size_t i = 0; i < n; ++i) {
        hess[i] = gradient_polys(grad[i]);
    }
    ChartLaplacianResult res;
    double max_diff = 0.0;
    double scale = 0.0;
    for (const auto &x : samples) {
        if (x.size() != n) {
            throw ArgumentError("chart check: sample dimension does not match the domain");
        }
        if (!in_domain(spec, x) || boundary_gap(spec, x) < kChartProximity) {
            throw RefusalError("chart check: sample within 1e-8 of the boundary, where the metric is singular");
        }
        // div_j = sum_i d_i (w sqrt(det g) g^{ij}); one forward pass per seeded axis i.
        Point div(n, 0.0);
        double density = 0.0;
        Eigen::MatrixXd g_lift(n, n);
        double det_lift = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<Dual> xd;
            for (std::size_t k = 0; k < n; ++k) {
                xd.push_back(k == i ? boost::math::differentiation::make_fvar<double, 1>(x[k]) : Dual(x[k]));
            }
            const Lifted lift = lift_derivatives(spec, xd);
            std::vector<std::vector<Dual>> g(n, std::vector<Dual>(n, Dual(0.0)));
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    for (std::size_t r = 0; r <= n; ++r) {
                        g[a][b] += lift.jac[r][a] * lift.jac[r][b];
                    }
                }
            }
            auto [ginv, det] = invert(g);
            const Dual m = lift.weight * sqrt(det);
            for (std::size_t j = 0; j < n; ++j) {
                div[j] += (m * ginv[i][j]).derivative(1);
            }
            density = static_cast<double>(m);
            det_lift = static_cast<double>(det);
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    g_lift(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = static_cast<double>(g[a][b]);
                }
            }
        }
        const Eigen::MatrixXd g_geom = metric_tensor(spec, x);
        const Eigen::MatrixXd ginv_geom = inverse_metric(spec, x);
        res.metric_mismatch = std::max({res.metric_mismatch, (g_lift - g_geom).cwiseAbs().maxCoeff() /
                                                                 g_geom.cwiseAbs().maxCoeff(),
                                        std::abs(det_lift - metric_det(spec, x)) / metric_det(spec, x)});
        const Point df = eval_all(grad, x);
        double chart = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            chart += div[j] / density * df[j];
            for (std::size_t i = 0; i < n; ++i) {
                chart += ginv_geom(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                         poly_eval(hess[i][j], x);
            }
        }
        const double op = poly_eval(lf, x);
        max_diff = std::max(max_diff, std::abs(chart - op));
        scale = std::max({scale, std::abs(chart), std::abs(op)});
        ++res.samples;
    }
    res.max_residual = scale == 0.0 ? 0.0 : max_diff / scale;
    return res;
}

} // namespace polyheat::validation
