// Runs the acceptance criteria at their stated tolerances and prints one PASS/FAIL line each.
// Usage: acceptance [criterion numbers...]; exits 0 iff every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyheat/basis.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/heat_kernel.hpp"
#include "polyheat/validation.hpp"

using namespace polyheat;
using namespace polyheat::validation;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what)
    {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

struct Criterion {
    int id;
    std::string name;
    std::function<void(Outcome &)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const OrthonormalBasis> make_basis(const DomainSpec &spec, std::size_t degree)
{
    return std::make_shared<const OrthonormalBasis>(OrthonormalBasis::build(spec, degree));
}

double max_of(const std::vector<double> &v) { return *std::max_element(v.begin(), v.end()); }

std::vector<DomainSpec> eigen_configs()
{
    std::vector<DomainSpec> out;
    for (const double a : {-0.9, -0.5, 0.0, 1.5}) {
        for (const double b : {-0.9, -0.5, 0.0, 1.5}) {
            out.push_back(DomainSpec::interval(a, b));
        }
    }
    for (const double g : {-0.4, 0.0, 1.0}) {
        out.push_back(DomainSpec::ball(2, g));
    }
    std::vector<double> k{-0.4, 0.0, 1.0};
    do {
        out.push_back(DomainSpec::simplex(k));
    } while (std::next_permutation(k.begin(), k.end()));
    return out;
}

std::size_t eigen_degree(const DomainSpec &spec) { return spec.kind() == DomainKind::Interval ? 40 : 20; }

/// The three domains used by the kernel criteria, at their default degrees.
std::vector<DomainSpec> kernel_domains()
{
    return {DomainSpec::interval(0.7, -0.3), DomainSpec::ball(2, 0.5), DomainSpec::simplex({0.5, 0.5, 0.5})};
}

void c1_eigen(Outcome &o)
{
    double worst_interval = 0.0;
    double worst_other = 0.0;
    double slowest = 0.0;
    for (const auto &spec : eigen_configs()) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto b = OrthonormalBasis::build(spec, eigen_degree(spec));
        const double r = max_of(verify_eigenrelation(b));
        const double dt = seconds_since(t0);
        slowest = std::max(slowest, dt);
        const bool interval = spec.kind() == DomainKind::Interval;
        (interval ? worst_interval : worst_other) = std::max(interval ? worst_interval : worst_other, r);
        o.require(r <= (interval ? 1e-9 : 1e-8), spec.describe() + " residual " + format_number(r));
        o.require(dt <= 60.0, spec.describe() + " took " + format_number(dt) + " s");
    }
    o.detail << "interval max " << worst_interval << " (<= 1e-9), ball/simplex max " << worst_other
             << " (<= 1e-8), slowest configuration " << slowest << " s";
}

void c2_gram(Outcome &o)
{
    double worst_interval = 0.0;
    double worst_other = 0.0;
    for (const auto &spec : eigen_configs()) {
        const double r = OrthonormalBasis::build(spec, eigen_degree(spec)).gram_residual();
        const bool interval = spec.kind() == DomainKind::Interval;
        (interval ? worst_interval : worst_other) = std::max(interval ? worst_interval : worst_other, r);
        o.require(r <= (interval ? 1e-10 : 1e-8), spec.describe() + " Gram " + format_number(r));
    }
    o.detail << "interval max " << worst_interval << " (<= 1e-10), ball/simplex max " << worst_other << " (<= 1e-8)";
}

double chebyshev_cosines(double t, double x, double y)
{
    const double a = std::acos(x);
    const double b = std::acos(y);
    double s = 1.0;
    for (int k = 1; k < 400; ++k) {
        s += 2.0 * std::exp(-double(k) * k * t) * std::cos(k * a) * std::cos(k * b);
    }
    return s / pi;
}

void c3_chebyshev(Outcome &o)
{
    const HeatKernelEvaluator ev(make_basis(DomainSpec::interval(-0.5, -0.5), 200));
    double worst = 0.0;
    for (const double t : {0.05, 0.2, 1.0, 5.0}) {
        for (int i = 0; i < 32; ++i) {
            const double x = std::cos(pi * (i + 0.5) / 32);
            for (int j = 0; j < 32; ++j) {
                const double y = -1.0 + 2.0 * j / 31.0;
                const auto k = ev.heat_kernel(t, std::span(&x, 1), std::span(&y, 1));
                worst = std::max(worst, std::abs(k.value - chebyshev_cosines(t, x, y)));
            }
        }
    }
    o.require(worst <= 1e-10, "max deviation " + format_number(worst));
    o.detail << "max |kernel - cosine series| " << worst << " over 4 times x 32 x 32 (<= 1e-10)";
}

void c4_mass(Outcome &o)
{
    for (const auto &spec : kernel_domains()) {
        const HeatKernelEvaluator ev(make_basis(spec, default_max_degree(spec)));
        const auto pts = random_interior_points(spec, 10, 4);
        double worst = 0.0;
        for (const double t : log_spaced(ev.policy().t_min, 5.0, 10)) {
            for (const auto &x : pts) {
                worst = std::max(worst, std::abs(ev.mass_check(t, x) - 1.0));
            }
        }
        o.require(worst <= 1e-6, spec.describe() + " " + format_number(worst));
        o.detail << spec.describe() << " t in [" << ev.policy().t_min << ", 5]: " << worst << "; ";
    }
    o.detail << "(<= 1e-6)";
}

void c5_semigroup(Outcome &o)
{
    for (const auto &spec : kernel_domains()) {
        const HeatKernelEvaluator ev(make_basis(spec, default_max_degree(spec)));
        const auto pts = random_interior_points(spec, 6, 5);
        double worst = 0.0;
        for (const auto [s, t] : {std::pair{0.3, 0.2}, {0.5, 0.5}}) {
            for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
                worst = std::max(worst, ev.semigroup_check(s, t, pts[i], pts[i + 1]));
            }
        }
        o.require(worst <= 1e-6, spec.describe() + " " + format_number(worst));
        o.detail << spec.describe() << ": " << worst << "; ";
    }
    o.detail << "(<= 1e-6)";
}

void c6_symmetry(Outcome &o)
{
    double sym = 0.0;
    double adj = 0.0;
    for (const auto &spec : kernel_domains()) {
        const HeatKernelEvaluator ev(make_basis(spec, default_max_degree(spec)));
        const auto pts = random_interior_points(spec, 12, 6);
        for (const double t : {0.05, 0.5}) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    const double a = ev.heat_kernel(t, pts[i], pts[j]).value;
                    const double b = ev.heat_kernel(t, pts[j], pts[i]).value;
                    sym = std::max(sym, std::abs(a - b) / std::max(1.0, std::abs(a)));
                }
            }
        }
        for (std::uint64_t p = 0; p < 4; ++p) {
            const auto f = random_multipoly(spec.dimension(), 10, 100 + 2 * p);
            const auto g = random_multipoly(spec.dimension(), 3 + p, 101 + 2 * p);
            adj = std::max(adj, ev.self_adjointness_check(0.1, f, g));
        }
    }
    o.require(sym <= 1e-13, "symmetry " + format_number(sym));
    o.require(adj <= 1e-8, "self-adjointness " + format_number(adj));
    o.detail << "symmetry " << sym << " (<= 1e-13), self-adjointness " << adj << " (<= 1e-8)";
}

void c7_chart(Outcome &o)
{
    for (const auto &spec : {DomainSpec::ball(1, 0.3), DomainSpec::ball(2, 0.75), DomainSpec::simplex({0.2, 0.7}),
                             DomainSpec::simplex({0.2, 1.0, -0.3})}) {
        const auto pts = random_interior_points(spec, 100, 7);
        const auto f = random_multipoly(spec.dimension(), 5, 8);
        const auto r = chart_laplacian_check(spec, f, pts);
        o.require(r.max_residual <= 1e-8, spec.describe() + " " + format_number(r.max_residual));
        o.detail << spec.describe() << " (factor " << chart_operator_scale(spec) << "): " << r.max_residual << "; ";
    }
    o.detail << "(<= 1e-8)";
}

void c8_green(Outcome &o)
{
    for (const auto &spec : {DomainSpec::interval(0.7, -0.3), DomainSpec::ball(2, 0.25), DomainSpec::ball(3, -0.2),
                             DomainSpec::simplex({0.25, 0.5, 1.5}), DomainSpec::simplex({-0.3, 0.5})}) {
        double worst = 0.0;
        for (std::uint64_t p = 0; p < 20; ++p) {
            const auto f = random_multipoly(spec.dimension(), 6, 200 + 2 * p);
            const auto h = random_multipoly(spec.dimension(), 4, 201 + 2 * p);
            worst = std::max(worst, green_identity_check(spec, f, TestFunction::polynomial(h)).residual);
        }
        o.require(worst <= 1e-8, spec.describe() + " " + format_number(worst));
        o.detail << spec.describe() << ": " << worst << "; ";
    }
    o.detail << "(<= 1e-8, 20 pairs each)";
}

void c9_flux(Outcome &o)
{
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01};
    struct Case {
        DomainSpec spec;
        MultiPoly f;
        TestFunction h;
        double expected;
    };
    const auto one = [](std::size_t n) { return TestFunction::polynomial(MultiPoly::constant(n, 1.0)); };
    const auto x1 = [](std::size_t n) { return MultiPoly::variable(n, 0); };
    const std::vector<Case> cases{
        {DomainSpec::ball(2, 0.25), x1(2) * x1(2), one(2), 0.75},
        {DomainSpec::ball(2, 1.0), x1(2) * x1(2), one(2), 1.5},
        {DomainSpec::simplex({0.5, 0.5}), x1(1), one(1), 1.0},
        {DomainSpec::simplex({0.25, 0.5, 0.5}), x1(2), TestFunction::ridge(1, 0.4, 0.15), 0.75},
    };
    for (const auto &c : cases) {
        const auto r = boundary_flux_decay(c.spec, c.f, c.h, eps);
        o.require(!r.exact_zero, c.spec.describe() + " flux vanished");
        o.require(std::abs(r.fitted_slope - c.expected) <= 0.1 && std::abs(r.expected_slope - c.expected) < 1e-12,
                  c.spec.describe() + " slope " + format_number(r.fitted_slope));
        o.require(r.r2 >= 0.98, c.spec.describe() + " R^2 " + format_number(r.r2));
        o.detail << c.spec.describe() << " face " << r.dominating_face << ": " << r.fitted_slope << " vs "
                 << c.expected << ", R^2 " << r.r2 << "; ";
    }
    o.detail << "(+-0.1, R^2 >= 0.98)";
}

void c10_correspondence(Outcome &o)
{
    for (const auto [a, b] : {std::pair{-0.5, -0.5}, {0.0, 0.0}, {0.7, -0.3}}) {
        CorrespondenceOptions opt;
        opt.times = {0.2, 1.0};
        const auto rep = jacobi_simplex_correspondence(a, b, 30, opt);
        double worst = 0.0;
        for (const auto &c : rep.checks) {
            worst = std::max(worst, c.max_residual);
        }
        o.require(rep.checks.size() == 4 && worst <= 1e-9,
                  "(" + format_number(a) + ", " + format_number(b) + ") residual " + format_number(worst));
        o.detail << "(" << a << ", " << b << "): " << worst << "; ";
    }
    o.detail << "(<= 1e-9, k <= 30)";
}

void c11_gauss(Outcome &o)
{
    struct Case {
        DomainSpec spec;
        std::size_t degree;
        std::size_t per_axis;
        double t_lo;
    };
    for (const auto &c : {Case{DomainSpec::interval(-0.5, -0.5), 200, 24, 0.005},
                          Case{DomainSpec::interval(0.7, -0.3), 200, 24, 0.005}, Case{DomainSpec::ball(2, 0.0), 40, 7, 0.02},
                          Case{DomainSpec::ball(2, 0.5), 40, 7, 0.02},
                          Case{DomainSpec::simplex({0.5, 0.5, 0.5}), 40, 7, 0.02}}) {
        const auto t0 = std::chrono::steady_clock::now();
        const HeatKernelEvaluator ev(make_basis(c.spec, c.degree));
        const auto r = gauss_ratio_scan(ev, VolumeOracle{c.spec, {200'000}}, interior_grid(c.spec, c.per_axis),
                                        log_spaced(c.t_lo, 0.5, 8));
        const double dt = seconds_since(t0);
        o.require(r.bounded, c.spec.describe() + " not bounded");
        o.require(r.violations == 0, c.spec.describe() + " lower-bound violations");
        o.require(dt <= 600.0, c.spec.describe() + " took " + format_number(dt) + " s");
        o.detail << c.spec.describe() << ": E [" << r.e_min << ", " << r.e_max << "] ratio " << r.e_max / r.e_min
                 << ", N [" << r.n_lo << ", " << r.n_hi << "] ratio " << r.n_hi / r.n_lo << ", " << dt << " s; ";
    }
    o.detail << "(E ratio <= 25, N ratio <= 20)";
}

void c12_doubling(Outcome &o)
{
    const auto radii = log_spaced(0.02, 0.7, 6);
    for (const auto &spec : {DomainSpec::interval(0.7, -0.3), DomainSpec::interval(-0.5, -0.5), DomainSpec::ball(2, 0.0),
                             DomainSpec::ball(2, 0.5), DomainSpec::ball(2, 1.0), DomainSpec::simplex({0.5, 0.5, 0.5}),
                             DomainSpec::simplex({0.0, 0.5, 1.0})}) {
        const auto pts = interior_grid(spec, spec.kind() == DomainKind::Interval ? 16 : 5);
        const auto r = doubling_scan(VolumeOracle{spec, {200'000}}, pts, radii);
        o.require(r.pass, spec.describe() + " ratio " + format_number(r.max_ratio) + " spread " + format_number(r.spread));
        o.detail << spec.describe() << ": max " << r.max_ratio << " (cap " << r.cap << "), spread " << r.spread;
        if (spec.kind() == DomainKind::Ball) {
            const auto w = weight_oscillation_scan(spec, pts, radii);
            o.require(w.pass, spec.describe() + " weight oscillation " + format_number(w.max_ratio));
            o.detail << ", oscillation " << w.max_ratio << " (bound " << w.bound << ")";
        }
        o.detail << "; ";
    }
    o.detail << "(spread <= 30)";
}

void c13_localization(Outcome &o)
{
    struct Case {
        DomainSpec spec;
        std::size_t degree;
        std::size_t per_axis;
    };
    for (const auto &c : {Case{DomainSpec::interval(0.7, -0.3), 400, 200}, Case{DomainSpec::ball(2, 0.5), 80, 15}}) {
        const HeatKernelEvaluator ev(make_basis(c.spec, c.degree));
        const unsigned m = static_cast<unsigned>(c.spec.dimension() + 2);
        const auto phi = MultiplierSpec::smooth_bump(4.0, m);
        const auto pts = interior_grid(c.spec, c.per_axis);
        std::vector<double> cm;
        for (const double delta : {0.05, 0.1}) {
            const auto r = localization_check(ev, phi, delta, m, VolumeOracle{c.spec, {100'000}}, pts);
            o.require(r.decay_exponent >= m - 0.5 && r.fit.r2 >= 0.98 && std::isfinite(r.c_m_hat),
                      c.spec.describe() + " delta " + format_number(delta));
            cm.push_back(r.c_m_hat);
            o.detail << c.spec.describe() << " m=" << m << " delta " << delta << ": exponent " << r.decay_exponent
                     << ", R^2 " << r.fit.r2 << ", c_m " << r.c_m_hat << "; ";
        }
        const double ratio = max_of(cm) / *std::min_element(cm.begin(), cm.end());
        o.require(ratio <= 2.0, c.spec.describe() + " c_m ratio " + format_number(ratio));
    }
    o.detail << "(exponent >= m - 0.5, R^2 >= 0.98, c_m within 2x)";
}

void c14_finite_speed(Outcome &o)
{
    const auto spec = DomainSpec::interval(-0.5, -0.5);
    const auto basis = make_basis(spec, 12000);
    TruncationPolicy policy = TruncationPolicy::defaults(*basis, 1e-13);
    const HeatKernelEvaluator ev(basis, policy);
    const auto phi = MultiplierSpec::sinc_power(2.0, 3);
    const auto pts = interior_grid(spec, 160);
    std::vector<double> cs;
    for (const double delta : {0.05, 0.1}) {
        const auto r = finite_speed_scan(ev, phi, delta, pts);
        o.require(r.pass && !r.degenerate, "delta " + format_number(delta));
        o.require(r.max_beyond <= 1e-8, "beyond r*: " + format_number(r.max_beyond));
        cs.push_back(r.c_star);
        o.detail << "delta " << delta << ": r* " << r.r_star << ", c* " << r.c_star << ", max beyond " << r.max_beyond
                 << ", tail " << r.max_tail << "; ";
    }
    const double lo = *std::min_element(cs.begin(), cs.end());
    const double hi = max_of(cs);
    o.require(lo > 0.0 && hi <= 1.2 * lo, "c* spread " + format_number(hi / lo));
    o.detail << "(c* within 20%, beyond <= 1e-8)";
}

void c15_determinant(Outcome &o)
{
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 8);
        std::vector<double> a(n);
        Eigen::MatrixXd m = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = u(rng);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += a[i];
        }
        const double ref = m.partialPivLu().determinant();
        worst = std::max(worst, std::abs(perturbed_identity_det(a) - ref) / std::abs(ref));
    }
    o.require(worst <= 1e-12, "relative error " + format_number(worst));
    o.detail << "max relative error " << worst << " over 1000 vectors, n <= 8 (<= 1e-12)";
}

} // namespace

int main(int argc, char **argv)
{
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    const std::vector<Criterion> criteria{
        {1, "eigen-decomposition", c1_eigen},        {2, "orthonormality", c2_gram},
        {3, "closed-form oracle", c3_chebyshev},      {4, "mass conservation", c4_mass},
        {5, "semigroup", c5_semigroup},               {6, "symmetry and self-adjointness", c6_symmetry},
        {7, "chart correspondence", c7_chart},        {8, "Green's identity", c8_green},
        {9, "boundary flux rates", c9_flux},          {10, "Jacobi-simplex correspondence", c10_correspondence},
        {11, "Gaussian-bound certification", c11_gauss}, {12, "doubling", c12_doubling},
        {13, "localization", c13_localization},       {14, "finite-speed surrogate", c14_finite_speed},
        {15, "determinant lemma", c15_determinant},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::stoi(argv[i]));
    }
    int failed = 0;
    for (const auto &c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) {
            continue;
        }
        Outcome o;
        o.detail.precision(4);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << "error: " << e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s  criterion %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.str().c_str(), seconds_since(t0));
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
