#include "polyheat/cli/suite.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>

#include "polyheat/cli/csv.hpp"
#include "polyheat/heat_kernel.hpp"
#include "polyheat/validation.hpp"

namespace polyheat::cli {

using namespace polyheat::validation;

namespace {

constexpr const char *kCapacityHint = " (remediation: raise basis.precision, lower basis.max_degree or raise t)";

class Context {
public:
    explicit Context(const RunConfig &config) : config_(config), spec_(config.spec())
    {
        std::filesystem::create_directories(config.output_dir);
    }

    const RunConfig &config() const { return config_; }
    const DomainSpec &spec() const { return spec_; }
    std::size_t n() const { return spec_.dimension(); }
    std::uint64_t seed() const { return config_.seed.value_or(1); }

    const OrthonormalBasis &basis()
    {
        if (!basis_) {
            basis_ = std::make_shared<const OrthonormalBasis>(OrthonormalBasis::build(
                spec_, config_.resolved_degree(), config_.precision, config_.construction));
        }
        return *basis_;
    }

    const HeatKernelEvaluator &evaluator()
    {
        if (!evaluator_) {
            basis();
            TruncationPolicy policy = TruncationPolicy::defaults(*basis_, config_.epsilon);
            if (config_.t_min > 0.0) {
                policy.t_min = config_.t_min;
            }
            evaluator_ = std::make_unique<HeatKernelEvaluator>(basis_, policy);
        }
        return *evaluator_;
    }

    VolumeOracle volume() const { return {spec_, {config_.mc_samples, config_.seed.value()}}; }

    const std::vector<Point> &grid()
    {
        if (grid_.empty()) {
            grid_ = interior_grid(spec_, config_.per_axis, config_.margin);
            if (grid_.empty()) {
                throw ConfigError("grid.margin", "no grid node lies at distance >= " + format_double(config_.margin) +
                                                     " from the boundary; raise grid.per_axis");
            }
        }
        return grid_;
    }

    std::string path(const std::string &file) const
    {
        return (std::filesystem::path(config_.output_dir) / file).string();
    }

    std::vector<std::string> point_header(const std::string &prefix) const { return coordinate_header(prefix, n()); }

private:
    const RunConfig &config_;
    DomainSpec spec_;
    std::shared_ptr<const OrthonormalBasis> basis_;
    std::unique_ptr<HeatKernelEvaluator> evaluator_;
    std::vector<Point> grid_;
};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string> &b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

/// At most count entries of v, evenly spaced.
std::vector<Point> subsample(const std::vector<Point> &v, std::size_t count)
{
    if (v.size() <= count) {
        return v;
    }
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(v[i * (v.size() - 1) / (count - 1)]);
    }
    return out;
}

std::string verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

SuiteResult run_ops(Context &ctx)
{
    const auto &basis = ctx.basis();
    const std::size_t K = std::min(ctx.config().eigen_degree, basis.max_degree());
    const auto res = verify_eigenrelation(basis, K);
    const double tol = ctx.spec().kind() == DomainKind::Interval ? 1e-9 : 1e-8;
    SuiteResult r{"ops"};
    CsvWriter csv(ctx.path("ops.csv"), {"k", "lambda", "level_size", "residual"});
    double worst = 0.0;
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t k = 0; k < res.size(); ++k) {
        csv << k << basis.lambda(k) << basis.level_count(k) << res[k];
        csv.end_row();
        worst = std::max(worst, res[k]);
        levels.push_back({{"k", k}, {"lambda", basis.lambda(k)}, {"residual", res[k]}});
    }
    r.pass = worst <= tol;
    r.summary = "max eigen residual " + format_number(worst) + " over levels 0.." + std::to_string(K) +
                " (tolerance " + format_number(tol) + ")";
    r.files.push_back(csv.path());
    r.report = {{"max_residual", worst}, {"tolerance", tol}, {"levels", levels}};
    return r;
}

SuiteResult run_basis(Context &ctx)
{
    const auto &basis = ctx.basis();
    const double gram = basis.gram_residual();
    const double tol = ctx.spec().kind() == DomainKind::Interval ? 1e-10 : 1e-8;
    SuiteResult r{"basis"};
    CsvWriter csv(ctx.path("basis.csv"), {"k", "lambda", "level_size", "level_begin"});
    for (std::size_t k = 0; k <= basis.max_degree(); ++k) {
        csv << k << basis.lambda(k) << basis.level_count(k) << basis.level_begin(k);
        csv.end_row();
    }
    r.pass = gram <= tol;
    r.summary = std::to_string(basis.size()) + " members to degree " + std::to_string(basis.max_degree()) +
                ", Gram residual " + format_number(gram) + " (tolerance " + format_number(tol) + ")";
    r.files.push_back(csv.path());
    r.report = {{"members", basis.size()},
                {"max_degree", basis.max_degree()},
                {"precision", to_string(basis.precision())},
                {"construction", to_string(basis.construction())},
                {"gram_residual", gram},
                {"tolerance", tol}};
    return r;
}

SuiteResult run_kernel(Context &ctx)
{
    const auto &ev = ctx.evaluator();
    const auto pts = subsample(ctx.grid(), 10);
    const auto &cfg = ctx.config();
    SuiteResult r{"kernel"};
    CsvWriter csv(ctx.path("kernel.csv"),
                  concat(concat({"check", "s", "t"}, ctx.point_header("x")), concat(ctx.point_header("y"), {"residual"})));
    const std::vector<double> none(ctx.n(), 0.0);
    auto row = [&](const std::string &check, double s, double t, const Point &x, const Point &y, double v) {
        csv << check << s << t;
        csv.cells(x).cells(y) << v;
        csv.end_row();
    };
    double mass = 0.0;
    for (const double t : cfg.times) {
        for (const auto &x : pts) {
            const double m = std::abs(ev.mass_check(t, x) - 1.0);
            row("mass", 0.0, t, x, none, m);
            mass = std::max(mass, m);
        }
    }
    double semigroup = 0.0;
    const auto few = subsample(pts, 4);
    for (const auto &[s, t] : {std::pair{0.3, 0.2}, {0.5, 0.5}}) {
        for (std::size_t i = 0; i + 1 < few.size(); ++i) {
            const double v = ev.semigroup_check(s, t, few[i], few[i + 1]);
            row("semigroup", s, t, few[i], few[i + 1], v);
            semigroup = std::max(semigroup, v);
        }
    }
    double symmetry = 0.0;
    const double t0 = cfg.times.front();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double a = ev.heat_kernel(t0, pts[i], pts[j]).value;
            const double b = ev.heat_kernel(t0, pts[j], pts[i]).value;
            const double v = std::abs(a - b) / std::max(1.0, std::abs(a));
            row("symmetry", 0.0, t0, pts[i], pts[j], v);
            symmetry = std::max(symmetry, v);
        }
    }
    double adjoint = 0.0;
    const unsigned deg = std::min(cfg.poly_degree, 10u);
    for (std::size_t i = 0; i < std::min<std::size_t>(cfg.polynomials, 5); ++i) {
        const auto f = random_multipoly(ctx.n(), deg, ctx.seed() + 2 * i);
        const auto g = random_multipoly(ctx.n(), deg, ctx.seed() + 2 * i + 1);
        const double v = ev.self_adjointness_check(t0, f, g);
        row("self_adjoint", 0.0, t0, none, none, v);
        adjoint = std::max(adjoint, v);
    }
    r.pass = mass <= 1e-6 && semigroup <= 1e-6 && symmetry <= 1e-13 && adjoint <= 1e-8;
    r.summary = "mass " + format_number(mass) + ", semigroup " + format_number(semigroup) + ", symmetry " +
                format_number(symmetry) + ", self-adjointness " + format_number(adjoint);
    r.files.push_back(csv.path());
    r.report = {{"policy", ev.policy().to_json()},
                {"mass_max", mass},
                {"semigroup_max", semigroup},
                {"symmetry_max", symmetry},
                {"self_adjointness_max", adjoint},
                {"tolerances", {{"mass", 1e-6}, {"semigroup", 1e-6}, {"symmetry", 1e-13}, {"self_adjointness", 1e-8}}}};
    return r;
}

SuiteResult run_gauss(Context &ctx)
{
    const auto rep = gauss_ratio_scan(ctx.evaluator(), ctx.volume(), ctx.grid(), ctx.config().times);
    SuiteResult r{"gauss"};
    CsvWriter csv(ctx.path("gauss.csv"),
                  concat(concat(ctx.point_header("x"), ctx.point_header("y")),
                         {"t", "rho", "V_x", "V_y", "kernel", "tail", "N", "E", "admissible", "diagonal"}));
    for (const auto &row : rep.rows) {
        if (!row.admissible && !row.diagonal) {
            continue;
        }
        csv.cells(row.x).cells(row.y) << row.t << row.rho << row.vx << row.vy << row.kernel << row.tail << row.n_value;
        csv << (row.admissible && row.kernel > row.tail ? format_double(row.exponent) : std::string());
        csv << std::to_string(row.admissible) << std::to_string(row.diagonal);
        csv.end_row();
    }
    r.pass = rep.bounded;
    r.summary = "E in [" + format_number(rep.e_min) + ", " + format_number(rep.e_max) + "], N in [" +
                format_number(rep.n_lo) + ", " + format_number(rep.n_hi) + "], " + std::to_string(rep.admissible) +
                " admissible rows, " + std::to_string(rep.excluded) + " excluded, " + std::to_string(rep.violations) +
                " violations";
    r.files.push_back(csv.path());
    r.report = rep.to_json();
    r.report["volume"] = ctx.volume().to_json();
    return r;
}

SuiteResult run_doubling(Context &ctx)
{
    const auto &radii = ctx.config().radii;
    const auto rep = doubling_scan(ctx.volume(), ctx.grid(), radii);
    SuiteResult r{"doubling"};
    CsvWriter csv(ctx.path("doubling.csv"), concat(ctx.point_header("x"), {"r", "V_r", "V_2r", "stderr_r", "ratio",
                                                                           "V_over_Vhat_r", "V_over_Vhat_2r"}));
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    for (const auto &row : rep.rows) {
        csv.cells(row.x) << row.r << row.v_r << row.v_2r << row.stderr_r << row.ratio;
        csv << cell(row.comparability_r) << cell(row.comparability_2r);
        csv.end_row();
    }
    r.pass = rep.pass;
    r.summary = "max ratio " + format_number(rep.max_ratio) + " (cap " + format_number(rep.cap) +
                "), comparability spread " + format_number(rep.spread) + " (limit " + format_number(rep.spread_limit) +
                ")";
    r.report = {{"doubling", rep.to_json()}, {"volume", ctx.volume().to_json()}};
    if (ctx.spec().kind() == DomainKind::Ball) {
        const auto osc = weight_oscillation_scan(ctx.spec(), ctx.grid(), radii);
        r.pass = r.pass && osc.pass;
        r.summary += ", weight oscillation " + format_number(osc.max_ratio) + " (bound " + format_number(osc.bound) + ")";
        r.report["weight_oscillation"] = osc.to_json();
    }
    r.files.push_back(csv.path());
    return r;
}

SuiteResult run_green(Context &ctx)
{
    const auto &cfg = ctx.config();
    SuiteResult r{"green"};
    CsvWriter csv(ctx.path("green.csv"), {"index", "lhs", "rhs", "residual"});
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.polynomials; ++i) {
        const auto f = random_multipoly(ctx.n(), cfg.poly_degree, ctx.seed() + 2 * i);
        const auto h = random_multipoly(ctx.n(), cfg.poly_degree, ctx.seed() + 2 * i + 1);
        const auto g = green_identity_check(ctx.spec(), f, TestFunction::polynomial(h));
        csv << i << g.lhs << g.rhs << g.residual;
        csv.end_row();
        worst = std::max(worst, g.residual);
    }
    r.pass = worst <= 1e-8;
    r.summary = std::to_string(cfg.polynomials) + " random pairs of degree " + std::to_string(cfg.poly_degree) +
                ", max residual " + format_number(worst) + " (tolerance 1e-08)";
    r.files.push_back(csv.path());
    r.report = {{"pairs", cfg.polynomials}, {"degree", cfg.poly_degree}, {"max_residual", worst}, {"tolerance", 1e-8}};
    return r;
}

SuiteResult run_flux(Context &ctx)
{
    const std::size_t n = ctx.n();
    MultiPoly f = MultiPoly::variable(n, 0);
    TestFunction h = TestFunction::polynomial(MultiPoly::constant(n, 1.0));
    if (ctx.spec().kind() == DomainKind::Ball) {
        f = f * f;
    } else if (ctx.spec().kind() == DomainKind::Simplex && n >= 2) {
        h = TestFunction::ridge(1, 0.4, 0.15);
    }
    const auto rep = boundary_flux_decay(ctx.spec(), f, h, ctx.config().epsilons);
    SuiteResult r{"flux"};
    std::vector<std::string> header{"epsilon", "J_total"};
    for (const auto &face : rep.faces) {
        header.push_back("J_" + face.name);
    }
    CsvWriter csv(ctx.path("flux.csv"), header);
    for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
        csv << rep.epsilons[i] << rep.j_values[i];
        for (const auto &face : rep.faces) {
            csv << face.j_values[i];
        }
        csv.end_row();
    }
    r.pass = rep.pass;
    r.summary = rep.exact_zero ? std::string("flux identically zero")
                               : "face " + rep.dominating_face + " slope " + format_number(rep.fitted_slope) +
                                     " (expected " + format_number(rep.expected_slope) + " +- " +
                                     format_number(rep.slope_tolerance) + "), R^2 " + format_number(rep.r2);
    r.files.push_back(csv.path());
    r.report = rep.to_json();
    r.report["f"] = to_json(f);
    r.report["h"] = h.name;
    return r;
}

SuiteResult run_chart(Context &ctx)
{
    const auto &cfg = ctx.config();
    const auto samples = random_interior_points(ctx.spec(), cfg.chart_samples, ctx.seed());
    SuiteResult r{"chart"};
    CsvWriter csv(ctx.path("chart.csv"), {"index", "residual", "metric_mismatch"});
    double worst = 0.0;
    double metric = 0.0;
    for (std::size_t i = 0; i < cfg.polynomials; ++i) {
        const auto f = random_multipoly(ctx.n(), cfg.poly_degree, ctx.seed() + i);
        const auto c = chart_laplacian_check(ctx.spec(), f, samples);
        csv << i << c.max_residual << c.metric_mismatch;
        csv.end_row();
        worst = std::max(worst, c.max_residual);
        metric = std::max(metric, c.metric_mismatch);
    }
    r.pass = worst <= 1e-8;
    r.summary = "max residual " + format_number(worst) + " at " + std::to_string(samples.size()) +
                " samples (tolerance 1e-08, chart factor " + format_number(chart_operator_scale(ctx.spec())) + ")";
    r.files.push_back(csv.path());
    r.report = {{"samples", samples.size()},
                {"polynomials", cfg.polynomials},
                {"degree", cfg.poly_degree},
                {"scale", chart_operator_scale(ctx.spec())},
                {"max_residual", worst},
                {"metric_mismatch", metric},
                {"tolerance", 1e-8}};
    return r;
}

SuiteResult run_correspondence(Context &ctx)
{
    if (ctx.spec().kind() != DomainKind::Interval) {
        throw ConfigError("domain.kind", "the correspondence suite needs an interval domain");
    }
    CorrespondenceOptions opt;
    opt.times = {0.2, 1.0};
    opt.random_polynomials = ctx.config().polynomials;
    opt.seed = ctx.seed();
    const auto rep = jacobi_simplex_correspondence(ctx.spec().alpha(), ctx.spec().beta(),
                                                   ctx.config().correspondence_k, opt);
    SuiteResult r{"correspondence"};
    CsvWriter csv(ctx.path("correspondence.csv"), {"check", "identity", "residual", "tolerance", "pass"});
    double worst = 0.0;
    for (const auto &c : rep.checks) {
        csv << c.name << c.identity << c.max_residual << c.tolerance << std::to_string(c.pass);
        csv.end_row();
        worst = std::max(worst, c.max_residual);
    }
    r.pass = rep.pass;
    r.summary = std::to_string(rep.checks.size()) + " checks to k = " + std::to_string(rep.max_k) +
                ", max residual " + format_number(worst);
    r.files.push_back(csv.path());
    r.report = rep.to_json();
    return r;
}

SuiteResult run_localize(Context &ctx)
{
    const auto &cfg = ctx.config();
    const unsigned m = cfg.resolved_bump_order();
    const auto phi = MultiplierSpec::smooth_bump(cfg.bump_radius, m);
    SuiteResult r{"localize"};
    CsvWriter csv(ctx.path("localize.csv"),
                  concat(concat({"delta"}, concat(ctx.point_header("x"), ctx.point_header("y"))),
                         {"rho", "kernel", "tail", "scaled", "D", "excluded"}));
    nlohmann::json runs = nlohmann::json::array();
    bool pass = true;
    double c_lo = std::numeric_limits<double>::infinity();
    double c_hi = 0.0;
    std::string detail;
    for (const double delta : cfg.deltas) {
        const auto rep = localization_check(ctx.evaluator(), phi, delta, m, ctx.volume(), ctx.grid());
        for (const auto &row : rep.rows) {
            csv << delta;
            csv.cells(row.x).cells(row.y) << row.rho << row.kernel << row.tail << row.scaled << row.d
                                          << std::to_string(row.excluded);
            csv.end_row();
        }
        pass = pass && rep.pass;
        c_lo = std::min(c_lo, rep.c_m_hat);
        c_hi = std::max(c_hi, rep.c_m_hat);
        detail += (detail.empty() ? "" : "; ") + std::string("delta ") + format_number(delta) + ": exponent " +
                  format_number(rep.decay_exponent) + ", R^2 " + format_number(rep.fit.r2) + ", c_m " +
                  format_number(rep.c_m_hat);
        runs.push_back(rep.to_json());
    }
    const bool stable = std::isfinite(c_hi) && c_lo > 0.0 && c_hi <= 2.0 * c_lo;
    r.pass = pass && stable;
    r.summary = detail + " (target exponent >= " + format_number(m - 0.5) + ", c_m within 2x)";
    r.files.push_back(csv.path());
    r.report = {{"runs", runs}, {"c_m_min", c_lo}, {"c_m_max", c_hi}, {"c_m_stable", stable},
                {"volume", ctx.volume().to_json()}};
    return r;
}

SuiteResult run_fsp(Context &ctx)
{
    const auto &cfg = ctx.config();
    const auto phi = MultiplierSpec::sinc_power(cfg.sinc_band, cfg.sinc_order);
    SuiteResult r{"fsp"};
    CsvWriter csv(ctx.path("fsp.csv"), {"delta", "rho", "running_max"});
    nlohmann::json runs = nlohmann::json::array();
    bool pass = true;
    double c_lo = std::numeric_limits<double>::infinity();
    double c_hi = 0.0;
    std::string detail;
    for (const double delta : cfg.deltas) {
        const auto rep = finite_speed_scan(ctx.evaluator(), phi, delta, ctx.grid());
        for (std::size_t i = 0; i < rep.profile_rho.size(); ++i) {
            csv << delta << rep.profile_rho[i] << rep.profile_max[i];
            csv.end_row();
        }
        pass = pass && rep.pass;
        c_lo = std::min(c_lo, rep.c_star);
        c_hi = std::max(c_hi, rep.c_star);
        detail += (detail.empty() ? "" : "; ") + std::string("delta ") + format_number(delta) + ": r* " +
                  format_number(rep.r_star) + ", c* " + format_number(rep.c_star) + ", beyond " +
                  format_number(rep.max_beyond);
        runs.push_back(rep.to_json());
    }
    const bool stable = c_lo > 0.0 && c_hi <= 1.2 * c_lo;
    r.pass = pass && stable;
    r.summary = detail + " (c* within 20%)";
    r.files.push_back(csv.path());
    r.report = {{"runs", runs}, {"c_star_min", c_lo}, {"c_star_max", c_hi}, {"c_star_stable", stable}};
    return r;
}

SuiteResult dispatch(Context &ctx, const std::string &suite)
{
    if (suite == "ops") {
        return run_ops(ctx);
    }
    if (suite == "basis") {
        return run_basis(ctx);
    }
    if (suite == "kernel") {
        return run_kernel(ctx);
    }
    if (suite == "gauss") {
        return run_gauss(ctx);
    }
    if (suite == "doubling") {
        return run_doubling(ctx);
    }
    if (suite == "green") {
        return run_green(ctx);
    }
    if (suite == "flux") {
        return run_flux(ctx);
    }
    if (suite == "chart") {
        return run_chart(ctx);
    }
    if (suite == "correspondence") {
        return run_correspondence(ctx);
    }
    if (suite == "localize") {
        return run_localize(ctx);
    }
    return run_fsp(ctx);
}

void write_json(const std::string &path, const nlohmann::json &j)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ArgumentError("cannot write '" + path + "'");
    }
    out << j.dump(2) << '\n';
}

SuiteResult run_one(Context &ctx, const std::string &suite)
{
    SuiteResult r;
    try {
        r = dispatch(ctx, suite);
    } catch (const CapacityError &e) {
        throw CapacityError(std::string(e.what()) + kCapacityHint);
    }
    const std::string path = ctx.path(suite + ".json");
    write_json(path, {{"schema_version", kReportSchemaVersion},
                      {"suite", suite},
                      {"pass", r.pass},
                      {"summary", r.summary},
                      {"config", ctx.config().to_json()},
                      {"spec", ctx.spec().to_json()},
                      {"files", r.files},
                      {"report", r.report}});
    r.files.insert(r.files.begin(), path);
    return r;
}

void print(std::ostream &out, const SuiteResult &r)
{
    out << (r.skipped ? "SKIP" : verdict(r.pass)) << "  " << r.suite << "  " << r.summary << '\n';
}

} // namespace

const std::vector<std::string> &suite_names()
{
    static const std::vector<std::string> names{"ops",   "basis", "kernel",         "gauss",    "doubling", "green",
                                                "flux",  "chart", "correspondence", "localize", "fsp"};
    return names;
}

bool suite_uses_monte_carlo(const std::string &suite)
{
    return suite == "gauss" || suite == "doubling" || suite == "localize" || suite == "all";
}

bool RunResult::pass() const
{
    return !suites.empty() &&
           std::all_of(suites.begin(), suites.end(), [](const SuiteResult &s) { return s.pass || s.skipped; });
}

RunResult run_suite(const RunConfig &config, const std::string &suite, std::ostream &out)
{
    const auto &names = suite_names();
    if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
        throw ArgumentError("unknown suite '" + suite + "'");
    }
    config.validate();
    if (suite_uses_monte_carlo(suite) && !config.seed) {
        throw ConfigError("mc.seed", "the " + suite + " suite draws Monte Carlo volumes and needs an explicit seed");
    }
    Context ctx(config);
    RunResult result;
    if (suite != "all") {
        result.suites.push_back(run_one(ctx, suite));
        print(out, result.suites.back());
        return result;
    }
    nlohmann::json summary = nlohmann::json::array();
    for (const auto &name : names) {
        SuiteResult r;
        r.suite = name;
        if (name == "correspondence" && ctx.spec().kind() != DomainKind::Interval) {
            r.skipped = true;
            r.summary = "needs an interval domain";
        } else {
            try {
                r = run_one(ctx, name);
            } catch (const std::exception &e) {
                r.suite = name;
                r.pass = false;
                r.summary = std::string("error: ") + e.what();
            }
        }
        print(out, r);
        summary.push_back({{"suite", r.suite}, {"pass", r.pass}, {"skipped", r.skipped}, {"summary", r.summary}});
        result.suites.push_back(std::move(r));
    }
    write_json(ctx.path("all.json"), {{"schema_version", kReportSchemaVersion},
                                      {"suite", "all"},
                                      {"pass", result.pass()},
                                      {"config", config.to_json()},
                                      {"suites", summary}});
    return result;
}

} // namespace polyheat::cli
