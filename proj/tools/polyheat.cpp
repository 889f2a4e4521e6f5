#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyheat/cli/config.hpp"
#include "polyheat/cli/csv.hpp"
#include "polyheat/cli/export.hpp"
#include "polyheat/cli/suite.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/heat_kernel.hpp"
#include "polyheat/validation/common.hpp"
#include "polyheat/volume.hpp"

namespace {

using namespace polyheat;
using polyheat::cli::CsvWriter;
using polyheat::cli::RunConfig;

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::vector<std::pair<std::string, std::string>> flags; // (key, value) from --section.name
};

Point parse_point(const std::string &text, std::size_t n)
{
    Point x;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        x.push_back(std::stod(item));
    }
    if (x.size() != n) {
        throw ArgumentError("point '" + text + "' has " + std::to_string(x.size()) + " coordinates, expected " +
                            std::to_string(n));
    }
    return x;
}

std::string point_cell(std::span<const double> x)
{
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (i ? ";" : "") + cli::format_double(x[i]);
    }
    return s;
}

std::vector<Point> points_or_grid(const std::vector<std::string> &texts, const RunConfig &cfg)
{
    const DomainSpec spec = cfg.spec();
    std::vector<Point> out;
    for (const auto &t : texts) {
        out.push_back(parse_point(t, spec.dimension()));
    }
    if (out.empty()) {
        out = validation::interior_grid(spec, cfg.per_axis, cfg.margin);
    }
    return out;
}

std::shared_ptr<const OrthonormalBasis> build_basis(const RunConfig &cfg)
{
    return std::make_shared<const OrthonormalBasis>(
        OrthonormalBasis::build(cfg.spec(), cfg.resolved_degree(), cfg.precision, cfg.construction));
}

HeatKernelEvaluator make_evaluator(const RunConfig &cfg)
{
    auto basis = build_basis(cfg);
    TruncationPolicy policy = TruncationPolicy::defaults(*basis, cfg.epsilon);
    if (cfg.t_min > 0.0) {
        policy.t_min = cfg.t_min;
    }
    return HeatKernelEvaluator(basis, policy);
}

int cmd_basis(const RunConfig &cfg, const std::string &action, const std::string &out_path, bool polynomials)
{
    cfg.validate();
    const auto basis = build_basis(cfg);
    if (action == "build") {
        const std::string path = out_path.empty() ? cfg.output_dir + "/basis.json" : out_path;
        std::filesystem::create_directories(std::filesystem::path(path).parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ArgumentError("cannot write '" + path + "'");
        }
        out << basis->to_json(polynomials).dump(2) << '\n';
        std::cout << basis->spec().describe() << ": " << basis->size() << " members to degree "
                  << basis->max_degree() << " written to " << path << '\n';
        return 0;
    }
    const std::size_t K = std::min(cfg.eigen_degree, basis->max_degree());
    const auto res = verify_eigenrelation(*basis, K);
    const double tol = basis->spec().kind() == DomainKind::Interval ? 1e-9 : 1e-8;
    const double gram = basis->gram_residual();
    const double gram_tol = basis->spec().kind() == DomainKind::Interval ? 1e-10 : 1e-8;
    CsvWriter csv(std::cout, {"k", "lambda", "level_size", "eigen_residual"});
    double worst = 0.0;
    for (std::size_t k = 0; k < res.size(); ++k) {
        csv << k << basis->lambda(k) << basis->level_count(k) << res[k];
        csv.end_row();
        worst = std::max(worst, res[k]);
    }
    const bool pass = worst <= tol && gram <= gram_tol;
    std::cerr << (pass ? "PASS" : "FAIL") << "  eigen residual " << worst << " (tolerance " << tol
              << "), Gram residual " << gram << " (tolerance " << gram_tol << ")\n";
    return pass ? 0 : 1;
}

int cmd_geom(const RunConfig &cfg, const std::string &action, const std::vector<std::string> &xs,
             const std::vector<std::string> &ys, const std::vector<double> &radii)
{
    cfg.validate();
    const DomainSpec spec = cfg.spec();
    const auto points = points_or_grid(xs, cfg);
    CsvWriter csv(std::cout, {"x", "y", "component", "value", "stderr"});
    auto row = [&](const Point &x, const std::string &y, const std::string &component, double value, double err) {
        csv << point_cell(x) << y << component << value << err;
        csv.end_row();
    };
    if (action == "dist") {
        const auto others = ys.empty() ? points : points_or_grid(ys, cfg);
        for (const auto &x : points) {
            for (const auto &y : others) {
                row(x, point_cell(y), "rho", distance(spec, x, y), 0.0);
            }
        }
    } else if (action == "lift") {
        for (const auto &x : points) {
            const Point u = chart_lift(spec, x);
            for (std::size_t i = 0; i < u.size(); ++i) {
                row(x, "", "u_" + std::to_string(i + 1), u[i], 0.0);
            }
        }
    } else if (action == "metric") {
        for (const auto &x : points) {
            const Eigen::MatrixXd g = metric_tensor(spec, x);
            for (Eigen::Index i = 0; i < g.rows(); ++i) {
                for (Eigen::Index j = 0; j < g.cols(); ++j) {
                    row(x, "", "g_" + std::to_string(i + 1) + std::to_string(j + 1), g(i, j), 0.0);
                }
            }
            row(x, "", "det", metric_det(spec, x), 0.0);
            row(x, "", "weight", weight_density(spec, x), 0.0);
        }
    } else {
        if (!cfg.seed && spec.kind() != DomainKind::Interval) {
            throw cli::ConfigError("mc.seed", "Monte Carlo volumes need an explicit seed");
        }
        const VolumeBudget budget{cfg.mc_samples, cfg.seed.value_or(0)};
        for (const auto &x : points) {
            for (const double r : radii.empty() ? cfg.radii : radii) {
                const VolumeEstimate v = ball_volume(spec, x, r, budget);
                row(x, "", "V(r=" + cli::format_double(r) + ")", v.value, v.stderr_);
            }
        }
    }
    return 0;
}

int cmd_kernel(const RunConfig &cfg, const std::string &action, const std::vector<double> &times,
               std::size_t grid, const MultiplierSpec &phi, const std::vector<double> &deltas, std::size_t resolution)
{
    cfg.validate();
    if (action == "export") {
        for (const auto &f : cli::export_kernel_grid(cfg, times.empty() ? cfg.times : times, resolution)) {
            std::cout << f << '\n';
        }
        return 0;
    }
    const HeatKernelEvaluator ev = make_evaluator(cfg);
    const auto points = validation::interior_grid(cfg.spec(), grid ? grid : cfg.per_axis, cfg.margin);
    std::vector<BasisSample> samples;
    for (const auto &p : points) {
        samples.push_back(ev.sample(p));
    }
    const bool eval = action == "eval";
    CsvWriter csv(std::cout, {"x", "y", eval ? "t" : "delta", "value", "tail_bound"});
    for (const double s : eval ? (times.empty() ? cfg.times : times) : (deltas.empty() ? cfg.deltas : deltas)) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (std::size_t j = i; j < points.size(); ++j) {
                const KernelValue k = eval ? ev.heat_kernel(s, samples[i], samples[j])
                                           : ev.multiplier_kernel(phi, s, samples[i], samples[j]);
                csv << point_cell(points[i]) << point_cell(points[j]) << s << k.value << k.tail;
                csv.end_row();
            }
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Polynomial heat kernels on the interval, ball and simplex: bases, kernels and validation suites"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("-c,--config", opt.config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", opt.overrides, "Override a configuration key: section.name=value");
    std::vector<std::string> keys = RunConfig::keys();
    std::vector<std::string> flag_values(keys.size());
    std::vector<CLI::Option *> flag_opts;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        flag_opts.push_back(app.add_option("--" + keys[i], flag_values[i], "Override " + keys[i])->group("Config keys"));
    }

    auto *config_cmd = app.add_subcommand("config", "Configuration");
    auto *show_cmd = config_cmd->add_subcommand("show", "Print the resolved configuration as INI");
    config_cmd->require_subcommand(1);

    std::string basis_action;
    std::string basis_out;
    bool basis_polys = false;
    std::string max_degree;
    std::string precision;
    auto *basis_cmd = app.add_subcommand("basis", "Build or verify the orthonormal eigenbasis");
    basis_cmd->add_option("action", basis_action, "build or verify")->required()->check(CLI::IsMember({"build", "verify"}));
    basis_cmd->add_option("--max-degree", max_degree, "Basis degree (basis.max_degree)");
    basis_cmd->add_option("--precision", precision, "double or extended (basis.precision)");
    basis_cmd->add_option("-o,--out", basis_out, "Output JSON path (build)");
    basis_cmd->add_flag("--polynomials", basis_polys, "Embed coefficient forms (build)");

    std::string geom_action;
    std::vector<std::string> xs;
    std::vector<std::string> ys;
    std::vector<double> radii;
    auto *geom_cmd = app.add_subcommand("geom", "Distances, sphere lifts, metrics and ball volumes as CSV");
    geom_cmd->add_option("action", geom_action, "dist, lift, metric or volume")
        ->required()
        ->check(CLI::IsMember({"dist", "lift", "metric", "volume"}));
    geom_cmd->add_option("--x", xs, "Point as comma-separated coordinates (default: interior grid)");
    geom_cmd->add_option("--y", ys, "Second point for dist (default: same set as x)");
    geom_cmd->add_option("--r", radii, "Radius for volume (default: grid.radii)");

    std::string kernel_action;
    std::vector<double> times;
    std::vector<double> deltas;
    std::size_t grid = 0;
    std::size_t resolution = 64;
    std::string family = "smooth_bump";
    double radius = 4.0;
    unsigned order = 4;
    double band = 1.0;
    auto *kernel_cmd = app.add_subcommand("kernel", "Heat and multiplier kernels as CSV");
    kernel_cmd->add_option("action", kernel_action, "eval, multiplier or export")
        ->required()
        ->check(CLI::IsMember({"eval", "multiplier", "export"}));
    kernel_cmd->add_option("--t", times, "Time (default: grid.times)");
    kernel_cmd->add_option("--grid", grid, "Grid points per axis (default: grid.per_axis)");
    kernel_cmd->add_option("--resolution", resolution, "Gauss nodes per axis for export")->capture_default_str();
    kernel_cmd->add_option("--family", family, "heat_exp, smooth_bump or sinc_power")->capture_default_str();
    kernel_cmd->add_option("--radius", radius, "SmoothBump support radius")->capture_default_str();
    kernel_cmd->add_option("--order", order, "Order m")->capture_default_str();
    kernel_cmd->add_option("--band", band, "SincPower band A")->capture_default_str();
    kernel_cmd->add_option("--delta", deltas, "Scale delta (default: multiplier.deltas)");

    std::string suite;
    auto *validate_cmd = app.add_subcommand("validate", "Run a validation suite and write reports");
    std::vector<std::string> suites = cli::suite_names();
    suites.push_back("all");
    validate_cmd->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(suites));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = opt.config_path.empty() ? RunConfig{} : cli::load_config(opt.config_path);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (flag_opts[i]->count() > 0) {
                cfg.set(keys[i], flag_values[i]);
            }
        }
        if (!max_degree.empty()) {
            cfg.set("basis.max_degree", max_degree);
        }
        if (!precision.empty()) {
            cfg.set("basis.precision", precision);
        }
        cli::apply_overrides(cfg, opt.overrides);

        if (show_cmd->parsed()) {
            std::cout << cfg.to_ini();
            return 0;
        }
        if (basis_cmd->parsed()) {
            return cmd_basis(cfg, basis_action, basis_out, basis_polys);
        }
        if (geom_cmd->parsed()) {
            return cmd_geom(cfg, geom_action, xs, ys, radii);
        }
        if (kernel_cmd->parsed()) {
            MultiplierSpec phi = MultiplierSpec::heat_exp();
            const auto fam = parse_multiplier_family(family);
            if (fam == MultiplierFamily::SmoothBump) {
                phi = MultiplierSpec::smooth_bump(radius, order);
            } else if (fam == MultiplierFamily::SincPower) {
                phi = MultiplierSpec::sinc_power(band, order);
            }
            return cmd_kernel(cfg, kernel_action, times, grid, phi, deltas, resolution);
        }
        return cli::run_suite(cfg, suite, std::cout).exit_code();
    } catch (const std::exception &e) {
        std::cout.flush();
        std::cerr << "polyheat: " << e.what() << '\n';
        return 2;
    }
}
