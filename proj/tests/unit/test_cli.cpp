#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "polyheat/cli/config.hpp"
#include "polyheat/cli/csv.hpp"
#include "polyheat/cli/export.hpp"
#include "polyheat/cli/suite.hpp"

using namespace polyheat;
using namespace polyheat::cli;

namespace {

std::string scratch(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("polyheat_test_cli_" + name);
    std::filesystem::remove_all(dir);
    return dir.string();
}

std::string slurp(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string &text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(line);
    }
    return out;
}

std::string field_of(const RunConfig &c)
{
    try {
        c.validate();
    } catch (const ConfigError &e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("config text round trip")
{
    RunConfig c;
    c.domain = "simplex";
    c.kappa = {0.25, 0.5, 1.0 / 3.0};
    c.times = {0.02, 0.1};
    c.seed = 42;
    c.precision = Precision::Extended;
    std::istringstream in(c.to_ini());
    const RunConfig back = parse_config(in);
    CHECK(back.entries() == c.entries());
    CHECK(back.kappa[2] == 1.0 / 3.0);
    CHECK(back.to_json() == c.to_json());
    CHECK(back.to_json()["mc"]["seed"] == 42);
}

TEST_CASE("INI sections and overrides")
{
    std::istringstream in("[domain]\nkind = ball\ndimension = 2\ngamma = 0.5\n\n[mc]\nseed = 9\n");
    RunConfig c = parse_config(in);
    CHECK(c.spec() == DomainSpec::ball(2, 0.5));
    CHECK(c.seed == 9u);
    apply_overrides(c, {"domain.gamma=1", "grid.times=0.1, 0.2", "mc.seed="});
    CHECK(c.gamma == 1.0);
    CHECK(c.times == std::vector<double>{0.1, 0.2});
    CHECK_FALSE(c.seed.has_value());
    CHECK(RunConfig{}.resolved_degree() == 200);
    CHECK(c.resolved_bump_order() == 4);

    CHECK_THROWS_WITH_AS(c.set("domain.colour", "red"), "domain.colour: unknown configuration key", ConfigError);
    CHECK_THROWS_AS(c.set("grid.per_axis", "-3"), ConfigError);
    CHECK_THROWS_AS(c.set("kernel.epsilon", "1e-8x"), ConfigError);
    CHECK_THROWS_AS(c.set("basis.precision", "quad"), ConfigError);
    CHECK_THROWS_AS(apply_overrides(c, {"domain.gamma"}), ConfigError);
    std::istringstream loose("gamma = 1\n");
    CHECK_THROWS_AS(parse_config(loose), ConfigError);
}

TEST_CASE("validation names the offending field")
{
    RunConfig c;
    c.domain = "ball";
    c.gamma = -0.6;
    try {
        c.validate();
        FAIL("expected a ConfigError");
    } catch (const ConfigError &e) {
        CHECK(e.field() == "domain.gamma");
        CHECK(std::string(e.what()).find("γ > −1/2") != std::string::npos);
    }
    c.gamma = 0.0;
    CHECK(field_of(c).empty());

    RunConfig d;
    d.beta = -1.0;
    CHECK(field_of(d) == "domain.beta");
    d = {};
    d.domain = "torus";
    CHECK(field_of(d) == "domain.kind");
    d = {};
    d.epsilons = {0.2, 0.1, 0.1, 0.05};
    CHECK(field_of(d) == "grid.epsilons");
    d = {};
    d.radii = {0.1, 2.0};
    CHECK(field_of(d) == "grid.radii");
    d = {};
    d.max_degree = 1'000'000;
    CHECK(field_of(d) == "basis.max_degree");
    d = {};
    d.bump_order = 1;
    CHECK(field_of(d) == "multiplier.bump_order");
    d = {};
    d.domain = "simplex";
    d.kappa = {0.5, -0.5};
    CHECK(field_of(d) == "domain.kappa");
}

TEST_CASE("suites refuse invalid configurations before running")
{
    RunConfig c;
    c.output_dir = scratch("refuse");
    c.domain = "ball";
    c.gamma = -0.6;
    c.seed = 1;
    std::ostringstream out;
    CHECK_THROWS_AS(run_suite(c, "all", out), ConfigError);
    CHECK_FALSE(std::filesystem::exists(c.output_dir));

    RunConfig d;
    d.output_dir = c.output_dir;
    CHECK_THROWS_WITH_AS(run_suite(d, "gauss", out),
                         "mc.seed: the gauss suite draws Monte Carlo volumes and needs an explicit seed", ConfigError);
    CHECK_THROWS_AS(run_suite(d, "nonsense", out), ArgumentError);
    d.domain = "ball";
    CHECK_THROWS_AS(run_suite(d, "correspondence", out), ConfigError);
}

TEST_CASE("ops suite on the Chebyshev interval")
{
    RunConfig c;
    c.output_dir = scratch("ops");
    std::ostringstream out;
    const RunResult r = run_suite(c, "ops", out);
    CHECK(r.pass());
    CHECK(r.exit_code() == 0);
    REQUIRE(r.suites.size() == 1);
    CHECK(out.str().rfind("PASS  ops", 0) == 0);
    const auto table = lines(slurp(c.output_dir + "/ops.csv"));
    REQUIRE(table.size() == 42);
    CHECK(table[0] == "k,lambda,level_size,residual");
    CHECK(table[2].rfind("1,1,1,", 0) == 0);
    const auto j = nlohmann::json::parse(slurp(c.output_dir + "/ops.json"));
    CHECK(j["schema_version"] == 1);
    CHECK(j["pass"] == true);
    CHECK(j["config"] == c.to_json());
    CHECK(j["report"]["levels"].size() == 41);
}

TEST_CASE("correspondence suite reports four identities")
{
    RunConfig c;
    c.alpha = 0.0;
    c.beta = 0.0;
    c.output_dir = scratch("corr");
    std::ostringstream out;
    const RunResult r = run_suite(c, "correspondence", out);
    CHECK(r.exit_code() == 0);
    const auto table = lines(slurp(c.output_dir + "/correspondence.csv"));
    REQUIRE(table.size() == 5);
    for (std::size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i].back() == '1');
    }
    // Identity strings contain commas and are quoted.
    CHECK(table[1].find("\"L~ g(x1) = L f(x), g(x1) = f(2 x1 - 1)\"") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(c.output_dir + "/correspondence.json"));
    CHECK(j["report"]["checks"].size() == 4);
}

TEST_CASE("capacity errors carry a remediation hint")
{
    RunConfig c;
    c.output_dir = scratch("capacity");
    c.per_axis = 40;
    c.deltas = {0.001};
    c.seed = 1;
    std::ostringstream out;
    try {
        run_suite(c, "localize", out);
        FAIL("expected a CapacityError");
    } catch (const CapacityError &e) {
        CHECK(std::string(e.what()).find("remediation") != std::string::npos);
    }
}

TEST_CASE("Monte Carlo suites are reproducible for a fixed seed")
{
    RunConfig c;
    c.domain = "ball";
    c.gamma = 0.5;
    c.per_axis = 4;
    c.mc_samples = 5000;
    c.radii = {0.1, 0.3};
    c.seed = 11;
    c.output_dir = scratch("repro");
    std::ostringstream out;
    run_suite(c, "doubling", out);
    const std::string first = slurp(c.output_dir + "/doubling.json");
    const std::string first_csv = slurp(c.output_dir + "/doubling.csv");
    run_suite(c, "doubling", out);
    CHECK(slurp(c.output_dir + "/doubling.json") == first);
    CHECK(slurp(c.output_dir + "/doubling.csv") == first_csv);
    c.seed = 12;
    run_suite(c, "doubling", out);
    CHECK(slurp(c.output_dir + "/doubling.csv") != first_csv);
}

TEST_CASE("kernel grid on the Chebyshev interval")
{
    RunConfig c;
    const std::vector<double> times{1.0, 40.0};
    const KernelGrid g = kernel_grid(c, times, 64);
    REQUIRE(g.nodes.size() == 64);
    REQUIRE(g.values.size() == 2);
    const auto &k = g.values[0];
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
    double worst_mass = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            s += k(i, j) * g.weights[j];
        }
        worst_mass = std::max(worst_mass, std::abs(s - 1.0));
    }
    CHECK(worst_mass <= 1e-10);
    // Equilibrium: 1 / total mass.
    CHECK((g.values[1].array() - 1.0 / std::numbers::pi).abs().maxCoeff() <= 1e-12);
    CHECK(g.tails[0].maxCoeff() <= c.epsilon);

    // Oracle: cosine series sum over k of e^{-k^2 t} (1 + 2 [k>0] cos k a cos k b) / pi.
    const double t = 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 64; i += 7) {
        for (std::size_t j = 0; j < 64; j += 5) {
            const double a = std::acos(g.nodes[i][0]);
            const double b = std::acos(g.nodes[j][0]);
            double s = 1.0;
            for (int m = 1; m < 40; ++m) {
                s += 2.0 * std::exp(-m * m * t) * std::cos(m * a) * std::cos(m * b);
            }
            worst = std::max(worst, std::abs(k(i, j) - s / std::numbers::pi));
        }
    }
    CHECK(worst <= c.epsilon);
}

TEST_CASE("kernel grid export files")
{
    RunConfig c;
    c.output_dir = scratch("export");
    const std::vector<double> times{0.5};
    const auto files = export_kernel_grid(c, times, 16);
    REQUIRE(files.size() == 3);
    CHECK(std::filesystem::path(files[0]).filename() == "nodes.csv");
    CHECK(std::filesystem::path(files[1]).filename() == "kernel_t0.5.csv");
    CHECK(std::filesystem::path(files[2]).filename() == "kernel_tail_t0.5.csv");
    const std::string text = slurp(files[1]);
    CHECK(text.find('\r') == std::string::npos);
    const auto rows = lines(text);
    REQUIRE(rows.size() == 17);
    CHECK(rows[0].rfind("node,0,1,", 0) == 0);
    const auto nodes = lines(slurp(files[0]));
    CHECK(nodes[0] == "node,x_1,weight");
    CHECK(nodes.size() == 17);
    export_kernel_grid(c, times, 16);
    CHECK(slurp(files[1]) == text);

    c.domain = "ball";
    CHECK(kernel_grid(c, std::vector<double>{0.5}, 4).nodes.size() > 4);
    CHECK_THROWS_AS(kernel_grid(c, std::vector<double>{0.5}, 400), CapacityError);
    CHECK_THROWS_AS(kernel_grid(c, std::vector<double>{1e-5}, 4), RefusalError);
}

TEST_CASE("CSV writer")
{
    std::ostringstream s;
    CsvWriter w(s, {"a", "b", "c"});
    w << 0.1 << std::string("x,y") << std::size_t{3};
    w.end_row();
    w << std::string("say \"hi\"");
    CHECK_THROWS_AS(w.end_row(), ArgumentError);
    CHECK(s.str().rfind("a,b,c\n0.1,\"x,y\",3\n\"say \"\"hi\"\"\"", 0) == 0);
    CHECK(format_double(1e-13) == "1e-13");
    CHECK(format_double(-0.6) == "-0.6");
}
