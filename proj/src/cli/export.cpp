#include "polyheat/cli/export.hpp"

#include <filesystem>
#include <memory>

#include "polyheat/cli/csv.hpp"
#include "polyheat/heat_kernel.hpp"
#include "polyheat/parallel.hpp"
#include "polyheat/quadrature.hpp"

namespace polyheat::cli {

KernelGrid kernel_grid(const RunConfig &config, std::span<const double> times, std::size_t resolution)
{
    config.validate();
    if (resolution < 1) {
        throw ArgumentError("kernel grid resolution must be positive");
    }
    if (times.empty()) {
        throw ArgumentError("kernel grid needs at least one time");
    }
    const DomainSpec spec = config.spec();
    const QuadratureRule rule = quadrature(spec, static_cast<int>(2 * resolution - 1));
    if (rule.size() > kMaxExportNodes) {
        throw CapacityError("kernel grid of resolution " + std::to_string(resolution) + " has " +
                            std::to_string(rule.size()) + " nodes, above the export cap " +
                            std::to_string(kMaxExportNodes));
    }
    auto basis = std::make_shared<const OrthonormalBasis>(
        OrthonormalBasis::build(spec, config.resolved_degree(), config.precision, config.construction));
    TruncationPolicy policy = TruncationPolicy::defaults(*basis, config.epsilon);
    if (config.t_min > 0.0) {
        policy.t_min = config.t_min;
    }
    const HeatKernelEvaluator ev(basis, policy);

    KernelGrid g;
    const std::size_t P = rule.size();
    for (std::size_t i = 0; i < P; ++i) {
        const auto x = rule.node(i);
        g.nodes.emplace_back(x.begin(), x.end());
        g.weights.push_back(rule.weight(i));
    }
    std::vector<BasisSample> samples(P);
    parallel_for(P, [&](std::size_t i) { samples[i] = ev.sample(g.nodes[i]); });
    for (const double t : times) {
        Eigen::MatrixXd v(P, P);
        Eigen::MatrixXd tail(P, P);
        parallel_for(P, [&](std::size_t i) {
            for (std::size_t j = i; j < P; ++j) {
                const KernelValue k = ev.heat_kernel(t, samples[i], samples[j]);
                v(i, j) = v(j, i) = k.value;
                tail(i, j) = tail(j, i) = k.tail;
            }
        });
        g.times.push_back(t);
        g.values.push_back(std::move(v));
        g.tails.push_back(std::move(tail));
    }
    return g;
}

std::vector<std::string> export_kernel_grid(const RunConfig &config, std::span<const double> times,
                                            std::size_t resolution)
{
    const KernelGrid g = kernel_grid(config, times, resolution);
    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path dir(config.output_dir);
    std::vector<std::string> files;
    const std::size_t n = config.spec().dimension();
    {
        std::vector<std::string> header{"node"};
        for (const auto &h : coordinate_header("x", n)) {
            header.push_back(h);
        }
        header.push_back("weight");
        CsvWriter csv((dir / "nodes.csv").string(), header);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            csv << i;
            csv.cells(g.nodes[i]) << g.weights[i];
            csv.end_row();
        }
        files.push_back(csv.path());
    }
    std::vector<std::string> header{"node"};
    for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        header.push_back(std::to_string(j));
    }
    for (std::size_t k = 0; k < g.times.size(); ++k) {
        const std::string tag = format_double(g.times[k]);
        for (const auto &[name, m] : {std::pair{"kernel_t", &g.values[k]}, {"kernel_tail_t", &g.tails[k]}}) {
            CsvWriter csv((dir / (name + tag + ".csv")).string(), header);
            for (Eigen::Index i = 0; i < m->rows(); ++i) {
                csv << static_cast<std::size_t>(i);
                for (Eigen::Index j = 0; j < m->cols(); ++j) {
                    csv << (*m)(i, j);
                }
                csv.end_row();
            }
            files.push_back(csv.path());
        }
    }
    return files;
}

} // namespace polyheat::cli
