#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyheat/cli/config.hpp"
#include "polyheat/domain.hpp"

namespace polyheat::cli {

/// Largest node count export_kernel_grid accepts (one dense matrix per time).
inline constexpr std::size_t kMaxExportNodes = 6000;

struct KernelGrid {
    std::vector<Point> nodes;
    std::vector<double> weights;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> values; // one per time, symmetric
    std::vector<Eigen::MatrixXd> tails;
};

/// Heat kernel between all nodes of the domain rule of exact degree 2 resolution - 1 (resolution
/// Gauss-Jacobi nodes on the interval). Each value is computed once per unordered pair.
KernelGrid kernel_grid(const RunConfig &config, std::span<const double> times, std::size_t resolution);

/// Writes kernel_grid as nodes.csv (index, coordinates, weight) and, per time, kernel_t<t>.csv and
/// kernel_tail_t<t>.csv (node rows, node columns) into config.output_dir. Returns the paths written.
std::vector<std::string> export_kernel_grid(const RunConfig &config, std::span<const double> times,
                                            std::size_t resolution);

} // namespace polyheat::cli
