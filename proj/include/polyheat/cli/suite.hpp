#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/cli/config.hpp"

namespace polyheat::cli {

/// Validation suites in the order `all` runs them.
const std::vector<std::string> &suite_names();
/// Suites that draw Monte Carlo volumes and therefore need mc.seed.
bool suite_uses_monte_carlo(const std::string &suite);

struct SuiteResult {
    std::string suite;
    bool pass = false;
    bool skipped = false; // not applicable to the configured domain (all only)
    std::string summary;
    std::vector<std::string> files;
    nlohmann::json report;
};

struct RunResult {
    std::vector<SuiteResult> suites;

    bool pass() const;
    int exit_code() const { return pass() ? 0 : 1; }
};

/// Runs one suite or `all`, writing <suite>.json and CSV tables into config.output_dir and one
/// summary line per suite to out. A single suite propagates errors (capacity errors with a remediation
/// hint); `all` records a failing suite's error as its summary and continues.
RunResult run_suite(const RunConfig &config, const std::string &suite, std::ostream &out);

} // namespace polyheat::cli
