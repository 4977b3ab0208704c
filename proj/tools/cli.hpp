#pragma once

#include "fsard/config.hpp"
#include "fsard/serialize.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fsard::cli {

enum class Command { analyze, simulate, optimize, reproduce };
enum class Format { csv, json };

/// Fully resolved experiment description. Lists hold every value of a swept parameter.
struct ExperimentSpec {
    Command command = Command::analyze;
    std::string target;                 // reproduce: fig3, fig4, table1
    Scheme scheme = Scheme::fsa_rd;
    std::vector<int> users{30};
    std::vector<int> frame_sizes{3};
    std::vector<int> mini_slots{4};
    std::vector<double> rho{0.04};
    std::vector<double> gamma;          // empty: near-optimal gamma per point (optimize: default grid)
    std::vector<double> tau;            // empty: optimize uses the default tau grid
    std::int64_t horizon = 10'000'000;
    std::optional<std::int64_t> warmup; // empty: default_warmup(scheme)
    std::optional<int> replications;    // empty: 5 for simulate, 3 for optimize, 1 for reproduce
    std::optional<std::uint64_t> seed;  // empty: generated and recorded
    std::string out;                    // empty or "-": standard output
    Format format = Format::csv;
    bool trace = false;
    bool force = false;
    bool analytic_only = false;         // reproduce: skip the simulated series

    Json to_json() const;
};

/// Inclusive "a:b:step", comma list "a,b,c", or a single value.
std::vector<double> parse_real_range(const std::string &text, const std::string &parameter);
std::vector<int> parse_int_range(const std::string &text, const std::string &parameter);

/// Overlays the keys of a JSON object (same names as the long flags) onto `spec`.
void apply_json(ExperimentSpec &spec, const Json &config);

/// Reads a JSON config file, or the embedded spec line of a CSV written by this tool.
Json load_config_file(const std::string &path);

/// Process exit codes.
enum ExitCode : int { ok = 0, checks_failed = 1, usage_error = 2, runtime_error = 3 };

/// Each runner writes its primary output to `out` (or spec.out) and diagnostics to `log`.
/// They return an ExitCode and may throw library errors.
int run_analyze(ExperimentSpec &spec, std::ostream &out, std::ostream &log);
int run_simulate(ExperimentSpec &spec, std::ostream &out, std::ostream &log);
int run_optimize(ExperimentSpec &spec, std::ostream &out, std::ostream &log);
int run_reproduce(ExperimentSpec &spec, std::ostream &out, std::ostream &log);

/// Full command line entry point; never throws.
int main(int argc, const char *const *argv, std::ostream &out, std::ostream &log);

} // namespace fsard::cli
