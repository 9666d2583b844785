#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "taoi/cli/experiment.hpp"
#include "taoi/solver.hpp"

namespace taoi::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< a check, solve or sweep point failed
inline constexpr int kExitUsage = 2;    ///< malformed config or input file

/// Relative gain agreement required between the three solvers.
inline constexpr double kGainAgreement = 1e-7;
/// Tolerance handed to every solver run from the command line.
inline constexpr double kSolveTolerance = 1e-9;

/// One line of sweep output.
struct ResultRow {
    double sweep_value = 0;
    std::string policy;
    double exact_gain = 0;
    double mc_avg = 0;
    double mc_avg_eq7 = 0;
    int lmin_case = 0;
    std::optional<State> threshold_state;
    std::string error;  ///< non-empty when the point failed
};

inline constexpr std::string_view kCsvHeader =
    "sweep_value,policy,exact_gain,mc_avg,mc_avg_eq7,lmin_case,threshold_state";

/// Reals use 9 significant digits.
std::string format_real(double value);
std::string format_row(const ResultRow& row);

/// Solves, evaluates and simulates every requested policy at each sweep value.
/// Rows come back ordered by sweep value, then by policy order, regardless
/// of how many points run concurrently.
std::vector<ResultRow> compute_sweep(const ExperimentConfig& config, unsigned jobs = 0);

/// Full CSV document: timestamp line, provenance comments, header, rows.
std::string render_sweep(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                         const std::string& timestamp);

/// `delta,a_u,a_c` table with one row per state.
std::string write_policy_table(const Policy& policy);
/// Parses a policy table; throws ConfigParseError unless every state
/// 1..delta_hat appears exactly once with 0/1 action flags.
Policy read_policy_table(std::string_view text, State delta_hat, const std::string& source);

/// First state taking `action`, if any.
std::optional<State> first_state_with(const Policy& policy, Action action);

struct SolveOptions {
    bool verify = false;
};

int run_solve(const ExperimentConfig& config, const SolveOptions& options, std::ostream& out,
              std::ostream& err);
int run_sweep(const ExperimentConfig& config, unsigned jobs, std::ostream& out, std::ostream& err);
int run_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// With `policy_text`, checks that table instead of solving.
int run_verify(const ExperimentConfig& config, const std::optional<std::string>& policy_text,
               const std::string& policy_source, std::ostream& out, std::ostream& err);

}  // namespace taoi::cli
