#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linbai/designs.hpp"
#include "linbai/norm_estimation.hpp"
#include "linbai/pure_exploration.hpp"

namespace linbai {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

struct RunRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string algo;
  std::string set;
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t samples = 0;
  bool success = false;
  /// Value of the recommended arm (bai) or r_hat (norm).
  double estimate = 0.0;
  /// Optimal value (bai) or ||theta|| (norm).
  double true_value = 0.0;
  std::string branch;
  double wall_ms = 0.0;
  std::uint64_t theta_digest = 0;
};

inline constexpr std::string_view kCsvHeader =
    "trial,seed,algo,set,d,k,m,eps,delta,samples,success,estimate,true_value,branch,wall_ms";

std::string csv_row(const RunRecord& record);
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Parses a CSV written by write_csv. Throws ConfigError with the line
/// number on schema errors.
std::vector<RunRecord> read_csv(std::istream& in);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(y) on log(x). Throws InsufficientPoints for fewer
/// than three points.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct RunSummary {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0.0;
  WilsonInterval ci;
  double mean_samples = 0.0;
  double median_samples = 0.0;
  std::uint64_t max_samples = 0;
  std::optional<LogLogFit> fit;
};

RunSummary summarize(const std::vector<RunRecord>& records);

using TrialFn = std::function<RunRecord(std::size_t trial, std::uint64_t seed)>;
using RecordSink = std::function<void(const RunRecord&)>;

/// Runs trials 0..n-1, trial i with seed stable_mix(master_seed, i), on up
/// to `workers` threads. Records reach `sink` in trial order from a single
/// thread and are returned in trial order.
std::vector<RunRecord> run_trials(std::size_t trials, std::uint64_t master_seed, std::size_t workers,
                                  const TrialFn& trial, const RecordSink& sink = {});

struct ExperimentConfig {
  /// bai | norm
  std::string experiment = "bai";
  std::string set;
  /// fixed | partitioned | unionballs | uniform
  std::string algo = "fixed";
  /// file:<path> | gen:<family>:<params> | explicit (uses theta_values)
  std::string theta = "explicit";
  std::vector<double> theta_values;
  double eps = 0.1;
  double delta = 0.1;
  std::size_t trials = 100;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  /// Path to a constants JSON file; empty uses the built-in defaults.
  std::string consts;
  std::optional<std::uint64_t> budget_override;
  double budget_scale = 1.0;
  std::string out;
  bool timing = false;
  /// Norm experiments: dimension and true norms.
  std::size_t d = 0;
  std::vector<double> r;

  /// Throws ConfigError describing the first offending field.
  void validate() const;
};

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// First numeric CSV row of a file as theta.
Eigen::VectorXd load_theta_csv(const std::filesystem::path& path);

/// Runs a bai experiment; records stream to `csv` (header included) when
/// non-null.
RunSummary run_bai_experiment(const ExperimentConfig& config, std::ostream* csv = nullptr);

struct NormRecord {
  std::size_t trial = 0;
  std::size_t d = 0;
  double r_true = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  NormBranch branch = NormBranch::Mid;
  double r0 = 0.0;
  double r_hat = 0.0;
  double abs_err = 0.0;
  std::uint64_t samples = 0;
  bool success = false;
};

inline constexpr std::string_view kNormCsvHeader =
    "trial,d,r_true,eps,delta,branch,r0,r_hat,abs_err,samples,success";

std::string csv_row(const NormRecord& record);
std::vector<NormRecord> read_norm_csv(std::istream& in);

/// r times a unit vector drawn uniformly from the sphere with `seed`.
Eigen::VectorXd norm_instance(std::size_t d, double r, std::uint64_t seed);

/// One estimate_norm run per trial for every radius in config.r.
std::vector<NormRecord> run_norm_experiment(const ExperimentConfig& config, const NormConsts& consts,
                                            std::ostream* csv = nullptr);

struct GapConfig {
  std::vector<std::size_t> dims = {2, 4, 8};
  double eps = 0.2;
  double delta = 0.1;
  /// Norm of the planted block of theta; the default makes eps = 0.6 rho,
  /// the regime of unionball_hard.
  double rho = 0.2 / 0.6;
  std::size_t trials = 100;
  double target = 0.9;
  double beta_start = 1.0 / 256.0;
  double beta_min = 1.0 / 65536.0;
  double beta_max = 64.0;
  /// Log-space bisection steps after the doubling bracket is found.
  std::size_t refine_steps = 3;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  NormConsts consts;
  FixedDesignOptions design;
};

struct GapPoint {
  std::string algo;
  std::size_t d = 0;
  /// Budget multiplier; for the adaptive algorithm, the phase-1 multiplier.
  double beta = 0.0;
  /// Adaptive only: phase-2 budget multiplier, tuned first with the planted
  /// block given.
  double beta_phase2 = 0.0;
  double mean_samples = 0.0;
  double success_rate = 0.0;
};

struct GapResult {
  std::vector<GapPoint> points;
  LogLogFit adaptive_fit;
  LogLogFit nonadaptive_fit;
};

/// Success rate and mean samples at budget multiplier beta.
struct BudgetProbe {
  double success_rate = 0.0;
  double mean_samples = 0.0;
};

/// Smallest multiplier whose success rate reaches `target`: doubling (or
/// halving, if `beta_start` already succeeds) to bracket it, then log-space
/// bisection. Returns the tuned beta and its probe.
std::pair<double, BudgetProbe> autotune_budget(const std::function<BudgetProbe(double)>& probe,
                                               double target, double beta_start, double beta_min,
                                               double beta_max,
                                               std::size_t refine_steps);

/// Union-of-balls sweep k = d over config.dims: tunes the adaptive
/// algorithm and the full-set fixed design to the success target and fits
/// log(samples) against log(d) for each.
GapResult run_gap_experiment(const GapConfig& config, const RecordSink& sink = {});

}  // namespace linbai
