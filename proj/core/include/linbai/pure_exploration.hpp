#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linbai/arm_sets.hpp"
#include "linbai/bandit_env.hpp"
#include "linbai/designs.hpp"
#include "linbai/norm_estimation.hpp"
#include "linbai/rng.hpp"

namespace linbai {

struct BaiResult {
  Arm chosen;
  std::uint64_t samples = 0;
  /// Least-squares estimate of theta (ambient coordinates) when the
  /// algorithm forms one; empty otherwise.
  Eigen::VectorXd theta_hat;
  std::map<std::string, double> diagnostics;
};

struct FixedDesignOptions {
  /// Pull exactly this many samples instead of the formula budget.
  std::optional<std::uint64_t> budget_override;
  /// T = ceil(c (r log(1/delta) + w^2) / eps^2).
  double budget_constant = 360.0;
  /// Multiplies the formula budget (ignored with budget_override).
  double budget_scale = 1.0;
  /// Monte Carlo draws for the width plugged into the budget.
  std::size_t width_draws = 20000;
  WidthDesignOptions width;
  std::size_t g_iters = 20000;
  double g_tol = 1e-3;
  /// Enforce T >= 180 r.
  bool enforce_rounding_floor = true;
  /// Draws for the rounding quality report (0 disables it).
  std::size_t quality_draws = 0;
  std::uint64_t seed = 0;
};

/// Everything the non-adaptive algorithm decides before its first pull. It
/// depends only on (set, eps, delta, options), so one plan can serve many
/// trials.
struct FixedDesignPlan {
  Design lambda1;
  Design lambda2;
  Design lambda0;
  WidthEstimate width;
  double width_ucb = 0.0;
  std::uint64_t formula_budget = 0;
  FixedDesign fixed;
};

/// Width-optimal design, G-optimal design and their even mixture.
struct DesignTriple {
  Design lambda1;
  Design lambda2;
  Design lambda0;
};
DesignTriple design_triple(const ArmSet& set, const FixedDesignOptions& options);

FixedDesignPlan plan_fixed_design(const ArmSet& set, double eps, double delta,
                                  const FixedDesignOptions& options = {});

/// Pulls the planned allocation, solves least squares in the span
/// coordinates and returns the set's maximizer of <x, theta_hat>.
BaiResult run_fixed_design(const ArmSet& set, const FixedDesignPlan& plan, EnvView env);

BaiResult fixed_design_bai(const ArmSet& set, double eps, double delta, EnvView env,
                           const FixedDesignOptions& options = {});

struct MedianEliminationOptions {
  /// Pulls per survivor in round l: ceil(pull_constant / (eps_l/2)^2 log(3/delta_l)).
  double pull_constant = 4.0;
  /// Multiplies every per-round pull count.
  double budget_scale = 1.0;
};

struct MedianEliminationResult {
  std::size_t index = 0;
  std::uint64_t samples = 0;
  std::size_t rounds = 0;
};

/// Median Elimination: eps_1 = eps/4, eps_{l+1} = 3/4 eps_l, delta_1 = delta/2,
/// delta_{l+1} = delta_l/2; each round keeps the ceil(n/2) best empirical
/// means (ties to the lower index).
MedianEliminationResult median_elimination(const std::vector<Arm>& arms, double eps, double delta,
                                           EnvView env, const MedianEliminationOptions& options = {});

/// Region i holds arm indices; regions are disjoint and cover [0, n).
struct Partition {
  std::vector<std::vector<std::size_t>> regions;
};

/// Seeded shuffle of [0, n), cut into d chunks of floor(n/d); the last chunk
/// takes the remainder. Throws TooFewArms when n < d.
Partition make_partition(std::size_t n, std::size_t d, std::uint64_t seed);

struct PartitionedWidth {
  /// max over regions of E max_{x in R_i} <x, A^{-1/2} eta> (the region
  /// attaining the largest mean, with its standard error).
  WidthEstimate partitioned;
  std::size_t region = 0;
  /// E max_{x in X} on the same draws.
  WidthEstimate full;
};

PartitionedWidth estimate_partitioned_width(const std::vector<Arm>& arms, const Partition& partition,
                                            const Eigen::MatrixXd& a, std::size_t draws,
                                            std::uint64_t seed);

struct PartitionedOptions {
  FixedDesignOptions design;
  MedianEliminationOptions elimination;
  double budget_constant = 1440.0;
  std::uint64_t partition_seed = 0;
};

struct PartitionedPlan {
  std::vector<Arm> arms;
  Partition partition;
  PartitionedWidth width;
  double width_ucb = 0.0;
  std::uint64_t formula_budget = 0;
  FixedDesign fixed;
};

PartitionedPlan plan_partitioned(const ArmSet& set, double eps, double delta,
                                 const PartitionedOptions& options = {});

BaiResult run_partitioned(const ArmSet& set, const PartitionedPlan& plan, double eps, double delta,
                          EnvView env, const PartitionedOptions& options = {});

/// Adaptive algorithm for finite sets: a fixed-design phase with
/// T = ceil(1440 (d log(4/delta) + w_R^2) / eps^2) yields one candidate per
/// region, then Median Elimination with (eps/2, delta/2) picks among them.
BaiResult partitioned_adaptive_bai(const ArmSet& set, double eps, double delta, EnvView env,
                                   const PartitionedOptions& options = {});

struct UnionBallOptions {
  NormConsts consts;
  /// Options for the single-ball fixed design of phase 2.
  FixedDesignOptions phase2;
  /// Precomputed phase-2 plan on Ball(d) with (eps/2, delta/2); computed on
  /// the fly when null.
  const FixedDesignPlan* phase2_plan = nullptr;
  std::uint64_t seed = 0;
};

/// Adaptive algorithm for a union of k balls: estimate every block norm to
/// eps/4 with confidence delta/(2k), keep the largest block (ties to the
/// lowest index) and run the fixed design on that ball with (eps/2, delta/2).
BaiResult union_ball_adaptive_bai(const ArmSet& set, double eps, double delta, EnvView env,
                                  const UnionBallOptions& options = {});

/// max over tau of tau (1 - tau) / (1 + tau^2), attained at tau = sqrt(2) - 1.
inline constexpr double kBayesFloorConstant = 0.20710678118654752;

/// Lower bound on the Bayes simple regret of any non-adaptive rule whose
/// (unnormalized) design matrix is A, under theta ~ N(0, (sqrt(2)-1)^2 A^{-1}):
/// kBayesFloorConstant times the Monte Carlo width E max_x <x, A^{-1/2} xi>.
/// The standard error is scaled the same way.
WidthEstimate bayes_regret_floor(const ArmSet& set, const Eigen::MatrixXd& a, std::size_t draws,
                                 std::uint64_t seed);

/// tau A^{-1/2} g with g standard normal.
Eigen::VectorXd sample_gaussian_prior(const Eigen::MatrixXd& a, double tau, Rng& rng);

/// Non-adaptive baseline: `budget` arms drawn uniformly from the set, a
/// minimum-norm least-squares fit in span coordinates, and the set's
/// maximizer of the fit.
BaiResult uniform_baseline_bai(const ArmSet& set, std::uint64_t budget, EnvView env, Rng& rng);

}  // namespace linbai
