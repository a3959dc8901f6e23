#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "linbai/arm_sets.hpp"

namespace linbai {

/// Finitely supported probability distribution over arms.
struct Design {
  std::vector<Arm> support;
  Eigen::VectorXd weights;

  std::size_t size() const { return support.size(); }
};

/// A(lambda) = sum_x w_x x x^T in ambient coordinates.
Eigen::MatrixXd moment_matrix(const Design& design);

/// Moment matrix in the coordinates of span(X): U^T A U for multi-task sets,
/// A itself otherwise. Every design computation works in these coordinates.
Eigen::MatrixXd frame_moment(const ArmSet& set, const Design& design);

/// Maps an ambient d x d matrix to frame coordinates; frame-sized matrices
/// pass through unchanged.
Eigen::MatrixXd to_frame(const ArmSet& set, const Eigen::MatrixXd& a);

/// (M + ridge I)^{-1/2} by symmetric eigendecomposition.
Eigen::MatrixXd inv_sqrt_psd(const Eigen::MatrixXd& m, double ridge = 0.0);

struct OptimizedDesign {
  Design design;
  /// Max leverage for g_optimal; frozen-draw width objective for
  /// width_design.
  double objective = 0.0;
  /// Objective of the starting design on the same criterion.
  double warm_start_objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// G-optimal design by Fedorov-Wynn exchange with away steps on log det A.
/// Stops when max_x x^T A^{-1} x <= r (1 + tol), r = dim span(X). A
/// non-converged result is returned with converged = false.
OptimizedDesign g_optimal(const ArmSet& set, std::size_t max_iters = 20000, double tol = 1e-3);

struct WidthDesignOptions {
  std::size_t draws = 512;
  std::size_t max_iters = 500;
  std::uint64_t seed = 0;
  double tol = 1e-6;
};

/// Design minimizing the sample-average width
///   (1/n) sum_i max_x <x, A(lambda)^{-1/2} eta_i>
/// over `draws` frozen standard normal vectors, by Frank-Wolfe with away
/// steps and golden-section line search, started from `warm_start`
/// (the G-optimal design when null). Never ends worse than its start.
OptimizedDesign width_design(const ArmSet& set, const WidthDesignOptions& options = {},
                             const Design* warm_start = nullptr);

/// Convex combination of designs; duplicate arms are merged.
Design mix(const std::vector<Design>& designs, const std::vector<double>& coeffs);

/// Keeps at most r(r+1)/2 + 1 atoms without changing the moment matrix.
Design reduce_support(const ArmSet& set, const Design& design);

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;

  double upper(double z = 2.0) const { return mean + z * std_error; }
};

/// Monte Carlo estimate of E max_x <x, A^{-1/2} eta>. `a` is in ambient or
/// frame coordinates. Throws Singular if A is singular.
WidthEstimate estimate_width(const ArmSet& set, const Eigen::MatrixXd& a, std::size_t draws,
                             std::uint64_t seed);
WidthEstimate estimate_width(const ArmSet& set, const Design& design, std::size_t draws,
                             std::uint64_t seed);

/// Exact max_x x^T A^{-1} x over the whole set (frame coordinates).
double max_leverage(const ArmSet& set, const Eigen::MatrixXd& a);

struct TauReport {
  double value = 0.0;
  WidthEstimate width;
  double max_leverage = 0.0;
};

/// tau(A) = (E max_x x^T A^{-1/2} eta)^2 + 2 max_x ||x||^2_{A^{-1}} log(2/delta).
TauReport tau_statistic(const ArmSet& set, const Eigen::MatrixXd& a, double delta,
                        std::size_t draws, std::uint64_t seed);

struct RoundingOptions {
  /// Require T >= 180 r. Turning this off is meant for tests and budget
  /// sweeps.
  bool enforce_floor = true;
  double delta = 0.1;
  /// Draws for the quality report; 0 skips the width and tau ratios.
  std::size_t quality_draws = 2000;
  std::uint64_t seed = 0;
};

/// Measured loss of rounding, F(A_T) / F(A(lambda)) for three criteria.
/// Width and tau use common random numbers.
struct RoundingQuality {
  double leverage_ratio = 0.0;
  double width_ratio = 0.0;
  double tau_ratio = 0.0;
  bool forced_pulls = false;
};

struct FixedDesign {
  std::vector<Arm> support;
  std::vector<std::uint64_t> counts;
  std::uint64_t budget = 0;
  /// (1/T) sum counts x x^T in frame coordinates.
  Eigen::MatrixXd normalized_moment;
  RoundingQuality quality;
};

inline constexpr std::uint64_t kRoundingFloorFactor = 180;

/// floor(T w_x), remainder to the largest fractional parts, ties to the
/// lowest index.
std::vector<std::uint64_t> proportional_counts(const Eigen::VectorXd& weights, std::uint64_t budget);

/// Proportional rounding to an integer allocation of `budget` pulls. If the
/// result is singular, retries with one forced pull per atom before
/// throwing Singular. Throws BudgetTooSmall when the budget is below the
/// support size or (with enforce_floor) below 180 r.
FixedDesign round_design(const ArmSet& set, const Design& design, std::uint64_t budget,
                         const RoundingOptions& options = {});

}  // namespace linbai
