#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>

#include "linbai/arm_sets.hpp"
#include "linbai/bandit_env.hpp"
#include "linbai/rng.hpp"

namespace linbai {

/// Scale constants of the norm estimators. The defaults come from the
/// calibration run recorded in data/norm_constants.json (see
/// tools/calibrate_norm).
struct NormConsts {
  double c0 = 1.0;  // repeats per direction: s = ceil(c0 d / r0^2)
  double c1 = 2.0;  // number of directions
  double C0 = 1.0;  // row-count gate of the large-norm estimator
  double C1 = 2.0;  // sample scale of the large-norm estimator

  void validate() const;
  /// Reads {"c0": .., "c1": .., "C0": .., "C1": ..}; missing keys keep the
  /// defaults.
  static NormConsts load(const std::filesystem::path& path);
};

enum class NormBranch { Tiny, Mid, Large, LargeSingularFallback };

std::string_view to_string(NormBranch branch);

struct NormReport {
  double r_hat = 0.0;
  /// Coarse scale used (NaN when the estimator ran without one).
  double r0 = 0.0;
  std::uint64_t samples = 0;
  NormBranch branch = NormBranch::Mid;
  /// The unbiased squared-norm statistic behind r_hat: Z-bar for the
  /// additive estimator, ||theta_hat||^2 - tr(Sigma) for the large-norm one.
  double statistic = 0.0;
};

/// Vector of iid +-1/sqrt(d) entries.
Arm rademacher_direction(std::size_t d, Rng& rng);

/// Mean over k <= K of Z_k = d (ybar_k^2 - 1/s), where ybar_k averages s
/// pulls of a fresh Rademacher direction. Unbiased for ||theta||^2.
double rademacher_statistic(EnvView env, std::uint64_t s, std::uint64_t k, Rng& rng);

/// Additive-error estimate of ||theta|| given a coarse scale eps < r0 < 2 sqrt(d).
/// Pulls exactly K s times, s = ceil(c0 d / r0^2),
/// K = ceil(c1 r0^2 eps^-2 log(4/delta)). Throws RegimeViolation outside
/// the stated range of r0.
NormReport additive_estimate(EnvView env, double eps, double delta, double r0,
                             const NormConsts& consts, Rng& rng);

struct MultiscaleResult {
  double r0 = 0.0;
  std::uint64_t samples = 0;
  /// Number of scales tested.
  std::size_t levels = 0;
  /// The first test (t = eps) already accepted r <= t.
  bool stopped_at_first = false;
  /// No test accepted; r0 is then 2 sqrt(d).
  bool exhausted = false;
};

/// Doubling test over scales t_j = 2^j eps < 2 sqrt(d): stops at the first
/// j whose statistic falls below 1.5 t_j^2 and returns r0 = t_j.
MultiscaleResult multiscale_test(EnvView env, double eps, double delta, const NormConsts& consts,
                                 Rng& rng);

/// max(ceil(C0 (d + log(2/delta))), ceil(C1 d log(4/delta) / eps^2)).
std::uint64_t large_norm_sample_size(std::size_t d, double eps, double delta, const NormConsts& consts);

/// Debiased least squares on n Rademacher pulls:
/// r_hat = sqrt(max(||theta_hat||^2 - tr((X^T X)^{-1}), 0)). A singular
/// X^T X returns sqrt(d) with branch LargeSingularFallback.
NormReport large_norm_estimate(EnvView env, std::uint64_t n, Rng& rng);

/// Full estimator: multiscale test with delta/2, then the tiny (r_hat = eps),
/// mid (additive) or large (least squares) branch with the other delta/2.
NormReport estimate_norm(EnvView env, double eps, double delta, const NormConsts& consts, Rng& rng);

}  // namespace linbai
