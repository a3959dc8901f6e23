#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "linbai/arm_sets.hpp"
#include "linbai/rng.hpp"

namespace linbai {

struct HardSample {
  Eigen::VectorXd theta;
  /// The optimal arm the instance was built around (empty for the Gaussian
  /// prior).
  Arm planted;
  /// Closed-form max_x <x, theta>.
  double optimal_value = 0.0;
};

/// eps_j = eps sqrt(d_j) / sum_s sqrt(d_s).
std::vector<double> multitask_eps_split(const std::vector<std::size_t>& dims, double eps);

/// One uniformly random coordinate per block set to 10 eps_j. With
/// `zero_block`, that block is left all-zero (its planted coordinate is
/// still drawn, so the other blocks match the unmodified instance).
HardSample multitask_hard(const std::vector<std::size_t>& dims, double eps, Rng& rng,
                          std::optional<std::size_t> zero_block = std::nullopt);

/// Delta = 10 eps / m on a uniformly random m-subset. Requires
/// d - m + 1 >= 20 m (RegimeViolation otherwise).
HardSample mset_hard(std::size_t d, std::size_t m, double eps, Rng& rng);

enum class CubeVariant { PlusMinus, ZeroOne };

/// Random pattern x; theta_i = x_i 5 eps / d ({-1,+1}^d) or
/// theta_i = +-10 eps / d by x_i in {1, 0} ({0,1}^d).
HardSample hypercube_hard(std::size_t d, double eps, CubeVariant variant, Rng& rng);

/// Norm used by unionball_hard: c0 sqrt(delta) d / sqrt(per_block_budget).
double unionball_hard_norm(std::size_t d, double per_block_budget, double delta, double c0 = 0.5);

/// Random block, random unit direction within it, scaled to
/// unionball_hard_norm.
HardSample unionball_hard(std::size_t k, std::size_t d, double per_block_budget, double delta,
                          Rng& rng, double c0 = 0.5);

/// A seeded distribution over theta, as used by the `hard` command.
class HardFamily {
 public:
  enum class Kind {
    MultiTaskSpiked,
    MSetSpiked,
    HypercubePMSigned,
    Hypercube01Signed,
    UnionBlockSpiked,
    GaussianPrior,
  };

  /// `family` is one of multitask, mset, cube_pm, cube_01, unionballs; the
  /// parameter string follows the set grammar (`8,8,8`, `64:3`, `16`,
  /// `k:d:per_block_budget[:delta[:c0]]`).
  static HardFamily parse(std::string_view family, std::string_view params, double eps);

  /// theta ~ N(0, tau^2 A^{-1}) on the given set.
  static HardFamily gaussian_prior(ArmSet set, Eigen::MatrixXd a, double tau);

  Kind kind() const { return kind_; }
  const ArmSet& arm_set() const { return *set_; }
  HardSample sample(Rng& rng) const;

 private:
  HardFamily() = default;

  Kind kind_ = Kind::GaussianPrior;
  std::optional<ArmSet> set_;
  std::vector<std::size_t> dims_;
  std::size_t d_ = 0;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  double eps_ = 0.0;
  double budget_ = 0.0;
  double delta_ = 0.1;
  double c0_ = 0.5;
  Eigen::MatrixXd prior_a_;
  double tau_ = 0.0;
};

}  // namespace linbai
