#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "linbai/arm_sets.hpp"
#include "linbai/rng.hpp"

namespace linbai {

struct PullLogEntry {
  Arm x;
  double reward_sum = 0.0;
  std::uint64_t count = 0;
};

/// Linear bandit with unit Gaussian noise: pull(x) = <x, theta> + N(0, 1).
/// Single writer; one instance per trial.
class Environment {
 public:
  Environment(Eigen::VectorXd theta, std::uint64_t seed);

  std::size_t dimension() const { return static_cast<std::size_t>(theta_.size()); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t pulls() const { return pulls_; }

  double pull(const Arm& x);

  /// Sum of `count` independent rewards of arm x. Consumes exactly the
  /// noise draws `count` separate pulls would.
  double pull_sum(const Arm& x, std::uint64_t count);

  /// FNV-1a over the little-endian bytes of theta.
  std::uint64_t theta_digest() const;

  /// Records up to `cap` pull events (single pulls and batches).
  void enable_log(std::size_t cap);
  const std::vector<PullLogEntry>& log() const { return log_; }

 private:
  friend class Referee;

  void record(const Arm& x, double sum, std::uint64_t count);

  Eigen::VectorXd theta_;
  Rng rng_;
  std::uint64_t seed_;
  std::uint64_t pulls_ = 0;
  std::optional<std::size_t> log_cap_;
  std::vector<PullLogEntry> log_;
};

/// Pull-only access to an environment, optionally restricted to the
/// coordinate block [offset, offset + dim). Local arms are embedded with
/// zeros outside the block before being pulled. This is what algorithms
/// receive; it exposes no ground truth.
class EnvView {
 public:
  EnvView(Environment& env);  // NOLINT(google-explicit-constructor)
  EnvView(Environment& env, std::size_t offset, std::size_t dim);

  std::size_t dimension() const { return dim_; }
  std::uint64_t pulls() const { return env_->pulls(); }

  double pull(const Arm& x);
  double pull_sum(const Arm& x, std::uint64_t count);

  /// Sub-view on local coordinates [offset, offset + dim).
  EnvView block(std::size_t offset, std::size_t dim) const;

  /// Ambient arm corresponding to a local one.
  Arm embed(const Arm& x) const;

 private:
  Environment* env_;
  std::size_t offset_;
  std::size_t dim_;
};

/// Ground-truth evaluation. Only the harness and tests use this.
class Referee {
 public:
  Referee(const Environment& env, const ArmSet& set);

  const Eigen::VectorXd& theta() const { return env_->theta_; }
  double value(const Arm& x) const;
  /// max_x <x, theta>, through the set's linear maximization oracle.
  double optimal_value() const;
  double simple_regret(const Arm& x) const;
  /// Closed inequality: regret <= eps.
  bool is_eps_best(const Arm& x, double eps) const;

 private:
  const Environment* env_;
  ArmSet set_;
};

/// FNV-1a 64-bit hash of the little-endian byte image of v.
std::uint64_t digest(const Eigen::VectorXd& v);

}  // namespace linbai
