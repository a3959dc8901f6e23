#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "linbai/rng.hpp"

namespace linbai {

using Arm = Eigen::VectorXd;

inline constexpr double kMembershipTol = 1e-9;
inline constexpr std::size_t kEnumerationCap = 1'000'000;

namespace sets {

struct Finite {
  std::vector<Arm> arms;
};
/// Closed unit l2-ball in R^d.
struct Ball {
  std::size_t d;
};
/// {-1, +1}^d.
struct HypercubePM {
  std::size_t d;
};
/// {0, 1}^d.
struct Hypercube01 {
  std::size_t d;
};
/// Binary vectors in R^d with exactly m ones.
struct MSet {
  std::size_t d;
  std::size_t m;
};
/// One arm from each of m sub-problems: a one-hot vector per block of sizes
/// dims[0], ..., dims[m-1].
struct MultiTask {
  std::vector<std::size_t> dims;
};
/// Union of k unit l2-balls, ball i living on coordinates [i*d, (i+1)*d).
struct UnionOfBalls {
  std::size_t k;
  std::size_t d;
};

}  // namespace sets

/// An action set together with its geometric oracles. Immutable after
/// construction; safe to share across threads.
class ArmSet {
 public:
  using Kind = std::variant<sets::Finite, sets::Ball, sets::HypercubePM, sets::Hypercube01,
                            sets::MSet, sets::MultiTask, sets::UnionOfBalls>;

  static ArmSet finite(std::vector<Arm> arms);
  static ArmSet ball(std::size_t d);
  static ArmSet cube_pm(std::size_t d);
  static ArmSet cube_01(std::size_t d);
  static ArmSet mset(std::size_t d, std::size_t m);
  static ArmSet multitask(std::vector<std::size_t> dims);
  static ArmSet union_of_balls(std::size_t k, std::size_t d);

  const Kind& kind() const { return kind_; }
  std::string_view kind_name() const;

  /// Ambient dimension: d, k*d for unions of balls, sum of block sizes for
  /// multi-task sets.
  std::size_t dimension() const { return dim_; }

  /// Dimension of span(X). Equals dimension() except for multi-task sets,
  /// where it is d - m + 1.
  std::size_t intrinsic_dimension() const;

  /// Orthonormal basis of span(X) when it is a proper subspace (multi-task
  /// sets), nullopt when the set is full-dimensional by construction.
  const std::optional<Eigen::MatrixXd>& span_basis() const { return basis_; }

  /// argmax_{x in X} <x, v>, ties to the lowest index / coordinate. The ball
  /// returns the zero arm for v = 0.
  Arm linear_argmax(const Eigen::VectorXd& v) const;

  /// max_{x in X} <x, v>.
  double support(const Eigen::VectorXd& v) const;

  bool contains(const Arm& x, double tol = kMembershipTol) const;

  bool enumerable() const;
  /// Number of arms (saturating at UINT64_MAX); nullopt for continuous sets.
  std::optional<std::uint64_t> cardinality() const;
  /// Duplicate-free listing. Structured sets come out in ascending
  /// lexicographic order; finite sets keep their stored order.
  std::vector<Arm> enumerate(std::size_t cap = kEnumerationCap) const;

  /// Block carrying supp(x) for a union of balls (0-based). The zero arm maps
  /// to block 0.
  std::size_t block_of(const Arm& x, double tol = kMembershipTol) const;

  /// A random member (uniform over finite sets, uniform in volume for balls).
  Arm sample_member(Rng& rng) const;

  /// Canonical spec string in the `kind:params` grammar. Finite sets render
  /// as `finite:<n arms>` since the source path is not retained.
  std::string spec() const;

  /// Number of blocks (k for unions of balls, m for multi-task), else 1.
  std::size_t block_count() const;

 private:
  explicit ArmSet(Kind kind);

  Kind kind_;
  std::size_t dim_ = 0;
  std::optional<Eigen::MatrixXd> basis_;
};

/// Parses `finite:<path>`, `ball:<d>`, `cube_pm:<d>`, `cube_01:<d>`,
/// `mset:<d>:<m>`, `multitask:<d1,d2,...>`, `unionballs:<k>:<d>`.
ArmSet parse_set_spec(std::string_view spec);

/// One arm per row, comma separated. A non-numeric first row is skipped as a
/// header.
std::vector<Arm> load_arms_csv(const std::filesystem::path& path);

/// Helmert-type orthonormal basis U = [u0 Q_1 ... Q_m] of the span of the
/// multi-task set with block sizes `dims` (every entry >= 2). Shape is
/// (sum dims) x (sum dims - m + 1).
Eigen::MatrixXd multitask_basis(std::span<const std::size_t> dims);

/// Helmert block H_n (n x (n-1)) with H^T H = I and H^T 1 = 0.
Eigen::MatrixXd helmert(std::size_t n);

}  // namespace linbai
