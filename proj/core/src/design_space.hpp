#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "linbai/arm_sets.hpp"

namespace linbai::detail {

/// An arm together with its coordinates in the working frame.
struct Atom {
  Arm x;
  Eigen::VectorXd z;
  double value = 0.0;
};

/// Geometry of an arm set as seen by the design optimizers. All quadratic
/// forms live in frame coordinates z = U^T x, where U is the span basis of
/// the set (identity for full-dimensional sets). Discrete sets are
/// enumerated once; continuous sets (balls) are handled through closed-form
/// eigenvector oracles and restrict atoms to the unit sphere, which is where
/// every extreme point lives.
class DesignSpace {
 public:
  /// With `quadratic_oracles` false only finite sets are materialized; the
  /// quadratic extrema and spanning_atoms are then unavailable for
  /// structured discrete sets, but support_batch and frame maps still work.
  explicit DesignSpace(const ArmSet& set, bool quadratic_oracles = true);

  const ArmSet& set() const { return *set_; }
  std::size_t rank() const { return r_; }
  bool discrete() const { return discrete_; }

  Eigen::VectorXd frame(const Arm& x) const;
  Eigen::MatrixXd frame_matrix(const Eigen::MatrixXd& ambient) const;
  Arm lift(const Eigen::VectorXd& z) const;

  /// Enumerated arms and their frame coordinates (rows), discrete sets only.
  const std::vector<Arm>& arms() const { return arms_; }
  const Eigen::MatrixXd& coords() const { return coords_; }

  /// max / min of z^T M z over the atoms of the set.
  Atom max_quadratic(const Eigen::MatrixXd& m) const;
  Atom min_quadratic(const Eigen::MatrixXd& m) const;

  /// Column-wise support function: out[i] = max_x <frame(x), w_i>.
  Eigen::VectorXd support_batch(const Eigen::MatrixXd& w) const;

  /// Frame coordinates of the maximizer for each column of w.
  Eigen::MatrixXd argmax_batch(const Eigen::MatrixXd& w) const;

  /// A spanning family of r atoms used to seed the optimizers. Throws
  /// NotSpanning when the set does not span its frame.
  std::vector<Atom> spanning_atoms() const;

 private:
  Atom make_atom(Arm x, double value) const;
  Atom extreme_quadratic(const Eigen::MatrixXd& m, bool maximize) const;

  const ArmSet* set_;
  std::optional<Eigen::MatrixXd> basis_;
  std::size_t r_ = 0;
  bool discrete_ = false;
  std::vector<Arm> arms_;
  Eigen::MatrixXd coords_;
};

/// Flips the sign of a unit vector so its largest-magnitude entry (first on
/// ties) is positive. Used to merge duplicate sphere atoms.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v);

/// Numerical rank with relative threshold 1e-10.
std::size_t numeric_rank(const Eigen::MatrixXd& m);

}  // namespace linbai::detail
