#include "design_space.hpp"

#include <cmath>
#include <limits>

#include "linbai/error.hpp"

namespace linbai::detail {

Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::fabs(v[i]) > std::fabs(v[best]) + 1e-12) best = i;
  }
  if (v.size() > 0 && v[best] < 0.0) v = -v;
  return v;
}

std::size_t numeric_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > 1e-10 * s[0]) ++rank;
  }
  return rank;
}

DesignSpace::DesignSpace(const ArmSet& set, bool quadratic_oracles)
    : set_(&set), basis_(set.span_basis()), r_(set.intrinsic_dimension()), discrete_(set.enumerable()) {
  if (discrete_ && (quadratic_oracles || std::holds_alternative<sets::Finite>(set.kind()))) {
    arms_ = set.enumerate();
    coords_.resize(static_cast<Eigen::Index>(arms_.size()), static_cast<Eigen::Index>(r_));
    for (std::size_t i = 0; i < arms_.size(); ++i) {
      coords_.row(static_cast<Eigen::Index>(i)) = frame(arms_[i]).transpose();
    }
  }
}

Eigen::VectorXd DesignSpace::frame(const Arm& x) const {
  if (basis_) return basis_->transpose() * x;
  return x;
}

Eigen::MatrixXd DesignSpace::frame_matrix(const Eigen::MatrixXd& ambient) const {
  if (basis_ && ambient.rows() != static_cast<Eigen::Index>(r_)) {
    return basis_->transpose() * ambient * *basis_;
  }
  return ambient;
}

Arm DesignSpace::lift(const Eigen::VectorXd& z) const {
  if (basis_) return *basis_ * z;
  return z;
}

Atom DesignSpace::make_atom(Arm x, double value) const {
  Atom a;
  a.z = frame(x);
  a.x = std::move(x);
  a.value = value;
  return a;
}

Atom DesignSpace::extreme_quadratic(const Eigen::MatrixXd& m, bool maximize) const {
  if (discrete_) {
    const Eigen::VectorXd q = (coords_ * m).cwiseProduct(coords_).rowwise().sum();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i) {
      if (maximize ? q[i] > q[best] : q[i] < q[best]) best = i;
    }
    return make_atom(arms_[static_cast<std::size_t>(best)], q[best]);
  }
  // Balls: extreme eigenpair of the relevant diagonal block.
  std::size_t blocks = 1;
  std::size_t d = r_;
  if (const auto* u = std::get_if<sets::UnionOfBalls>(&set_->kind())) {
    blocks = u->k;
    d = u->d;
  }
  const auto dd = static_cast<Eigen::Index>(d);
  double best_val = maximize ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
  Arm best = Arm::Zero(static_cast<Eigen::Index>(r_));
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto off = static_cast<Eigen::Index>(b) * dd;
    Eigen::MatrixXd sub = m.block(off, off, dd, dd);
    sub = 0.5 * (sub + sub.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    const Eigen::Index col = maximize ? dd - 1 : 0;
    const double val = es.eigenvalues()[col];
    if (maximize ? val > best_val : val < best_val) {
      best_val = val;
      best.setZero();
      best.segment(off, dd) = canonical_sign(es.eigenvectors().col(col));
    }
  }
  return make_atom(std::move(best), best_val);
}

Atom DesignSpace::max_quadratic(const Eigen::MatrixXd& m) const { return extreme_quadratic(m, true); }

Atom DesignSpace::min_quadratic(const Eigen::MatrixXd& m) const { return extreme_quadratic(m, false); }

Eigen::VectorXd DesignSpace::support_batch(const Eigen::MatrixXd& w) const {
  if (std::holds_alternative<sets::Finite>(set_->kind())) {
    return (coords_ * w).colwise().maxCoeff().transpose();
  }
  Eigen::VectorXd out(w.cols());
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    out[i] = set_->support(basis_ ? Eigen::VectorXd(*basis_ * w.col(i)) : Eigen::VectorXd(w.col(i)));
  }
  return out;
}

Eigen::MatrixXd DesignSpace::argmax_batch(const Eigen::MatrixXd& w) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(r_), w.cols());
  if (std::holds_alternative<sets::Finite>(set_->kind())) {
    const Eigen::MatrixXd p = coords_ * w;
    for (Eigen::Index i = 0; i < w.cols(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < p.rows(); ++j) {
        if (p(j, i) > p(best, i)) best = j;
      }
      out.col(i) = coords_.row(best).transpose();
    }
    return out;
  }
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    const Eigen::VectorXd v = basis_ ? Eigen::VectorXd(*basis_ * w.col(i)) : Eigen::VectorXd(w.col(i));
    out.col(i) = frame(set_->linear_argmax(v));
  }
  return out;
}

std::vector<Atom> DesignSpace::spanning_atoms() const {
  std::vector<Atom> out;
  const auto r = static_cast<Eigen::Index>(r_);
  if (!discrete_) {
    for (Eigen::Index i = 0; i < r; ++i) {
      out.push_back(make_atom(Arm::Unit(r, i), 1.0));
    }
    return out;
  }
  // Greedy pivoted Gram-Schmidt: repeatedly take the arm with the largest
  // residual after projecting out the atoms chosen so far.
  Eigen::MatrixXd resid = coords_;
  const double scale = std::max(1.0, coords_.cwiseAbs().maxCoeff());
  for (Eigen::Index step = 0; step < r; ++step) {
    Eigen::Index best = 0;
    const Eigen::VectorXd norms = resid.rowwise().squaredNorm();
    norms.maxCoeff(&best);
    if (norms[best] <= 1e-20 * scale * scale) {
      throw Error(ErrorCode::NotSpanning,
                  std::string(set_->kind_name()) + " set spans only " + std::to_string(step) +
                      " of " + std::to_string(r_) + " dimensions",
                  static_cast<std::uint64_t>(step));
    }
    const Eigen::VectorXd q = resid.row(best).transpose() / std::sqrt(norms[best]);
    resid -= (resid * q) * q.transpose();
    out.push_back(make_atom(arms_[static_cast<std::size_t>(best)], 1.0));
  }
  return out;
}

}  // namespace linbai::detail
