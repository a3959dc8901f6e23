#include "linbai/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "design_space.hpp"
#include "linbai/error.hpp"
#include "linbai/rng.hpp"

namespace linbai {

namespace {

using detail::Atom;
using detail::DesignSpace;

constexpr double kMergeTol = 1e-12;
constexpr std::size_t kWidthChunk = 4096;

// Weighted atoms with duplicate merging, the working state of both
// optimizers.
struct Pool {
  std::vector<Atom> atoms;
  std::vector<double> w;

  std::size_t find(const Eigen::VectorXd& z) const {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if ((atoms[i].z - z).cwiseAbs().maxCoeff() <= kMergeTol) return i;
    }
    return atoms.size();
  }

  std::size_t add(const Atom& a, double weight) {
    const auto i = find(a.z);
    if (i < atoms.size()) {
      w[i] += weight;
      return i;
    }
    atoms.push_back(a);
    w.push_back(weight);
    return atoms.size() - 1;
  }

  void scale(double s) {
    for (auto& v : w) v *= s;
  }

  void prune(double eps = 1e-14) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (w[i] > eps) {
        atoms[out] = std::move(atoms[i]);
        w[out] = w[i];
        ++out;
      }
    }
    atoms.resize(out);
    w.resize(out);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
  }

  Eigen::MatrixXd moment(std::size_t r) const {
    const auto n = static_cast<Eigen::Index>(r);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      a.selfadjointView<Eigen::Lower>().rankUpdate(atoms[i].z, w[i]);
    }
    return a.selfadjointView<Eigen::Lower>();
  }

  Design design() const {
    Design d;
    d.weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      d.support.push_back(atoms[i].x);
      d.weights[static_cast<Eigen::Index>(i)] = w[i];
    }
    return d;
  }
};

Pool pool_from(const DesignSpace& space, const Design& design) {
  Pool p;
  for (std::size_t i = 0; i < design.size(); ++i) {
    Atom a;
    a.x = design.support[i];
    a.z = space.frame(a.x);
    p.add(a, design.weights[static_cast<Eigen::Index>(i)]);
  }
  p.prune(0.0);
  return p;
}

// Caratheodory reduction on the moment map z -> vech(z z^T): while more than
// r(r+1)/2 + 1 atoms remain, move along a null direction of the lifted
// atoms until one weight reaches zero. A is unchanged throughout.
void caratheodory(Pool& p, std::size_t r) {
  const std::size_t p_dim = r * (r + 1) / 2;
  const std::size_t limit = p_dim + 1;
  while (p.atoms.size() > limit) {
    const std::size_t cols = limit + 1;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(limit), static_cast<Eigen::Index>(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& z = p.atoms[c].z;
      Eigen::Index row = 0;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        for (Eigen::Index j = i; j < z.size(); ++j) m(row++, static_cast<Eigen::Index>(c)) = z[i] * z[j];
      }
      m(row, static_cast<Eigen::Index>(c)) = 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    Eigen::VectorXd v = svd.matrixV().col(static_cast<Eigen::Index>(cols) - 1);
    if (v.maxCoeff() <= 0.0) v = -v;
    double t = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double vc = v[static_cast<Eigen::Index>(c)];
      if (vc > 1e-14 && p.w[c] / vc < t) {
        t = p.w[c] / vc;
        hit = c;
      }
    }
    for (std::size_t c = 0; c < cols; ++c) p.w[c] -= t * v[static_cast<Eigen::Index>(c)];
    p.w[hit] = 0.0;
    for (std::size_t c = 0; c < cols; ++c) p.w[c] = std::max(p.w[c], 0.0);
    p.prune(0.0);
  }
}

struct Eig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

Eig sym_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return {es.eigenvalues(), es.eigenvectors()};
}

double optimizer_ridge(const Eigen::MatrixXd& a) {
  return 1e-9 * a.trace() / static_cast<double>(a.rows());
}

Eigen::MatrixXd inv_sqrt_from(const Eig& e, double ridge) {
  const Eigen::VectorXd s = (e.values.array() + ridge).max(1e-300).rsqrt();
  return e.vectors * s.asDiagonal() * e.vectors.transpose();
}

Eigen::MatrixXd standard_normals(std::size_t rows, std::size_t cols, Rng& rng) {
  Eigen::MatrixXd h(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, j) = rng.gaussian();
  }
  return h;
}

// Sample-average width objective on frozen draws.
struct SaaObjective {
  const DesignSpace& space;
  Eigen::MatrixXd draws;

  double operator()(const Eigen::MatrixXd& a) const {
    const Eig e = sym_eig(a);
    if (e.values[0] + optimizer_ridge(a) <= 0.0) return std::numeric_limits<double>::infinity();
    return space.support_batch(inv_sqrt_from(e, optimizer_ridge(a)) * draws).mean();
  }

  // Gradient of the objective with respect to A. With the maximizers z_i
  // held fixed, each term is <A^{-1/2}, sym(z_i eta_i^T)>, and the
  // derivative of A -> A^{-1/2} is the Daleckii-Krein map with divided
  // differences of t^{-1/2}.
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& a) const {
    const double ridge = optimizer_ridge(a);
    const Eig e = sym_eig(a);
    const Eigen::MatrixXd b = inv_sqrt_from(e, ridge);
    const Eigen::MatrixXd zstar = space.argmax_batch(b * draws);
    Eigen::MatrixXd s = zstar * draws.transpose() / static_cast<double>(draws.cols());
    s = 0.5 * (s + s.transpose()).eval();
    const Eigen::Index r = a.rows();
    Eigen::VectorXd lam = (e.values.array() + ridge).max(1e-300);
    Eigen::MatrixXd l(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) {
        const double li = lam[i];
        const double lj = lam[j];
        if (std::fabs(li - lj) > 1e-10 * std::max(li, lj)) {
          l(i, j) = (1.0 / std::sqrt(li) - 1.0 / std::sqrt(lj)) / (li - lj);
        } else {
          const double m = 0.5 * (li + lj);
          l(i, j) = -0.5 / (m * std::sqrt(m));
        }
      }
    }
    const Eigen::MatrixXd c = e.vectors.transpose() * s * e.vectors;
    return e.vectors * l.cwiseProduct(c) * e.vectors.transpose();
  }
};

template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, int iters = 30) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

Eigen::MatrixXd checked_frame(const ArmSet& set, const Eigen::MatrixXd& a) {
  const auto r = static_cast<Eigen::Index>(set.intrinsic_dimension());
  Eigen::MatrixXd f = to_frame(set, a);
  if (f.rows() != r || f.cols() != r) {
    throw Error(ErrorCode::DimensionMismatch,
                "design matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    ", set has dimension " + std::to_string(set.dimension()));
  }
  return f;
}

}  // namespace

Eigen::MatrixXd moment_matrix(const Design& design) {
  if (design.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty design");
  const auto d = design.support.front().size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design.support[i].size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "design support arms differ in length");
    }
    a.selfadjointView<Eigen::Lower>().rankUpdate(design.support[i],
                                                  design.weights[static_cast<Eigen::Index>(i)]);
  }
  return a.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd to_frame(const ArmSet& set, const Eigen::MatrixXd& a) {
  const auto& u = set.span_basis();
  if (u && a.rows() == static_cast<Eigen::Index>(set.dimension())) {
    return u->transpose() * a * *u;
  }
  return a;
}

Eigen::MatrixXd frame_moment(const ArmSet& set, const Design& design) {
  return to_frame(set, moment_matrix(design));
}

Eigen::MatrixXd inv_sqrt_psd(const Eigen::MatrixXd& m, double ridge) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "inv_sqrt_psd needs a square matrix");
  if (ridge < 0.0) throw Error(ErrorCode::InvalidArgument, "ridge must be >= 0");
  if (m.size() == 0) return m;
  const Eig e = sym_eig(m);
  const double norm = e.values.cwiseAbs().maxCoeff();
  if (e.values[0] < -1e-8 * norm) {
    throw Error(ErrorCode::NotPSD, "matrix has eigenvalue " + std::to_string(e.values[0]));
  }
  const double top = e.values[e.values.size() - 1];
  if (ridge == 0.0 && (top <= 0.0 || e.values[0] <= 1e-12 * top)) {
    throw Error(ErrorCode::Singular, "matrix is singular (eigenvalue ratio " +
                                         std::to_string(top > 0.0 ? e.values[0] / top : 0.0) + ")");
  }
  if (e.values[0] + ridge <= 0.0) throw Error(ErrorCode::Singular, "ridged matrix is singular");
  Eigen::MatrixXd out = inv_sqrt_from(e, ridge);
  return 0.5 * (out + out.transpose());
}

OptimizedDesign g_optimal(const ArmSet& set, std::size_t max_iters, double tol) {
  DesignSpace space(set);
  const auto r = space.rank();
  const double rd = static_cast<double>(r);
  Pool pool;
  for (const auto& a : space.spanning_atoms()) pool.add(a, 1.0 / rd);

  OptimizedDesign out;
  auto leverage_max = [&](const Eigen::MatrixXd& ainv) { return space.max_quadratic(ainv); };
  {
    const Eigen::MatrixXd a0 = pool.moment(r);
    out.warm_start_objective = leverage_max(a0.inverse()).value;
  }

  std::size_t it = 0;
  double g_max = 0.0;
  for (; it < max_iters; ++it) {
    const Eigen::MatrixXd a = pool.moment(r);
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    const Eigen::MatrixXd ainv = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    const Atom toward = leverage_max(ainv);
    g_max = toward.value;
    if (g_max <= rd * (1.0 + tol)) {
      out.converged = true;
      break;
    }
    std::size_t away = pool.atoms.size();
    double g_min = std::numeric_limits<double>::infinity();
    if (pool.atoms.size() > 1) {
      for (std::size_t i = 0; i < pool.atoms.size(); ++i) {
        const double g = pool.atoms[i].z.dot(ainv * pool.atoms[i].z);
        if (g < g_min) {
          g_min = g;
          away = i;
        }
      }
    }
    // log det((1 - a) A + a z z^T) is maximized at a = (g/r - 1)/(g - 1); the
    // same expression is negative (an away step) when g < r.
    if (away < pool.atoms.size() && rd - g_min > g_max - rd) {
      const double wj = pool.w[away];
      const double lower = -wj / (1.0 - wj);
      const double alpha = g_min <= 1.0 ? lower : std::max((g_min / rd - 1.0) / (g_min - 1.0), lower);
      pool.scale(1.0 - alpha);
      pool.w[away] += alpha;
      if (alpha == lower) pool.w[away] = 0.0;
      pool.prune();
    } else {
      const double alpha = (g_max / rd - 1.0) / (g_max - 1.0);
      pool.scale(1.0 - alpha);
      pool.add(toward, alpha);
    }
    if (pool.atoms.size() > 4 * (r * (r + 1) / 2 + 1)) caratheodory(pool, r);
  }
  caratheodory(pool, r);
  const Eigen::MatrixXd a = pool.moment(r);
  out.objective = space.max_quadratic(a.inverse()).value;
  out.converged = out.objective <= rd * (1.0 + tol);
  out.iterations = it;
  out.design = pool.design();
  return out;
}

OptimizedDesign width_design(const ArmSet& set, const WidthDesignOptions& options,
                             const Design* warm_start) {
  if (options.draws == 0) throw Error(ErrorCode::InvalidArgument, "width_design needs draws >= 1");
  DesignSpace space(set);
  const auto r = space.rank();
  Pool pool;
  if (warm_start) {
    pool = pool_from(space, *warm_start);
  } else {
    pool = pool_from(space, g_optimal(set).design);
  }

  Rng rng(options.seed);
  const SaaObjective f{space, standard_normals(r, options.draws, rng)};

  Eigen::MatrixXd a = pool.moment(r);
  double value = f(a);
  OptimizedDesign out;
  out.warm_start_objective = value;
  if (!std::isfinite(value)) throw Error(ErrorCode::Singular, "warm-start design is singular");

  std::size_t it = 0;
  for (; it < options.max_iters; ++it) {
    const Eigen::MatrixXd g = f.gradient(a);
    const double tr_ga = g.cwiseProduct(a).sum();
    const Atom toward = space.min_quadratic(g);
    const double gap_fw = tr_ga - toward.value;

    std::size_t away = pool.atoms.size();
    double gap_away = -std::numeric_limits<double>::infinity();
    if (pool.atoms.size() > 1) {
      for (std::size_t i = 0; i < pool.atoms.size(); ++i) {
        const double q = pool.atoms[i].z.dot(g * pool.atoms[i].z) - tr_ga;
        if (q > gap_away) {
          gap_away = q;
          away = i;
        }
      }
    }
    if (std::max(gap_fw, gap_away) <= options.tol * std::max(1.0, std::fabs(value))) {
      out.converged = true;
      break;
    }

    const bool fw = gap_fw >= gap_away;
    Eigen::MatrixXd dir;
    double hi = 1.0;
    if (fw) {
      dir = toward.z * toward.z.transpose() - a;
    } else {
      const auto& z = pool.atoms[away].z;
      dir = a - z * z.transpose();
      hi = pool.w[away] / (1.0 - pool.w[away]);
    }
    const auto [step, best] = golden_section([&](double s) { return f(a + s * dir); }, 0.0, hi);
    if (!(best < value - 1e-15 * std::fabs(value))) {
      out.converged = true;
      break;
    }
    if (fw) {
      pool.scale(1.0 - step);
      pool.add(toward, step);
    } else {
      pool.scale(1.0 + step);
      pool.w[away] -= step;
      pool.prune();
    }
    if (pool.atoms.size() > 4 * (r * (r + 1) / 2 + 1)) caratheodory(pool, r);
    a = pool.moment(r);
    value = f(a);
  }
  caratheodory(pool, r);
  out.iterations = it;
  out.objective = f(pool.moment(r));
  out.design = pool.design();
  return out;
}

Design mix(const std::vector<Design>& designs, const std::vector<double>& coeffs) {
  if (designs.empty() || designs.size() != coeffs.size()) {
    throw Error(ErrorCode::InvalidArgument, "mix needs one coefficient per design");
  }
  const double total = std::accumulate(coeffs.begin(), coeffs.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-12 ||
      std::any_of(coeffs.begin(), coeffs.end(), [](double c) { return c < 0.0; })) {
    throw Error(ErrorCode::InvalidArgument, "mix coefficients must form a probability vector");
  }
  const auto d = designs.front().support.front().size();
  std::vector<Arm> support;
  std::vector<double> w;
  for (std::size_t k = 0; k < designs.size(); ++k) {
    for (std::size_t i = 0; i < designs[k].size(); ++i) {
      const auto& x = designs[k].support[i];
      if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "mixed designs differ in dimension");
      const double wi = coeffs[k] * designs[k].weights[static_cast<Eigen::Index>(i)];
      const auto it = std::find_if(support.begin(), support.end(), [&](const Arm& y) {
        return (y - x).cwiseAbs().maxCoeff() <= kMergeTol;
      });
      if (it == support.end()) {
        support.push_back(x);
        w.push_back(wi);
      } else {
        w[static_cast<std::size_t>(it - support.begin())] += wi;
      }
    }
  }
  Design out;
  out.support = std::move(support);
  out.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return out;
}

Design reduce_support(const ArmSet& set, const Design& design) {
  DesignSpace space(set, false);
  Pool p = pool_from(space, design);
  caratheodory(p, space.rank());
  return p.design();
}

WidthEstimate estimate_width(const ArmSet& set, const Eigen::MatrixXd& a, std::size_t draws,
                             std::uint64_t seed) {
  if (draws == 0) throw Error(ErrorCode::InvalidArgument, "estimate_width needs draws >= 1");
  const Eigen::MatrixXd b = inv_sqrt_psd(checked_frame(set, a));
  DesignSpace space(set, false);
  Rng rng(seed);
  // Welford for the variance, Kahan for the mean.
  double mean = 0.0;
  double m2 = 0.0;
  double sum = 0.0;
  double comp = 0.0;
  std::size_t n = 0;
  while (n < draws) {
    const std::size_t chunk = std::min(kWidthChunk, draws - n);
    const Eigen::MatrixXd h = standard_normals(space.rank(), chunk, rng);
    const Eigen::VectorXd vals = space.support_batch(b * h);
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      ++n;
      const double y = vals[i] - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      const double delta = vals[i] - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (vals[i] - mean);
    }
  }
  WidthEstimate out;
  out.draws = draws;
  out.mean = sum / static_cast<double>(draws);
  out.std_error = draws > 1 ? std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws)) : 0.0;
  return out;
}

WidthEstimate estimate_width(const ArmSet& set, const Design& design, std::size_t draws,
                             std::uint64_t seed) {
  return estimate_width(set, frame_moment(set, design), draws, seed);
}

double max_leverage(const ArmSet& set, const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd b = inv_sqrt_psd(checked_frame(set, a));
  DesignSpace space(set);
  return space.max_quadratic(b * b).value;
}

TauReport tau_statistic(const ArmSet& set, const Eigen::MatrixXd& a, double delta,
                        std::size_t draws, std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must be in (0, 1)");
  TauReport out;
  out.width = estimate_width(set, a, draws, seed);
  out.max_leverage = max_leverage(set, a);
  out.value = out.width.mean * out.width.mean + 2.0 * out.max_leverage * std::log(2.0 / delta);
  return out;
}

std::vector<std::uint64_t> proportional_counts(const Eigen::VectorXd& weights, std::uint64_t budget) {
  const auto n = static_cast<std::size_t>(weights.size());
  const double total = weights.sum();
  std::vector<std::uint64_t> counts(n);
  std::vector<double> frac(n);
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = static_cast<double>(budget) * weights[static_cast<Eigen::Index>(i)] / total;
    const double fl = std::floor(exact);
    counts[i] = static_cast<std::uint64_t>(fl);
    frac[i] = exact - fl;
    used += counts[i];
  }
  // Floating error can push the floors a unit past the budget.
  while (used > budget) {
    const auto i = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    --counts[i];
    --used;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; used < budget; k = (k + 1) % n) {
    ++counts[order[k]];
    ++used;
  }
  return counts;
}

FixedDesign round_design(const ArmSet& set, const Design& design, std::uint64_t budget,
                         const RoundingOptions& options) {
  if (design.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty design");
  const auto r = set.intrinsic_dimension();
  if (budget < design.size()) {
    throw Error(ErrorCode::BudgetTooSmall,
                "budget " + std::to_string(budget) + " is below the support size " +
                    std::to_string(design.size()),
                design.size());
  }
  if (options.enforce_floor && budget < kRoundingFloorFactor * r) {
    throw Error(ErrorCode::BudgetTooSmall,
                "budget " + std::to_string(budget) + " is below 180 r = " +
                    std::to_string(kRoundingFloorFactor * r),
                kRoundingFloorFactor * r);
  }

  FixedDesign out;
  out.support = design.support;
  out.budget = budget;
  auto frame_of = [&](const std::vector<std::uint64_t>& counts) {
    Design d;
    d.support = design.support;
    d.weights.resize(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i) {
      d.weights[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) / static_cast<double>(budget);
    }
    return frame_moment(set, d);
  };
  auto singular = [](const Eigen::MatrixXd& a) {
    const Eigen::VectorXd ev = sym_eig(a).values;
    const double top = ev[ev.size() - 1];
    return top <= 0.0 || ev[0] <= 1e-12 * top;
  };

  out.counts = proportional_counts(design.weights, budget);
  out.normalized_moment = frame_of(out.counts);
  if (singular(out.normalized_moment)) {
    const auto n = design.size();
    out.counts = proportional_counts(design.weights, budget - n);
    for (auto& c : out.counts) ++c;
    out.normalized_moment = frame_of(out.counts);
    out.quality.forced_pulls = true;
    if (singular(out.normalized_moment)) {
      throw Error(ErrorCode::Singular, "rounded design is singular even with forced pulls");
    }
  }

  const Eigen::MatrixXd a_lambda = frame_moment(set, design);
  out.quality.leverage_ratio = max_leverage(set, out.normalized_moment) / max_leverage(set, a_lambda);
  if (options.quality_draws > 0) {
    const auto t_round = tau_statistic(set, out.normalized_moment, options.delta, options.quality_draws, options.seed);
    const auto t_lambda = tau_statistic(set, a_lambda, options.delta, options.quality_draws, options.seed);
    out.quality.width_ratio = t_round.width.mean / t_lambda.width.mean;
    out.quality.tau_ratio = t_round.value / t_lambda.value;
  }
  return out;
}

}  // namespace linbai
