#include "linbai/pure_exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linbai/error.hpp"

namespace linbai {

namespace {

void check_eps_delta(double eps, double delta) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
}

std::uint64_t budget_ceil(double x) {
  if (!std::isfinite(x) || x < 0.0) throw Error(ErrorCode::InvalidArgument, "budget is not finite");
  return static_cast<std::uint64_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

Eigen::VectorXd frame_of(const ArmSet& set, const Arm& x) {
  const auto& u = set.span_basis();
  return u ? Eigen::VectorXd(u->transpose() * x) : x;
}

Eigen::VectorXd lift_of(const ArmSet& set, const Eigen::VectorXd& z) {
  const auto& u = set.span_basis();
  return u ? Eigen::VectorXd(*u * z) : z;
}

// Pulls a rounded allocation and returns the least-squares estimate in
// ambient coordinates (lifted from span coordinates).
Eigen::VectorXd pull_and_fit(const ArmSet& set, const FixedDesign& fixed, EnvView env) {
  const auto r = static_cast<Eigen::Index>(set.intrinsic_dimension());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(r, r);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
  for (std::size_t i = 0; i < fixed.support.size(); ++i) {
    if (fixed.counts[i] == 0) continue;
    const Eigen::VectorXd z = frame_of(set, fixed.support[i]);
    const double ysum = env.pull_sum(fixed.support[i], fixed.counts[i]);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z, static_cast<double>(fixed.counts[i]));
    rhs += ysum * z;
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw Error(ErrorCode::Singular, "least-squares Gram matrix is singular");
  }
  return lift_of(set, ldlt.solve(rhs));
}

std::uint64_t floor_budget(const ArmSet& set) {
  return kRoundingFloorFactor * set.intrinsic_dimension();
}

}  // namespace

DesignTriple design_triple(const ArmSet& set, const FixedDesignOptions& options) {
  DesignTriple t;
  t.lambda2 = g_optimal(set, options.g_iters, options.g_tol).design;
  t.lambda1 = width_design(set, options.width, &t.lambda2).design;
  t.lambda0 = reduce_support(set, mix({t.lambda1, t.lambda2}, {0.5, 0.5}));
  return t;
}

FixedDesignPlan plan_fixed_design(const ArmSet& set, double eps, double delta,
                                  const FixedDesignOptions& options) {
  check_eps_delta(eps, delta);
  FixedDesignPlan plan;
  auto triple = design_triple(set, options);
  plan.lambda1 = std::move(triple.lambda1);
  plan.lambda2 = std::move(triple.lambda2);
  plan.lambda0 = std::move(triple.lambda0);
  plan.width = estimate_width(set, plan.lambda1, options.width_draws, stable_mix(options.seed, 1));
  plan.width_ucb = plan.width.upper(2.0);

  const auto r = static_cast<double>(set.intrinsic_dimension());
  const double formula = options.budget_constant *
                         (r * std::log(1.0 / delta) + plan.width_ucb * plan.width_ucb) / (eps * eps);
  plan.formula_budget = budget_ceil(formula * options.budget_scale);
  std::uint64_t budget = plan.formula_budget;
  if (options.budget_override) {
    budget = *options.budget_override;
  } else if (options.enforce_rounding_floor) {
    budget = std::max(budget, floor_budget(set));
  }
  budget = std::max<std::uint64_t>(budget, plan.lambda0.size());

  RoundingOptions ro;
  ro.enforce_floor = options.enforce_rounding_floor;
  ro.delta = delta;
  ro.quality_draws = options.quality_draws;
  ro.seed = stable_mix(options.seed, 2);
  plan.fixed = round_design(set, plan.lambda0, budget, ro);
  return plan;
}

BaiResult run_fixed_design(const ArmSet& set, const FixedDesignPlan& plan, EnvView env) {
  if (env.dimension() != set.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "environment and set differ in dimension");
  }
  const auto before = env.pulls();
  BaiResult out;
  out.theta_hat = pull_and_fit(set, plan.fixed, env);
  out.chosen = set.linear_argmax(out.theta_hat);
  out.samples = env.pulls() - before;
  out.diagnostics["width"] = plan.width.mean;
  out.diagnostics["width_stderr"] = plan.width.std_error;
  out.diagnostics["formula_budget"] = static_cast<double>(plan.formula_budget);
  out.diagnostics["budget"] = static_cast<double>(plan.fixed.budget);
  out.diagnostics["leverage_ratio"] = plan.fixed.quality.leverage_ratio;
  return out;
}

BaiResult fixed_design_bai(const ArmSet& set, double eps, double delta, EnvView env,
                           const FixedDesignOptions& options) {
  return run_fixed_design(set, plan_fixed_design(set, eps, delta, options), env);
}

MedianEliminationResult median_elimination(const std::vector<Arm>& arms, double eps, double delta,
                                           EnvView env, const MedianEliminationOptions& options) {
  if (arms.empty()) throw Error(ErrorCode::InvalidArgument, "median elimination needs at least one arm");
  check_eps_delta(std::min(eps, 1.0), delta);
  const auto before = env.pulls();
  std::vector<std::size_t> alive(arms.size());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  double eps_l = eps / 4.0;
  double delta_l = delta / 2.0;
  MedianEliminationResult out;
  while (alive.size() > 1) {
    const double half = eps_l / 2.0;
    const auto pulls = std::max<std::uint64_t>(
        1, budget_ceil(options.budget_scale * options.pull_constant / (half * half) *
                       std::log(3.0 / delta_l)));
    std::vector<double> mean(alive.size());
    for (std::size_t i = 0; i < alive.size(); ++i) {
      mean[i] = env.pull_sum(arms[alive[i]], pulls) / static_cast<double>(pulls);
    }
    std::vector<std::size_t> order(alive.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
    const std::size_t keep = (alive.size() + 1) / 2;
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < keep; ++i) next.push_back(alive[order[i]]);
    std::sort(next.begin(), next.end());
    alive = std::move(next);
    eps_l *= 0.75;
    delta_l /= 2.0;
    ++out.rounds;
  }
  out.index = alive.front();
  out.samples = env.pulls() - before;
  return out;
}

Partition make_partition(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "partition needs d >= 1");
  if (n < d) {
    throw Error(ErrorCode::TooFewArms,
                std::to_string(n) + " arms cannot fill " + std::to_string(d) + " regions", n);
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  const std::size_t size = n / d;
  Partition p;
  for (std::size_t i = 0; i < d; ++i) {
    const auto begin = idx.begin() + static_cast<std::ptrdiff_t>(i * size);
    const auto end = i + 1 == d ? idx.end() : begin + static_cast<std::ptrdiff_t>(size);
    p.regions.emplace_back(begin, end);
  }
  return p;
}

PartitionedWidth estimate_partitioned_width(const std::vector<Arm>& arms, const Partition& partition,
                                            const Eigen::MatrixXd& a, std::size_t draws,
                                            std::uint64_t seed) {
  if (arms.empty() || draws == 0) throw Error(ErrorCode::InvalidArgument, "need arms and draws");
  const auto d = arms.front().size();
  Eigen::MatrixXd z(static_cast<Eigen::Index>(arms.size()), d);
  for (std::size_t i = 0; i < arms.size(); ++i) z.row(static_cast<Eigen::Index>(i)) = arms[i].transpose();
  const Eigen::MatrixXd zb = z * inv_sqrt_psd(a);

  const std::size_t nreg = partition.regions.size();
  std::vector<double> mean(nreg + 1, 0.0);
  std::vector<double> m2(nreg + 1, 0.0);
  Rng rng(seed);
  Eigen::VectorXd eta(d);
  for (std::size_t t = 1; t <= draws; ++t) {
    for (auto& e : eta) e = rng.gaussian();
    const Eigen::VectorXd p = zb * eta;
    auto update = [&](std::size_t slot, double v) {
      const double delta = v - mean[slot];
      mean[slot] += delta / static_cast<double>(t);
      m2[slot] += delta * (v - mean[slot]);
    };
    for (std::size_t i = 0; i < nreg; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (auto k : partition.regions[i]) best = std::max(best, p[static_cast<Eigen::Index>(k)]);
      update(i, best);
    }
    update(nreg, p.maxCoeff());
  }
  auto estimate = [&](std::size_t slot) {
    WidthEstimate w;
    w.mean = mean[slot];
    w.draws = draws;
    w.std_error = draws > 1 ? std::sqrt(m2[slot] / static_cast<double>(draws - 1) / static_cast<double>(draws)) : 0.0;
    return w;
  };
  PartitionedWidth out;
  out.region = static_cast<std::size_t>(std::max_element(mean.begin(), mean.begin() + static_cast<std::ptrdiff_t>(nreg)) -
                                        mean.begin());
  out.partitioned = estimate(out.region);
  out.full = estimate(nreg);
  return out;
}

PartitionedPlan plan_partitioned(const ArmSet& set, double eps, double delta,
                                 const PartitionedOptions& options) {
  check_eps_delta(eps, delta);
  PartitionedPlan plan;
  plan.arms = set.enumerate();
  const std::size_t d = set.intrinsic_dimension();
  plan.partition = make_partition(plan.arms.size(), d, options.partition_seed);
  const auto triple = design_triple(set, options.design);
  plan.width = estimate_partitioned_width(plan.arms, plan.partition, moment_matrix(triple.lambda1),
                                          options.design.width_draws, stable_mix(options.design.seed, 1));
  plan.width_ucb = plan.width.partitioned.upper(2.0);
  const double formula = options.budget_constant *
                         (static_cast<double>(d) * std::log(4.0 / delta) + plan.width_ucb * plan.width_ucb) /
                         (eps * eps);
  plan.formula_budget = budget_ceil(formula * options.design.budget_scale);
  std::uint64_t budget = options.design.budget_override.value_or(plan.formula_budget);
  if (!options.design.budget_override && options.design.enforce_rounding_floor) {
    budget = std::max(budget, floor_budget(set));
  }
  budget = std::max<std::uint64_t>(budget, triple.lambda0.size());
  RoundingOptions ro;
  ro.enforce_floor = options.design.enforce_rounding_floor;
  ro.delta = delta;
  ro.quality_draws = options.design.quality_draws;
  ro.seed = stable_mix(options.design.seed, 2);
  plan.fixed = round_design(set, triple.lambda0, budget, ro);
  return plan;
}

BaiResult run_partitioned(const ArmSet& set, const PartitionedPlan& plan, double eps, double delta,
                          EnvView env, const PartitionedOptions& options) {
  const auto before = env.pulls();
  BaiResult out;
  out.theta_hat = pull_and_fit(set, plan.fixed, env);
  const auto phase1 = env.pulls() - before;
  std::vector<Arm> candidates;
  std::vector<std::size_t> candidate_index;
  for (const auto& region : plan.partition.regions) {
    std::size_t best = region.front();
    double best_val = plan.arms[best].dot(out.theta_hat);
    for (auto k : region) {
      const double v = plan.arms[k].dot(out.theta_hat);
      if (v > best_val || (v == best_val && k < best)) {
        best_val = v;
        best = k;
      }
    }
    candidates.push_back(plan.arms[best]);
    candidate_index.push_back(best);
  }
  const auto me = median_elimination(candidates, eps / 2.0, delta / 2.0, env, options.elimination);
  out.chosen = candidates[me.index];
  out.samples = env.pulls() - before;
  out.diagnostics["partitioned_width"] = plan.width.partitioned.mean;
  out.diagnostics["full_width"] = plan.width.full.mean;
  out.diagnostics["phase1_samples"] = static_cast<double>(phase1);
  out.diagnostics["phase2_samples"] = static_cast<double>(me.samples);
  out.diagnostics["elimination_rounds"] = static_cast<double>(me.rounds);
  out.diagnostics["chosen_index"] = static_cast<double>(candidate_index[me.index]);
  return out;
}

BaiResult partitioned_adaptive_bai(const ArmSet& set, double eps, double delta, EnvView env,
                                   const PartitionedOptions& options) {
  return run_partitioned(set, plan_partitioned(set, eps, delta, options), eps, delta, env, options);
}

BaiResult union_ball_adaptive_bai(const ArmSet& set, double eps, double delta, EnvView env,
                                  const UnionBallOptions& options) {
  const auto* u = std::get_if<sets::UnionOfBalls>(&set.kind());
  if (!u) throw Error(ErrorCode::InvalidArgument, "union_ball_adaptive_bai needs a union of balls");
  check_eps_delta(eps, delta);
  if (env.dimension() != set.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "environment and set differ in dimension");
  }
  const auto before = env.pulls();
  Rng rng(options.seed);
  BaiResult out;
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t j = 0; j < u->k; ++j) {
    const auto report = estimate_norm(env.block(j * u->d, u->d), eps / 4.0,
                                      delta / (2.0 * static_cast<double>(u->k)), options.consts, rng);
    out.diagnostics["block_norm_" + std::to_string(j)] = report.r_hat;
    if (report.r_hat > best_norm) {
      best_norm = report.r_hat;
      best = j;
    }
  }
  const auto phase1 = env.pulls() - before;

  const ArmSet ball = ArmSet::ball(u->d);
  std::optional<FixedDesignPlan> local;
  const FixedDesignPlan* plan = options.phase2_plan;
  if (!plan) {
    local = plan_fixed_design(ball, eps / 2.0, delta / 2.0, options.phase2);
    plan = &*local;
  }
  const auto inner = run_fixed_design(ball, *plan, env.block(best * u->d, u->d));
  out.chosen = Arm::Zero(static_cast<Eigen::Index>(set.dimension()));
  out.chosen.segment(static_cast<Eigen::Index>(best * u->d), static_cast<Eigen::Index>(u->d)) = inner.chosen;
  out.samples = env.pulls() - before;
  out.diagnostics["chosen_block"] = static_cast<double>(best);
  out.diagnostics["phase1_samples"] = static_cast<double>(phase1);
  out.diagnostics["phase2_samples"] = static_cast<double>(inner.samples);
  return out;
}

WidthEstimate bayes_regret_floor(const ArmSet& set, const Eigen::MatrixXd& a, std::size_t draws,
                                 std::uint64_t seed) {
  auto w = estimate_width(set, a, draws, seed);
  w.mean *= kBayesFloorConstant;
  w.std_error *= kBayesFloorConstant;
  return w;
}

Eigen::VectorXd sample_gaussian_prior(const Eigen::MatrixXd& a, double tau, Rng& rng) {
  const Eigen::MatrixXd b = inv_sqrt_psd(a);
  Eigen::VectorXd g(a.rows());
  for (auto& e : g) e = rng.gaussian();
  return tau * (b * g);
}

BaiResult uniform_baseline_bai(const ArmSet& set, std::uint64_t budget, EnvView env, Rng& rng) {
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "uniform baseline needs a positive budget");
  const auto before = env.pulls();
  const auto r = static_cast<Eigen::Index>(set.intrinsic_dimension());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(budget), r);
  Eigen::VectorXd y(static_cast<Eigen::Index>(budget));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Arm arm = set.sample_member(rng);
    x.row(t) = frame_of(set, arm).transpose();
    y[t] = env.pull(arm);
  }
  BaiResult out;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  out.theta_hat = lift_of(set, cod.solve(y));
  out.chosen = set.linear_argmax(out.theta_hat);
  out.samples = env.pulls() - before;
  return out;
}

}  // namespace linbai
