#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "linbai/arm_sets.hpp"
#include "linbai/bandit_env.hpp"
#include "linbai/error.hpp"
#include "linbai/harness.hpp"
#include "linbai/pure_exploration.hpp"

using namespace linbai;

namespace {

std::vector<Arm> canonical(std::size_t d) {
  std::vector<Arm> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(Arm::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)));
  return out;
}

double success_rate(const ArmSet& set, const FixedDesignPlan& plan, const Eigen::VectorXd& theta, double eps,
                    int trials, std::uint64_t seed) {
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    Environment env(theta, stable_mix(seed, static_cast<std::uint64_t>(t)));
    const auto res = run_fixed_design(set, plan, env);
    ok += Referee(env, set).is_eps_best(res.chosen, eps) ? 1 : 0;
  }
  return static_cast<double>(ok) / trials;
}

}  // namespace

TEST_CASE("fixed-design budget follows the formula") {
  const auto set = ArmSet::finite(canonical(2));
  const auto plan = plan_fixed_design(set, 0.3, 0.1);
  const double w = plan.width_ucb;
  CHECK(w == doctest::Approx(plan.width.mean + 2.0 * plan.width.std_error));
  const double expect = 360.0 * (2.0 * std::log(10.0) + w * w) / (0.3 * 0.3);
  CHECK(plan.formula_budget == static_cast<std::uint64_t>(std::ceil(expect)));
  CHECK(plan.fixed.budget == plan.formula_budget);

  FixedDesignOptions scaled;
  scaled.budget_scale = 0.5;
  CHECK(plan_fixed_design(set, 0.3, 0.1, scaled).fixed.budget ==
        static_cast<std::uint64_t>(std::ceil(0.5 * expect)));
}

TEST_CASE("fixed design pulls exactly T and returns a member of the set") {
  const auto set = ArmSet::ball(4);
  FixedDesignOptions o;
  o.budget_override = 800;
  Environment env(0.8 * Eigen::VectorXd::Unit(4, 0), 1);
  const auto res = fixed_design_bai(set, 0.4, 0.1, env, o);
  CHECK(res.samples == 800);
  CHECK(env.pulls() == 800);
  CHECK(set.contains(res.chosen, 1e-9));
  o.budget_override = 100;
  CHECK_THROWS_AS(fixed_design_bai(set, 0.4, 0.1, env, o), Error);
}

TEST_CASE("least-squares estimate solves the normal equations") {
  const auto set = ArmSet::multitask({2, 3});
  FixedDesignOptions o;
  o.budget_override = 1000;
  const auto plan = plan_fixed_design(set, 0.3, 0.1, o);
  Eigen::VectorXd theta(5);
  theta << 0.3, -0.2, 0.1, 0.5, -0.4;
  Environment env(theta, 9);
  env.enable_log(1000);
  const auto res = run_fixed_design(set, plan, env);
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(5, 5);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(5);
  for (const auto& e : env.log()) {
    xtx += static_cast<double>(e.count) * e.x * e.x.transpose();
    xty += e.reward_sum * e.x;
  }
  REQUIRE(res.theta_hat.size() == 5);
  CHECK((xtx * res.theta_hat - xty).norm() <= 1e-8 * xty.norm());
  CHECK(set.contains(res.chosen));
}

TEST_CASE("fixed design is PAC on small instances") {
  {
    const auto set = ArmSet::finite(canonical(2));
    const auto plan = plan_fixed_design(set, 0.3, 0.1);
    CHECK(success_rate(set, plan, Eigen::Vector2d(0.5, 0), 0.3, 200, 1) >= 0.9);
  }
  {
    const auto set = ArmSet::ball(4);
    const auto plan = plan_fixed_design(set, 0.4, 0.1);
    CHECK(success_rate(set, plan, 0.8 * Eigen::VectorXd::Unit(4, 0), 0.4, 200, 2) >= 0.9);
  }
}

TEST_CASE("median elimination") {
  SUBCASE("single arm returns without pulling") {
    Environment env(Eigen::Vector2d(1, 0), 0);
    const auto r = median_elimination({Eigen::Vector2d(1, 0)}, 0.1, 0.1, env);
    CHECK(r.index == 0);
    CHECK(r.samples == 0);
    CHECK(r.rounds == 0);
    CHECK(env.pulls() == 0);
  }
  SUBCASE("two arms separated by one") {
    int ok = 0;
    for (int t = 0; t < 200; ++t) {
      Environment env(Eigen::Vector2d(0, 1), stable_mix(5, static_cast<std::uint64_t>(t)));
      const auto r = median_elimination({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)}, 0.1, 0.1, env);
      ok += r.index == 1 ? 1 : 0;
      CHECK(r.samples == env.pulls());
    }
    CHECK(ok >= 180);
  }
  SUBCASE("round count is ceil(log2 n)") {
    for (std::size_t n : {2, 3, 5, 8, 9, 16}) {
      std::vector<Arm> arms(n, Eigen::Vector2d(1, 0));
      Environment env(Eigen::Vector2d(0, 0), 3);
      const auto r = median_elimination(arms, 0.5, 0.1, env);
      CHECK(r.rounds == static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))));
      CHECK(r.index < n);
    }
  }
  SUBCASE("first-round pull count") {
    Environment env(Eigen::Vector2d(0, 0), 3);
    const auto r = median_elimination({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)}, 0.4, 0.1, env);
    const auto per_arm = static_cast<std::uint64_t>(std::ceil(4.0 / (0.05 * 0.05) * std::log(3.0 / 0.05)));
    CHECK(r.samples == 2 * per_arm);
  }
}

TEST_CASE("make_partition") {
  const auto p = make_partition(8, 4, 1);
  REQUIRE(p.regions.size() == 4);
  for (const auto& r : p.regions) CHECK(r.size() == 2);
  const auto q = make_partition(9, 4, 1);
  CHECK(q.regions[0].size() == 2);
  CHECK(q.regions[3].size() == 3);
  std::set<std::size_t> seen;
  for (const auto& r : q.regions) seen.insert(r.begin(), r.end());
  CHECK(seen.size() == 9);
  CHECK(make_partition(9, 4, 1).regions == q.regions);
  CHECK(make_partition(9, 4, 2).regions != q.regions);
  try {
    (void)make_partition(3, 4, 0);
    FAIL("expected TooFewArms");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewArms);
  }
}

TEST_CASE("partitioned width never exceeds the full width on shared draws") {
  Rng rng(3);
  std::vector<Arm> arms;
  for (int i = 0; i < 40; ++i) {
    Arm x(4);
    for (auto& v : x) v = rng.gaussian();
    arms.push_back(x);
  }
  const auto set = ArmSet::finite(arms);
  const auto l2 = g_optimal(set).design;
  const auto w = estimate_partitioned_width(arms, make_partition(40, 4, 1), moment_matrix(l2), 5000, 2);
  CHECK(w.partitioned.mean <= w.full.mean + 1e-12);
  CHECK(w.region < 4);
}

TEST_CASE("partitioned adaptive algorithm") {
  Rng rng(10);
  std::vector<Arm> arms;
  for (int i = 0; i < 64; ++i) {
    Arm x(4);
    for (auto& v : x) v = rng.gaussian();
    arms.push_back(x.normalized());
  }
  const auto set = ArmSet::finite(arms);
  const double eps = 0.3;
  PartitionedOptions o;
  o.partition_seed = 5;
  const auto plan = plan_partitioned(set, eps, 0.1, o);
  const double expect = 1440.0 * (4.0 * std::log(40.0) + plan.width_ucb * plan.width_ucb) / (eps * eps);
  CHECK(plan.formula_budget == static_cast<std::uint64_t>(std::ceil(expect)));
  int ok = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    Environment env(arms[static_cast<std::size_t>(t) % 64], stable_mix(17, static_cast<std::uint64_t>(t)));
    const auto res = run_partitioned(set, plan, eps, 0.1, env, o);
    ok += Referee(env, set).is_eps_best(res.chosen, eps) ? 1 : 0;
    CHECK(res.samples == env.pulls());
    CHECK(res.samples > plan.fixed.budget);
  }
  CHECK(ok >= 0.9 * trials);
}

TEST_CASE("partitioned algorithm with singleton regions") {
  const auto arms = canonical(3);
  const auto set = ArmSet::finite(arms);
  const auto plan = plan_partitioned(set, 0.5, 0.1);
  for (const auto& r : plan.partition.regions) CHECK(r.size() == 1);
  Environment env(Eigen::Vector3d(0, 1, 0), 2);
  const auto res = run_partitioned(set, plan, 0.5, 0.1, env);
  CHECK(Referee(env, set).is_eps_best(res.chosen, 0.5));
}

TEST_CASE("union-of-balls adaptive algorithm") {
  const auto set = ArmSet::union_of_balls(4, 4);
  const double eps = 0.4;
  UnionBallOptions o;
  const auto phase2 = plan_fixed_design(ArmSet::ball(4), eps / 2.0, 0.05);
  o.phase2_plan = &phase2;
  int ok = 0;
  int block = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(16);
    theta.segment(8, 4) = norm_instance(4, 1.0, static_cast<std::uint64_t>(t));
    Environment env(theta, stable_mix(41, static_cast<std::uint64_t>(t)));
    o.seed = stable_mix(42, static_cast<std::uint64_t>(t));
    const auto res = union_ball_adaptive_bai(set, eps, 0.1, env, o);
    ok += Referee(env, set).is_eps_best(res.chosen, eps) ? 1 : 0;
    block += res.diagnostics.at("chosen_block") == 2.0 ? 1 : 0;
    CHECK(set.contains(res.chosen));
    CHECK(res.samples == env.pulls());
    CHECK(res.diagnostics.at("phase1_samples") + res.diagnostics.at("phase2_samples") ==
          static_cast<double>(res.samples));
  }
  CHECK(ok >= 0.9 * trials);
  CHECK(block >= 0.9 * trials);

  Environment zero(Eigen::VectorXd::Zero(16), 1);
  const auto res = union_ball_adaptive_bai(set, eps, 0.1, zero, o);
  CHECK(Referee(zero, set).is_eps_best(res.chosen, 0.0));
}

TEST_CASE("Bayes floor") {
  const double tau = std::numbers::sqrt2 - 1.0;
  CHECK(kBayesFloorConstant == doctest::Approx(tau * (1.0 - tau) / (1.0 + tau * tau)).epsilon(1e-15));
  CHECK(kBayesFloorConstant == doctest::Approx((std::numbers::sqrt2 - 1) * (2 - std::numbers::sqrt2) / (4 - 2 * std::numbers::sqrt2)));
  const auto c2 = bayes_regret_floor(ArmSet::finite(canonical(2)), Eigen::MatrixXd::Identity(2, 2) / 2.0, 100000, 1);
  CHECK(std::fabs(c2.mean - kBayesFloorConstant * std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * c2.std_error);
  const auto b4 = bayes_regret_floor(ArmSet::ball(4), Eigen::MatrixXd::Identity(4, 4), 100000, 1);
  CHECK(std::fabs(b4.mean - kBayesFloorConstant * 3.0 * std::sqrt(2.0 * std::numbers::pi) / 4.0) <= 3.0 * b4.std_error);
}

TEST_CASE("Gaussian prior sampling") {
  Rng rng(6);
  const Eigen::MatrixXd a = Eigen::Vector2d(4, 1).asDiagonal();
  const int n = 100000;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd t = sample_gaussian_prior(a, 1.0, rng);
    cov += t * t.transpose();
  }
  cov /= n;
  CHECK(std::fabs(cov(0, 0) - 0.25) <= 4.0 * 0.25 * std::sqrt(2.0 / n));
  CHECK(std::fabs(cov(1, 1) - 1.0) <= 4.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(cov(0, 1)) <= 4.0 * 0.5 / std::sqrt(n));
  CHECK(sample_gaussian_prior(a, 0.0, rng).norm() == 0.0);
}

TEST_CASE("uniform baseline spends its budget") {
  const auto set = ArmSet::multitask({3, 3});
  Environment env(Eigen::VectorXd::Unit(6, 0), 4);
  Rng rng(5);
  const auto res = uniform_baseline_bai(set, 50, env, rng);
  CHECK(res.samples == 50);
  CHECK(env.pulls() == 50);
  CHECK(set.contains(res.chosen));
}
