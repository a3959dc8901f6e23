#include <doctest.h>

#include <cmath>
#include <numbers>

#include "linbai/arm_sets.hpp"
#include "linbai/designs.hpp"
#include "linbai/error.hpp"
#include "linbai/rng.hpp"

using namespace linbai;

namespace {

std::vector<Arm> canonical(std::size_t d) {
  std::vector<Arm> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(Arm::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)));
  return out;
}

std::vector<Arm> gaussian_arms(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Arm> out;
  for (std::size_t i = 0; i < n; ++i) {
    Arm x(static_cast<Eigen::Index>(d));
    for (auto& v : x) v = rng.gaussian();
    out.push_back(x);
  }
  return out;
}

Design uniform_on(const std::vector<Arm>& arms) {
  Design d;
  d.support = arms;
  d.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(arms.size()), 1.0 / static_cast<double>(arms.size()));
  return d;
}

double leverage_brute(const std::vector<Arm>& arms, const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd ainv = a.inverse();
  double m = 0.0;
  for (const auto& x : arms) m = std::max(m, x.dot(ainv * x));
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

// E max of two iid standard normals is 1/sqrt(pi); A = I/2 scales by sqrt 2.
const double kCanonical2Width = std::sqrt(2.0 / std::numbers::pi);
// 2 E||eta_4|| with E||eta_4|| = 3 sqrt(2 pi) / 4.
const double kBall4Width = 2.0 * 3.0 * std::sqrt(2.0 * std::numbers::pi) / 4.0;

}  // namespace

TEST_CASE("inv_sqrt_psd") {
  CHECK((inv_sqrt_psd(Eigen::MatrixXd::Identity(3, 3)) - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  const Eigen::MatrixXd m = Eigen::Vector2d(4, 1).asDiagonal();
  CHECK((inv_sqrt_psd(m) - Eigen::MatrixXd(Eigen::Vector2d(0.5, 1).asDiagonal())).norm() < 1e-12);
  CHECK(code_of([] { (void)inv_sqrt_psd(Eigen::MatrixXd(Eigen::Vector2d(1, 0).asDiagonal())); }) == ErrorCode::Singular);
  CHECK(code_of([] { (void)inv_sqrt_psd(Eigen::MatrixXd(Eigen::Vector2d(1, -1).asDiagonal())); }) == ErrorCode::NotPSD);

  Rng rng(2);
  Eigen::MatrixXd b(4, 4);
  for (auto& v : b.reshaped()) v = rng.gaussian();
  const Eigen::MatrixXd s = b * b.transpose() + Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd r = inv_sqrt_psd(s);
  CHECK((r - r.transpose()).norm() < 1e-10);
  CHECK((r * s * r - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("g_optimal on canonical bases is uniform with leverage exactly d") {
  for (std::size_t d : {2, 4, 8}) {
    CAPTURE(d);
    const auto arms = canonical(d);
    const auto opt = g_optimal(ArmSet::finite(arms));
    CHECK(opt.converged);
    CHECK(opt.objective == doctest::Approx(static_cast<double>(d)).epsilon(1e-3));
    for (Eigen::Index i = 0; i < opt.design.weights.size(); ++i) {
      CHECK(opt.design.weights[i] == doctest::Approx(1.0 / static_cast<double>(d)).epsilon(1e-6));
    }
  }
}

TEST_CASE("g_optimal satisfies the Kiefer-Wolfowitz bound on random sets") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const auto arms = gaussian_arms(50, 6, rng);
    const auto opt = g_optimal(ArmSet::finite(arms));
    const double lev = leverage_brute(arms, moment_matrix(opt.design));
    CHECK(opt.converged);
    CHECK(lev <= 6.0 * (1.0 + 1e-3) + 1e-9);
    CHECK(lev >= 6.0 - 1e-9);
    CHECK(opt.design.size() <= 6 * 7 / 2 + 1);
    CHECK(opt.design.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(opt.design.weights.minCoeff() >= 0.0);
  }
}

TEST_CASE("g_optimal on a ball checked against random unit vectors") {
  const auto opt = g_optimal(ArmSet::ball(3));
  const Eigen::MatrixXd ainv = moment_matrix(opt.design).inverse();
  Rng rng(8);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector3d u(rng.gaussian(), rng.gaussian(), rng.gaussian());
    u.normalize();
    worst = std::max(worst, u.dot(ainv * u));
  }
  CHECK(worst <= 3.0 * 1.05);
}

TEST_CASE("g_optimal needs a spanning set") {
  const std::vector<Arm> arms = {Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0)};
  CHECK(code_of([&] { (void)g_optimal(ArmSet::finite(arms)); }) == ErrorCode::NotSpanning);
}

TEST_CASE("g_optimal on a multi-task set works in the span frame") {
  const auto set = ArmSet::multitask({2, 3});
  const auto opt = g_optimal(set);
  CHECK(opt.converged);
  CHECK(opt.objective <= 4.0 * (1.0 + 1e-3));
  const Eigen::MatrixXd a = frame_moment(set, opt.design);
  CHECK(a.rows() == 4);
  CHECK(max_leverage(set, a) == doctest::Approx(opt.objective).epsilon(1e-9));
}

TEST_CASE("width_design reproduces closed-form widths") {
  WidthDesignOptions o;
  o.draws = 4096;
  o.seed = 3;
  const auto c2 = width_design(ArmSet::finite(canonical(2)), o);
  CHECK(std::fabs(c2.objective / kCanonical2Width - 1.0) < 0.02);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::fabs(c2.design.weights[i] - 0.5) <= 0.05);

  const auto b4 = width_design(ArmSet::ball(4), o);
  CHECK(std::fabs(b4.objective / kBall4Width - 1.0) < 0.02);
}

TEST_CASE("width_design never worsens its warm start") {
  Rng rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    const auto set = ArmSet::finite(gaussian_arms(30, 4, rng));
    WidthDesignOptions o;
    o.seed = static_cast<std::uint64_t>(rep);
    const auto g = g_optimal(set);
    const auto w = width_design(set, o, &g.design);
    CHECK(w.objective <= w.warm_start_objective + 1e-12);
    CHECK(w.design.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mix") {
  Rng rng(4);
  const auto arms = gaussian_arms(10, 3, rng);
  const auto set = ArmSet::finite(arms);
  const Design l2 = g_optimal(set).design;
  const Design l1 = width_design(set, {}, &l2).design;

  const Design same = mix({l2}, {1.0});
  CHECK((moment_matrix(same) - moment_matrix(l2)).norm() < 1e-12);

  const Design l0 = mix({l1, l2}, {0.5, 0.5});
  const Eigen::MatrixXd lin = 0.5 * moment_matrix(l1) + 0.5 * moment_matrix(l2);
  CHECK((moment_matrix(l0) - lin).norm() < 1e-12);
  CHECK(l0.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::MatrixXd gap = moment_matrix(l0) - 0.5 * moment_matrix(l2);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gap).eigenvalues().minCoeff() >= -1e-10);

  Design a = uniform_on({arms[0], arms[1]});
  Design b = uniform_on({arms[2]});
  const Design ab = mix({a, b}, {0.3, 0.7});
  REQUIRE(ab.size() == 3);
  CHECK(ab.weights[0] == doctest::Approx(0.15));
  CHECK(ab.weights[2] == doctest::Approx(0.7));

  CHECK(code_of([&] { (void)mix({a, b}, {0.5, 0.6}); }) == ErrorCode::InvalidArgument);
  Design other = uniform_on({Eigen::Vector2d(1, 0)});
  CHECK(code_of([&] { (void)mix({a, other}, {0.5, 0.5}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("estimate_width matches closed forms") {
  const auto c2 = estimate_width(ArmSet::finite(canonical(2)), Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2) / 2.0), 100000, 1);
  CHECK(std::fabs(c2.mean - kCanonical2Width) <= 3.0 * c2.std_error);
  const auto b4 = estimate_width(ArmSet::ball(4), Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4) / 4.0), 100000, 1);
  CHECK(std::fabs(b4.mean - kBall4Width) <= 3.0 * b4.std_error);
  CHECK(b4.draws == 100000);
}

TEST_CASE("estimate_width is deterministic and scales as A^-1/2") {
  const auto set = ArmSet::finite(canonical(2));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) / 2.0;
  const auto w1 = estimate_width(set, a, 50000, 9);
  const auto w2 = estimate_width(set, a, 50000, 9);
  CHECK(w1.mean == w2.mean);
  CHECK(w1.std_error == w2.std_error);
  const auto w3 = estimate_width(set, Eigen::MatrixXd(2.0 * a), 50000, 10);
  const double se = std::hypot(w1.std_error / std::sqrt(2.0), w3.std_error);
  CHECK(std::fabs(w3.mean - w1.mean / std::sqrt(2.0)) <= 3.0 * se);
}

TEST_CASE("estimate_width on a multi-task set stays under the per-block bound") {
  const std::vector<std::size_t> dims = {2, 2, 2};
  const auto set = ArmSet::multitask(dims);
  const auto arms = set.enumerate();
  const auto w = estimate_width(set, uniform_on(arms), 20000, 5);
  double bound = 0.0;
  for (auto d : dims) bound += std::sqrt(static_cast<double>(d) * std::log(static_cast<double>(d)));
  CHECK(w.mean > 0.0);
  CHECK(w.mean <= 4.0 * bound);
}

TEST_CASE("estimate_width rejects singular designs") {
  CHECK(code_of([] {
          (void)estimate_width(ArmSet::ball(2), Eigen::MatrixXd(Eigen::Vector2d(1, 0).asDiagonal()), 100, 0);
        }) == ErrorCode::Singular);
}

TEST_CASE("tau_statistic") {
  const auto set = ArmSet::finite(canonical(2));
  const auto t = tau_statistic(set, Eigen::MatrixXd::Identity(2, 2) / 2.0, 0.1, 100000, 2);
  CHECK(t.max_leverage == doctest::Approx(2.0).epsilon(1e-12));
  const double expect = kCanonical2Width * kCanonical2Width + 2.0 * 2.0 * std::log(20.0);
  CHECK(expect == doctest::Approx(12.618).epsilon(1e-3));
  // d(w^2) = 2 w dw.
  CHECK(std::fabs(t.value - expect) <= 3.0 * 2.0 * kCanonical2Width * t.width.std_error);
  const auto near_one = tau_statistic(set, Eigen::MatrixXd::Identity(2, 2) / 2.0, 1.0 - 1e-12, 1000, 2);
  CHECK(near_one.value - near_one.width.mean * near_one.width.mean ==
        doctest::Approx(2.0 * 2.0 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("proportional_counts") {
  CHECK(proportional_counts(Eigen::Vector3d(0.5, 0.3, 0.2), 1800) == std::vector<std::uint64_t>{900, 540, 360});
  CHECK(proportional_counts(Eigen::Vector3d::Constant(1.0 / 3.0), 10) == std::vector<std::uint64_t>{4, 3, 3});
  Rng rng(12);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd w(7);
    for (auto& v : w) v = rng.uniform();
    w /= w.sum();
    const auto budget = 1 + rng.below(5000);
    const auto c = proportional_counts(w, budget);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      total += c[i];
      CHECK(std::fabs(static_cast<double>(c[i]) - static_cast<double>(budget) * w[static_cast<Eigen::Index>(i)]) < 1.0);
    }
    CHECK(total == budget);
  }
}

TEST_CASE("round_design") {
  const auto arms = canonical(3);
  const auto set = ArmSet::finite(arms);
  Design d;
  d.support = arms;
  d.weights = Eigen::Vector3d(0.5, 0.3, 0.2);
  const auto fixed = round_design(set, d, 1800);
  CHECK(fixed.counts == std::vector<std::uint64_t>{900, 540, 360});
  CHECK(fixed.budget == 1800);
  CHECK((fixed.normalized_moment - Eigen::MatrixXd(Eigen::Vector3d(0.5, 0.3, 0.2).asDiagonal())).norm() < 1e-12);
  CHECK(fixed.quality.leverage_ratio == doctest::Approx(1.0));

  Design third = uniform_on(arms);
  RoundingOptions test_mode;
  test_mode.enforce_floor = false;
  CHECK(round_design(set, third, 10, test_mode).counts == std::vector<std::uint64_t>{4, 3, 3});

  CHECK(code_of([&] { (void)round_design(set, third, 100); }) == ErrorCode::BudgetTooSmall);
  CHECK(code_of([&] { (void)round_design(set, third, 2, test_mode); }) == ErrorCode::BudgetTooSmall);
}

TEST_CASE("round_design forces one pull per atom when rounding loses rank") {
  const auto arms = canonical(2);
  Design d;
  d.support = arms;
  d.weights = Eigen::Vector2d(0.99, 0.01);
  RoundingOptions o;
  o.enforce_floor = false;
  const auto fixed = round_design(ArmSet::finite(arms), d, 10, o);
  CHECK(fixed.quality.forced_pulls);
  CHECK(fixed.counts == std::vector<std::uint64_t>{9, 1});
}

TEST_CASE("rounded designs keep tau within the doubling bound") {
  Rng rng(77);
  for (int rep = 0; rep < 5; ++rep) {
    const auto arms = gaussian_arms(20, 4, rng);
    const auto set = ArmSet::finite(arms);
    const auto l2 = g_optimal(set).design;
    const auto l1 = width_design(set, {}, &l2).design;
    const auto l0 = mix({l1, l2}, {0.5, 0.5});
    RoundingOptions o;
    o.quality_draws = 4000;
    o.seed = static_cast<std::uint64_t>(rep);
    const auto fixed = round_design(set, l0, 180 * 4, o);
    const auto w = estimate_width(set, l1, 4000, 1);
    const auto tau = tau_statistic(set, fixed.normalized_moment, 0.1, 4000, 1);
    CHECK(tau.value <= 4.0 * w.upper(3.0) * w.upper(3.0) + 8.0 * 4.0 * std::log(20.0));
    CHECK(fixed.quality.tau_ratio <= 2.0);
  }
}
