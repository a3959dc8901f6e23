#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "linbai/arm_sets.hpp"
#include "linbai/error.hpp"
#include "linbai/rng.hpp"

using namespace linbai;

namespace {

Arm vec(std::initializer_list<double> v) {
  Arm a(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) a[i++] = x;
  return a;
}

bool same(const Arm& a, const Arm& b) { return a.size() == b.size() && (a - b).norm() <= 1e-12; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

std::vector<ArmSet> every_kind() {
  Rng rng(5);
  std::vector<Arm> pts;
  for (int i = 0; i < 12; ++i) {
    Arm x(3);
    for (auto& v : x) v = rng.gaussian();
    pts.push_back(x);
  }
  return {ArmSet::finite(pts),      ArmSet::ball(4),       ArmSet::cube_pm(5),
          ArmSet::cube_01(5),       ArmSet::mset(6, 2),    ArmSet::multitask({2, 3, 2}),
          ArmSet::union_of_balls(3, 2)};
}

}  // namespace

TEST_CASE("ambient dimension per kind") {
  CHECK(ArmSet::ball(5).dimension() == 5);
  CHECK(ArmSet::union_of_balls(3, 4).dimension() == 12);
  CHECK(ArmSet::multitask({2, 3}).dimension() == 5);
  CHECK(ArmSet::multitask({2, 3}).intrinsic_dimension() == 4);
}

TEST_CASE("linear_argmax closed forms") {
  CHECK(same(ArmSet::mset(4, 2).linear_argmax(vec({5, 1, 3, 2})), vec({1, 0, 1, 0})));
  CHECK(same(ArmSet::ball(2).linear_argmax(vec({3, 4})), vec({0.6, 0.8})));
  CHECK(same(ArmSet::cube_pm(2).linear_argmax(vec({-2, 1})), vec({-1, 1})));
  CHECK(same(ArmSet::multitask({2, 2}).linear_argmax(vec({1, 3, 2, 0})), vec({0, 1, 1, 0})));
  CHECK(same(ArmSet::cube_01(3).linear_argmax(vec({0.5, -1, 0})), vec({1, 0, 0})));
  CHECK(same(ArmSet::ball(3).linear_argmax(vec({0, 0, 0})), vec({0, 0, 0})));
  CHECK(same(ArmSet::union_of_balls(2, 2).linear_argmax(vec({1, 0, 0, -3})), vec({0, 0, 0, -1})));
}

TEST_CASE("linear_argmax ties go to the lowest index") {
  CHECK(same(ArmSet::mset(4, 1).linear_argmax(vec({2, 2, 2, 2})), vec({1, 0, 0, 0})));
  CHECK(same(ArmSet::union_of_balls(2, 1).linear_argmax(vec({1, -1})), vec({1, 0})));
  CHECK(same(ArmSet::finite({vec({1, 0}), vec({1, 0.0})}).linear_argmax(vec({1, 0})), vec({1, 0})));
}

TEST_CASE("linear_argmax dominates random members and stays inside the set") {
  Rng rng(17);
  for (const auto& set : every_kind()) {
    CAPTURE(set.spec());
    const auto d = static_cast<Eigen::Index>(set.dimension());
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd v(d);
      for (auto& e : v) e = rng.gaussian();
      const Arm best = set.linear_argmax(v);
      REQUIRE(set.contains(best, 1e-9));
      CHECK(set.support(v) == doctest::Approx(best.dot(v)).epsilon(1e-12));
      if (t % 10 == 0) {
        for (int s = 0; s < 100; ++s) {
          const Arm x = set.sample_member(rng);
          REQUIRE(set.contains(x, 1e-9));
          REQUIRE(best.dot(v) >= x.dot(v) - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("contains") {
  CHECK(ArmSet::ball(3).contains(vec({1, 0, 0}), 1e-9));
  CHECK_FALSE(ArmSet::ball(3).contains(vec({1, 1e-3, 0}), 1e-9));
  CHECK_FALSE(ArmSet::mset(4, 2).contains(vec({1, 1, 1, 0})));
  CHECK_FALSE(ArmSet::cube_01(2).contains(vec({0.5, 0})));
  CHECK(ArmSet::multitask({2, 3}).contains(vec({0, 1, 0, 0, 1})));
  CHECK_FALSE(ArmSet::multitask({2, 3}).contains(vec({1, 1, 0, 0, 1})));
  CHECK_FALSE(ArmSet::union_of_balls(2, 2).contains(vec({0.5, 0, 0.5, 0})));
  CHECK(code_of([] { (void)ArmSet::ball(3).contains(vec({1, 0})); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("enumerate in lexicographic order") {
  const auto c = ArmSet::cube_01(2).enumerate(10);
  REQUIRE(c.size() == 4);
  CHECK(same(c[0], vec({0, 0})));
  CHECK(same(c[1], vec({0, 1})));
  CHECK(same(c[2], vec({1, 0})));
  CHECK(same(c[3], vec({1, 1})));

  const auto m = ArmSet::mset(3, 1).enumerate(10);
  REQUIRE(m.size() == 3);
  CHECK(same(m[0], vec({0, 0, 1})));
  CHECK(same(m[1], vec({0, 1, 0})));
  CHECK(same(m[2], vec({1, 0, 0})));

  const auto pm = ArmSet::cube_pm(2).enumerate(10);
  CHECK(same(pm.front(), vec({-1, -1})));
  CHECK(same(pm.back(), vec({1, 1})));
}

TEST_CASE("enumerate counts and distinctness") {
  const auto m = ArmSet::mset(7, 3).enumerate();
  CHECK(m.size() == 35);
  const auto t = ArmSet::multitask({2, 3, 4}).enumerate();
  CHECK(t.size() == 24);
  std::set<std::vector<double>> uniq;
  for (const auto& x : t) uniq.insert(std::vector<double>(x.data(), x.data() + x.size()));
  CHECK(uniq.size() == 24);
  CHECK(ArmSet::mset(7, 3).cardinality().value() == 35);
  CHECK_FALSE(ArmSet::ball(2).cardinality().has_value());
}

TEST_CASE("enumerate errors") {
  CHECK(code_of([] { (void)ArmSet::ball(2).enumerate(10); }) == ErrorCode::NotEnumerable);
  CHECK(code_of([] { (void)ArmSet::union_of_balls(2, 2).enumerate(10); }) == ErrorCode::NotEnumerable);
  try {
    (void)ArmSet::cube_pm(5).enumerate(10);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
    CHECK(e.detail() == 32);
  }
}

TEST_CASE("block_of") {
  const auto u = ArmSet::union_of_balls(3, 2);
  CHECK(u.block_of(vec({0, 0, 0.5, 0.5, 0, 0}).normalized()) == 1);
  CHECK(u.block_of(vec({0, 0, 0, 0, 0, 0})) == 0);
  CHECK(code_of([&] { (void)u.block_of(vec({1, 0, 1, 0, 0, 0}) / std::sqrt(2.0)); }) == ErrorCode::MixedSupport);
}

TEST_CASE("construction errors") {
  CHECK(code_of([] { (void)ArmSet::mset(3, 4); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { (void)ArmSet::multitask({2, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { (void)ArmSet::finite({}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { (void)ArmSet::finite({vec({1, 0}), vec({1})}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("set spec grammar round-trips") {
  for (const char* s : {"ball:3", "cube_pm:4", "cube_01:2", "mset:5:2", "multitask:2,3,4", "unionballs:3:2"}) {
    CHECK(parse_set_spec(s).spec() == s);
  }
  CHECK(code_of([] { (void)parse_set_spec("sphere:3"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { (void)parse_set_spec("mset:3"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { (void)parse_set_spec("ball:x"); }) == ErrorCode::ConfigError);
}

TEST_CASE("finite sets load from CSV with an optional header") {
  const auto path = std::filesystem::temp_directory_path() / "linbai_arms_test.csv";
  {
    std::ofstream f(path);
    f << "x,y\n1,0\n0,1\n0.5,0.5\n";
  }
  const ArmSet set = parse_set_spec("finite:" + path.string());
  CHECK(set.dimension() == 2);
  CHECK(set.cardinality().value() == 3);
  std::filesystem::remove(path);
  CHECK(code_of([] { (void)load_arms_csv("/nonexistent/arms.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("helmert block is orthonormal and orthogonal to the ones vector") {
  for (std::size_t n : {2, 3, 7}) {
    const Eigen::MatrixXd h = helmert(n);
    CHECK((h.transpose() * h - Eigen::MatrixXd::Identity(n - 1, n - 1)).norm() < 1e-12);
    CHECK((h.transpose() * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))).norm() < 1e-12);
  }
}

TEST_CASE("multitask basis spans every arm and diagonalises the arm covariance") {
  for (const std::vector<std::size_t> dims : {std::vector<std::size_t>{2}, {2, 2}, {3, 2}, {2, 3, 4}}) {
    CAPTURE(dims.size());
    const Eigen::MatrixXd u = multitask_basis(dims);
    std::size_t total = 0;
    double s = 0.0;
    for (auto d : dims) {
      total += d;
      s += 1.0 / static_cast<double>(d);
    }
    const auto r = static_cast<Eigen::Index>(total - dims.size() + 1);
    REQUIRE(u.cols() == r);
    CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(r, r)).norm() < 1e-10);

    // Brute-force second moment of a uniformly random arm.
    const auto arms = ArmSet::multitask(dims).enumerate();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    for (const auto& x : arms) {
      sigma += x * x.transpose();
      CHECK((u * (u.transpose() * x) - x).norm() < 1e-10);
    }
    sigma /= static_cast<double>(arms.size());

    Eigen::VectorXd expect(r);
    expect[0] = s;
    Eigen::Index at = 1;
    for (auto d : dims) {
      for (std::size_t i = 1; i < d; ++i) expect[at++] = 1.0 / static_cast<double>(d);
    }
    const Eigen::MatrixXd sr = u.transpose() * sigma * u;
    CHECK((sr - Eigen::MatrixXd(expect.asDiagonal())).norm() < 1e-10);
  }
}
