#include <doctest.h>

#include <cmath>
#include <numeric>

#include "linbai/arm_sets.hpp"
#include "linbai/error.hpp"
#include "linbai/hard_instances.hpp"

using namespace linbai;

TEST_CASE("multi-task spike sizes") {
  const auto split = multitask_eps_split({2, 2}, 0.1);
  CHECK(split[0] == doctest::Approx(0.05));
  CHECK(split[1] == doctest::Approx(0.05));
  for (const std::vector<std::size_t> dims : {std::vector<std::size_t>{2, 3, 9}, {8, 8, 8}, {5}}) {
    const auto e = multitask_eps_split(dims, 0.3);
    CHECK(std::accumulate(e.begin(), e.end(), 0.0) == doctest::Approx(0.3).epsilon(1e-14));
  }
  Rng rng(1);
  const auto s = multitask_hard({2, 2}, 0.1, rng);
  CHECK(s.optimal_value == doctest::Approx(1.0));
  CHECK(s.theta.sum() == doctest::Approx(1.0));
  CHECK((s.theta.array() == 0.5).count() == 2);
  CHECK(ArmSet::multitask({2, 2}).contains(s.planted));
}

TEST_CASE("multi-task zeroed block") {
  Rng rng(2);
  const auto s = multitask_hard({2, 3, 4}, 0.2, rng, 1);
  CHECK(s.theta.segment(2, 3).norm() == 0.0);
  CHECK(s.theta.segment(0, 2).norm() > 0.0);
  CHECK_THROWS_AS(multitask_hard({2, 3}, 0.2, rng, 2), Error);
}

TEST_CASE("m-set family") {
  Rng rng(3);
  try {
    (void)mset_hard(4, 2, 0.1, rng);
    FAIL("expected RegimeViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RegimeViolation);
  }
  CHECK_THROWS_AS(mset_hard(40, 2, 0.1, rng), Error);
  CHECK_NOTHROW(mset_hard(41, 2, 0.1, rng));
  const auto s = mset_hard(64, 3, 0.2, rng);
  CHECK(s.optimal_value == doctest::Approx(2.0));
  CHECK((s.theta.array() == 2.0 / 3.0).count() == 3);
  // An m-arm that misses one planted coordinate scores at most (m-1) Delta.
  const auto set = ArmSet::mset(64, 3);
  Arm off = s.planted;
  Eigen::Index on = 0;
  while (off[on] == 0.0) ++on;
  Eigen::Index free = 0;
  while (off[free] != 0.0) ++free;
  off[on] = 0.0;
  off[free] = 1.0;
  CHECK(set.contains(off));
  CHECK(off.dot(s.theta) <= 2.0 * 2.0 / 3.0 + 1e-12);
}

TEST_CASE("hypercube families") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto z = hypercube_hard(2, 0.1, CubeVariant::ZeroOne, rng);
    for (Eigen::Index i = 0; i < 2; ++i) CHECK(z.theta[i] == doctest::Approx(z.planted[i] == 1.0 ? 0.5 : -0.5));
    const auto p = hypercube_hard(4, 0.2, CubeVariant::PlusMinus, rng);
    for (auto v : p.theta) CHECK(std::fabs(v) == doctest::Approx(0.25));
    CHECK(p.optimal_value == doctest::Approx(1.0));
  }
}

TEST_CASE("union-of-balls family") {
  Rng rng(5);
  const double norm = unionball_hard_norm(4, 100.0, 0.1, 0.5);
  CHECK(norm == doctest::Approx(0.5 * std::sqrt(0.1) * 4.0 / 10.0));
  const auto set = ArmSet::union_of_balls(3, 4);
  for (int t = 0; t < 20; ++t) {
    const auto s = unionball_hard(3, 4, 100.0, 0.1, rng);
    CHECK(s.theta.norm() == doctest::Approx(norm).epsilon(1e-14));
    CHECK_NOTHROW((void)set.block_of(s.theta / s.theta.norm()));
  }
}

TEST_CASE("spiked optima agree with the linear maximization oracle") {
  Rng rng(6);
  for (const auto& [family, params] : std::vector<std::pair<std::string, std::string>>{
           {"multitask", "8,8,8"}, {"multitask", "2,3,5"}, {"mset", "64:3"}, {"mset", "41:2"},
           {"cube_pm", "7"},       {"cube_01", "9"},       {"unionballs", "3:4:50"}}) {
    CAPTURE(family);
    const auto fam = HardFamily::parse(family, params, 0.2);
    for (int t = 0; t < 50; ++t) {
      const auto s = fam.sample(rng);
      CHECK(std::fabs(fam.arm_set().support(s.theta) - s.optimal_value) <= 1e-12);
      CHECK(s.theta.size() == static_cast<Eigen::Index>(fam.arm_set().dimension()));
    }
  }
}

TEST_CASE("samplers are deterministic given the seed") {
  const auto fam = HardFamily::parse("multitask", "3,4", 0.1);
  Rng a(9);
  Rng b(9);
  for (int t = 0; t < 10; ++t) CHECK(fam.sample(a).theta == fam.sample(b).theta);
}

TEST_CASE("family parameter parsing") {
  CHECK_THROWS_AS(HardFamily::parse("mset", "64", 0.1), Error);
  CHECK_THROWS_AS(HardFamily::parse("cube_pm", "x", 0.1), Error);
  CHECK_THROWS_AS(HardFamily::parse("spiral", "3", 0.1), Error);
  CHECK(HardFamily::parse("cube_01", "5", 0.1).kind() == HardFamily::Kind::Hypercube01Signed);
}
