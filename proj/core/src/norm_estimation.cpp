#include "linbai/norm_estimation.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "linbai/error.hpp"

namespace linbai {

namespace {

// Ceiling that ignores floating noise just above an integer.
std::uint64_t count_ceil(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidArgument, "sample count is not a finite non-negative number");
  }
  const double c = std::ceil(x - 1e-9 * std::max(1.0, x));
  return static_cast<std::uint64_t>(std::max(c, 1.0));
}

void check_eps_delta(double eps, double delta) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0 / 3.0)) {
    throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1/3)");
  }
}

}  // namespace

void NormConsts::validate() const {
  if (!(c0 > 0.0 && c1 > 0.0 && C0 > 0.0 && C1 > 0.0)) {
    throw Error(ErrorCode::ConfigError, "norm constants must be strictly positive");
  }
}

NormConsts NormConsts::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open constants file " + path.string());
  NormConsts out;
  try {
    const auto j = nlohmann::json::parse(in);
    out.c0 = j.value("c0", out.c0);
    out.c1 = j.value("c1", out.c1);
    out.C0 = j.value("C0", out.C0);
    out.C1 = j.value("C1", out.C1);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  out.validate();
  return out;
}

std::string_view to_string(NormBranch branch) {
  switch (branch) {
    case NormBranch::Tiny: return "tiny";
    case NormBranch::Mid: return "mid";
    case NormBranch::Large: return "large";
    case NormBranch::LargeSingularFallback: return "large_singular_fallback";
  }
  return "unknown";
}

Arm rademacher_direction(std::size_t d, Rng& rng) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const double v = 1.0 / std::sqrt(static_cast<double>(d));
  Arm x(static_cast<Eigen::Index>(d));
  for (auto& e : x) e = rng.coin() ? v : -v;
  return x;
}

double rademacher_statistic(EnvView env, std::uint64_t s, std::uint64_t k, Rng& rng) {
  const auto d = static_cast<double>(env.dimension());
  const double sd = static_cast<double>(s);
  double total = 0.0;
  for (std::uint64_t i = 0; i < k; ++i) {
    const Arm x = rademacher_direction(env.dimension(), rng);
    const double ybar = env.pull_sum(x, s) / sd;
    total += d * (ybar * ybar - 1.0 / sd);
  }
  return total / static_cast<double>(k);
}

NormReport additive_estimate(EnvView env, double eps, double delta, double r0,
                             const NormConsts& consts, Rng& rng) {
  consts.validate();
  const auto d = static_cast<double>(env.dimension());
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "additive_estimate needs eps > 0 and delta in (0, 1)");
  }
  if (!(eps < r0 && r0 < 2.0 * std::sqrt(d))) {
    throw Error(ErrorCode::RegimeViolation, "additive_estimate needs eps < r0 < 2 sqrt(d), got r0 = " +
                                                std::to_string(r0));
  }
  const std::uint64_t s = count_ceil(consts.c0 * d / (r0 * r0));
  const std::uint64_t k = count_ceil(consts.c1 * r0 * r0 / (eps * eps) * std::log(4.0 / delta));
  const auto before = env.pulls();
  NormReport out;
  out.statistic = rademacher_statistic(env, s, k, rng);
  out.r_hat = out.statistic < 0.0 ? 0.0 : std::sqrt(out.statistic);
  out.r0 = r0;
  out.branch = NormBranch::Mid;
  out.samples = env.pulls() - before;
  return out;
}

MultiscaleResult multiscale_test(EnvView env, double eps, double delta, const NormConsts& consts,
                                 Rng& rng) {
  check_eps_delta(eps, delta);
  consts.validate();
  const auto d = static_cast<double>(env.dimension());
  const double cap = 2.0 * std::sqrt(d);
  const auto before = env.pulls();
  MultiscaleResult out;
  out.exhausted = true;
  for (int j = 0; std::ldexp(eps, j) < cap; ++j) {
    const double t = std::ldexp(eps, j);
    const double delta_j = std::ldexp(delta, -(j + 2));
    const std::uint64_t s = count_ceil(consts.c0 * d / (t * t));
    const std::uint64_t k = count_ceil(consts.c1 * std::log(1.0 / delta_j));
    ++out.levels;
    const double u = rademacher_statistic(env, s, k, rng);
    if (u < 1.5 * t * t) {
      out.r0 = t;
      out.stopped_at_first = j == 0;
      out.exhausted = false;
      break;
    }
  }
  if (out.exhausted) out.r0 = cap;
  out.samples = env.pulls() - before;
  return out;
}

std::uint64_t large_norm_sample_size(std::size_t d, double eps, double delta, const NormConsts& consts) {
  const auto dd = static_cast<double>(d);
  const auto gate = count_ceil(consts.C0 * (dd + std::log(2.0 / delta)));
  const auto main = count_ceil(consts.C1 * dd * std::log(4.0 / delta) / (eps * eps));
  return std::max(gate, main);
}

NormReport large_norm_estimate(EnvView env, std::uint64_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "large_norm_estimate needs n >= 1");
  const auto d = static_cast<Eigen::Index>(env.dimension());
  const auto before = env.pulls();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
  for (std::uint64_t t = 0; t < n; ++t) {
    const Arm x = rademacher_direction(env.dimension(), rng);
    const double y = env.pull(x);
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(x);
    xty += y * x;
  }
  xtx = xtx.selfadjointView<Eigen::Lower>();
  NormReport out;
  out.r0 = std::numeric_limits<double>::quiet_NaN();
  out.samples = env.pulls() - before;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xtx);
  const auto& ev = es.eigenvalues();
  if (static_cast<Eigen::Index>(n) < d || ev[d - 1] <= 0.0 || ev[0] <= 1e-12 * ev[d - 1]) {
    out.r_hat = std::sqrt(static_cast<double>(d));
    out.branch = NormBranch::LargeSingularFallback;
    out.statistic = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const Eigen::MatrixXd sigma = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::VectorXd theta_hat = sigma * xty;
  out.statistic = theta_hat.squaredNorm() - sigma.trace();
  out.r_hat = std::sqrt(std::max(out.statistic, 0.0));
  out.branch = NormBranch::Large;
  return out;
}

NormReport estimate_norm(EnvView env, double eps, double delta, const NormConsts& consts, Rng& rng) {
  check_eps_delta(eps, delta);
  const auto before = env.pulls();
  const auto coarse = multiscale_test(env, eps, delta / 2.0, consts, rng);
  NormReport out;
  if (coarse.stopped_at_first) {
    out.r_hat = coarse.r0;
    out.branch = NormBranch::Tiny;
    out.statistic = std::numeric_limits<double>::quiet_NaN();
  } else if (coarse.exhausted) {
    out = large_norm_estimate(env, large_norm_sample_size(env.dimension(), eps, delta / 2.0, consts), rng);
  } else {
    out = additive_estimate(env, eps, delta / 2.0, coarse.r0, consts, rng);
  }
  out.r0 = coarse.r0;
  out.samples = env.pulls() - before;
  return out;
}

}  // namespace linbai
