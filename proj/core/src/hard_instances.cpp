#include "linbai/hard_instances.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "linbai/error.hpp"
#include "linbai/pure_exploration.hpp"

namespace linbai {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, std::string_view what) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) {
    throw Error(ErrorCode::ConfigError, "bad number '" + std::string(s) + "' in " + std::string(what));
  }
  return v;
}

void check_eps(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
}

}  // namespace

std::vector<double> multitask_eps_split(const std::vector<std::size_t>& dims, double eps) {
  double total = 0.0;
  for (auto dj : dims) total += std::sqrt(static_cast<double>(dj));
  std::vector<double> out;
  for (auto dj : dims) out.push_back(eps * std::sqrt(static_cast<double>(dj)) / total);
  return out;
}

HardSample multitask_hard(const std::vector<std::size_t>& dims, double eps, Rng& rng,
                          std::optional<std::size_t> zero_block) {
  check_eps(eps);
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "multi-task family needs blocks");
  for (auto dj : dims) {
    if (dj < 2) throw Error(ErrorCode::InvalidArgument, "multi-task block sizes must be >= 2");
  }
  if (zero_block && *zero_block >= dims.size()) {
    throw Error(ErrorCode::InvalidArgument, "zeroed block index out of range");
  }
  const auto split_eps = multitask_eps_split(dims, eps);
  const auto d = static_cast<Eigen::Index>(std::accumulate(dims.begin(), dims.end(), std::size_t{0}));
  HardSample out;
  out.theta = Eigen::VectorXd::Zero(d);
  out.planted = Arm::Zero(d);
  Eigen::Index off = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const auto pick = off + static_cast<Eigen::Index>(rng.below(dims[j]));
    out.planted[pick] = 1.0;
    if (zero_block != j) {
      out.theta[pick] = 10.0 * split_eps[j];
      out.optimal_value += 10.0 * split_eps[j];
    }
    off += static_cast<Eigen::Index>(dims[j]);
  }
  return out;
}

HardSample mset_hard(std::size_t d, std::size_t m, double eps, Rng& rng) {
  check_eps(eps);
  if (m < 1 || m > d) throw Error(ErrorCode::InvalidArgument, "m-set needs 1 <= m <= d");
  if (d - m + 1 < 20 * m) {
    throw Error(ErrorCode::RegimeViolation, "m-set family needs d - m + 1 >= 20 m (d = " +
                                                std::to_string(d) + ", m = " + std::to_string(m) + ")");
  }
  const double gap = 10.0 * eps / static_cast<double>(m);
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  HardSample out;
  out.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  out.planted = Arm::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(d - i));
    std::swap(idx[i], idx[j]);
    out.theta[static_cast<Eigen::Index>(idx[i])] = gap;
    out.planted[static_cast<Eigen::Index>(idx[i])] = 1.0;
  }
  out.optimal_value = static_cast<double>(m) * gap;
  return out;
}

HardSample hypercube_hard(std::size_t d, double eps, CubeVariant variant, Rng& rng) {
  check_eps(eps);
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "hypercube family needs d >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  const double dd = static_cast<double>(d);
  HardSample out;
  out.theta.resize(n);
  out.planted.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool up = rng.coin();
    if (variant == CubeVariant::PlusMinus) {
      out.planted[i] = up ? 1.0 : -1.0;
      out.theta[i] = out.planted[i] * 5.0 * eps / dd;
      out.optimal_value += 5.0 * eps / dd;
    } else {
      out.planted[i] = up ? 1.0 : 0.0;
      out.theta[i] = (up ? 10.0 : -10.0) * eps / dd;
      if (up) out.optimal_value += 10.0 * eps / dd;
    }
  }
  return out;
}

double unionball_hard_norm(std::size_t d, double per_block_budget, double delta, double c0) {
  if (!(per_block_budget > 0.0)) throw Error(ErrorCode::InvalidArgument, "per-block budget must be positive");
  return c0 * std::sqrt(delta) * static_cast<double>(d) / std::sqrt(per_block_budget);
}

HardSample unionball_hard(std::size_t k, std::size_t d, double per_block_budget, double delta,
                          Rng& rng, double c0) {
  if (k == 0 || d == 0) throw Error(ErrorCode::InvalidArgument, "union of balls needs k, d >= 1");
  const double norm = unionball_hard_norm(d, per_block_budget, delta, c0);
  const auto block = static_cast<Eigen::Index>(rng.below(k));
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::VectorXd u(dd);
  do {
    for (auto& e : u) e = rng.gaussian();
  } while (u.norm() == 0.0);
  u.normalize();
  HardSample out;
  out.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k) * dd);
  out.theta.segment(block * dd, dd) = norm * u;
  out.planted = Arm::Zero(out.theta.size());
  out.planted.segment(block * dd, dd) = u;
  out.optimal_value = norm;
  return out;
}

HardFamily HardFamily::parse(std::string_view family, std::string_view params, double eps) {
  HardFamily f;
  f.eps_ = eps;
  const auto fields = split(params, ':');
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (fields.size() < lo || fields.size() > hi) {
      throw Error(ErrorCode::ConfigError, "family '" + std::string(family) + "' got parameters '" +
                                              std::string(params) + "'");
    }
  };
  if (family == "multitask") {
    need(1, 1);
    f.kind_ = Kind::MultiTaskSpiked;
    for (auto s : split(fields[0], ',')) f.dims_.push_back(parse_number<std::size_t>(s, "multitask params"));
    f.set_ = ArmSet::multitask(f.dims_);
  } else if (family == "mset") {
    need(2, 2);
    f.kind_ = Kind::MSetSpiked;
    f.d_ = parse_number<std::size_t>(fields[0], "mset params");
    f.m_ = parse_number<std::size_t>(fields[1], "mset params");
    f.set_ = ArmSet::mset(f.d_, f.m_);
  } else if (family == "cube_pm" || family == "cube_01") {
    need(1, 1);
    f.d_ = parse_number<std::size_t>(fields[0], "hypercube params");
    f.kind_ = family == "cube_pm" ? Kind::HypercubePMSigned : Kind::Hypercube01Signed;
    f.set_ = family == "cube_pm" ? ArmSet::cube_pm(f.d_) : ArmSet::cube_01(f.d_);
  } else if (family == "unionballs") {
    need(3, 5);
    f.kind_ = Kind::UnionBlockSpiked;
    f.k_ = parse_number<std::size_t>(fields[0], "unionballs params");
    f.d_ = parse_number<std::size_t>(fields[1], "unionballs params");
    f.budget_ = parse_number<double>(fields[2], "unionballs params");
    if (fields.size() > 3) f.delta_ = parse_number<double>(fields[3], "unionballs params");
    if (fields.size() > 4) f.c0_ = parse_number<double>(fields[4], "unionballs params");
    f.set_ = ArmSet::union_of_balls(f.k_, f.d_);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown hard family '" + std::string(family) + "'");
  }
  return f;
}

HardFamily HardFamily::gaussian_prior(ArmSet set, Eigen::MatrixXd a, double tau) {
  HardFamily f;
  f.kind_ = Kind::GaussianPrior;
  f.set_ = std::move(set);
  f.prior_a_ = std::move(a);
  f.tau_ = tau;
  return f;
}

HardSample HardFamily::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::MultiTaskSpiked: return multitask_hard(dims_, eps_, rng);
    case Kind::MSetSpiked: return mset_hard(d_, m_, eps_, rng);
    case Kind::HypercubePMSigned: return hypercube_hard(d_, eps_, CubeVariant::PlusMinus, rng);
    case Kind::Hypercube01Signed: return hypercube_hard(d_, eps_, CubeVariant::ZeroOne, rng);
    case Kind::UnionBlockSpiked: return unionball_hard(k_, d_, budget_, delta_, rng, c0_);
    case Kind::GaussianPrior: {
      HardSample out;
      out.theta = sample_gaussian_prior(prior_a_, tau_, rng);
      out.optimal_value = set_->support(out.theta);
      return out;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family kind");
}

}  // namespace linbai
