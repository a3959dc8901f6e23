#include "linbai/bandit_env.hpp"

#include <bit>
#include <cmath>

#include "linbai/error.hpp"

namespace linbai {

namespace {

void check_dim(const Arm& x, std::size_t d) {
  if (static_cast<std::size_t>(x.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "arm has length " + std::to_string(x.size()) + ", expected " + std::to_string(d));
  }
}

}  // namespace

std::uint64_t digest(const Eigen::VectorXd& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const double x : v) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFFU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Environment::Environment(Eigen::VectorXd theta, std::uint64_t seed)
    : theta_(std::move(theta)), rng_(seed), seed_(seed) {
  if (theta_.size() == 0) throw Error(ErrorCode::InvalidArgument, "theta must be non-empty");
  if (!theta_.allFinite()) throw Error(ErrorCode::InvalidArgument, "theta has non-finite entries");
}

double Environment::pull(const Arm& x) {
  check_dim(x, dimension());
  const double y = x.dot(theta_) + rng_.gaussian();
  ++pulls_;
  record(x, y, 1);
  return y;
}

double Environment::pull_sum(const Arm& x, std::uint64_t count) {
  check_dim(x, dimension());
  double noise = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) noise += rng_.gaussian();
  const double y = static_cast<double>(count) * x.dot(theta_) + noise;
  pulls_ += count;
  if (count > 0) record(x, y, count);
  return y;
}

std::uint64_t Environment::theta_digest() const { return digest(theta_); }

void Environment::enable_log(std::size_t cap) { log_cap_ = cap; }

void Environment::record(const Arm& x, double sum, std::uint64_t count) {
  if (log_cap_ && log_.size() < *log_cap_) log_.push_back({x, sum, count});
}

EnvView::EnvView(Environment& env) : env_(&env), offset_(0), dim_(env.dimension()) {}

EnvView::EnvView(Environment& env, std::size_t offset, std::size_t dim)
    : env_(&env), offset_(offset), dim_(dim) {
  if (dim == 0 || offset + dim > env.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "view block exceeds environment dimension");
  }
}

Arm EnvView::embed(const Arm& x) const {
  check_dim(x, dim_);
  if (dim_ == env_->dimension()) return x;
  Arm out = Arm::Zero(static_cast<Eigen::Index>(env_->dimension()));
  out.segment(static_cast<Eigen::Index>(offset_), static_cast<Eigen::Index>(dim_)) = x;
  return out;
}

EnvView EnvView::block(std::size_t offset, std::size_t dim) const {
  if (dim == 0 || offset + dim > dim_) {
    throw Error(ErrorCode::DimensionMismatch, "sub-view exceeds view dimension");
  }
  return EnvView(*env_, offset_ + offset, dim);
}

double EnvView::pull(const Arm& x) { return env_->pull(embed(x)); }

double EnvView::pull_sum(const Arm& x, std::uint64_t count) { return env_->pull_sum(embed(x), count); }

Referee::Referee(const Environment& env, const ArmSet& set) : env_(&env), set_(set) {
  if (set.dimension() != env.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "referee set and environment differ in dimension");
  }
}

double Referee::value(const Arm& x) const {
  check_dim(x, env_->dimension());
  return x.dot(env_->theta_);
}

double Referee::optimal_value() const { return set_.support(env_->theta_); }

double Referee::simple_regret(const Arm& x) const { return optimal_value() - value(x); }

bool Referee::is_eps_best(const Arm& x, double eps) const { return simple_regret(x) <= eps; }

}  // namespace linbai
