#include "linbai/arm_sets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "linbai/error.hpp"

namespace linbai {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_dim(const Eigen::VectorXd& v, std::size_t d, const char* what) {
  if (static_cast<std::size_t>(v.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected length " + std::to_string(d) + ", got " +
                    std::to_string(v.size()));
  }
}

// Lowest index attaining the maximum.
Eigen::Index first_argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  // C(n, i) stays integral at every step; __int128 keeps the product exact.
  __extension__ using u128 = unsigned __int128;
  u128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(c);
}

Arm uniform_in_ball(std::size_t d, Rng& rng) {
  Arm g(static_cast<Eigen::Index>(d));
  for (auto& v : g) v = rng.gaussian();
  const double n = g.norm();
  if (n == 0.0) return Arm::Zero(static_cast<Eigen::Index>(d));
  const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return g * (radius / n);
}

std::size_t parse_size(std::string_view s, std::string_view spec) {
  std::size_t out = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || p != end || s.empty()) {
    throw Error(ErrorCode::ConfigError,
                "bad integer '" + std::string(s) + "' in set spec '" + std::string(spec) + "'");
  }
  return out;
}

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

}  // namespace

ArmSet::ArmSet(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [&](const sets::Finite& s) { dim_ = static_cast<std::size_t>(s.arms.front().size()); },
                 [&](const sets::Ball& s) { dim_ = s.d; },
                 [&](const sets::HypercubePM& s) { dim_ = s.d; },
                 [&](const sets::Hypercube01& s) { dim_ = s.d; },
                 [&](const sets::MSet& s) { dim_ = s.d; },
                 [&](const sets::MultiTask& s) {
                   dim_ = std::accumulate(s.dims.begin(), s.dims.end(), std::size_t{0});
                   basis_ = multitask_basis(s.dims);
                 },
                 [&](const sets::UnionOfBalls& s) { dim_ = s.k * s.d; },
             },
             kind_);
}

ArmSet ArmSet::finite(std::vector<Arm> arms) {
  if (arms.empty()) throw Error(ErrorCode::InvalidArgument, "finite set needs at least one arm");
  const auto d = arms.front().size();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "finite set arms must have dimension >= 1");
  for (const auto& a : arms) {
    if (a.size() != d) throw Error(ErrorCode::DimensionMismatch, "finite set arms differ in length");
    if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, "finite set arm has non-finite entry");
  }
  return ArmSet(sets::Finite{std::move(arms)});
}

ArmSet ArmSet::ball(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "ball dimension must be >= 1");
  return ArmSet(sets::Ball{d});
}

ArmSet ArmSet::cube_pm(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "hypercube dimension must be >= 1");
  return ArmSet(sets::HypercubePM{d});
}

ArmSet ArmSet::cube_01(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "hypercube dimension must be >= 1");
  return ArmSet(sets::Hypercube01{d});
}

ArmSet ArmSet::mset(std::size_t d, std::size_t m) {
  if (m < 1 || m > d) throw Error(ErrorCode::InvalidArgument, "m-set needs 1 <= m <= d");
  return ArmSet(sets::MSet{d, m});
}

ArmSet ArmSet::multitask(std::vector<std::size_t> dims) {
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "multi-task set needs at least one block");
  for (auto dj : dims) {
    if (dj < 2) throw Error(ErrorCode::InvalidArgument, "multi-task block sizes must be >= 2");
  }
  return ArmSet(sets::MultiTask{std::move(dims)});
}

ArmSet ArmSet::union_of_balls(std::size_t k, std::size_t d) {
  if (k == 0 || d == 0) throw Error(ErrorCode::InvalidArgument, "union of balls needs k, d >= 1");
  return ArmSet(sets::UnionOfBalls{k, d});
}

std::string_view ArmSet::kind_name() const {
  return std::visit(overloaded{
                        [](const sets::Finite&) { return std::string_view("finite"); },
                        [](const sets::Ball&) { return std::string_view("ball"); },
                        [](const sets::HypercubePM&) { return std::string_view("cube_pm"); },
                        [](const sets::Hypercube01&) { return std::string_view("cube_01"); },
                        [](const sets::MSet&) { return std::string_view("mset"); },
                        [](const sets::MultiTask&) { return std::string_view("multitask"); },
                        [](const sets::UnionOfBalls&) { return std::string_view("unionballs"); },
                    },
                    kind_);
}

std::size_t ArmSet::intrinsic_dimension() const {
  return basis_ ? static_cast<std::size_t>(basis_->cols()) : dim_;
}

std::size_t ArmSet::block_count() const {
  if (const auto* u = std::get_if<sets::UnionOfBalls>(&kind_)) return u->k;
  if (const auto* t = std::get_if<sets::MultiTask>(&kind_)) return t->dims.size();
  return 1;
}

Arm ArmSet::linear_argmax(const Eigen::VectorXd& v) const {
  check_dim(v, dim_, "linear_argmax");
  const auto n = static_cast<Eigen::Index>(dim_);
  return std::visit(
      overloaded{
          [&](const sets::Finite& s) -> Arm {
            std::size_t best = 0;
            double best_val = s.arms[0].dot(v);
            for (std::size_t i = 1; i < s.arms.size(); ++i) {
              const double val = s.arms[i].dot(v);
              if (val > best_val) {
                best_val = val;
                best = i;
              }
            }
            return s.arms[best];
          },
          [&](const sets::Ball&) -> Arm {
            const double nv = v.norm();
            if (nv == 0.0) return Arm::Zero(n);
            return v / nv;
          },
          [&](const sets::HypercubePM&) -> Arm {
            return v.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
          },
          [&](const sets::Hypercube01&) -> Arm {
            return v.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
          },
          [&](const sets::MSet& s) -> Arm {
            std::vector<Eigen::Index> idx(dim_);
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
            std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s.m), idx.end(),
                              [&](Eigen::Index a, Eigen::Index b) {
                                return v[a] > v[b] || (v[a] == v[b] && a < b);
                              });
            Arm x = Arm::Zero(n);
            for (std::size_t i = 0; i < s.m; ++i) x[idx[i]] = 1.0;
            return x;
          },
          [&](const sets::MultiTask& s) -> Arm {
            Arm x = Arm::Zero(n);
            Eigen::Index off = 0;
            for (auto dj : s.dims) {
              const auto len = static_cast<Eigen::Index>(dj);
              x[off + first_argmax(v.segment(off, len))] = 1.0;
              off += len;
            }
            return x;
          },
          [&](const sets::UnionOfBalls& s) -> Arm {
            const auto d = static_cast<Eigen::Index>(s.d);
            std::size_t best = 0;
            double best_norm = v.segment(0, d).norm();
            for (std::size_t i = 1; i < s.k; ++i) {
              const double nb = v.segment(static_cast<Eigen::Index>(i) * d, d).norm();
              if (nb > best_norm) {
                best_norm = nb;
                best = i;
              }
            }
            Arm x = Arm::Zero(n);
            if (best_norm > 0.0) {
              const auto off = static_cast<Eigen::Index>(best) * d;
              x.segment(off, d) = v.segment(off, d) / best_norm;
            }
            return x;
          },
      },
      kind_);
}

double ArmSet::support(const Eigen::VectorXd& v) const {
  check_dim(v, dim_, "support");
  return std::visit(
      overloaded{
          [&](const sets::Ball&) { return v.norm(); },
          [&](const sets::HypercubePM&) { return v.cwiseAbs().sum(); },
          [&](const sets::Hypercube01&) { return v.cwiseMax(0.0).sum(); },
          [&](const sets::UnionOfBalls& s) {
            const auto d = static_cast<Eigen::Index>(s.d);
            double best = 0.0;
            for (std::size_t i = 0; i < s.k; ++i) {
              best = std::max(best, v.segment(static_cast<Eigen::Index>(i) * d, d).norm());
            }
            return best;
          },
          [&](const auto&) { return linear_argmax(v).dot(v); },
      },
      kind_);
}

bool ArmSet::contains(const Arm& x, double tol) const {
  check_dim(x, dim_, "contains");
  if (!x.allFinite()) return false;
  auto binary = [&](const Eigen::VectorXd& y) {
    return std::all_of(y.begin(), y.end(),
                       [&](double e) { return near(e, 0.0, tol) || near(e, 1.0, tol); });
  };
  auto ones = [&](const Eigen::VectorXd& y) {
    return static_cast<std::size_t>(
        std::count_if(y.begin(), y.end(), [&](double e) { return near(e, 1.0, tol); }));
  };
  return std::visit(
      overloaded{
          [&](const sets::Finite& s) {
            return std::any_of(s.arms.begin(), s.arms.end(), [&](const Arm& a) {
              return (a - x).cwiseAbs().maxCoeff() <= tol;
            });
          },
          [&](const sets::Ball&) { return x.norm() <= 1.0 + tol; },
          [&](const sets::HypercubePM&) {
            return std::all_of(x.begin(), x.end(),
                               [&](double e) { return near(e, 1.0, tol) || near(e, -1.0, tol); });
          },
          [&](const sets::Hypercube01&) { return binary(x); },
          [&](const sets::MSet& s) { return binary(x) && ones(x) == s.m; },
          [&](const sets::MultiTask& s) {
            if (!binary(x)) return false;
            Eigen::Index off = 0;
            for (auto dj : s.dims) {
              const auto len = static_cast<Eigen::Index>(dj);
              if (ones(x.segment(off, len)) != 1) return false;
              off += len;
            }
            return true;
          },
          [&](const sets::UnionOfBalls& s) {
            const auto d = static_cast<Eigen::Index>(s.d);
            std::size_t carrying = 0;
            for (std::size_t i = 0; i < s.k; ++i) {
              if (x.segment(static_cast<Eigen::Index>(i) * d, d).cwiseAbs().maxCoeff() > tol) {
                ++carrying;
              }
            }
            return carrying <= 1 && x.norm() <= 1.0 + tol;
          },
      },
      kind_);
}

bool ArmSet::enumerable() const {
  return !std::holds_alternative<sets::Ball>(kind_) &&
         !std::holds_alternative<sets::UnionOfBalls>(kind_);
}

std::optional<std::uint64_t> ArmSet::cardinality() const {
  return std::visit(
      overloaded{
          [&](const sets::Finite& s) -> std::optional<std::uint64_t> { return s.arms.size(); },
          [&](const sets::HypercubePM& s) -> std::optional<std::uint64_t> {
            return s.d >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << s.d);
          },
          [&](const sets::Hypercube01& s) -> std::optional<std::uint64_t> {
            return s.d >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << s.d);
          },
          [&](const sets::MSet& s) -> std::optional<std::uint64_t> { return binomial(s.d, s.m); },
          [&](const sets::MultiTask& s) -> std::optional<std::uint64_t> {
            std::uint64_t c = 1;
            for (auto dj : s.dims) c = sat_mul(c, dj);
            return c;
          },
          [&](const auto&) -> std::optional<std::uint64_t> { return std::nullopt; },
      },
      kind_);
}

std::vector<Arm> ArmSet::enumerate(std::size_t cap) const {
  const auto count = cardinality();
  if (!count) {
    throw Error(ErrorCode::NotEnumerable, std::string(kind_name()) + " set is continuous");
  }
  if (*count > cap) {
    throw Error(ErrorCode::CapExceeded,
                "set has " + std::to_string(*count) + " arms, cap is " + std::to_string(cap), *count);
  }
  const auto n = static_cast<Eigen::Index>(dim_);
  std::vector<Arm> out;
  out.reserve(static_cast<std::size_t>(*count));

  if (const auto* f = std::get_if<sets::Finite>(&kind_)) {
    for (const auto& a : f->arms) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const Arm& b) { return a == b; });
      if (!seen) out.push_back(a);
    }
    return out;
  }
  if (std::holds_alternative<sets::HypercubePM>(kind_) ||
      std::holds_alternative<sets::Hypercube01>(kind_)) {
    const double lo = std::holds_alternative<sets::HypercubePM>(kind_) ? -1.0 : 0.0;
    // Counting in binary with the first coordinate most significant is
    // lexicographic order.
    for (std::uint64_t code = 0; code < *count; ++code) {
      Arm x(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = ((code >> (n - 1 - i)) & 1U) ? 1.0 : lo;
      }
      out.push_back(std::move(x));
    }
    return out;
  }
  if (const auto* s = std::get_if<sets::MSet>(&kind_)) {
    // Ascending lexicographic order of 0/1 vectors: iterate over next
    // permutations of the sorted pattern (0,...,0,1,...,1).
    std::vector<int> pattern(s->d, 0);
    std::fill(pattern.end() - static_cast<std::ptrdiff_t>(s->m), pattern.end(), 1);
    do {
      Arm x(n);
      for (Eigen::Index i = 0; i < n; ++i) x[i] = pattern[static_cast<std::size_t>(i)];
      out.push_back(std::move(x));
    } while (std::next_permutation(pattern.begin(), pattern.end()));
    return out;
  }
  const auto& t = std::get<sets::MultiTask>(kind_);
  // Mixed-radix counter; within a block the one-hot at the last position is
  // lexicographically smallest, so each digit walks its block from the end.
  std::vector<std::size_t> digit(t.dims.size(), 0);
  for (std::uint64_t c = 0; c < *count; ++c) {
    Arm x = Arm::Zero(n);
    Eigen::Index off = 0;
    for (std::size_t j = 0; j < t.dims.size(); ++j) {
      x[off + static_cast<Eigen::Index>(t.dims[j] - 1 - digit[j])] = 1.0;
      off += static_cast<Eigen::Index>(t.dims[j]);
    }
    out.push_back(std::move(x));
    for (std::size_t j = t.dims.size(); j-- > 0;) {
      if (++digit[j] < t.dims[j]) break;
      digit[j] = 0;
    }
  }
  return out;
}

std::size_t ArmSet::block_of(const Arm& x, double tol) const {
  const auto* u = std::get_if<sets::UnionOfBalls>(&kind_);
  if (!u) throw Error(ErrorCode::InvalidArgument, "block_of needs a union of balls");
  check_dim(x, dim_, "block_of");
  const auto d = static_cast<Eigen::Index>(u->d);
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < u->k; ++i) {
    if (x.segment(static_cast<Eigen::Index>(i) * d, d).cwiseAbs().maxCoeff() > tol) {
      if (found) {
        throw Error(ErrorCode::MixedSupport, "arm support straddles blocks " +
                                                 std::to_string(*found) + " and " + std::to_string(i));
      }
      found = i;
    }
  }
  return found.value_or(0);
}

Arm ArmSet::sample_member(Rng& rng) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  return std::visit(
      overloaded{
          [&](const sets::Finite& s) -> Arm { return s.arms[rng.below(s.arms.size())]; },
          [&](const sets::Ball& s) -> Arm { return uniform_in_ball(s.d, rng); },
          [&](const sets::HypercubePM&) -> Arm {
            Arm x(n);
            for (auto& e : x) e = rng.coin() ? 1.0 : -1.0;
            return x;
          },
          [&](const sets::Hypercube01&) -> Arm {
            Arm x(n);
            for (auto& e : x) e = rng.coin() ? 1.0 : 0.0;
            return x;
          },
          [&](const sets::MSet& s) -> Arm {
            std::vector<std::size_t> idx(s.d);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            Arm x = Arm::Zero(n);
            for (std::size_t i = 0; i < s.m; ++i) {
              const auto j = i + static_cast<std::size_t>(rng.below(s.d - i));
              std::swap(idx[i], idx[j]);
              x[static_cast<Eigen::Index>(idx[i])] = 1.0;
            }
            return x;
          },
          [&](const sets::MultiTask& s) -> Arm {
            Arm x = Arm::Zero(n);
            Eigen::Index off = 0;
            for (auto dj : s.dims) {
              x[off + static_cast<Eigen::Index>(rng.below(dj))] = 1.0;
              off += static_cast<Eigen::Index>(dj);
            }
            return x;
          },
          [&](const sets::UnionOfBalls& s) -> Arm {
            const auto block = static_cast<Eigen::Index>(rng.below(s.k));
            Arm x = Arm::Zero(n);
            const auto d = static_cast<Eigen::Index>(s.d);
            x.segment(block * d, d) = uniform_in_ball(s.d, rng);
            return x;
          },
      },
      kind_);
}

std::string ArmSet::spec() const {
  return std::visit(
      overloaded{
          [](const sets::Finite& s) { return "finite:<" + std::to_string(s.arms.size()) + " arms>"; },
          [](const sets::Ball& s) { return "ball:" + std::to_string(s.d); },
          [](const sets::HypercubePM& s) { return "cube_pm:" + std::to_string(s.d); },
          [](const sets::Hypercube01& s) { return "cube_01:" + std::to_string(s.d); },
          [](const sets::MSet& s) { return "mset:" + std::to_string(s.d) + ":" + std::to_string(s.m); },
          [](const sets::MultiTask& s) {
            std::string out = "multitask:";
            for (std::size_t j = 0; j < s.dims.size(); ++j) {
              if (j) out += ',';
              out += std::to_string(s.dims[j]);
            }
            return out;
          },
          [](const sets::UnionOfBalls& s) {
            return "unionballs:" + std::to_string(s.k) + ":" + std::to_string(s.d);
          },
      },
      kind_);
}

ArmSet parse_set_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::ConfigError, "set spec '" + std::string(spec) + "' has no ':'");
  }
  const auto kind = spec.substr(0, colon);
  const auto rest = spec.substr(colon + 1);
  const auto fields = split(rest, ':');
  auto need = [&](std::size_t n) {
    if (fields.size() != n) {
      throw Error(ErrorCode::ConfigError, "set spec '" + std::string(spec) + "' expects " +
                                              std::to_string(n) + " parameter(s)");
    }
  };
  try {
    if (kind == "finite") return ArmSet::finite(load_arms_csv(std::string(rest)));
    if (kind == "ball") {
      need(1);
      return ArmSet::ball(parse_size(fields[0], spec));
    }
    if (kind == "cube_pm") {
      need(1);
      return ArmSet::cube_pm(parse_size(fields[0], spec));
    }
    if (kind == "cube_01") {
      need(1);
      return ArmSet::cube_01(parse_size(fields[0], spec));
    }
    if (kind == "mset") {
      need(2);
      return ArmSet::mset(parse_size(fields[0], spec), parse_size(fields[1], spec));
    }
    if (kind == "multitask") {
      need(1);
      std::vector<std::size_t> dims;
      for (auto f : split(fields[0], ',')) dims.push_back(parse_size(f, spec));
      return ArmSet::multitask(std::move(dims));
    }
    if (kind == "unionballs") {
      need(2);
      return ArmSet::union_of_balls(parse_size(fields[0], spec), parse_size(fields[1], spec));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::DimensionMismatch) {
      throw Error(ErrorCode::ConfigError, "set spec '" + std::string(spec) + "': " + e.what());
    }
    throw;
  }
  throw Error(ErrorCode::ConfigError, "unknown set kind '" + std::string(kind) + "'");
}

std::vector<Arm> load_arms_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open arm file " + path.string());
  std::vector<Arm> arms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    for (auto field : split(line, ',')) {
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      double v = 0.0;
      const auto* end = field.data() + field.size();
      auto [p, ec] = std::from_chars(field.data(), end, v);
      if (ec != std::errc() || p != end || field.empty()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (arms.empty() && lineno == 1) continue;
      throw Error(ErrorCode::ConfigError,
                  path.string() + ":" + std::to_string(lineno) + ": non-numeric arm row");
    }
    if (!arms.empty() && row.size() != static_cast<std::size_t>(arms.front().size())) {
      throw Error(ErrorCode::ConfigError,
                  path.string() + ":" + std::to_string(lineno) + ": row length " +
                      std::to_string(row.size()) + " differs from " +
                      std::to_string(arms.front().size()));
    }
    arms.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
  }
  if (arms.empty()) throw Error(ErrorCode::ConfigError, path.string() + ": no arms");
  return arms;
}

Eigen::MatrixXd helmert(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "helmert block needs n >= 2");
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rows, rows - 1);
  for (Eigen::Index k = 1; k < rows; ++k) {
    const double kk = static_cast<double>(k);
    const double scale = 1.0 / std::sqrt(kk * (kk + 1.0));
    h.col(k - 1).head(k).setConstant(scale);
    h(k, k - 1) = -kk * scale;
  }
  return h;
}

Eigen::MatrixXd multitask_basis(std::span<const std::size_t> dims) {
  const auto d = static_cast<Eigen::Index>(std::accumulate(dims.begin(), dims.end(), std::size_t{0}));
  const auto m = static_cast<Eigen::Index>(dims.size());
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(d, d - m + 1);
  double s = 0.0;
  for (auto dj : dims) s += 1.0 / static_cast<double>(dj);
  Eigen::Index row = 0;
  Eigen::Index col = 1;
  for (auto dj : dims) {
    const auto len = static_cast<Eigen::Index>(dj);
    u.col(0).segment(row, len).setConstant(1.0 / (static_cast<double>(dj) * std::sqrt(s)));
    u.block(row, col, len, len - 1) = helmert(dj);
    row += len;
    col += len - 1;
  }
  return u;
}

}  // namespace linbai
