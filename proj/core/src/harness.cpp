#include "linbai/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "linbai/bandit_env.hpp"
#include "linbai/error.hpp"
#include "linbai/hard_instances.hpp"

namespace linbai {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> parse_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

template <class T>
T parse_field(const std::string& s, std::size_t lineno, const char* column) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) {
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": bad value '" + s +
                                            "' in column " + column);
  }
  return v;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

std::size_t block_count_k(const ArmSet& set) {
  if (const auto* u = std::get_if<sets::UnionOfBalls>(&set.kind())) return u->k;
  return 0;
}

std::size_t block_count_m(const ArmSet& set) {
  if (const auto* s = std::get_if<sets::MSet>(&set.kind())) return s->m;
  if (const auto* t = std::get_if<sets::MultiTask>(&set.kind())) return t->dims.size();
  return 0;
}

}  // namespace

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0 || successes > trials) {
    throw Error(ErrorCode::InvalidArgument, "wilson_interval needs 0 <= successes <= trials, trials >= 1");
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval w;
  w.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  w.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return w;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.trial << ',' << r.seed << ',' << csv_field(r.algo) << ',' << csv_field(r.set) << ',' << r.d
     << ',' << r.k << ',' << r.m << ',' << format_double(r.eps) << ',' << format_double(r.delta) << ','
     << r.samples << ',' << (r.success ? 1 : 0) << ',' << format_double(r.estimate) << ','
     << format_double(r.true_value) << ',' << csv_field(r.branch) << ',' << format_double(r.wall_ms);
  return os.str();
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw Error(ErrorCode::ConfigError, "line 1: unexpected CSV header '" + line + "'");
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = parse_csv_line(line, lineno);
    if (f.size() != 15) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected 15 columns, got " +
                                              std::to_string(f.size()));
    }
    RunRecord r;
    r.trial = parse_field<std::size_t>(f[0], lineno, "trial");
    r.seed = parse_field<std::uint64_t>(f[1], lineno, "seed");
    r.algo = f[2];
    r.set = f[3];
    r.d = parse_field<std::size_t>(f[4], lineno, "d");
    r.k = parse_field<std::size_t>(f[5], lineno, "k");
    r.m = parse_field<std::size_t>(f[6], lineno, "m");
    r.eps = parse_field<double>(f[7], lineno, "eps");
    r.delta = parse_field<double>(f[8], lineno, "delta");
    r.samples = parse_field<std::uint64_t>(f[9], lineno, "samples");
    const auto s = parse_field<int>(f[10], lineno, "success");
    if (s != 0 && s != 1) throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": success must be 0 or 1");
    r.success = s == 1;
    r.estimate = parse_field<double>(f[11], lineno, "estimate");
    r.true_value = parse_field<double>(f[12], lineno, "true_value");
    r.branch = f[13];
    r.wall_ms = parse_field<double>(f[14], lineno, "wall_ms");
    out.push_back(std::move(r));
  }
  return out;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit needs equal-length inputs");
  if (x.size() < 3) {
    throw Error(ErrorCode::InsufficientPoints, "scaling fit needs at least 3 points, got " + std::to_string(x.size()),
                x.size());
  }
  const auto n = static_cast<double>(x.size());
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "log-log fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InsufficientPoints, "sweep variable takes a single value");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

RunSummary summarize(const std::vector<RunRecord>& records) {
  RunSummary s;
  s.trials = records.size();
  if (records.empty()) return s;
  std::vector<std::uint64_t> samples;
  double total = 0.0;
  for (const auto& r : records) {
    s.successes += r.success ? 1 : 0;
    samples.push_back(r.samples);
    total += static_cast<double>(r.samples);
  }
  s.rate = static_cast<double>(s.successes) / static_cast<double>(s.trials);
  s.ci = wilson_interval(s.successes, s.trials);
  s.mean_samples = total / static_cast<double>(s.trials);
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  s.median_samples = n % 2 ? static_cast<double>(samples[n / 2])
                           : 0.5 * (static_cast<double>(samples[n / 2 - 1]) + static_cast<double>(samples[n / 2]));
  s.max_samples = samples.back();
  return s;
}

std::vector<RunRecord> run_trials(std::size_t trials, std::uint64_t master_seed, std::size_t workers,
                                  const TrialFn& trial, const RecordSink& sink) {
  std::vector<RunRecord> out(trials);
  workers = std::max<std::size_t>(1, std::min(workers, trials));
  if (workers == 1) {
    for (std::size_t i = 0; i < trials; ++i) {
      out[i] = trial(i, stable_mix(master_seed, i));
      if (sink) sink(out[i]);
    }
    return out;
  }
  std::vector<char> done(trials, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= trials) break;
        try {
          RunRecord r = trial(i, stable_mix(master_seed, i));
          std::lock_guard lock(mu);
          out[i] = std::move(r);
          done[i] = 1;
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
        cv.notify_all();
      }
    });
  }
  // Single writer: emit records in trial order as they complete.
  for (std::size_t emit = 0; emit < trials; ++emit) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return done[emit] != 0 || failed.load(); });
    if (failed.load()) break;
    lock.unlock();
    if (sink) sink(out[emit]);
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (experiment != "bai" && experiment != "norm") fail("experiment: expected 'bai' or 'norm', got '" + experiment + "'");
  if (trials < 1) fail("trials: must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) fail("eps: must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta: must lie in (0, 1)");
  if (!(budget_scale > 0.0)) fail("budget_scale: must be positive");
  if (!consts.empty() && !std::filesystem::exists(consts)) fail("consts: file '" + consts + "' does not exist");
  if (experiment == "bai") {
    if (set.empty()) fail("set: required for bai experiments");
    if (set.rfind("finite:", 0) == 0 && !std::filesystem::exists(set.substr(7))) {
      fail("set: file '" + set.substr(7) + "' does not exist");
    }
    if (algo != "fixed" && algo != "partitioned" && algo != "unionballs" && algo != "uniform") {
      fail("algo: expected fixed|partitioned|unionballs|uniform, got '" + algo + "'");
    }
    if (algo == "uniform" && !budget_override) fail("budget_override: required for algo 'uniform'");
    if (theta.rfind("file:", 0) == 0) {
      if (!std::filesystem::exists(theta.substr(5))) fail("theta: file '" + theta.substr(5) + "' does not exist");
    } else if (theta == "explicit") {
      if (theta_values.empty()) fail("theta_values: required when theta is 'explicit'");
    } else if (theta.rfind("gen:", 0) != 0) {
      fail("theta: expected file:<path>, gen:<family>:<params> or explicit");
    }
  } else {
    if (d < 1) fail("d: required for norm experiments");
    if (r.empty()) fail("r: at least one true norm is required");
    if (!(delta < 1.0 / 3.0)) fail("delta: norm estimation needs delta < 1/3");
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "experiment") c.experiment = value.get<std::string>();
      else if (key == "set") c.set = value.get<std::string>();
      else if (key == "algo") c.algo = value.get<std::string>();
      else if (key == "theta") c.theta = value.get<std::string>();
      else if (key == "theta_values") c.theta_values = value.get<std::vector<double>>();
      else if (key == "eps") c.eps = value.get<double>();
      else if (key == "delta") c.delta = value.get<double>();
      else if (key == "trials") c.trials = value.get<std::size_t>();
      else if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<std::size_t>();
      else if (key == "consts") c.consts = value.get<std::string>();
      else if (key == "budget_override") {
        if (!value.is_null()) c.budget_override = value.get<std::uint64_t>();
      }
      else if (key == "budget_scale") c.budget_scale = value.get<double>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "timing") c.timing = value.get<bool>();
      else if (key == "d") c.d = value.get<std::size_t>();
      else if (key == "r") c.r = value.is_array() ? value.get<std::vector<double>>() : std::vector<double>{value.get<double>()};
      else throw Error(ErrorCode::ConfigError, "unknown config field '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, "field '" + key + "': " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Eigen::VectorXd load_theta_csv(const std::filesystem::path& path) {
  const auto rows = load_arms_csv(path);
  return rows.front();
}

RunSummary run_bai_experiment(const ExperimentConfig& config, std::ostream* csv) {
  config.validate();
  const ArmSet set = parse_set_spec(config.set);
  const NormConsts consts = config.consts.empty() ? NormConsts{} : NormConsts::load(config.consts);

  std::optional<HardFamily> family;
  Eigen::VectorXd fixed_theta;
  if (config.theta.rfind("gen:", 0) == 0) {
    const std::string rest = config.theta.substr(4);
    const auto colon = rest.find(':');
    family = HardFamily::parse(rest.substr(0, colon), colon == std::string::npos ? "" : rest.substr(colon + 1),
                               config.eps);
    if (family->arm_set().dimension() != set.dimension()) {
      throw Error(ErrorCode::ConfigError, "theta: family dimension differs from the set");
    }
  } else if (config.theta.rfind("file:", 0) == 0) {
    fixed_theta = load_theta_csv(config.theta.substr(5));
  } else {
    fixed_theta = to_vector(config.theta_values);
  }
  if (!family && static_cast<std::size_t>(fixed_theta.size()) != set.dimension()) {
    throw Error(ErrorCode::ConfigError, "theta: length " + std::to_string(fixed_theta.size()) +
                                            " differs from set dimension " + std::to_string(set.dimension()));
  }

  FixedDesignOptions design;
  design.budget_override = config.budget_override;
  design.budget_scale = config.budget_scale;
  design.seed = config.master_seed;
  std::optional<FixedDesignPlan> fixed_plan;
  std::optional<PartitionedPlan> part_plan;
  PartitionedOptions part_opts;
  UnionBallOptions ub_opts;
  ub_opts.consts = consts;
  if (config.algo == "fixed") {
    fixed_plan = plan_fixed_design(set, config.eps, config.delta, design);
  } else if (config.algo == "partitioned") {
    part_opts.design = design;
    part_opts.partition_seed = config.master_seed;
    part_plan = plan_partitioned(set, config.eps, config.delta, part_opts);
  } else if (config.algo == "unionballs") {
    const auto* u = std::get_if<sets::UnionOfBalls>(&set.kind());
    if (!u) throw Error(ErrorCode::ConfigError, "algo: 'unionballs' needs a unionballs set");
    FixedDesignOptions phase2 = design;
    phase2.budget_override.reset();
    ub_opts.phase2 = phase2;
    fixed_plan = plan_fixed_design(ArmSet::ball(u->d), config.eps / 2.0, config.delta / 2.0, phase2);
    ub_opts.phase2_plan = &*fixed_plan;
  }

  const std::string spec = config.set;
  auto trial = [&](std::size_t i, std::uint64_t seed) {
    const double start = config.timing ? now_ms() : 0.0;
    Eigen::VectorXd theta = fixed_theta;
    if (family) {
      Rng theta_rng(stable_mix(seed, 1));
      theta = family->sample(theta_rng).theta;
    }
    Environment env(theta, stable_mix(seed, 0));
    BaiResult res;
    std::string branch;
    if (config.algo == "fixed") {
      res = run_fixed_design(set, *fixed_plan, env);
    } else if (config.algo == "partitioned") {
      res = run_partitioned(set, *part_plan, config.eps, config.delta, env, part_opts);
    } else if (config.algo == "unionballs") {
      UnionBallOptions o = ub_opts;
      o.seed = stable_mix(seed, 2);
      res = union_ball_adaptive_bai(set, config.eps, config.delta, env, o);
      branch = "block_" + std::to_string(static_cast<std::size_t>(res.diagnostics.at("chosen_block")));
    } else {
      Rng rng(stable_mix(seed, 2));
      res = uniform_baseline_bai(set, *config.budget_override, env, rng);
    }
    const Referee ref(env, set);
    RunRecord r;
    r.trial = i;
    r.seed = seed;
    r.algo = config.algo;
    r.set = spec;
    r.d = set.dimension();
    r.k = block_count_k(set);
    r.m = block_count_m(set);
    r.eps = config.eps;
    r.delta = config.delta;
    r.samples = res.samples;
    r.estimate = ref.value(res.chosen);
    r.true_value = ref.optimal_value();
    r.success = ref.is_eps_best(res.chosen, config.eps);
    r.branch = branch;
    r.theta_digest = env.theta_digest();
    r.wall_ms = config.timing ? now_ms() - start : 0.0;
    return r;
  };
  if (csv) *csv << kCsvHeader << '\n';
  RecordSink sink;
  if (csv) sink = [&](const RunRecord& r) { *csv << csv_row(r) << '\n'; };
  return summarize(run_trials(config.trials, config.master_seed, config.workers, trial, sink));
}

std::string csv_row(const NormRecord& r) {
  std::ostringstream os;
  os << r.trial << ',' << r.d << ',' << format_double(r.r_true) << ',' << format_double(r.eps) << ','
     << format_double(r.delta) << ',' << to_string(r.branch) << ',' << format_double(r.r0) << ','
     << format_double(r.r_hat) << ',' << format_double(r.abs_err) << ',' << r.samples << ','
     << (r.success ? 1 : 0);
  return os.str();
}

std::vector<NormRecord> read_norm_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kNormCsvHeader) throw Error(ErrorCode::ConfigError, "line 1: unexpected CSV header '" + line + "'");
  std::vector<NormRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = parse_csv_line(line, lineno);
    if (f.size() != 11) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected 11 columns, got " +
                                              std::to_string(f.size()));
    }
    NormRecord r;
    r.trial = parse_field<std::size_t>(f[0], lineno, "trial");
    r.d = parse_field<std::size_t>(f[1], lineno, "d");
    r.r_true = parse_field<double>(f[2], lineno, "r_true");
    r.eps = parse_field<double>(f[3], lineno, "eps");
    r.delta = parse_field<double>(f[4], lineno, "delta");
    bool known = false;
    for (auto b : {NormBranch::Tiny, NormBranch::Mid, NormBranch::Large, NormBranch::LargeSingularFallback}) {
      if (to_string(b) == f[5]) {
        r.branch = b;
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": unknown branch '" + f[5] + "'");
    r.r0 = parse_field<double>(f[6], lineno, "r0");
    r.r_hat = parse_field<double>(f[7], lineno, "r_hat");
    r.abs_err = parse_field<double>(f[8], lineno, "abs_err");
    r.samples = parse_field<std::uint64_t>(f[9], lineno, "samples");
    r.success = parse_field<int>(f[10], lineno, "success") == 1;
    out.push_back(r);
  }
  return out;
}

Eigen::VectorXd norm_instance(std::size_t d, double r, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd u(static_cast<Eigen::Index>(d));
  do {
    for (auto& e : u) e = rng.gaussian();
  } while (u.norm() == 0.0);
  return r * u.normalized();
}

std::vector<NormRecord> run_norm_experiment(const ExperimentConfig& config, const NormConsts& consts,
                                            std::ostream* csv) {
  config.validate();
  if (csv) *csv << kNormCsvHeader << '\n';
  std::vector<NormRecord> all;
  for (std::size_t ri = 0; ri < config.r.size(); ++ri) {
    const double r_true = config.r[ri];
    std::vector<NormRecord> cell(config.trials);
    auto trial = [&](std::size_t i, std::uint64_t seed) {
      Environment env(norm_instance(config.d, r_true, stable_mix(seed, 1)), stable_mix(seed, 0));
      Rng rng(stable_mix(seed, 2));
      const auto rep = estimate_norm(env, config.eps, config.delta, consts, rng);
      NormRecord& n = cell[i];
      n.trial = i;
      n.d = config.d;
      n.r_true = r_true;
      n.eps = config.eps;
      n.delta = config.delta;
      n.branch = rep.branch;
      n.r0 = rep.r0;
      n.r_hat = rep.r_hat;
      n.abs_err = std::fabs(rep.r_hat - r_true);
      n.samples = rep.samples;
      n.success = n.abs_err <= config.eps;
      RunRecord rr;
      rr.trial = i;
      rr.seed = seed;
      return rr;
    };
    // Each radius gets its own seed stream.
    const auto cell_seed = stable_mix(config.master_seed, 1000003 + ri);
    RecordSink sink;
    if (csv) sink = [&](const RunRecord& rr) { *csv << csv_row(cell[rr.trial]) << '\n'; };
    run_trials(config.trials, cell_seed, config.workers, trial, sink);
    all.insert(all.end(), cell.begin(), cell.end());
  }
  return all;
}

std::pair<double, BudgetProbe> autotune_budget(const std::function<BudgetProbe(double)>& probe,
                                               double target, double beta_start, double beta_min,
                                               double beta_max, std::size_t refine_steps) {
  double beta = beta_start;
  BudgetProbe hit = probe(beta);
  double lo = 0.0;
  if (hit.success_rate >= target) {
    // Already feasible: halve until the target is missed to bracket the threshold.
    while (beta / 2.0 >= beta_min) {
      const BudgetProbe p = probe(beta / 2.0);
      if (p.success_rate < target) {
        lo = beta / 2.0;
        break;
      }
      beta /= 2.0;
      hit = p;
    }
  } else {
    while (hit.success_rate < target) {
      if (beta >= beta_max) {
        throw Error(ErrorCode::NoConvergence,
                    "success target not reached at budget multiplier " + format_double(beta));
      }
      lo = beta;
      beta *= 2.0;
      hit = probe(beta);
    }
  }
  if (lo > 0.0) {
    double hi = beta;
    for (std::size_t s = 0; s < refine_steps; ++s) {
      const double mid = std::sqrt(lo * hi);
      const BudgetProbe p = probe(mid);
      if (p.success_rate >= target) {
        hi = mid;
        hit = p;
      } else {
        lo = mid;
      }
    }
    beta = hi;
  }
  return {beta, hit};
}

GapResult run_gap_experiment(const GapConfig& config, const RecordSink& sink) {
  if (config.dims.size() < 3) {
    throw Error(ErrorCode::InsufficientPoints,
                "scaling sweep needs at least 3 dimensions, got " + std::to_string(config.dims.size()));
  }
  GapResult result;
  std::vector<double> xs;
  std::vector<double> ya;
  std::vector<double> yn;
  for (const std::size_t d : config.dims) {
    const std::size_t k = d;
    const ArmSet set = ArmSet::union_of_balls(k, d);
    const ArmSet ball = ArmSet::ball(d);
    const std::string spec = set.spec();

    FixedDesignOptions base = config.design;
    base.enforce_rounding_floor = false;
    base.seed = stable_mix(config.seed, d);

    // Theta for trial `seed`: a random block carries a random direction of norm rho.
    auto instance = [&](std::uint64_t seed, std::size_t& block) {
      Rng theta_rng(stable_mix(seed, 1));
      Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k * d));
      block = static_cast<std::size_t>(theta_rng.below(k));
      theta.segment(static_cast<Eigen::Index>(block * d), static_cast<Eigen::Index>(d)) =
          norm_instance(d, config.rho, theta_rng.next_u64());
      return theta;
    };
    auto plan_for = [&](const ArmSet& s, double eps, double delta, double beta) {
      FixedDesignOptions o = base;
      o.budget_scale = beta;
      return plan_fixed_design(s, eps, delta, o);
    };

    // Runs `solve` on common random instances and records every trial.
    auto probe = [&](const std::string& algo, const std::string& branch,
                     const std::function<BaiResult(Environment&, std::size_t, std::uint64_t)>& solve) {
      auto trial = [&](std::size_t i, std::uint64_t seed) {
        std::size_t block = 0;
        Environment env(instance(seed, block), stable_mix(seed, 0));
        const BaiResult res = solve(env, block, seed);
        const Referee ref(env, set);
        RunRecord r;
        r.trial = i;
        r.seed = seed;
        r.algo = algo;
        r.set = spec;
        r.d = set.dimension();
        r.k = k;
        r.eps = config.eps;
        r.delta = config.delta;
        r.samples = res.samples;
        r.estimate = ref.value(res.chosen);
        r.true_value = ref.optimal_value();
        r.success = ref.is_eps_best(res.chosen, config.eps);
        r.branch = branch;
        r.theta_digest = env.theta_digest();
        return r;
      };
      const auto records = run_trials(config.trials, stable_mix(config.seed, 7919 * d), config.workers, trial, sink);
      const auto s = summarize(records);
      return BudgetProbe{s.rate, s.mean_samples};
    };
    auto tune = [&](const std::function<BudgetProbe(double)>& f, double target) {
      return autotune_budget(f, target, config.beta_start, config.beta_min, config.beta_max, config.refine_steps);
    };

    const auto [beta_n, probe_n] = tune(
        [&](double beta) {
          const auto plan = plan_for(set, config.eps, config.delta, beta);
          return probe("nonadaptive", "beta=" + format_double(beta),
                       [&](Environment& env, std::size_t, std::uint64_t) { return run_fixed_design(set, plan, env); });
        },
        config.target);

    // Phase 2 alone, on the planted block, to a stricter target so that
    // phase-1 errors have room.
    const auto [beta_2, probe_2] = tune(
        [&](double beta) {
          const auto plan = plan_for(ball, config.eps / 2.0, config.delta / 2.0, beta);
          return probe("adaptive_phase2", "beta=" + format_double(beta),
                       [&](Environment& env, std::size_t block, std::uint64_t) {
                         BaiResult inner = run_fixed_design(ball, plan, EnvView(env).block(block * d, d));
                         BaiResult out;
                         out.chosen = Arm::Zero(static_cast<Eigen::Index>(k * d));
                         out.chosen.segment(static_cast<Eigen::Index>(block * d), static_cast<Eigen::Index>(d)) =
                             inner.chosen;
                         out.samples = inner.samples;
                         return out;
                       });
        },
        (1.0 + config.target) / 2.0);
    (void)probe_2;

    const auto phase2 = plan_for(ball, config.eps / 2.0, config.delta / 2.0, beta_2);
    const auto [beta_1, probe_1] = tune(
        [&](double beta) {
          UnionBallOptions ub;
          ub.consts = config.consts;
          ub.consts.c0 *= beta;
          ub.consts.c1 *= beta;
          ub.consts.C0 *= beta;
          ub.consts.C1 *= beta;
          ub.phase2_plan = &phase2;
          return probe("adaptive", "beta=" + format_double(beta) + ";phase2=" + format_double(beta_2),
                       [&](Environment& env, std::size_t, std::uint64_t seed) {
                         UnionBallOptions o = ub;
                         o.seed = stable_mix(seed, 2);
                         return union_ball_adaptive_bai(set, config.eps, config.delta, env, o);
                       });
        },
        config.target);

    result.points.push_back({"adaptive", d, beta_1, beta_2, probe_1.mean_samples, probe_1.success_rate});
    result.points.push_back({"nonadaptive", d, beta_n, 0.0, probe_n.mean_samples, probe_n.success_rate});
    ya.push_back(probe_1.mean_samples);
    yn.push_back(probe_n.mean_samples);
    xs.push_back(static_cast<double>(d));
  }
  result.adaptive_fit = fit_loglog(xs, ya);
  result.nonadaptive_fit = fit_loglog(xs, yn);
  return result;
}

}  // namespace linbai
