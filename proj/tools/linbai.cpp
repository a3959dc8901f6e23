#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linbai/arm_sets.hpp"
#include "linbai/designs.hpp"
#include "linbai/error.hpp"
#include "linbai/hard_instances.hpp"
#include "linbai/harness.hpp"
#include "linbai/norm_estimation.hpp"
#include "linbai/pure_exploration.hpp"

using namespace linbai;
using json = nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out;
  std::string config;
  bool timing = false;
};

// Output stream for --out, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json arm_json(const Arm& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

json summary_json(const RunSummary& s) {
  return {{"trials", s.trials},         {"successes", s.successes},       {"rate", s.rate},
          {"ci_lo", s.ci.lo},           {"ci_hi", s.ci.hi},               {"mean_samples", s.mean_samples},
          {"median_samples", s.median_samples}, {"max_samples", s.max_samples}};
}

std::string theta_source(const std::string& arg) {
  if (arg.rfind("gen:", 0) == 0 || arg.rfind("file:", 0) == 0) return arg;
  return "file:" + arg;
}

std::vector<double> norm_grid(std::size_t d) {
  const double s = std::sqrt(static_cast<double>(d));
  return {0.0, 1.0, s, 5.0 * s};
}

int cmd_width(const Globals& g, const std::string& spec, const std::string& kind, std::size_t draws,
              double delta) {
  const ArmSet set = parse_set_spec(spec);
  const auto gopt = g_optimal(set);
  OptimizedDesign chosen = gopt;
  if (kind == "width") {
    WidthDesignOptions wo;
    wo.seed = stable_mix(g.seed, 1);
    chosen = width_design(set, wo, &gopt.design);
  }
  const Eigen::MatrixXd a = moment_matrix(chosen.design);
  const auto tau = tau_statistic(set, a, delta, draws, g.seed);
  json j = {{"set", set.spec()},
            {"design", kind},
            {"mean", tau.width.mean},
            {"std_error", tau.width.std_error},
            {"draws", tau.width.draws},
            {"max_leverage", tau.max_leverage},
            {"tau", tau.value},
            {"support_size", chosen.design.size()}};
  Output out(g.out);
  out.stream() << j.dump(2) << '\n';
  return 0;
}

int cmd_design(const Globals& g, const std::string& spec, const std::string& kind, std::uint64_t budget,
               double delta, bool no_floor) {
  const ArmSet set = parse_set_spec(spec);
  FixedDesignOptions fo;
  fo.seed = g.seed;
  const DesignTriple triple = design_triple(set, fo);
  const Design& design = kind == "g" ? triple.lambda2 : kind == "width" ? triple.lambda1 : triple.lambda0;
  json j;
  j["set"] = set.spec();
  j["kind"] = kind;
  j["support"] = json::array();
  for (const auto& x : design.support) j["support"].push_back(arm_json(x));
  j["weights"] = std::vector<double>(design.weights.data(), design.weights.data() + design.weights.size());
  j["max_leverage"] = max_leverage(set, moment_matrix(design));
  if (budget > 0) {
    RoundingOptions ro;
    ro.enforce_floor = !no_floor;
    ro.delta = delta;
    ro.seed = stable_mix(g.seed, 2);
    const FixedDesign fixed = round_design(set, design, budget, ro);
    j["budget"] = fixed.budget;
    j["counts"] = fixed.counts;
    j["count_support"] = json::array();
    for (const auto& x : fixed.support) j["count_support"].push_back(arm_json(x));
    j["quality"] = {{"leverage_ratio", fixed.quality.leverage_ratio},
                    {"width_ratio", fixed.quality.width_ratio},
                    {"tau_ratio", fixed.quality.tau_ratio},
                    {"forced_pulls", fixed.quality.forced_pulls}};
  }
  Output out(g.out);
  out.stream() << j.dump(2) << '\n';
  return 0;
}

int cmd_bai(ExperimentConfig c) {
  c.experiment = "bai";
  Output out(c.out);
  const auto s = run_bai_experiment(c, &out.stream());
  std::cerr << summary_json(s).dump() << '\n';
  return 0;
}

int cmd_norm(ExperimentConfig c) {
  c.experiment = "norm";
  const NormConsts consts = c.consts.empty() ? NormConsts{} : NormConsts::load(c.consts);
  Output out(c.out);
  const auto records = run_norm_experiment(c, consts, &out.stream());
  std::size_t ok = 0;
  for (const auto& r : records) ok += r.success ? 1 : 0;
  std::cerr << json{{"records", records.size()}, {"successes", ok}}.dump() << '\n';
  return 0;
}

int cmd_gap(const Globals& g, GapConfig c, const std::string& summary_path) {
  c.seed = g.seed;
  c.workers = g.workers;
  Output out(g.out);
  out.stream() << kCsvHeader << '\n';
  const auto result = run_gap_experiment(c, [&](const RunRecord& r) { out.stream() << csv_row(r) << '\n'; });
  std::ostringstream sum;
  sum << "row,algo,d,beta,beta_phase2,mean_samples,success_rate,slope,intercept,r2\n";
  for (const auto& p : result.points) {
    sum << "point," << p.algo << ',' << p.d << ',' << format_double(p.beta) << ','
        << (p.algo == "adaptive" ? format_double(p.beta_phase2) : "") << ',' << format_double(p.mean_samples)
        << ',' << format_double(p.success_rate) << ",,,\n";
  }
  for (const auto& [algo, fit] : {std::pair{"adaptive", result.adaptive_fit}, {"nonadaptive", result.nonadaptive_fit}}) {
    sum << "fit," << algo << ",,,,,," << format_double(fit.slope) << ',' << format_double(fit.intercept) << ','
        << format_double(fit.r2) << '\n';
  }
  if (summary_path.empty()) {
    std::cerr << sum.str();
  } else {
    std::ofstream f(summary_path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + summary_path);
    f << sum.str();
  }
  return 0;
}

int cmd_hard(const Globals& g, const std::string& family, const std::string& params, double eps,
             std::size_t count) {
  const HardFamily fam = HardFamily::parse(family, params, eps);
  Rng rng(g.seed);
  Output out(g.out);
  const std::size_t d = fam.arm_set().dimension();
  for (std::size_t i = 0; i < d; ++i) out.stream() << (i ? "," : "") << "theta_" << i;
  out.stream() << '\n';
  for (std::size_t n = 0; n < count; ++n) {
    const auto s = fam.sample(rng);
    for (Eigen::Index i = 0; i < s.theta.size(); ++i) out.stream() << (i ? "," : "") << format_double(s.theta[i]);
    out.stream() << '\n';
  }
  return 0;
}

int cmd_report(const Globals& g, const std::string& in_path) {
  std::ifstream in(in_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + in_path);
  std::string header;
  std::getline(in, header);
  in.seekg(0);
  json j;
  if (header == kNormCsvHeader) {
    std::map<std::pair<std::size_t, double>, std::vector<NormRecord>> cells;
    for (auto& r : read_norm_csv(in)) cells[{r.d, r.r_true}].push_back(r);
    j = json::array();
    for (const auto& [key, rs] : cells) {
      std::uint64_t ok = 0;
      double samples = 0.0;
      for (const auto& r : rs) {
        ok += r.success ? 1 : 0;
        samples += static_cast<double>(r.samples);
      }
      const auto ci = wilson_interval(ok, rs.size());
      j.push_back({{"d", key.first},
                   {"r_true", key.second},
                   {"trials", rs.size()},
                   {"failure_rate", 1.0 - static_cast<double>(ok) / static_cast<double>(rs.size())},
                   {"failure_ci_hi", 1.0 - ci.lo},
                   {"mean_samples", samples / static_cast<double>(rs.size())}});
    }
  } else {
    const auto records = read_csv(in);
    std::map<std::string, std::map<std::size_t, std::vector<RunRecord>>> groups;
    for (const auto& r : records) groups[r.algo][r.d].push_back(r);
    j = json::object();
    for (const auto& [algo, by_d] : groups) {
      json rows = json::array();
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& [d, rs] : by_d) {
        const auto s = summarize(rs);
        json row = summary_json(s);
        row["d"] = d;
        rows.push_back(row);
        xs.push_back(static_cast<double>(d));
        ys.push_back(s.mean_samples);
      }
      j[algo]["points"] = rows;
      if (xs.size() >= 3) {
        const auto fit = fit_loglog(xs, ys);
        j[algo]["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
      }
    }
  }
  Output out(g.out);
  out.stream() << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear bandit best-arm identification simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output path (stdout when omitted)");
  app.add_option("--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_flag("--timing", g.timing, "Record wall-clock time per trial");

  std::string spec;
  std::string kind = "width";
  std::size_t draws = 100000;
  double delta = 0.1;
  double eps = 0.1;
  std::size_t trials = 100;
  std::string consts;

  auto* width = app.add_subcommand("width", "Estimate the Gaussian width under an optimized design");
  width->add_option("--set", spec, "Arm set spec")->required();
  width->add_option("--design", kind, "g | width")->check(CLI::IsMember({"g", "width"}));
  width->add_option("--draws", draws, "Monte Carlo draws");
  width->add_option("--delta", delta, "Confidence for the tau statistic");

  std::uint64_t budget = 0;
  bool no_floor = false;
  auto* design = app.add_subcommand("design", "Compute and round an experimental design");
  design->add_option("--set", spec, "Arm set spec")->required();
  design->add_option("--kind", kind, "g | width | mix")->check(CLI::IsMember({"g", "width", "mix"}));
  design->add_option("--T", budget, "Budget to round to (0 skips rounding)");
  design->add_option("--delta", delta, "Confidence for the quality report");
  design->add_flag("--no-floor", no_floor, "Allow budgets below the 180 r floor");

  std::string algo = "fixed";
  std::string theta;
  std::optional<std::uint64_t> budget_override;
  double budget_scale = 1.0;
  auto* bai = app.add_subcommand("bai", "Run epsilon-best-arm identification trials");
  bai->add_option("--set", spec, "Arm set spec");
  bai->add_option("--algo", algo, "fixed | partitioned | unionballs | uniform");
  bai->add_option("--theta", theta, "CSV path or gen:<family>:<params>");
  bai->add_option("--eps", eps);
  bai->add_option("--delta", delta);
  bai->add_option("--trials", trials);
  bai->add_option("--budget", budget_override, "Fixed budget (overrides the formula)");
  bai->add_option("--budget-scale", budget_scale, "Multiplier on formula budgets");
  bai->add_option("--consts", consts, "Norm-estimation constants JSON")->check(CLI::ExistingFile);

  std::size_t d = 0;
  std::string r_arg;
  auto* norm = app.add_subcommand("norm", "Run norm-estimation trials");
  norm->add_option("--d", d);
  norm->add_option("--r", r_arg, "True norm or 'grid'");
  norm->add_option("--eps", eps);
  norm->add_option("--delta", delta);
  norm->add_option("--trials", trials);
  norm->add_option("--consts", consts, "Norm-estimation constants JSON")->check(CLI::ExistingFile);

  GapConfig gap_cfg;
  std::string summary_path;
  auto* gap = app.add_subcommand("gap", "Adaptivity-gap sweep on unions of balls with k = d");
  gap->add_option("--dims", gap_cfg.dims);
  gap->add_option("--eps", gap_cfg.eps);
  gap->add_option("--delta", gap_cfg.delta);
  gap->add_option("--rho", gap_cfg.rho, "Norm of the planted block");
  gap->add_option("--trials", gap_cfg.trials);
  gap->add_option("--target", gap_cfg.target, "Success rate target");
  gap->add_option("--width-iters", gap_cfg.design.width.max_iters);
  gap->add_option("--consts", consts, "Norm-estimation constants JSON")->check(CLI::ExistingFile);
  gap->add_option("--summary", summary_path, "Summary CSV with tuned points and fitted slopes");

  std::string family;
  std::string params;
  std::size_t count = 1;
  auto* hard = app.add_subcommand("hard", "Sample hard instances");
  hard->add_option("--family", family)->required()->check(
      CLI::IsMember({"multitask", "mset", "cube_pm", "cube_01", "unionballs"}));
  hard->add_option("--params", params);
  hard->add_option("--eps", eps);
  hard->add_option("--count", count);

  std::string in_path;
  auto* report = app.add_subcommand("report", "Recompute summaries from a CSV");
  report->add_option("--in", in_path)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    auto experiment = [&](const std::string& kind_name) {
      ExperimentConfig c;
      if (!g.config.empty()) {
        c = load_config(g.config);
      } else {
        c.experiment = kind_name;
        c.set = spec;
        c.algo = algo;
        if (!theta.empty()) c.theta = theta_source(theta);
        c.eps = eps;
        c.delta = delta;
        c.trials = trials;
        c.budget_override = budget_override;
        c.budget_scale = budget_scale;
        c.consts = consts;
        c.d = d;
        if (r_arg == "grid") {
          c.r = norm_grid(d);
        } else if (!r_arg.empty()) {
          c.r = {std::stod(r_arg)};
        }
      }
      if (app.count("--seed")) c.master_seed = g.seed;
      if (app.count("--workers")) c.workers = g.workers;
      if (!g.out.empty()) c.out = g.out;
      if (g.timing) c.timing = true;
      return c;
    };
    if (*width) return cmd_width(g, spec, kind, draws, delta);
    if (*design) return cmd_design(g, spec, kind, budget, delta, no_floor);
    if (*bai) return cmd_bai(experiment("bai"));
    if (*norm) return cmd_norm(experiment("norm"));
    if (*gap) {
      if (!consts.empty()) gap_cfg.consts = NormConsts::load(consts);
      return cmd_gap(g, gap_cfg, summary_path);
    }
    if (*hard) return cmd_hard(g, family, params, eps, count);
    if (*report) return cmd_report(g, in_path);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
