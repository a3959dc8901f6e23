// Searches norm-estimation constants over a power-of-two grid and keeps the
// cheapest setting whose failure rate stays below the target in every cell.
// A cell passes when the Wilson 95% upper bound of its failure rate is at
// most the target. With --check, evaluates a constants file instead.
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "linbai/harness.hpp"

using namespace linbai;

namespace {

struct GridResult {
  double worst_failure = 0.0;
  // Largest Wilson upper bound on a cell's failure rate.
  double worst_upper = 0.0;
  // max samples / (d log(1/delta) / eps^2)
  double cost = 0.0;
};

GridResult evaluate(const NormConsts& consts, const std::vector<std::size_t>& dims, const std::vector<double>& epss,
                    double delta, std::size_t trials, std::uint64_t seed) {
  GridResult g;
  for (double eps : epss) {
    for (std::size_t d : dims) {
      ExperimentConfig c;
      c.experiment = "norm";
      c.d = d;
      const double s = std::sqrt(static_cast<double>(d));
      c.r = {0.0, eps / 2.0, 1.0, s, 5.0 * s};
      c.eps = eps;
      c.delta = delta;
      c.trials = trials;
      c.master_seed = stable_mix(seed, d);
      std::map<double, std::pair<std::size_t, std::size_t>> fails;
      const double unit = static_cast<double>(d) * std::log(1.0 / delta) / (eps * eps);
      for (const auto& r : run_norm_experiment(c, consts)) {
        fails[r.r_true].first += r.success ? 0 : 1;
        fails[r.r_true].second += 1;
        g.cost = std::max(g.cost, static_cast<double>(r.samples) / unit);
      }
      for (const auto& [r, f] : fails) {
        g.worst_failure = std::max(g.worst_failure, static_cast<double>(f.first) / static_cast<double>(f.second));
        g.worst_upper = std::max(g.worst_upper, 1.0 - wilson_interval(f.second - f.first, f.second).lo);
      }
    }
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrate norm-estimation constants"};
  std::vector<std::size_t> dims = {4, 16, 64};
  std::vector<double> epss = {0.1, 0.2};
  double delta = 0.1;
  std::size_t trials = 500;
  double max_failure = -1.0;
  std::uint64_t seed = 20240;
  std::string out = "norm_constants.json";
  std::string check;
  app.add_option("--dims", dims);
  app.add_option("--eps", epss);
  app.add_option("--delta", delta);
  app.add_option("--trials", trials);
  app.add_option("--max-failure", max_failure, "Failure target per cell (default: delta)");
  app.add_option("--seed", seed);
  app.add_option("--out", out);
  app.add_option("--check", check, "Evaluate this constants file instead of searching");
  CLI11_PARSE(app, argc, argv);
  if (max_failure < 0.0) max_failure = delta;

  try {
    if (!check.empty()) {
      const auto g = evaluate(NormConsts::load(check), dims, epss, delta, trials, seed);
      std::cout << "worst_failure=" << g.worst_failure << " upper=" << g.worst_upper << " C=" << g.cost << '\n';
      return g.worst_upper <= max_failure ? 0 : 1;
    }

    NormConsts best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (double c0 : {0.5, 1.0, 2.0, 4.0}) {
      for (double scale : {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const NormConsts consts{c0, scale, 1.0, scale};
        const auto g = evaluate(consts, dims, epss, delta, trials, seed);
        std::cerr << "c0=" << c0 << " scale=" << scale << " worst_failure=" << g.worst_failure
                  << " upper=" << g.worst_upper << " C=" << g.cost << std::endl;
        if (g.worst_upper <= max_failure) {
          if (g.cost < best_cost) {
            best_cost = g.cost;
            best = consts;
          }
          break;
        }
      }
    }
    if (!std::isfinite(best_cost)) {
      std::cerr << "no setting met the failure target\n";
      return 1;
    }
    nlohmann::json j = {{"c0", best.c0}, {"c1", best.c1}, {"C0", best.C0}, {"C1", best.C1}};
    std::ofstream(out) << j.dump(2) << '\n';
    std::cout << j.dump() << " C=" << best_cost << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
