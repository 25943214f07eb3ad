#include "epmc/eval.hpp"

#include <cmath>
#include <cstdio>

#include "epmc/csv.hpp"
#include "epmc/rng.hpp"

namespace epmc {

EvalResult evaluate_policy(const ControlProblem& problem, const MarkovPolicy& policy, int n_simu,
                           const TimeGrid& grid, std::uint64_t seed) {
  if (n_simu < 2) throw InvalidParams("evaluate: n_simu must be >= 2");
  const PathBatch paths = simulate_paths(problem, policy, n_simu, grid,
                                         rng::derive_seed(seed, rng::Domain::kEval, 0));
  const std::vector<double> costs = path_costs(paths, problem);
  double mean = 0.0;
  for (double y : costs) mean += y;
  mean /= n_simu;
  double var = 0.0;
  for (double y : costs) var += (y - mean) * (y - mean);
  var /= (n_simu - 1);
  EvalResult out;
  out.mean_cost = mean;
  out.std_error = std::sqrt(var / n_simu);
  out.n_simu = n_simu;
  return out;
}

std::string CampaignReport::cell() const {
  char mean_buf[32], std_buf[32];
  std::snprintf(mean_buf, sizeof(mean_buf), "%.2f", grand_mean);
  std::snprintf(std_buf, sizeof(std_buf), "%.0e", between_run_std);
  // Trim the exponent's leading zeros: 1e-06 -> 1e-6.
  std::string s(std_buf);
  const auto epos = s.find('e');
  if (epos != std::string::npos && epos + 2 < s.size()) {
    std::size_t digit = epos + 2;
    while (digit + 1 < s.size() && s[digit] == '0') s.erase(digit, 1);
  }
  return std::string(mean_buf) + "(" + s + ")";
}

CampaignReport evaluation_campaign(const ControlProblem& problem, const SolveConfig& solve_config,
                                   int n_grid, int n_simu, std::uint64_t seed) {
  if (n_grid < 1) throw InvalidParams("campaign: n_grid must be >= 1");
  CampaignReport report;
  report.runs.reserve(n_grid);
  std::string failures;
  for (int i = 0; i < n_grid; ++i) {
    CampaignRun run;
    run.run_id = i;
    run.seed = rng::derive_seed(seed, rng::Domain::kCampaignTrain, static_cast<std::uint64_t>(i));
    try {
      SolveConfig cfg = solve_config;
      cfg.master_seed = run.seed;
      const SolveResult solved = solve(problem, cfg);
      const EvalResult eval =
          evaluate_policy(problem, solved.policy, n_simu, solve_config.grid,
                          rng::derive_seed(seed, rng::Domain::kCampaignEval,
                                           static_cast<std::uint64_t>(i)));
      run.mean_cost = eval.mean_cost;
      run.std_error = eval.std_error;
      report.runs.push_back(run);
    } catch (const std::exception& e) {
      if (!failures.empty()) failures += "; ";
      failures += "run " + std::to_string(i) + ": " + e.what();
    }
  }
  if (!failures.empty()) throw Error("campaign: " + failures);

  double grand = 0.0;
  for (const auto& r : report.runs) grand += r.mean_cost;
  grand /= report.runs.size();
  report.grand_mean = grand;

  double between = 0.0;
  for (const auto& r : report.runs) between += (r.mean_cost - grand) * (r.mean_cost - grand);
  report.between_run_std =
      (report.runs.size() > 1) ? std::sqrt(between / (report.runs.size() - 1)) : 0.0;

  double pooled = 0.0;
  for (const auto& r : report.runs) pooled += r.std_error * r.std_error;
  report.pooled_std_error = std::sqrt(pooled) / report.runs.size();
  return report;
}

void export_campaign_csv(const CampaignReport& report, const std::string& path,
                         const std::string& provenance) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  out.header({"run_id", "seed", "mean_cost", "std_error"});
  for (const auto& r : report.runs)
    out.row({std::to_string(r.run_id), std::to_string(r.seed), csv::format_double(r.mean_cost),
             csv::format_double(r.std_error)});
  out.row({"grand", "", csv::format_double(report.grand_mean),
           csv::format_double(report.between_run_std)});
  out.comment("grand_mean=" + csv::format_double(report.grand_mean) +
              " between_run_std=" + csv::format_double(report.between_run_std) +
              " pooled_std_error=" + csv::format_double(report.pooled_std_error) + " cell=" +
              report.cell());
}

}  // namespace epmc
