#ifndef EPMC_EVAL_HPP
#define EPMC_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "epmc/algorithm.hpp"

namespace epmc {

struct EvalResult {
  double mean_cost = 0.0;
  double std_error = 0.0;
  int n_simu = 0;
};

// Simulates n_simu fresh trajectories under the policy and averages the
// path costs. The evaluation streams live in a namespace disjoint from the
// training streams for any numeric seed.
EvalResult evaluate_policy(const ControlProblem& problem, const MarkovPolicy& policy, int n_simu,
                           const TimeGrid& grid, std::uint64_t seed);

struct CampaignRun {
  int run_id = 0;
  std::uint64_t seed = 0;
  double mean_cost = 0.0;
  double std_error = 0.0;
};

struct CampaignReport {
  std::vector<CampaignRun> runs;
  double grand_mean = 0.0;
  double between_run_std = 0.0;  // dispersion of the run means
  double pooled_std_error = 0.0;  // trajectory-level error of the grand mean
  // "7.60(1e-6)"-style cell: grand mean with the between-run std.
  std::string cell() const;
};

// n_grid independent solver runs, each evaluated on n_simu fresh
// trajectories; seeds are derived per run so the runs are independent and
// order-invariant.
CampaignReport evaluation_campaign(const ControlProblem& problem, const SolveConfig& solve_config,
                                   int n_grid, int n_simu, std::uint64_t seed);

void export_campaign_csv(const CampaignReport& report, const std::string& path,
                         const std::string& provenance = "");

}  // namespace epmc

#endif  // EPMC_EVAL_HPP
