#ifndef EPMC_ALGORITHM_HPP
#define EPMC_ALGORITHM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "epmc/policy_min.hpp"
#include "epmc/regress.hpp"
#include "epmc/simulate.hpp"
#include "epmc/twist.hpp"

namespace epmc {

struct SolveConfig {
  double epsilon = 1.0;
  int iterations = 10;   // K
  int particles = 1000;  // N
  TimeGrid grid{1, 1.0};
  int basis_degree = 0;  // r
  std::uint64_t master_seed = 0;
  MarkovPolicy initial_policy;  // u^0; must live on `grid`
  double ess_floor = 2.0;
  FitOptions fit;
  MinimizeOptions minimize;
  // Optional early stop: |delta cost_QP| < tol for 3 consecutive iterations.
  // Off by default; the reference loop runs exactly K iterations.
  double early_stop_tol = 0.0;

  void validate(int problem_dim) const;
};

// One row of the cost-tracking table behind the descent diagnostics.
struct IterationReport {
  int k = 0;
  double cost_qp = 0.0;  // J(Q_k, P_{k-1}) from the twist value
  double cost_pp = 0.0;  // mean path cost of u^k on its own fresh batch
  double ess = 0.0;
  double min_weight = 0.0;
  double max_weight = 0.0;
  double seconds = 0.0;
  int n_paths = 0;
  double se_qp = 0.0;  // MC standard error of cost_qp
  double se_pp = 0.0;
};

struct SolveResult {
  MarkovPolicy policy;
  std::vector<IterationReport> reports;
  // Drift estimate behind the final policy; empty when K = 0.
  std::vector<DriftEstimate> drifts() const;  // kept small: only the last one
  DriftEstimate final_drift;
  bool has_drift = false;
};

// The K-iteration alternating loop: simulate under the current policy,
// compute the twist weights, regress the drift, minimize pointwise, repeat
// with fresh noise streams keyed by the iteration index.
SolveResult solve(const ControlProblem& problem, const SolveConfig& config);

// Empirical surrogate of the monotone-descent guarantee: true iff
// cost_qp_{k+1} <= cost_qp_k + slack for all adjacent pairs. A negative
// slack requests the default, 3 pooled MC standard errors per pair.
bool descent_check(const std::vector<IterationReport>& reports, double slack = -1.0);

// Certificate of the entropy-regularization gap bound
//   0 <= policy_cost - optimal_cost <= (eps/2) variance + eps_prime,
// with an additive slack for Monte Carlo noise on both sides.
bool epsilon_gap_bound(double policy_cost, double optimal_cost, double variance, double epsilon,
                       double eps_prime, double mc_slack = 0.0);

void export_reports_csv(const std::vector<IterationReport>& reports, const std::string& path,
                        const std::string& provenance = "", bool include_timings = false);

}  // namespace epmc

#endif  // EPMC_ALGORITHM_HPP
