#ifndef EPMC_TWIST_HPP
#define EPMC_TWIST_HPP

#include <vector>

#include "epmc/simulate.hpp"

namespace epmc {

// Exponential-twist weights D_n = exp(-eps [sum_m f dt + g]) of a path batch,
// kept alongside the log-space quantities that make them usable for eps
// values where the raw exponentials underflow.
struct WeightSet {
  std::vector<double> costs;       // per-path Y_n
  std::vector<double> raw;         // D_n = exp(-eps Y_n); may underflow to 0
  std::vector<double> normalized;  // D_n / sum_l D_l, computed in log space
  double log_mean_raw = 0.0;       // log((1/N) sum_n D_n)
  double ess = 0.0;                // (sum D)^2 / sum D^2
  double epsilon = 0.0;

  double min_normalized() const;
  double max_normalized() const;
  // Sample mean and variance of the cost samples Y_n.
  double mean_cost() const;
  double var_cost() const;
  // Delta-method standard error of the twist value -(1/eps) log mean(D).
  double twist_std_error() const;
};

// Algorithm Step 1. All arithmetic happens on log D_n with max subtraction;
// throws DegenerateWeights when ess falls below ess_floor.
WeightSet compute_weights(const PathBatch& paths, const ControlProblem& problem, double epsilon,
                          double ess_floor = 2.0);

// Same weights, but for externally supplied cost samples. Used by the
// property tests and by anything that already has Y_n in hand.
WeightSet weights_from_costs(const std::vector<double>& costs, double epsilon,
                             double ess_floor = 2.0);

// Monte Carlo estimate of the Q-subproblem optimal value
//   -(1/eps) log E[exp(-eps Y)].
double twist_value(const WeightSet& weights, double epsilon);

}  // namespace epmc

#endif  // EPMC_TWIST_HPP
