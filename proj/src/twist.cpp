#include "epmc/twist.hpp"

#include <algorithm>
#include <cmath>

namespace epmc {

double WeightSet::min_normalized() const {
  return *std::min_element(normalized.begin(), normalized.end());
}

double WeightSet::max_normalized() const {
  return *std::max_element(normalized.begin(), normalized.end());
}

double WeightSet::mean_cost() const {
  double s = 0.0;
  for (double y : costs) s += y;
  return s / static_cast<double>(costs.size());
}

double WeightSet::var_cost() const {
  const double mu = mean_cost();
  double s = 0.0;
  for (double y : costs) s += (y - mu) * (y - mu);
  return s / static_cast<double>(costs.size());
}

double WeightSet::twist_std_error() const {
  // Var(D)/mean(D)^2 ~ N/ESS - 1 on the sample, so
  // se[-(1/eps) log mean(D)] ~ (1/eps) sqrt((N/ESS - 1)/N).
  const double n = static_cast<double>(normalized.size());
  const double ratio = std::max(n / ess - 1.0, 0.0);
  return std::sqrt(ratio / n) / epsilon;
}

WeightSet weights_from_costs(const std::vector<double>& costs, double epsilon, double ess_floor) {
  if (!(epsilon > 0.0)) throw InvalidParams("twist: epsilon must be > 0");
  if (costs.empty()) throw InvalidParams("twist: empty cost sample");
  const std::size_t n = costs.size();

  WeightSet w;
  w.epsilon = epsilon;
  w.costs = costs;
  w.raw.resize(n);
  w.normalized.resize(n);

  double max_log = -epsilon * costs[0];
  for (std::size_t i = 1; i < n; ++i) max_log = std::max(max_log, -epsilon * costs[i]);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double log_d = -epsilon * costs[i];
    const double shifted = std::exp(log_d - max_log);
    w.raw[i] = std::exp(log_d);
    w.normalized[i] = shifted;  // scaled by exp(-max_log); normalized below
    sum += shifted;
    sum_sq += shifted * shifted;
  }
  for (std::size_t i = 0; i < n; ++i) w.normalized[i] /= sum;

  w.log_mean_raw = max_log + std::log(sum / static_cast<double>(n));
  w.ess = sum * sum / sum_sq;
  if (w.ess < ess_floor)
    throw DegenerateWeights("twist: effective sample size " + std::to_string(w.ess) +
                            " below floor " + std::to_string(ess_floor) +
                            " (epsilon too large for this sample size)");
  return w;
}

WeightSet compute_weights(const PathBatch& paths, const ControlProblem& problem, double epsilon,
                          double ess_floor) {
  if (paths.controls.empty()) throw InvalidParams("twist: path batch has no controls");
  return weights_from_costs(path_costs(paths, problem), epsilon, ess_floor);
}

double twist_value(const WeightSet& weights, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParams("twist: epsilon must be > 0");
  if (weights.epsilon != epsilon)
    throw InvalidParams("twist: weights were computed with a different epsilon");
  return -weights.log_mean_raw / epsilon;
}

}  // namespace epmc
