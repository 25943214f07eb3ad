#include "epmc/algorithm.hpp"

#include <chrono>
#include <cmath>

#include "epmc/csv.hpp"
#include "epmc/rng.hpp"

namespace epmc {

void SolveConfig::validate(int problem_dim) const {
  if (!(epsilon > 0.0)) throw InvalidParams("solve: epsilon must be > 0");
  if (iterations < 0) throw InvalidParams("solve: iterations must be >= 0");
  const PolynomialBasis basis(problem_dim, basis_degree);
  if (particles < basis.count())
    throw InvalidParams("solve: particles must be >= basis feature count " +
                        std::to_string(basis.count()));
}

std::vector<DriftEstimate> SolveResult::drifts() const {
  if (!has_drift) return {};
  return {final_drift};
}

SolveResult solve(const ControlProblem& problem, const SolveConfig& config) {
  config.validate(problem.dim);
  if (!(config.initial_policy.grid() == config.grid))
    throw InvalidParams("solve: initial policy grid differs from solve grid");
  validate_problem(problem, default_probe_points(problem));

  const PolynomialBasis basis(problem.dim, config.basis_degree);

  SolveResult result;
  result.policy = config.initial_policy;
  if (config.iterations == 0) return result;

  using clock = std::chrono::steady_clock;

  // Paths of u^0; stream namespace keyed by iteration index 0.
  PathBatch paths = simulate_paths(problem, result.policy, config.particles, config.grid,
                                   rng::derive_seed(config.master_seed, rng::Domain::kTrain, 0));

  int flat_count = 0;
  for (int k = 1; k <= config.iterations; ++k) {
    const auto started = clock::now();
    IterationReport report;
    report.k = k;
    report.n_paths = config.particles;

    WeightSet weights;
    try {
      weights = compute_weights(paths, problem, config.epsilon, config.ess_floor);
    } catch (const DegenerateWeights& e) {
      throw DegenerateWeights("solve: iteration " + std::to_string(k) + ": " + e.what());
    }
    report.cost_qp = twist_value(weights, config.epsilon);
    report.se_qp = weights.twist_std_error();
    report.ess = weights.ess;
    report.min_weight = weights.min_normalized();
    report.max_weight = weights.max_normalized();

    DriftEstimate drift;
    try {
      drift = fit_drift(paths, weights, problem, basis, config.fit);
    } catch (const SingularRegression& e) {
      throw SingularRegression("solve: iteration " + std::to_string(k) + ": " + e.what());
    }
    try {
      result.policy = build_policy(drift, problem, config.epsilon, config.minimize);
    } catch (const NoConvergence& e) {
      throw NoConvergence("solve: iteration " + std::to_string(k) + ": " + e.what());
    }
    result.final_drift = drift;
    result.has_drift = true;

    // Fresh iid batch under u^k; it prices J(P_k, P_k) and feeds the next
    // iteration's weights. Lazy policies run their minimizer inside here.
    try {
      paths = simulate_paths(problem, result.policy, config.particles, config.grid,
                             rng::derive_seed(config.master_seed, rng::Domain::kTrain,
                                              static_cast<std::uint64_t>(k)));
    } catch (const NoConvergence& e) {
      throw NoConvergence("solve: iteration " + std::to_string(k) + ": " + e.what());
    }
    const std::vector<double> costs = path_costs(paths, problem);
    double mean = 0.0;
    for (double y : costs) mean += y;
    mean /= static_cast<double>(costs.size());
    double var = 0.0;
    for (double y : costs) var += (y - mean) * (y - mean);
    var /= static_cast<double>(costs.size());
    report.cost_pp = mean;
    report.se_pp = std::sqrt(var / static_cast<double>(costs.size()));

    report.seconds = std::chrono::duration<double>(clock::now() - started).count();
    result.reports.push_back(report);

    if (config.early_stop_tol > 0.0 && result.reports.size() >= 2) {
      const auto& prev = result.reports[result.reports.size() - 2];
      flat_count = (std::fabs(report.cost_qp - prev.cost_qp) < config.early_stop_tol)
                       ? flat_count + 1
                       : 0;
      if (flat_count >= 3) break;
    }
  }
  return result;
}

bool descent_check(const std::vector<IterationReport>& reports, double slack) {
  if (reports.size() < 2) throw InvalidParams("descent_check: need at least 2 reports");
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    const double pair_slack =
        (slack >= 0.0)
            ? slack
            : 3.0 * std::sqrt(reports[i].se_qp * reports[i].se_qp +
                              reports[i + 1].se_qp * reports[i + 1].se_qp);
    if (reports[i + 1].cost_qp > reports[i].cost_qp + pair_slack) return false;
  }
  return true;
}

bool epsilon_gap_bound(double policy_cost, double optimal_cost, double variance, double epsilon,
                       double eps_prime, double mc_slack) {
  if (variance < 0.0) throw InvalidParams("epsilon_gap_bound: variance must be >= 0");
  const double gap = policy_cost - optimal_cost;
  if (gap < -mc_slack) return false;
  return gap <= 0.5 * epsilon * variance + eps_prime + mc_slack;
}

void export_reports_csv(const std::vector<IterationReport>& reports, const std::string& path,
                        const std::string& provenance, bool include_timings) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  out.header({"k", "cost_QP", "cost_PP", "ess", "min_weight", "max_weight", "seconds"});
  for (const auto& r : reports) {
    // Timings are opt-in so that identical runs produce identical bytes.
    out.row({std::to_string(r.k), csv::format_double(r.cost_qp), csv::format_double(r.cost_pp),
             csv::format_double(r.ess), csv::format_double(r.min_weight),
             csv::format_double(r.max_weight),
             csv::format_double(include_timings ? r.seconds : 0.0)});
  }
}

}  // namespace epmc
