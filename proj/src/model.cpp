#include "epmc/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <utility>

#include "epmc/rng.hpp"

namespace epmc {

MarkovPolicy MarkovPolicy::constant_per_step(TimeGrid grid, Eigen::MatrixXd values, Box box) {
  if (values.rows() != grid.num_steps() || values.cols() != box.dim())
    throw InvalidParams("policy: per-step value matrix must be M x d");
  for (Eigen::Index m = 0; m < values.rows(); ++m)
    values.row(m) = box.clamp(values.row(m).transpose()).transpose();
  MarkovPolicy p;
  p.grid_ = grid;
  p.box_ = std::move(box);
  p.step_values_ = std::make_shared<const Eigen::MatrixXd>(std::move(values));
  p.description_ = "constant-per-step";
  return p;
}

MarkovPolicy MarkovPolicy::constant(TimeGrid grid, const Eigen::VectorXd& value, const Box& box) {
  Eigen::MatrixXd values(grid.num_steps(), box.dim());
  values.rowwise() = value.transpose();
  return constant_per_step(grid, std::move(values), box);
}

MarkovPolicy MarkovPolicy::from_callable(
    TimeGrid grid, std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> fn, Box box) {
  MarkovPolicy p;
  p.grid_ = grid;
  p.box_ = std::move(box);
  p.eval_ = [fn = std::move(fn)](int, double t, const Eigen::VectorXd& x) { return fn(t, x); };
  p.description_ = "callable";
  return p;
}

MarkovPolicy MarkovPolicy::from_step_rule(TimeGrid grid, StepEvalFn fn, Box box,
                                          std::string description) {
  MarkovPolicy p;
  p.grid_ = grid;
  p.box_ = std::move(box);
  p.eval_ = std::move(fn);
  p.description_ = std::move(description);
  return p;
}

Eigen::VectorXd MarkovPolicy::at_step(int m, const Eigen::VectorXd& x) const {
  if (step_values_) return step_values_->row(m).transpose();
  if (!eval_) throw InvalidParams("policy: empty policy evaluated");
  return box_.clamp(eval_(m, grid_.node(m), x));
}

namespace {

// Midpoint convexity probe of f(t,x,.) on random u-pairs inside the box.
bool convexity_probe(const ControlProblem& problem, const ProbePoint& probe, std::uint64_t seed,
                     int pairs) {
  const int d = problem.dim;
  const Box& box = problem.control_box;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd u1(d), u2(d);
    for (int j = 0; j < d; ++j) {
      const double a = rng::uniform01(rng::key(seed, 2 * p, j));
      const double b = rng::uniform01(rng::key(seed, 2 * p + 1, j));
      u1[j] = box.lo[j] + a * (box.hi[j] - box.lo[j]);
      u2[j] = box.lo[j] + b * (box.hi[j] - box.lo[j]);
    }
    const double mid = problem.running_cost(probe.t, probe.x, 0.5 * (u1 + u2));
    const double avg = 0.5 * (problem.running_cost(probe.t, probe.x, u1) +
                              problem.running_cost(probe.t, probe.x, u2));
    const double scale = 1.0 + std::fabs(avg);
    if (mid > avg + 1e-9 * scale) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_problem(const ControlProblem& problem,
                                  const std::vector<ProbePoint>& probe_points) {
  if (probe_points.empty()) throw InvalidParams("validate: probe_points must be nonempty");
  ValidationReport report;
  report.sigma_pass = true;
  report.positivity_pass = true;
  report.convexity_pass = true;

  std::uint64_t probe_index = 0;
  for (const auto& probe : probe_points) {
    ProbeResult result;
    result.point = probe;

    const Eigen::MatrixXd sig = problem.sigma(probe.t, probe.x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sig);
    result.sigma_min_sv = svd.singularValues().minCoeff();
    result.sigma_max_sv = svd.singularValues().maxCoeff();
    result.sigma_ok = result.sigma_min_sv >= problem.sigma_floor_rel * result.sigma_max_sv &&
                      result.sigma_min_sv > 0.0;
    if (!result.sigma_ok) {
      report.sigma_pass = false;
      throw NonInvertibleDiffusion(
          "validate: sigma smallest singular value " + std::to_string(result.sigma_min_sv) +
          " below floor at t=" + std::to_string(probe.t));
    }

    result.f_value = problem.running_cost(probe.t, probe.x, probe.u);
    result.g_value = problem.terminal_cost(probe.x);
    result.f_nonneg = result.f_value >= 0.0;
    result.g_nonneg = result.g_value >= 0.0;
    if (problem.cost_floor_ok && (!result.f_nonneg || !result.g_nonneg))
      throw NegativeCost("validate: cost negative at probe t=" + std::to_string(probe.t));
    // Without the declared floor the sign check is informational only.
    if (!result.f_nonneg || !result.g_nonneg) report.positivity_pass = false;

    result.convexity_ok = convexity_probe(problem, probe, rng::key(0x636F6E76ull, probe_index, 0),
                                          /*pairs=*/32);
    if (!result.convexity_ok) report.convexity_pass = false;

    report.probes.push_back(std::move(result));
    ++probe_index;
  }
  return report;
}

std::vector<ProbePoint> default_probe_points(const ControlProblem& problem, int count,
                                             std::uint64_t seed) {
  std::vector<ProbePoint> probes;
  probes.reserve(count);
  ProbePoint base;
  base.t = 0.0;
  base.x = problem.start;
  base.u = problem.control_box.center();
  probes.push_back(base);
  // Spread further probes over time and a neighborhood of the start whose
  // width is set by the start's own scale.
  const double spread = 1.0 + problem.start.cwiseAbs().maxCoeff();
  for (int i = 1; i < count; ++i) {
    ProbePoint p;
    p.t = problem.horizon * rng::uniform01(rng::key(seed, i, 0));
    p.x = problem.start;
    for (int j = 0; j < problem.dim; ++j)
      p.x[j] += spread * (2.0 * rng::uniform01(rng::key(seed, i, 1 + j)) - 1.0);
    p.u.resize(problem.dim);
    for (int j = 0; j < problem.dim; ++j) {
      const double a = rng::uniform01(rng::key(seed, i, 1 + problem.dim + j));
      p.u[j] = problem.control_box.lo[j] + a * (problem.control_box.hi[j] - problem.control_box.lo[j]);
    }
    probes.push_back(std::move(p));
  }
  return probes;
}

}  // namespace epmc
