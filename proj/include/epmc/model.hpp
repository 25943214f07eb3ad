#ifndef EPMC_MODEL_HPP
#define EPMC_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "epmc/errors.hpp"

namespace epmc {

// Regular subdivision 0 = t_0 < t_1 < ... < t_M = T.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(int num_steps, double horizon) : num_steps_(num_steps), horizon_(horizon) {
    if (num_steps < 1) throw InvalidParams("grid: num_steps must be >= 1");
    if (!(horizon > 0.0)) throw InvalidParams("grid: horizon must be > 0");
  }

  int num_steps() const { return num_steps_; }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / num_steps_; }
  double node(int m) const { return horizon_ * (static_cast<double>(m) / num_steps_); }

  // Index m with t in [t_m, t_{m+1}); queries at t = T map to the last step.
  int step_of(double t) const {
    int m = static_cast<int>(t / dt());
    if (m < 0) m = 0;
    if (m > num_steps_ - 1) m = num_steps_ - 1;
    return m;
  }

  bool operator==(const TimeGrid& other) const {
    return num_steps_ == other.num_steps_ && horizon_ == other.horizon_;
  }

 private:
  int num_steps_ = 1;
  double horizon_ = 1.0;
};

// Axis-aligned box control set; projection is exact coordinate-wise clamping.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd lower, Eigen::VectorXd upper) : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size()) throw InvalidParams("box: bound dimensions differ");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) throw InvalidParams("box: lower bound exceeds upper bound");
  }
  static Box cube(int dim, double lower, double upper) {
    return Box(Eigen::VectorXd::Constant(dim, lower), Eigen::VectorXd::Constant(dim, upper));
  }

  int dim() const { return static_cast<int>(lo.size()); }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const { return v.cwiseMax(lo).cwiseMin(hi); }
  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const {
    return (v.array() >= lo.array() - tol).all() && (v.array() <= hi.array() + tol).all();
  }
};

using DriftFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using DiffusionFn = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;
using DiagDiffusionFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using RunningCostFn =
    std::function<double(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;
using RunningCostGradFn =
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;
using TerminalCostFn = std::function<double(const Eigen::VectorXd&)>;

// Declares f(t,x,u) = f0(t,x) + sum_i a_i(t,x) u_i^2 + b_i(t,x) u_i with
// a_i >= 0. Together with a diagonal diffusion this unlocks the closed-form
// pointwise minimizer.
struct QuadDiagCostU {
  std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::VectorXd&)> coeffs;
};

// The tuple (b, sigma, U, f, g, T, x) defining the control problem.
struct ControlProblem {
  int dim = 0;
  double horizon = 0.0;
  Eigen::VectorXd start;
  DriftFn drift;
  DiffusionFn diffusion;
  Box control_box;
  RunningCostFn running_cost;
  TerminalCostFn terminal_cost;
  bool cost_floor_ok = true;

  // Optional structure hints.
  std::optional<DiagDiffusionFn> diffusion_diag;  // sigma(t,x) diagonal
  std::optional<RunningCostGradFn> running_cost_grad_u;
  std::optional<QuadDiagCostU> quad_diag;

  // True when sigma(t,.) and the u-dependence of f(t,.,u) do not vary with
  // the state; lets degree-0 policies precompute one minimizer per step.
  bool pointwise_state_free = false;

  // Smallest singular value of sigma must stay above this fraction of the
  // largest one wherever F_beta needs sigma^{-1}.
  double sigma_floor_rel = 1e-8;

  double f(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    const double v = running_cost(t, x, u);
    if (cost_floor_ok && v < 0.0)
      throw NegativeCost("model: running cost negative (" + std::to_string(v) + ") at t=" +
                         std::to_string(t));
    return v;
  }
  double g(const Eigen::VectorXd& x) const {
    const double v = terminal_cost(x);
    if (cost_floor_ok && v < 0.0)
      throw NegativeCost("model: terminal cost negative (" + std::to_string(v) + ")");
    return v;
  }
  Eigen::MatrixXd sigma(double t, const Eigen::VectorXd& x) const {
    if (diffusion_diag) return (*diffusion_diag)(t, x).asDiagonal();
    return diffusion(t, x);
  }
};

// Piecewise-constant-in-time feedback map u(t_m, x) with values in U.
// Immutable after construction and safe to share across threads.
class MarkovPolicy {
 public:
  using StepEvalFn = std::function<Eigen::VectorXd(int, double, const Eigen::VectorXd&)>;

  MarkovPolicy() = default;

  // (a) One constant control vector per step (rows = steps).
  static MarkovPolicy constant_per_step(TimeGrid grid, Eigen::MatrixXd values, Box box);
  // Single constant over all steps.
  static MarkovPolicy constant(TimeGrid grid, const Eigen::VectorXd& value, const Box& box);
  // (c) User callable u(t, x); outputs are clamped into the box.
  static MarkovPolicy from_callable(
      TimeGrid grid, std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> fn, Box box);
  // (b) Generic per-step rule (used by the drift-based policies).
  static MarkovPolicy from_step_rule(TimeGrid grid, StepEvalFn fn, Box box,
                                     std::string description);

  const TimeGrid& grid() const { return grid_; }
  const Box& box() const { return box_; }
  bool is_constant_per_step() const { return static_cast<bool>(step_values_); }
  const Eigen::MatrixXd& step_values() const { return *step_values_; }
  const std::string& description() const { return description_; }

  // Control applied on [t_m, t_{m+1}); always inside U.
  Eigen::VectorXd at_step(int m, const Eigen::VectorXd& x) const;
  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const {
    return at_step(grid_.step_of(t), x);
  }

 private:
  TimeGrid grid_;
  Box box_;
  std::shared_ptr<const Eigen::MatrixXd> step_values_;  // set for (a)
  StepEvalFn eval_;                                     // set otherwise
  std::string description_ = "empty";
};

struct ProbePoint {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
};

struct ProbeResult {
  ProbePoint point;
  double sigma_min_sv = 0.0;
  double sigma_max_sv = 0.0;
  double f_value = 0.0;
  double g_value = 0.0;
  bool sigma_ok = false;
  bool f_nonneg = false;
  bool g_nonneg = false;
  bool convexity_ok = false;
};

struct ValidationReport {
  std::vector<ProbeResult> probes;
  bool sigma_pass = false;
  bool positivity_pass = false;
  bool convexity_pass = false;
  bool pass() const { return sigma_pass && positivity_pass && convexity_pass; }
};

// Numerical surrogate for the ellipticity / positivity / convexity
// hypotheses, checked at the probe points only.
ValidationReport validate_problem(const ControlProblem& problem,
                                  const std::vector<ProbePoint>& probe_points);

// Probes around the start state: (0, x0, box center) plus pseudo-random
// (t, x, u) draws. Deterministic for a given problem shape.
std::vector<ProbePoint> default_probe_points(const ControlProblem& problem, int count = 16,
                                             std::uint64_t seed = 0x70726F6265ull);

}  // namespace epmc

#endif  // EPMC_MODEL_HPP
