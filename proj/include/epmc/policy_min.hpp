#ifndef EPMC_POLICY_MIN_HPP
#define EPMC_POLICY_MIN_HPP

#include <optional>

#include "epmc/model.hpp"
#include "epmc/regress.hpp"

namespace epmc {

// The strictly convex map u -> f(t,x,u) + (1/2 eps) |sigma^{-1}(beta - u)|^2
// whose unique box-constrained minimizer defines the next policy.
struct PointwiseObjective {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd beta;
  double epsilon = 1.0;
  RunningCostFn f;

  // Exactly one of these describes sigma^{-1}(t,x).
  Eigen::MatrixXd sigma_inv;       // full matrix
  Eigen::VectorXd sigma_inv_diag;  // diagonal (preferred when set)

  std::optional<RunningCostGradFn> grad_f;    // analytic gradient of f in u
  std::optional<QuadDiagCostU> quad_diag;     // enables the closed form

  double value(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
  bool diagonal() const { return sigma_inv_diag.size() > 0; }
};

struct MinimizeOptions {
  double tol = 1e-10;  // gradient-projection residual
  int max_iters = 500;
  // Overrides the dispatch; used by the agreement tests.
  bool force_iterative = false;
  // Iterative start; empty means the box projection of beta.
  Eigen::VectorXd start;
};

// Unique minimizer of the objective over the box. Closed form per coordinate
// when f is quadratic-diagonal and sigma diagonal; projected gradient with
// backtracking otherwise, started from the box projection of beta.
Eigen::VectorXd minimize_pointwise(const PointwiseObjective& objective, const Box& box,
                                   const MinimizeOptions& options = {});

// Norm of the projected-gradient residual ||u - clamp(u - grad F(u))|| at u.
double projected_gradient_residual(const PointwiseObjective& objective, const Box& box,
                                   const Eigen::VectorXd& u);

// Algorithm Step 3: the policy that, on a query in [t_m, t_{m+1}), evaluates
// beta_m(x) and minimizes F_beta(t_m, x, .) over U. With a degree-0 basis and
// a problem whose sigma and control cost do not vary with the state, the
// per-step minimizers are precomputed once (the cache is exact there).
MarkovPolicy build_policy(const DriftEstimate& drift, const ControlProblem& problem,
                          double epsilon, const MinimizeOptions& options = {});

// Objective at a given (step, x) under this drift estimate; what build_policy
// minimizes at query time.
PointwiseObjective pointwise_objective_at(const DriftEstimate& drift,
                                          const ControlProblem& problem, double epsilon, int step,
                                          const Eigen::VectorXd& x);

void export_policy_csv(const MarkovPolicy& policy, const std::string& path,
                       const std::string& provenance = "",
                       const DriftEstimate* drift = nullptr);

}  // namespace epmc

#endif  // EPMC_POLICY_MIN_HPP
