#include "epmc/policy_min.hpp"

#include <Eigen/LU>
#include <cmath>

#include "epmc/csv.hpp"

namespace epmc {

double PointwiseObjective::value(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd diff = beta - u;
  double quad;
  if (diagonal())
    quad = sigma_inv_diag.cwiseProduct(diff).squaredNorm();
  else
    quad = (sigma_inv * diff).squaredNorm();
  return f(t, x, u) + quad / (2.0 * epsilon);
}

Eigen::VectorXd PointwiseObjective::gradient(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g;
  if (grad_f) {
    g = (*grad_f)(t, x, u);
  } else {
    // Central differences; the costs we minimize are smooth in u.
    const int d = static_cast<int>(u.size());
    g.resize(d);
    Eigen::VectorXd up = u, dn = u;
    for (int j = 0; j < d; ++j) {
      const double h = 1e-6 * (1.0 + std::fabs(u[j]));
      up[j] = u[j] + h;
      dn[j] = u[j] - h;
      g[j] = (f(t, x, up) - f(t, x, dn)) / (2.0 * h);
      up[j] = u[j];
      dn[j] = u[j];
    }
  }
  const Eigen::VectorXd diff = u - beta;
  if (diagonal())
    g += sigma_inv_diag.cwiseProduct(sigma_inv_diag).cwiseProduct(diff) / epsilon;
  else
    g += (sigma_inv.transpose() * (sigma_inv * diff)) / epsilon;
  return g;
}

double projected_gradient_residual(const PointwiseObjective& objective, const Box& box,
                                   const Eigen::VectorXd& u) {
  const Eigen::VectorXd g = objective.gradient(u);
  return (u - box.clamp(u - g)).norm();
}

namespace {

// Per-coordinate closed form for f = f0 + sum_i a_i u_i^2 + b_i u_i with
// diagonal sigma: the objective separates, so clamping each coordinate of the
// unconstrained root is exact.
Eigen::VectorXd closed_form_quad_diag(const PointwiseObjective& obj, const Box& box) {
  const int d = static_cast<int>(obj.beta.size());
  Eigen::VectorXd a(d), b(d);
  obj.quad_diag->coeffs(obj.t, obj.x, a, b);
  Eigen::VectorXd u(d);
  for (int j = 0; j < d; ++j) {
    const double s2 = obj.sigma_inv_diag[j] * obj.sigma_inv_diag[j] / obj.epsilon;
    u[j] = (s2 * obj.beta[j] - b[j]) / (2.0 * a[j] + s2);
  }
  return box.clamp(u);
}

Eigen::VectorXd projected_gradient(const PointwiseObjective& obj, const Box& box,
                                   const MinimizeOptions& options) {
  const int d = static_cast<int>(obj.beta.size());
  Eigen::VectorXd u =
      (options.start.size() == d) ? box.clamp(options.start) : box.clamp(obj.beta);
  double fu = obj.value(u);

  // Diagonal scaling from the known quadratic term plus a one-shot curvature
  // probe of f; keeps the step count flat across badly scaled problems while
  // the box projection stays an exact clamp.
  Eigen::VectorXd scale(d);
  {
    Eigen::VectorXd quad_diag(d);
    if (obj.diagonal())
      quad_diag = obj.sigma_inv_diag.cwiseProduct(obj.sigma_inv_diag) / obj.epsilon;
    else
      quad_diag = (obj.sigma_inv.transpose() * obj.sigma_inv).diagonal() / obj.epsilon;
    Eigen::VectorXd up = u, dn = u;
    const double f0 = obj.f(obj.t, obj.x, u);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-4 * (1.0 + std::fabs(u[j]));
      up[j] = u[j] + h;
      dn[j] = u[j] - h;
      const double curv = (obj.f(obj.t, obj.x, up) - 2.0 * f0 + obj.f(obj.t, obj.x, dn)) / (h * h);
      scale[j] = quad_diag[j] + std::max(curv, 0.0) + 1e-12;
      up[j] = u[j];
      dn[j] = u[j];
    }
  }

  double step = 1.0;
  for (int it = 0; it < options.max_iters; ++it) {
    const Eigen::VectorXd g = obj.gradient(u);
    if ((u - box.clamp(u - g)).norm() <= options.tol) return u;

    // Backtracking with a mild expansion on success. Near the optimum the
    // value differences drop below double rounding while the gradient is
    // still informative; such rounding-plateau moves are accepted, since a
    // step whose value change is unrepresentable is a micro-step that can
    // only contract toward the minimizer.
    bool moved = false;
    const Eigen::VectorXd direction = g.cwiseQuotient(scale);
    for (int half = 0; half < 64; ++half) {
      const Eigen::VectorXd cand = box.clamp(u - step * direction);
      const Eigen::VectorXd delta = cand - u;
      if (delta.norm() == 0.0) break;
      const double fc = obj.value(cand);
      const double plateau = 8.0 * 2.2e-16 * (1.0 + std::fabs(fu) + std::fabs(fc));
      if (fc <= fu + 1e-4 * g.dot(delta) || std::fabs(fc - fu) <= plateau) {
        u = cand;
        fu = fc;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // The step underflowed; accept only if the residual is already small.
      if ((u - box.clamp(u - g)).norm() <= options.tol) return u;
      throw NoConvergence("policy_min: line search stalled at iteration " + std::to_string(it));
    }
  }
  if ((u - box.clamp(u - obj.gradient(u))).norm() <= options.tol) return u;
  throw NoConvergence("policy_min: residual above tolerance after " +
                      std::to_string(options.max_iters) +
                      " iterations (non-convex cost or scaling pathology?)");
}

}  // namespace

Eigen::VectorXd minimize_pointwise(const PointwiseObjective& objective, const Box& box,
                                   const MinimizeOptions& options) {
  if (!(objective.epsilon > 0.0)) throw InvalidParams("policy_min: epsilon must be > 0");
  if (!objective.diagonal() && !objective.sigma_inv.allFinite())
    throw InvalidParams("policy_min: sigma_inv not finite");
  if (!options.force_iterative && objective.quad_diag && objective.diagonal())
    return closed_form_quad_diag(objective, box);
  return projected_gradient(objective, box, options);
}

PointwiseObjective pointwise_objective_at(const DriftEstimate& drift,
                                          const ControlProblem& problem, double epsilon, int step,
                                          const Eigen::VectorXd& x) {
  PointwiseObjective obj;
  obj.t = drift.grid.node(step);
  obj.x = x;
  obj.beta = drift.eval(step, x);
  obj.epsilon = epsilon;
  obj.f = problem.running_cost;
  obj.grad_f = problem.running_cost_grad_u;
  obj.quad_diag = problem.quad_diag;
  if (problem.diffusion_diag) {
    const Eigen::VectorXd s = (*problem.diffusion_diag)(obj.t, x);
    for (Eigen::Index j = 0; j < s.size(); ++j)
      if (!(std::fabs(s[j]) > 0.0))
        throw NonInvertibleDiffusion("policy_min: zero diagonal diffusion entry");
    obj.sigma_inv_diag = s.cwiseInverse();
  } else {
    const Eigen::MatrixXd sig = problem.diffusion(obj.t, x);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sig);
    obj.sigma_inv = lu.inverse();
    if (!obj.sigma_inv.allFinite())
      throw NonInvertibleDiffusion("policy_min: sigma not invertible at queried point");
  }
  return obj;
}

MarkovPolicy build_policy(const DriftEstimate& drift, const ControlProblem& problem,
                          double epsilon, const MinimizeOptions& options) {
  const int M = drift.grid.num_steps();
  if (static_cast<int>(drift.coeffs.size()) != M)
    throw InvalidParams("policy_min: drift estimate does not cover all steps");

  if (drift.basis.degree() == 0 && problem.pointwise_state_free) {
    Eigen::MatrixXd values(M, problem.dim);
    for (int m = 0; m < M; ++m) {
      const auto obj = pointwise_objective_at(drift, problem, epsilon, m, problem.start);
      values.row(m) = minimize_pointwise(obj, problem.control_box, options).transpose();
    }
    return MarkovPolicy::constant_per_step(drift.grid, std::move(values), problem.control_box);
  }

  auto drift_copy = std::make_shared<const DriftEstimate>(drift);
  auto problem_copy = std::make_shared<const ControlProblem>(problem);
  auto rule = [drift_copy, problem_copy, epsilon, options](int m, double,
                                                           const Eigen::VectorXd& x) {
    const auto obj = pointwise_objective_at(*drift_copy, *problem_copy, epsilon, m, x);
    return minimize_pointwise(obj, problem_copy->control_box, options);
  };
  return MarkovPolicy::from_step_rule(drift.grid, std::move(rule), problem.control_box,
                                      "drift-rule");
}

void export_policy_csv(const MarkovPolicy& policy, const std::string& path,
                       const std::string& provenance, const DriftEstimate* drift) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  const int d = policy.box().dim();
  if (policy.is_constant_per_step()) {
    std::vector<std::string> header = {"step", "t"};
    for (int j = 1; j <= d; ++j) header.push_back("u_" + std::to_string(j));
    out.header(header);
    for (int m = 0; m < policy.grid().num_steps(); ++m) {
      std::vector<std::string> cells = {std::to_string(m),
                                        csv::format_double(policy.grid().node(m))};
      for (int j = 0; j < d; ++j) cells.push_back(csv::format_double(policy.step_values()(m, j)));
      out.row(cells);
    }
    return;
  }
  out.comment(
      "policy is implicit: u(t_m, x) = argmin_u f(t_m,x,u) + |sigma^{-1}(beta_m(x)-u)|^2/(2 eps); "
      "rows dump the drift coefficients beta_m");
  std::vector<std::string> header = {"step", "t", "feature_index"};
  for (int j = 1; j <= d; ++j) header.push_back("c_" + std::to_string(j));
  out.header(header);
  if (drift != nullptr) {
    for (std::size_t m = 0; m < drift->coeffs.size(); ++m) {
      for (int k = 0; k < drift->coeffs[m].rows(); ++k) {
        std::vector<std::string> cells = {
            std::to_string(m), csv::format_double(drift->grid.node(static_cast<int>(m))),
            std::to_string(k)};
        for (int j = 0; j < d; ++j) cells.push_back(csv::format_double(drift->coeffs[m](k, j)));
        out.row(cells);
      }
    }
  }
}

}  // namespace epmc
