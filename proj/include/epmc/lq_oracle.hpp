#ifndef EPMC_LQ_ORACLE_HPP
#define EPMC_LQ_ORACLE_HPP

#include <string>
#include <vector>

#include "epmc/model.hpp"

namespace epmc {

// One-dimensional linear-quadratic test problem
//   dX = u dt + sigma dW,  f = q x^2 + rho_c u^2,  g = m x^2,
// with a control box wide enough that the unconstrained optimum is interior
// on the evaluation region.
struct LQSpec {
  double q = 0.0;
  double m = 1.0;
  double rho_c = 1.0;
  double sigma = 1.0;
  double horizon = 1.0;
  double x0 = 1.0;
  double u_lo = -10.0;
  double u_hi = 10.0;

  void validate() const;
};

ControlProblem make_lq_problem(const LQSpec& spec);

// V(t,x) = P(t) x^2 + c(t) with
//   -P' = q - P^2 / rho_c, P(T) = m;   -c' = sigma^2 P, c(T) = 0,
// integrated backward with fixed-step RK4. Feedback u*(t,x) = -K(t) x with
// K = P / rho_c.
struct RiccatiSolution {
  LQSpec spec;
  std::vector<double> t;  // ascending, t[0] = 0, t.back() = T
  std::vector<double> P;
  std::vector<double> c;

  double P_at(double time) const;
  double c_at(double time) const;
  double K_at(double time) const { return P_at(time) / spec.rho_c; }
  double value(double time, double x) const { return P_at(time) * x * x + c_at(time); }

  // Clipped feedback as a Markov policy on the given grid.
  MarkovPolicy feedback_policy(const TimeGrid& grid) const;
};

RiccatiSolution riccati_value(const LQSpec& spec, int n_steps = 20000);

// Brute-force backward induction on a padded 1-d grid:
//   V(t_m, x) = min_u [ f(t_m,x,u) dt + E V(t_{m+1}, x + (b+u) dt + sigma sqrt(dt) Z) ],
// expectation by Gauss-Hermite quadrature, linear interpolation in x, and a
// one-shot parabolic refinement of the u-grid argmin.
struct HjbGridSpec {
  double x_lo = -1.0;   // core domain
  double x_hi = 1.0;
  double padding = 0.5; // absorbing band around the core
  int n_x = 401;        // nodes across core + padding
  int n_t = 200;
  int n_u = 41;
  int gh_nodes = 11;
  double escape_tol = 1e-6;
  bool refine_u = true;
};

// Core domain sized from the reachable tube of the problem.
HjbGridSpec default_hjb_grid(const ControlProblem& problem, int n_x = 1401, int n_t = 200,
                             int n_u = 81);

struct HjbSolution {
  std::vector<double> x;            // grid nodes, ascending
  std::vector<double> t;            // grid times, ascending (n_t + 1)
  std::vector<std::vector<double>> value;   // [time][node]
  std::vector<std::vector<double>> control; // greedy minimizer, [time][node], n_t rows

  double value_at(double time, double state) const;
  double control_at(double time, double state) const;
};

HjbSolution hjb_grid_value(const ControlProblem& problem, const HjbGridSpec& grid_spec);

void export_hjb_csv(const HjbSolution& solution, const std::string& path,
                    const std::string& provenance = "");

// Probabilists' Gauss-Hermite rule: nodes z_i and weights w_i with
// sum w_i h(z_i) ~ E[h(Z)], Z standard normal. Golub-Welsch construction.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace epmc

#endif  // EPMC_LQ_ORACLE_HPP
