#include "epmc/lq_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "epmc/csv.hpp"
#include "epmc/parallel.hpp"

namespace epmc {

void LQSpec::validate() const {
  if (q < 0.0 || m < 0.0) throw InvalidParams("lq: q and m must be >= 0");
  if (!(rho_c > 0.0)) throw InvalidParams("lq: rho_c must be > 0");
  if (!(sigma > 0.0)) throw InvalidParams("lq: sigma must be > 0");
  if (!(horizon > 0.0)) throw InvalidParams("lq: horizon must be > 0");
  if (!(u_lo < u_hi)) throw InvalidParams("lq: control box empty");
}

ControlProblem make_lq_problem(const LQSpec& spec) {
  spec.validate();
  ControlProblem p;
  p.dim = 1;
  p.horizon = spec.horizon;
  p.start = Eigen::VectorXd::Constant(1, spec.x0);
  p.drift = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
  const double sig = spec.sigma;
  p.diffusion = [sig](double, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, sig);
  };
  p.diffusion_diag = [sig](double, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, sig);
  };
  p.control_box = Box::cube(1, spec.u_lo, spec.u_hi);
  const double q = spec.q, rho_c = spec.rho_c, m = spec.m;
  p.running_cost = [q, rho_c](double, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return q * x[0] * x[0] + rho_c * u[0] * u[0];
  };
  p.running_cost_grad_u = [rho_c](double, const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    return Eigen::VectorXd::Constant(1, 2.0 * rho_c * u[0]);
  };
  p.quad_diag = QuadDiagCostU{[rho_c](double, const Eigen::VectorXd&, Eigen::VectorXd& a,
                                      Eigen::VectorXd& b) {
    a.setConstant(rho_c);
    b.setZero();
  }};
  p.terminal_cost = [m](const Eigen::VectorXd& x) { return m * x[0] * x[0]; };
  p.cost_floor_ok = true;
  p.pointwise_state_free = true;
  return p;
}

namespace {

double interp_sorted(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return (1.0 - w) * vs[lo] + w * vs[hi];
}

}  // namespace

double RiccatiSolution::P_at(double time) const { return interp_sorted(t, P, time); }
double RiccatiSolution::c_at(double time) const { return interp_sorted(t, c, time); }

MarkovPolicy RiccatiSolution::feedback_policy(const TimeGrid& grid) const {
  RiccatiSolution copy = *this;
  const Box box = Box::cube(1, spec.u_lo, spec.u_hi);
  return MarkovPolicy::from_callable(
      grid,
      [copy](double time, const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, -copy.K_at(time) * x[0]);
      },
      box);
}

RiccatiSolution riccati_value(const LQSpec& spec, int n_steps) {
  spec.validate();
  if (n_steps < 10000) n_steps = 10000;

  RiccatiSolution sol;
  sol.spec = spec;
  sol.t.resize(n_steps + 1);
  sol.P.resize(n_steps + 1);
  sol.c.resize(n_steps + 1);

  const double dt = spec.horizon / n_steps;
  // Backward from T: dP/ds = q - P^2/rho_c and dc/ds = sigma^2 P in the
  // time-to-go variable s = T - t.
  const auto dP = [&](double P) { return spec.q - P * P / spec.rho_c; };
  double P = spec.m;
  double c = 0.0;
  sol.t[n_steps] = spec.horizon;
  sol.P[n_steps] = P;
  sol.c[n_steps] = c;
  for (int i = n_steps - 1; i >= 0; --i) {
    const double k1 = dP(P);
    const double k2 = dP(P + 0.5 * dt * k1);
    const double k3 = dP(P + 0.5 * dt * k2);
    const double k4 = dP(P + dt * k3);
    const double Pn = P + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    // c' in s only involves P; reuse the same stage values.
    const double c1 = spec.sigma * spec.sigma * P;
    const double c2 = spec.sigma * spec.sigma * (P + 0.5 * dt * k1);
    const double c3 = spec.sigma * spec.sigma * (P + 0.5 * dt * k2);
    const double c4 = spec.sigma * spec.sigma * (P + dt * k3);
    c += dt * (c1 + 2 * c2 + 2 * c3 + c4) / 6.0;
    P = Pn;
    sol.t[i] = spec.horizon * (static_cast<double>(i) / n_steps);
    sol.P[i] = P;
    sol.c[i] = c;
  }
  return sol;
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidParams("gauss_hermite: need n >= 1");
  // Jacobi matrix of the probabilists' Hermite recurrence: zero diagonal,
  // off-diagonal sqrt(k).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = std::sqrt(static_cast<double>(k));
    J(k - 1, k) = J(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

namespace {

double interp_clamped(const std::vector<double>& xs, const std::vector<double>& vs, double x) {
  if (x <= xs.front()) return vs.front();
  if (x >= xs.back()) return vs.back();
  const double h = xs[1] - xs[0];
  const std::size_t lo = std::min<std::size_t>(
      static_cast<std::size_t>((x - xs.front()) / h), xs.size() - 2);
  const double w = (x - xs[lo]) / h;
  return (1.0 - w) * vs[lo] + w * vs[lo + 1];
}

}  // namespace

HjbGridSpec default_hjb_grid(const ControlProblem& problem, int n_x, int n_t, int n_u) {
  // Reachable tube around the start under moderate controls plus a diffusive
  // band; the box-extreme controls are never optimal far outside it.
  const double x0 = problem.start[0];
  const double sig = problem.sigma(0.0, problem.start)(0, 0);
  const double band = 6.0 * sig * std::sqrt(problem.horizon) + 1.0;
  HjbGridSpec spec;
  spec.x_lo = x0 - band;
  spec.x_hi = x0 + band;
  const double u_reach = std::max(std::fabs(problem.control_box.lo[0]),
                                  std::fabs(problem.control_box.hi[0]));
  const double dt = problem.horizon / n_t;
  spec.padding = (u_reach + 1.0) * dt + 6.0 * sig * std::sqrt(dt);
  spec.n_x = n_x;
  spec.n_t = n_t;
  spec.n_u = n_u;
  return spec;
}

HjbSolution hjb_grid_value(const ControlProblem& problem, const HjbGridSpec& grid_spec) {
  if (problem.dim != 1) throw InvalidParams("hjb: only d = 1 supported");
  if (grid_spec.n_x < 3 || grid_spec.n_t < 1 || grid_spec.n_u < 1)
    throw InvalidParams("hjb: degenerate grid spec");

  const int nx = grid_spec.n_x;
  const int nt = grid_spec.n_t;
  const int nu = grid_spec.n_u;
  const double T = problem.horizon;
  const double dt = T / nt;
  const double lo = grid_spec.x_lo - grid_spec.padding;
  const double hi = grid_spec.x_hi + grid_spec.padding;

  std::vector<double> gh_z, gh_w;
  gauss_hermite(std::max(grid_spec.gh_nodes, 11), gh_z, gh_w);

  HjbSolution sol;
  sol.x.resize(nx);
  for (int j = 0; j < nx; ++j)
    sol.x[j] = lo + (hi - lo) * (static_cast<double>(j) / (nx - 1));
  sol.t.resize(nt + 1);
  for (int m = 0; m <= nt; ++m) sol.t[m] = T * (static_cast<double>(m) / nt);

  std::vector<double> us(nu);
  const double ulo = problem.control_box.lo[0];
  const double uhi = problem.control_box.hi[0];
  for (int i = 0; i < nu; ++i)
    us[i] = (nu == 1) ? 0.5 * (ulo + uhi)
                      : ulo + (uhi - ulo) * (static_cast<double>(i) / (nu - 1));

  sol.value.assign(nt + 1, std::vector<double>(nx, 0.0));
  sol.control.assign(nt, std::vector<double>(nx, 0.0));

  for (int j = 0; j < nx; ++j)
    sol.value[nt][j] = problem.g(Eigen::VectorXd::Constant(1, sol.x[j]));

  const double sqdt = std::sqrt(dt);
  Eigen::VectorXd xvec(1), uvec(1);

  for (int m = nt - 1; m >= 0; --m) {
    const double t = sol.t[m];
    const std::vector<double>& next = sol.value[m + 1];
    std::vector<double>& cur = sol.value[m];
    std::vector<double>& pol = sol.control[m];

    parallel_for(static_cast<std::size_t>(nx), [&](std::size_t js) {
      const int j = static_cast<int>(js);
      const double xj = sol.x[j];
      Eigen::VectorXd x(1);
      x[0] = xj;
      const double bj = problem.drift(t, x)[0];
      const double sj = problem.sigma(t, x)(0, 0);
      const bool core = (xj >= grid_spec.x_lo && xj <= grid_spec.x_hi);

      auto q_value = [&](double u) {
        Eigen::VectorXd uv(1);
        uv[0] = u;
        double acc = problem.f(t, x, uv) * dt;
        const double mean = xj + (bj + u) * dt;
        double escape = 0.0;
        for (std::size_t qn = 0; qn < gh_z.size(); ++qn) {
          const double xn = mean + sj * sqdt * gh_z[qn];
          if (xn < lo || xn > hi) escape += gh_w[qn];
          acc += gh_w[qn] * interp_clamped(sol.x, next, xn);
        }
        if (core && escape > grid_spec.escape_tol)
          throw DomainEscape("hjb: quadrature mass " + std::to_string(escape) +
                             " escaped the padded domain at t=" + std::to_string(t) +
                             ", x=" + std::to_string(xj));
        return acc;
      };

      int best = 0;
      double best_val = q_value(us[0]);
      for (int i = 1; i < nu; ++i) {
        const double v = q_value(us[i]);
        if (v < best_val) {
          best_val = v;
          best = i;
        }
      }
      double ustar = us[best];
      if (grid_spec.refine_u && nu >= 3 && best > 0 && best < nu - 1) {
        // Parabola through the three bracketing samples.
        const double vl = q_value(us[best - 1]);
        const double vr = q_value(us[best + 1]);
        const double denom = vl - 2.0 * best_val + vr;
        if (denom > 0.0) {
          const double du = us[1] - us[0];
          double cand = us[best] + 0.5 * du * (vl - vr) / denom;
          cand = std::min(std::max(cand, ulo), uhi);
          const double vc = q_value(cand);
          if (vc < best_val) {
            best_val = vc;
            ustar = cand;
          }
        }
      }
      cur[j] = best_val;
      pol[j] = ustar;
    });
  }
  return sol;
}

double HjbSolution::value_at(double time, double state) const {
  // Linear interpolation in time between the stored slices.
  if (time <= t.front()) return interp_clamped(x, value.front(), state);
  if (time >= t.back()) return interp_clamped(x, value.back(), state);
  const double dt = t[1] - t[0];
  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(time / dt), t.size() - 2);
  const double w = (time - t[m]) / dt;
  return (1.0 - w) * interp_clamped(x, value[m], state) +
         w * interp_clamped(x, value[m + 1], state);
}

double HjbSolution::control_at(double time, double state) const {
  const double dt = t[1] - t[0];
  std::size_t m = (time <= 0.0) ? 0 : std::min<std::size_t>(
      static_cast<std::size_t>(time / dt), control.size() - 1);
  return interp_clamped(x, control[m], state);
}

void export_hjb_csv(const HjbSolution& solution, const std::string& path,
                    const std::string& provenance) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  out.header({"t", "x", "V", "u_star"});
  for (std::size_t m = 0; m < solution.t.size(); ++m) {
    for (std::size_t j = 0; j < solution.x.size(); ++j) {
      const double u = (m < solution.control.size()) ? solution.control[m][j]
                                                     : solution.control.back()[j];
      out.row({csv::format_double(solution.t[m]), csv::format_double(solution.x[j]),
               csv::format_double(solution.value[m][j]), csv::format_double(u)});
    }
  }
}

}  // namespace epmc
