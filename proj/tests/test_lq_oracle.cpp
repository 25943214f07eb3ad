#include <doctest.h>

#include "epmc/lq_oracle.hpp"
#include "test_util.hpp"

using namespace epmc;

TEST_CASE("riccati with zero costs is identically zero") {
  LQSpec spec;
  spec.q = 0.0;
  spec.m = 0.0;
  const auto sol = riccati_value(spec);
  CHECK(sol.P_at(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sol.K_at(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sol.value(0.0, 3.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("riccati closed forms for the pure terminal problem") {
  // q = 0: P(t) = 1 / (1/m + (T-t)/rho_c) and c(0) = sigma^2 rho_c log(1 + Tm/rho_c).
  LQSpec spec;  // q=0, m=1, rho_c=1, sigma=1, T=1
  const auto sol = riccati_value(spec);
  CHECK(sol.P_at(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.P_at(0.25) == doctest::Approx(1.0 / 1.75).epsilon(1e-10));
  CHECK(sol.c_at(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(sol.value(0.0, 1.0) == doctest::Approx(0.5 + std::log(2.0)).epsilon(1e-9));
  CHECK(sol.K_at(0.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("riccati stationary point when q = m^2 / rho_c") {
  // q = 1, m = 1, rho_c = 1: P stays at 1 and c(0) = sigma^2 T.
  LQSpec spec;
  spec.q = 1.0;
  const auto sol = riccati_value(spec);
  CHECK(sol.P_at(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.P_at(0.7) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.c_at(0.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gauss-hermite rule integrates gaussian moments") {
  std::vector<double> z, w;
  gauss_hermite(11, z, w);
  double s0 = 0, s1 = 0, s2 = 0, s4 = 0, s6 = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    s0 += w[i];
    s1 += w[i] * z[i];
    s2 += w[i] * z[i] * z[i];
    s4 += w[i] * std::pow(z[i], 4);
    s6 += w[i] * std::pow(z[i], 6);
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::fabs(s1) < 1e-13);
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s4 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s6 == doctest::Approx(15.0).epsilon(1e-11));
}

TEST_CASE("hjb grid: constant terminal cost stays constant") {
  ControlProblem p = make_lq_problem(LQSpec{});
  p.running_cost = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
  p.terminal_cost = [](const Eigen::VectorXd&) { return 1.0; };
  HjbGridSpec grid = default_hjb_grid(p, 201, 20, 11);
  const auto sol = hjb_grid_value(p, grid);
  for (const auto& row : sol.value)
    for (double v : row) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hjb grid: martingale value of a linear terminal cost") {
  // No drift, no control, g(x) = x: V(0, x) = x away from the boundary.
  ControlProblem p = test::terminal_cost_problem(
      [](const Eigen::VectorXd& x) { return x[0]; });
  HjbGridSpec grid = default_hjb_grid(p, 801, 50, 1);
  const auto sol = hjb_grid_value(p, grid);
  for (double x : {0.2, 1.0, 2.5}) {
    CHECK(sol.value_at(0.0, x) == doctest::Approx(x).epsilon(1e-6));
  }
}

TEST_CASE("hjb grid agrees with riccati at laptop resolution") {
  LQSpec spec;  // the shipped instance
  const auto ric = riccati_value(spec);
  const ControlProblem p = make_lq_problem(spec);
  const auto sol = hjb_grid_value(p, default_hjb_grid(p, 1401, 200, 81));
  const double v_hjb = sol.value_at(0.0, spec.x0);
  const double v_ric = ric.value(0.0, spec.x0);
  CHECK(std::fabs(v_hjb - v_ric) / v_ric < 0.01);
  // Greedy control near the start resembles the Riccati feedback.
  CHECK(sol.control_at(0.0, 1.0) == doctest::Approx(-ric.K_at(0.0)).epsilon(0.15));
}

TEST_CASE("hjb grid reports quadrature escape") {
  ControlProblem p = make_lq_problem(LQSpec{});
  HjbGridSpec grid;
  grid.x_lo = -2.0;
  grid.x_hi = 2.0;
  grid.padding = 0.0;  // core nodes at the edge lose quadrature mass
  grid.n_x = 101;
  grid.n_t = 50;
  grid.n_u = 5;
  CHECK_THROWS_AS(hjb_grid_value(p, grid), DomainEscape);
}

TEST_CASE("riccati feedback policy clamps into the control box") {
  LQSpec spec;
  spec.u_lo = -0.1;
  spec.u_hi = 0.1;
  const auto sol = riccati_value(spec);
  const TimeGrid grid(10, 1.0);
  const auto policy = sol.feedback_policy(grid);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 50.0);
  CHECK(policy.at_step(0, x)[0] == -0.1);
  x[0] = 0.1;
  CHECK(policy.at_step(0, x)[0] == doctest::Approx(-sol.K_at(0.0) * 0.1).epsilon(1e-9));
}
