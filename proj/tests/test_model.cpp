#include <doctest.h>

#include "epmc/lq_oracle.hpp"
#include "epmc/model.hpp"
#include "epmc/tcl_bench.hpp"
#include "test_util.hpp"

using namespace epmc;

TEST_CASE("time grid nodes are regular and hit the horizon exactly") {
  const TimeGrid grid(50, 1.0);
  CHECK(grid.node(0) == 0.0);
  CHECK(grid.node(50) == 1.0);
  CHECK(grid.dt() == doctest::Approx(0.02).epsilon(1e-15));
  const double last_gap = grid.node(50) - grid.node(49);
  CHECK(std::fabs(last_gap - grid.dt()) <= 2e-16);
  CHECK(grid.step_of(0.0) == 0);
  CHECK(grid.step_of(0.039) == 1);
  CHECK(grid.step_of(1.0) == 49);  // t = T maps into the last interval
  CHECK_THROWS_AS(TimeGrid(0, 1.0), InvalidParams);
  CHECK_THROWS_AS(TimeGrid(4, 0.0), InvalidParams);
}

TEST_CASE("box clamping is exact") {
  const Box box = Box::cube(2, -1.0, 2.0);
  Eigen::VectorXd v(2);
  v << -3.0, 5.0;
  const Eigen::VectorXd c = box.clamp(v);
  CHECK(c[0] == -1.0);
  CHECK(c[1] == 2.0);
  CHECK(box.contains(c));
  CHECK_FALSE(box.contains(v));
  CHECK_THROWS_AS(Box(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 0.0)),
                  InvalidParams);
}

namespace {

ControlProblem identity_sigma_problem() {
  ControlProblem p = test::zero_cost_problem(2);
  p.running_cost = [](double, const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    return u.squaredNorm();
  };
  return p;
}

}  // namespace

TEST_CASE("validate_problem: identity sigma and convex quadratic cost pass") {
  const ControlProblem p = identity_sigma_problem();
  const auto report = validate_problem(p, default_probe_points(p));
  CHECK(report.pass());
  for (const auto& probe : report.probes) {
    CHECK(probe.sigma_min_sv == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probe.convexity_ok);
  }
}

TEST_CASE("validate_problem: singular sigma raises NonInvertibleDiffusion") {
  ControlProblem p = identity_sigma_problem();
  p.diffusion_diag.reset();
  p.diffusion = [](double, const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(2, 2); };
  CHECK_THROWS_AS(validate_problem(p, default_probe_points(p)), NonInvertibleDiffusion);
}

TEST_CASE("validate_problem: negative cost with declared floor raises NegativeCost") {
  ControlProblem p = identity_sigma_problem();
  p.running_cost = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return -1.0; };
  p.cost_floor_ok = true;
  CHECK_THROWS_AS(validate_problem(p, default_probe_points(p)), NegativeCost);
}

TEST_CASE("validate_problem: benchmark cost passes positivity and convexity") {
  const auto params = default_cluster_params(3);
  const auto tcl = build_tcl_problem(params, TargetProfile::constant(0.5), 2.0);
  const auto report = validate_problem(tcl.problem, default_probe_points(tcl.problem));
  CHECK(report.pass());
}

TEST_CASE("validate_problem passes on the LQ oracle problem") {
  const ControlProblem p = make_lq_problem(LQSpec{});
  CHECK(validate_problem(p, default_probe_points(p)).pass());
}

TEST_CASE("checked cost evaluation raises on negative values") {
  ControlProblem p = identity_sigma_problem();
  p.running_cost = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return -0.5; };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(p.f(0.0, x, x), NegativeCost);
  p.cost_floor_ok = false;
  CHECK(p.f(0.0, x, x) == -0.5);
}

TEST_CASE("policies clamp every output into the box") {
  const TimeGrid grid(10, 1.0);
  const Box box = Box::cube(2, 0.0, 1.0);

  // Callable that wanders far outside the box.
  const auto wild = MarkovPolicy::from_callable(
      grid,
      [](double t, const Eigen::VectorXd& x) {
        return Eigen::VectorXd(Eigen::Vector2d(10.0 * std::sin(40.0 * t + x[0]), -5.0 * x[1]));
      },
      box);
  // Per-step constants built from out-of-box values get clamped up front.
  Eigen::MatrixXd values(10, 2);
  values.setConstant(7.0);
  const auto constant = MarkovPolicy::constant_per_step(grid, values, box);

  for (int i = 0; i < 10000; ++i) {
    const int m = static_cast<int>(rng::key(5, i, 0) % 10);
    Eigen::VectorXd x(2);
    x << test::uniform(6, i, 0, -20.0, 20.0), test::uniform(6, i, 1, -20.0, 20.0);
    CHECK(box.contains(wild.at_step(m, x)));
    CHECK(box.contains(constant.at_step(m, x)));
  }
}
