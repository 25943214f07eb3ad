#include <doctest.h>

#include <fstream>
#include <limits>

#include "epmc/csv.hpp"
#include "epmc/parallel.hpp"
#include "epmc/simulate.hpp"
#include "epmc/tcl_bench.hpp"
#include "test_util.hpp"

using namespace epmc;

TEST_CASE("drift-dominated limit: constant control integrates to x + cT") {
  ControlProblem p = test::zero_cost_problem(2, 1.0, 0.5);
  const double tiny = 1e-8;
  p.diffusion_diag = [tiny](double, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(2, tiny);
  };
  const TimeGrid grid(4, 1.0);
  Eigen::VectorXd c(2);
  c << 0.3, -0.7;
  const auto policy = MarkovPolicy::constant(grid, c, p.control_box);
  const auto batch = simulate_paths(p, policy, 8, grid, 11);
  for (int n = 0; n < batch.n_paths; ++n) {
    const auto xT = batch.state(n, 4);
    CHECK(std::fabs(xT[0] - (0.5 + 0.3)) < 1e-6);
    CHECK(std::fabs(xT[1] - (0.5 - 0.7)) < 1e-6);
    CHECK(batch.control(n, 2)[0] == 0.3);
  }
  CHECK(batch.state(0, 0)[0] == 0.5);
}

TEST_CASE("brownian marginal: mean and variance of X_T") {
  const ControlProblem p = test::zero_cost_problem(1, 1.0, 2.0);
  const int n = 100000;
  const TimeGrid grid(8, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(1), p.control_box);
  const auto batch = simulate_paths(p, policy, n, grid, 333);
  std::vector<double> xT(n);
  for (int i = 0; i < n; ++i) xT[i] = batch.state(i, 8)[0];
  CHECK(std::fabs(test::mean(xT) - 2.0) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(test::variance(xT) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("uncontrolled cluster means track the exponential relaxation") {
  ClusterParams params = default_cluster_params(2);
  params.theta = Eigen::VectorXd::Constant(2, 1.0);
  params.sigma = Eigen::VectorXd::Constant(2, 0.3);
  params.p_max = 8.0 * params.theta / params.kappa[0];
  const auto tcl = build_tcl_problem(params, TargetProfile::constant(0.5), 1.0);

  const int M = 1000;
  const int n = 20000;
  const TimeGrid grid(M, 1.0);
  const auto policy =
      MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(2), tcl.problem.control_box);
  const auto batch = simulate_paths(tcl.problem, policy, n, grid, 77);

  for (const int m : {250, 500, 1000}) {
    const double t = grid.node(m);
    for (int j = 0; j < 2; ++j) {
      std::vector<double> xs(n);
      for (int i = 0; i < n; ++i) xs[i] = batch.state(i, m)[j];
      const double expected =
          params.x_out[j] + (params.x0[j] - params.x_out[j]) * std::exp(-params.theta[j] * t);
      const double se = std::sqrt(test::variance(xs) / n);
      CHECK(std::fabs(test::mean(xs) - expected) < 3.0 * se + 1e-3);
    }
  }
}

TEST_CASE("identical arguments give bit-identical batches at any thread count") {
  const ControlProblem p = test::zero_cost_problem(3, 1.0, 0.0);
  const TimeGrid grid(25, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Constant(3, 0.2),
                                             p.control_box);
  const auto a = simulate_paths(p, policy, 500, grid, 2718);
  const auto b = simulate_paths(p, policy, 500, grid, 2718);
  CHECK(a.states == b.states);
  CHECK(a.controls == b.controls);

  set_num_threads(4);
  const auto c = simulate_paths(p, policy, 500, grid, 2718);
  set_num_threads(1);
  CHECK(a.states == c.states);
  CHECK(a.controls == c.controls);
}

TEST_CASE("non-finite states are reported") {
  ControlProblem p = test::zero_cost_problem(1);
  p.drift = [](double, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  };
  const TimeGrid grid(4, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(1), p.control_box);
  CHECK_THROWS_AS(simulate_paths(p, policy, 2, grid, 1), NonFiniteState);
}

TEST_CASE("sup-norm tail percentile is stable across seeds") {
  const ControlProblem p = make_lq_problem(LQSpec{});
  const TimeGrid grid(50, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(1), p.control_box);
  std::vector<double> p999;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto batch = simulate_paths(p, policy, 20000, grid, seed);
    std::vector<double> sup(batch.n_paths, 0.0);
    for (int n = 0; n < batch.n_paths; ++n)
      for (int m = 0; m <= 50; ++m)
        sup[n] = std::max(sup[n], std::fabs(batch.state(n, m)[0]));
    p999.push_back(test::percentile(sup, 0.999));
  }
  for (double v : p999) {
    CHECK(std::isfinite(v));
    CHECK(std::fabs(v - p999[0]) / p999[0] < 0.10);
  }
}

TEST_CASE("path CSV export carries full precision and a terminal row") {
  const ControlProblem p = test::zero_cost_problem(1, 1.0, 1.0 / 3.0);
  const TimeGrid grid(2, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Constant(1, 0.1),
                                             p.control_box);
  const auto batch = simulate_paths(p, policy, 2, grid, 5);
  const std::string path = std::string(EPMC_TEST_DATA_DIR) + "/paths.csv";
  export_paths_csv(batch, path, "test");

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# test");
  std::getline(in, line);
  CHECK(line == "path_id,step,t,x_1,u_1");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 2 * 3);
  CHECK(last.back() == ',');  // empty control cell on the terminal row

  // 17 significant digits reproduce the double exactly.
  const std::string formatted = csv::format_double(1.0 / 3.0);
  CHECK(std::stod(formatted) == 1.0 / 3.0);
}
