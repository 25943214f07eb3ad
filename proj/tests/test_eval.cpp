#include <doctest.h>

#include "epmc/eval.hpp"
#include "epmc/lq_oracle.hpp"
#include "test_util.hpp"

using namespace epmc;

TEST_CASE("constant terminal cost evaluates exactly") {
  ControlProblem p = test::zero_cost_problem(1);
  p.terminal_cost = [](const Eigen::VectorXd&) { return 1.0; };
  const TimeGrid grid(5, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(1), p.control_box);
  const auto result = evaluate_policy(p, policy, 100, grid, 5);
  CHECK(result.mean_cost == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(result.std_error == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(evaluate_policy(p, policy, 1, grid, 5), InvalidParams);
}

TEST_CASE("martingale terminal mean") {
  const ControlProblem p = test::terminal_cost_problem(
      [](const Eigen::VectorXd& x) { return x[0]; }, 1.0, 2.5);
  const TimeGrid grid(20, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(1), p.control_box);
  const auto result = evaluate_policy(p, policy, 20000, grid, 6);
  CHECK(std::fabs(result.mean_cost - 2.5) < 3.0 * result.std_error);
}

TEST_CASE("clipped riccati feedback prices close to the riccati value") {
  const LQSpec spec;
  const auto ric = riccati_value(spec);
  const ControlProblem p = make_lq_problem(spec);
  const TimeGrid grid(200, 1.0);
  const auto policy = ric.feedback_policy(grid);
  const auto result = evaluate_policy(p, policy, 100000, grid, 7);
  const double v_star = ric.value(0.0, spec.x0);
  CHECK(std::fabs(result.mean_cost - v_star) / v_star < 0.02);
}

TEST_CASE("campaign with one run reduces to a single evaluation") {
  const ControlProblem p = make_lq_problem(LQSpec{});
  SolveConfig cfg;
  cfg.epsilon = 2.0;
  cfg.iterations = 2;
  cfg.particles = 500;
  cfg.grid = TimeGrid(10, 1.0);
  cfg.basis_degree = 0;
  cfg.initial_policy =
      MarkovPolicy::constant(cfg.grid, Eigen::VectorXd::Zero(1), p.control_box);

  const std::uint64_t seed = 4242;
  const auto campaign = evaluation_campaign(p, cfg, 1, 300, seed);
  REQUIRE(campaign.runs.size() == 1);
  CHECK(campaign.grand_mean == campaign.runs[0].mean_cost);
  CHECK(campaign.between_run_std == 0.0);

  // Replay the derivation by hand.
  SolveConfig replay = cfg;
  replay.master_seed = rng::derive_seed(seed, rng::Domain::kCampaignTrain, 0);
  const auto solved = solve(p, replay);
  const auto eval = evaluate_policy(p, solved.policy, 300, cfg.grid,
                                    rng::derive_seed(seed, rng::Domain::kCampaignEval, 0));
  CHECK(campaign.grand_mean == eval.mean_cost);
}

TEST_CASE("deterministic costs give zero dispersion across runs") {
  ControlProblem p = test::zero_cost_problem(1);
  p.terminal_cost = [](const Eigen::VectorXd&) { return 1.0; };
  SolveConfig cfg;
  cfg.epsilon = 1.0;
  cfg.iterations = 1;
  cfg.particles = 100;
  cfg.grid = TimeGrid(4, 1.0);
  cfg.initial_policy =
      MarkovPolicy::constant(cfg.grid, Eigen::VectorXd::Zero(1), p.control_box);
  const auto campaign = evaluation_campaign(p, cfg, 4, 50, 17);
  CHECK(campaign.grand_mean == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(campaign.between_run_std == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(campaign.cell().substr(0, 4) == "1.00");
}

TEST_CASE("campaign means are stable across master seeds at reduced scale") {
  const ControlProblem p = make_lq_problem(LQSpec{});
  SolveConfig cfg;
  cfg.epsilon = 5.0;
  cfg.iterations = 4;
  cfg.particles = 1000;
  cfg.grid = TimeGrid(20, 1.0);
  cfg.basis_degree = 1;
  cfg.initial_policy =
      MarkovPolicy::constant(cfg.grid, Eigen::VectorXd::Zero(1), p.control_box);

  const auto a = evaluation_campaign(p, cfg, 5, 200, 1111);
  const auto b = evaluation_campaign(p, cfg, 5, 200, 2222);
  const double pooled = std::sqrt(a.between_run_std * a.between_run_std / 5 +
                                  b.between_run_std * b.between_run_std / 5 +
                                  a.pooled_std_error * a.pooled_std_error +
                                  b.pooled_std_error * b.pooled_std_error);
  CHECK(std::fabs(a.grand_mean - b.grand_mean) < 3.0 * pooled + 1e-9);
}

TEST_CASE("campaign aggregates run failures with context") {
  ControlProblem p = test::terminal_cost_problem(
      [](const Eigen::VectorXd& x) { return x[0] * x[0]; }, 1.0, 1.0, 1.0, -0.5, 0.5, true);
  SolveConfig cfg;
  cfg.epsilon = 5000.0;  // guaranteed weight collapse
  cfg.iterations = 2;
  cfg.particles = 50;
  cfg.grid = TimeGrid(4, 1.0);
  cfg.initial_policy =
      MarkovPolicy::constant(cfg.grid, Eigen::VectorXd::Zero(1), p.control_box);
  try {
    evaluation_campaign(p, cfg, 2, 50, 3);
    FAIL("expected campaign failure");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("run 0") != std::string::npos);
    CHECK(msg.find("run 1") != std::string::npos);
  }
}

TEST_CASE("training and evaluation streams are disjoint") {
  const ControlProblem p = test::zero_cost_problem(1);
  const TimeGrid grid(5, 1.0);
  const auto policy = MarkovPolicy::constant(grid, Eigen::VectorXd::Zero(1), p.control_box);
  const auto train = simulate_paths(p, policy, 10, grid,
                                    rng::derive_seed(42, rng::Domain::kTrain, 0));
  const auto eval = simulate_paths(p, policy, 10, grid,
                                   rng::derive_seed(42, rng::Domain::kEval, 0));
  CHECK(train.states != eval.states);
}
