// Command-line front end: validate / solve / evaluate / oracle / bench-tcl.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "epmc/algorithm.hpp"
#include "epmc/config.hpp"
#include "epmc/csv.hpp"
#include "epmc/eval.hpp"
#include "epmc/lq_oracle.hpp"
#include "epmc/parallel.hpp"
#include "epmc/rng.hpp"
#include "epmc/tcl_bench.hpp"
#include "epmc/version.hpp"

namespace {

using namespace epmc;

struct ProblemBundle {
  std::string kind;
  ControlProblem problem;
  std::optional<TclProblem> tcl;
  std::optional<LQSpec> lq;
};

const std::map<std::string, std::vector<std::string>> kSchema = {
    {"problem",
     {"kind", "name", "q", "m", "rho_c", "sigma", "horizon", "x0", "u_lo", "u_hi", "dim",
      "theta", "x_out", "kappa", "p_max", "x_min", "x_max", "x_target", "devices", "mu", "gamma",
      "eta", "r_const", "profile"}},
    {"solve",
     {"epsilon", "iterations", "particles", "steps", "degree", "seed", "u0", "ess_floor",
      "early_stop_tol"}},
    {"evaluate", {"n_grid", "n_simu", "seed"}},
    {"oracle", {"hjb_nx", "hjb_nt", "hjb_nu", "gh_nodes", "extra_instances", "certify",
                "cert_tolerance"}},
    {"output", {"dir"}},
};

void check_schema(const Config& cfg) {
  for (const auto& section : cfg.sections()) {
    const auto it = kSchema.find(section);
    if (it == kSchema.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& key : cfg.keys(section)) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
}

ControlProblem make_custom_problem(const Config& cfg) {
  const std::string name = cfg.get_string("problem", "name");
  if (name == "brownian-linear-g") {
    // d=1 driftless diffusion with linear terminal cost; U = {0}.
    ControlProblem p;
    p.dim = 1;
    p.horizon = cfg.get_double("problem", "horizon", 1.0);
    p.start = Eigen::VectorXd::Constant(1, cfg.get_double("problem", "x0", 1.0));
    const double sig = cfg.get_double("problem", "sigma", 1.0);
    p.drift = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    p.diffusion = [sig](double, const Eigen::VectorXd&) {
      return Eigen::MatrixXd::Constant(1, 1, sig);
    };
    p.diffusion_diag = [sig](double, const Eigen::VectorXd&) {
      return Eigen::VectorXd::Constant(1, sig);
    };
    p.control_box = Box::cube(1, 0.0, 0.0);
    p.running_cost = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
    p.terminal_cost = [](const Eigen::VectorXd& x) { return x[0]; };
    p.cost_floor_ok = false;  // g(x) = x takes both signs
    p.pointwise_state_free = true;
    return p;
  }
  if (name == "zero-cost") {
    const int d = cfg.get_int("problem", "dim", 1);
    ControlProblem p;
    p.dim = d;
    p.horizon = cfg.get_double("problem", "horizon", 1.0);
    p.start = Eigen::VectorXd::Constant(d, cfg.get_double("problem", "x0", 0.0));
    p.drift = [d](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
    const double sig = cfg.get_double("problem", "sigma", 1.0);
    p.diffusion = [sig, d](double, const Eigen::VectorXd&) {
      return (sig * Eigen::VectorXd::Ones(d)).asDiagonal().toDenseMatrix();
    };
    p.diffusion_diag = [sig, d](double, const Eigen::VectorXd&) {
      return (sig * Eigen::VectorXd::Ones(d)).eval();
    };
    p.control_box = Box::cube(d, -1.0, 1.0);
    p.running_cost = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
    p.terminal_cost = [](const Eigen::VectorXd&) { return 0.0; };
    p.pointwise_state_free = true;
    return p;
  }
  throw ConfigError("config: unknown custom problem name '" + name + "'");
}

ProblemBundle build_problem(const Config& cfg) {
  ProblemBundle bundle;
  bundle.kind = cfg.get_string("problem", "kind");
  if (bundle.kind == "lq") {
    LQSpec spec;
    spec.q = cfg.get_double("problem", "q", 0.0);
    spec.m = cfg.get_double("problem", "m", 1.0);
    spec.rho_c = cfg.get_double("problem", "rho_c", 1.0);
    spec.sigma = cfg.get_double("problem", "sigma", 1.0);
    spec.horizon = cfg.get_double("problem", "horizon", 1.0);
    spec.x0 = cfg.get_double("problem", "x0", 1.0);
    spec.u_lo = cfg.get_double("problem", "u_lo", -10.0);
    spec.u_hi = cfg.get_double("problem", "u_hi", 10.0);
    bundle.lq = spec;
    bundle.problem = make_lq_problem(spec);
    return bundle;
  }
  if (bundle.kind == "tcl") {
    const int d = cfg.get_int("problem", "dim");
    ClusterParams params = default_cluster_params(d);
    const auto fill = [&](const char* key, Eigen::VectorXd& field) {
      if (!cfg.has("problem", key)) return;
      const auto v = cfg.get_vector("problem", key, d);
      field = Eigen::Map<const Eigen::VectorXd>(v.data(), d);
    };
    fill("theta", params.theta);
    fill("x_out", params.x_out);
    fill("kappa", params.kappa);
    fill("p_max", params.p_max);
    fill("sigma", params.sigma);
    fill("x0", params.x0);
    fill("x_min", params.x_min);
    fill("x_max", params.x_max);
    fill("x_target", params.x_target);
    fill("devices", params.devices);
    fill("gamma", params.gamma);
    fill("eta", params.eta);
    params.mu = cfg.get_double("problem", "mu", params.mu);
    const double horizon = cfg.get_double("problem", "horizon", 2.0);
    TargetProfile profile = cfg.has("problem", "profile")
                                ? load_profile(cfg.get_string("problem", "profile"))
                                : TargetProfile::constant(cfg.get_double("problem", "r_const", 0.5));
    bundle.tcl = build_tcl_problem(params, profile, horizon);
    bundle.problem = bundle.tcl->problem;
    return bundle;
  }
  if (bundle.kind == "custom") {
    bundle.problem = make_custom_problem(cfg);
    return bundle;
  }
  throw ConfigError("config: problem kind must be lq, tcl or custom");
}

SolveConfig make_solve_config(const Config& cfg, const ProblemBundle& bundle,
                              std::optional<std::uint64_t> seed_override) {
  SolveConfig sc;
  sc.epsilon = cfg.get_double("solve", "epsilon", 1.0);
  sc.iterations = cfg.get_int("solve", "iterations", 10);
  sc.particles = cfg.get_int("solve", "particles", 1000);
  const int steps = cfg.get_int("solve", "steps", 50);
  sc.grid = TimeGrid(steps, bundle.problem.horizon);
  sc.basis_degree = cfg.get_int("solve", "degree", 0);
  sc.master_seed = seed_override ? *seed_override : cfg.get_u64("solve", "seed", 1);
  sc.ess_floor = cfg.get_double("solve", "ess_floor", 2.0);
  sc.early_stop_tol = cfg.get_double("solve", "early_stop_tol", 0.0);

  const int d = bundle.problem.dim;
  const double u0_default = (bundle.kind == "tcl") ? 0.5 : 0.0;
  const auto u0 = cfg.get_vector("solve", "u0", d, u0_default);
  Eigen::VectorXd u0v = Eigen::Map<const Eigen::VectorXd>(u0.data(), d);
  if (bundle.tcl) u0v = bundle.tcl->from_physical(u0v);  // config gives physical units
  sc.initial_policy = MarkovPolicy::constant(sc.grid, u0v, bundle.problem.control_box);
  return sc;
}

std::string resolve_out_dir(const Config& cfg, const std::string& flag_dir) {
  if (!flag_dir.empty()) return flag_dir;
  if (const char* env = std::getenv("EPMC_OUT"); env && *env) return env;
  return cfg.get_string("output", "dir", std::string("out"));
}

std::string provenance(const Config& cfg, std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "epmc v%s config_hash=%016llx seed=%llu", kVersion,
                static_cast<unsigned long long>(cfg.content_hash()),
                static_cast<unsigned long long>(seed));
  return buf;
}

void write_policy_files(const ProblemBundle& bundle, const SolveResult& result,
                        const std::string& dir, const std::string& prov) {
  const std::string path = dir + "/policy.csv";
  if (bundle.tcl && result.policy.is_constant_per_step()) {
    // Physical units for the thermostatic benchmark.
    csv::Writer out(path);
    out.comment(prov);
    out.comment(bundle.tcl->box_note);
    const int d = bundle.problem.dim;
    std::vector<std::string> header = {"step", "t"};
    for (int j = 1; j <= d; ++j) header.push_back("u_" + std::to_string(j));
    out.header(header);
    for (int m = 0; m < result.policy.grid().num_steps(); ++m) {
      const Eigen::VectorXd u_phys =
          bundle.tcl->to_physical(result.policy.step_values().row(m).transpose());
      std::vector<std::string> cells = {std::to_string(m),
                                        csv::format_double(result.policy.grid().node(m))};
      for (int j = 0; j < d; ++j) cells.push_back(csv::format_double(u_phys[j]));
      out.row(cells);
    }
    return;
  }
  export_policy_csv(result.policy, path, prov, result.has_drift ? &result.final_drift : nullptr);
}

int cmd_validate(const Config& cfg, const std::string& dir, const std::string& prov) {
  const ProblemBundle bundle = build_problem(cfg);
  const auto probes = default_probe_points(bundle.problem);
  const ValidationReport report = validate_problem(bundle.problem, probes);

  csv::Writer out(dir + "/validation.csv");
  out.comment(prov);
  out.header({"probe", "t", "sigma_min_sv", "sigma_max_sv", "f_value", "g_value", "f_nonneg",
              "g_nonneg", "convexity_ok"});
  for (std::size_t i = 0; i < report.probes.size(); ++i) {
    const auto& p = report.probes[i];
    out.row({std::to_string(i), csv::format_double(p.point.t),
             csv::format_double(p.sigma_min_sv), csv::format_double(p.sigma_max_sv),
             csv::format_double(p.f_value), csv::format_double(p.g_value),
             p.f_nonneg ? "1" : "0", p.g_nonneg ? "1" : "0", p.convexity_ok ? "1" : "0"});
  }
  std::cout << "validation: " << (report.pass() ? "PASS" : "FAIL") << "\n";
  return report.pass() ? 0 : 1;
}

int cmd_solve(const Config& cfg, const std::string& dir, const std::string& prov,
              std::optional<std::uint64_t> seed_override, bool timings) {
  const ProblemBundle bundle = build_problem(cfg);
  const SolveConfig sc = make_solve_config(cfg, bundle, seed_override);
  const SolveResult result = solve(bundle.problem, sc);

  write_policy_files(bundle, result, dir, prov);
  export_reports_csv(result.reports, dir + "/iterations.csv", prov, timings);
  if (result.has_drift) {
    export_drift_csv(result.final_drift, dir + "/drift.csv", prov);
    export_drift_diagnostics_csv(result.final_drift, dir + "/drift_diagnostics.csv", prov);
  }
  if (result.reports.empty())
    std::cout << "solve: K=0, wrote initial policy\n";
  else
    std::cout << "solve: K=" << result.reports.size()
              << " cost_QP=" << csv::format_double(result.reports.back().cost_qp)
              << " cost_PP=" << csv::format_double(result.reports.back().cost_pp) << "\n";
  return 0;
}

int cmd_evaluate(const Config& cfg, const std::string& dir, const std::string& prov,
                 std::optional<std::uint64_t> seed_override) {
  const ProblemBundle bundle = build_problem(cfg);
  const SolveConfig sc = make_solve_config(cfg, bundle, std::nullopt);
  const int n_grid = cfg.get_int("evaluate", "n_grid", 1);
  const int n_simu = cfg.get_int("evaluate", "n_simu", 1000);
  const std::uint64_t seed =
      seed_override ? *seed_override : cfg.get_u64("evaluate", "seed", 1001);
  const CampaignReport report = evaluation_campaign(bundle.problem, sc, n_grid, n_simu, seed);
  export_campaign_csv(report, dir + "/campaign.csv", prov);
  std::cout << "evaluate: grand_mean=" << csv::format_double(report.grand_mean)
            << " between_run_std=" << csv::format_double(report.between_run_std) << " cell="
            << report.cell() << "\n";
  return 0;
}

int cmd_oracle(const Config& cfg, const std::string& dir, const std::string& prov,
               std::optional<std::uint64_t> seed_override) {
  const ProblemBundle bundle = build_problem(cfg);
  if (!bundle.lq) throw ConfigError("config: oracle requires problem.kind = lq");
  bool all_pass = true;

  std::vector<LQSpec> instances = {*bundle.lq};
  if (cfg.get_bool("oracle", "extra_instances", true)) {
    LQSpec b;  // running-state cost active
    b.q = 1.0;
    instances.push_back(b);
    LQSpec c;
    c.q = 0.5;
    c.m = 2.0;
    c.rho_c = 0.5;
    c.sigma = 0.7;
    c.horizon = 1.5;
    c.x0 = 0.5;
    instances.push_back(c);
  }

  const int nx = cfg.get_int("oracle", "hjb_nx", 1401);
  const int nt = cfg.get_int("oracle", "hjb_nt", 200);
  const int nu = cfg.get_int("oracle", "hjb_nu", 81);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const LQSpec& spec = instances[i];
    const ControlProblem problem = make_lq_problem(spec);
    const RiccatiSolution ric = riccati_value(spec);
    HjbGridSpec grid_spec = default_hjb_grid(problem, nx, nt, nu);
    grid_spec.gh_nodes = cfg.get_int("oracle", "gh_nodes", 11);
    const HjbSolution hjb = hjb_grid_value(problem, grid_spec);
    const double v_ric = ric.value(0.0, spec.x0);
    const double v_hjb = hjb.value_at(0.0, spec.x0);
    const double rel = std::fabs(v_hjb - v_ric) / std::fabs(v_ric);
    const bool ok = rel <= 0.01;
    all_pass = all_pass && ok;
    std::cout << "oracle cross-agreement instance " << i << " (q=" << spec.q << "): riccati="
              << csv::format_double(v_ric) << " hjb=" << csv::format_double(v_hjb)
              << " rel_diff=" << csv::format_double(rel) << " " << (ok ? "PASS" : "FAIL")
              << "\n";
    if (i == 0) {
      csv::Writer out(dir + "/riccati.csv");
      out.comment(prov);
      out.header({"t", "P", "c", "K"});
      // Thin the fine ODE grid for the export.
      const std::size_t stride = std::max<std::size_t>(1, ric.t.size() / 2000);
      for (std::size_t j = 0; j < ric.t.size(); j += stride)
        out.row({csv::format_double(ric.t[j]), csv::format_double(ric.P[j]),
                 csv::format_double(ric.c[j]), csv::format_double(ric.P[j] / spec.rho_c)});
      export_hjb_csv(hjb, dir + "/hjb.csv", prov);
    }
  }

  if (cfg.get_bool("oracle", "certify", true)) {
    const SolveConfig sc = make_solve_config(cfg, bundle, seed_override);
    const RiccatiSolution ric = riccati_value(*bundle.lq);
    const double v_star = ric.value(0.0, bundle.lq->x0);
    const SolveResult solved = solve(bundle.problem, sc);
    const int n_simu = cfg.get_int("evaluate", "n_simu", 1000);
    const std::uint64_t eval_seed = cfg.get_u64("evaluate", "seed", 1001);
    const EvalResult eval =
        evaluate_policy(bundle.problem, solved.policy, n_simu, sc.grid, eval_seed);
    const double tol = cfg.get_double("oracle", "cert_tolerance", 0.02);
    const PathBatch batch =
        simulate_paths(bundle.problem, solved.policy, n_simu, sc.grid,
                       rng::derive_seed(eval_seed, rng::Domain::kEval, 1));
    const auto costs = path_costs(batch, bundle.problem);
    double mean = 0.0;
    for (double y : costs) mean += y;
    mean /= costs.size();
    double var = 0.0;
    for (double y : costs) var += (y - mean) * (y - mean);
    var /= costs.size();
    const bool within = std::fabs(eval.mean_cost - v_star) <= tol * std::fabs(v_star);
    const bool bound = epsilon_gap_bound(eval.mean_cost, v_star, var, sc.epsilon, 0.0,
                                         3.0 * eval.std_error);
    std::cout << "certification detail: cost=" << csv::format_double(eval.mean_cost)
              << " riccati=" << csv::format_double(v_star)
              << " rel_gap=" << csv::format_double((eval.mean_cost - v_star) / v_star)
              << " gap_bound=" << (bound ? "PASS" : "FAIL") << "\n";
    const bool cert = within && bound;
    all_pass = all_pass && cert;
    std::cout << "certification: " << (cert ? "PASS" : "FAIL") << "\n";
  }
  return all_pass ? 0 : 1;
}

int cmd_bench_tcl(const Config& cfg, const std::string& dir, const std::string& prov,
                  std::optional<std::uint64_t> seed_override, bool timings) {
  const ProblemBundle bundle = build_problem(cfg);
  if (!bundle.tcl) throw ConfigError("config: bench-tcl requires problem.kind = tcl");
  const SolveConfig sc = make_solve_config(cfg, bundle, seed_override);
  const SolveResult result = solve(bundle.problem, sc);
  write_policy_files(bundle, result, dir, prov);
  export_reports_csv(result.reports, dir + "/iterations.csv", prov, timings);
  bool descent = true;
  if (result.reports.size() >= 2) descent = descent_check(result.reports);
  std::cout << "bench-tcl: descent=" << (descent ? "PASS" : "FAIL")
            << " final cost_PP="
            << csv::format_double(result.reports.empty() ? 0.0
                                                         : result.reports.back().cost_pp)
            << "\n";
  return descent ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy-penalized Monte Carlo solver for stochastic control"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir_flag;
  std::string format = "csv";
  int threads = 1;
  bool timings = false;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;

  app.add_option("--out", out_dir_flag, "output directory (overrides config and EPMC_OUT)");
  app.add_option("--threads", threads, "worker threads; never changes any number")
      ->default_val(1);
  app.add_option("--format", format, "output format (csv)");
  app.add_flag("--timings", timings, "include wall-clock seconds in iteration reports");
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");

  CLI::App* sub_validate = app.add_subcommand("validate", "check structural hypotheses");
  CLI::App* sub_solve = app.add_subcommand("solve", "run the alternating minimization");
  CLI::App* sub_evaluate = app.add_subcommand("evaluate", "independent-run campaign");
  CLI::App* sub_oracle = app.add_subcommand("oracle", "LQ ground-truth checks");
  CLI::App* sub_bench = app.add_subcommand("bench-tcl", "thermostatic benchmark end-to-end");
  for (CLI::App* sub : {sub_validate, sub_solve, sub_evaluate, sub_oracle, sub_bench})
    sub->add_option("config", config_path, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  }

  try {
    if (format != "csv") throw ConfigError("config: unsupported format '" + format + "'");
    epmc::set_num_threads(threads);
    if (*seed_opt) seed_override = seed_value;

    const Config cfg = Config::parse_file(config_path);
    check_schema(cfg);
    const std::string dir = resolve_out_dir(cfg, out_dir_flag);
    std::filesystem::create_directories(dir);
    const std::uint64_t effective_seed =
        seed_override ? *seed_override : cfg.get_u64("solve", "seed", 1);
    const std::string prov = provenance(cfg, effective_seed);

    if (sub_validate->parsed()) return cmd_validate(cfg, dir, prov);
    if (sub_solve->parsed()) return cmd_solve(cfg, dir, prov, seed_override, timings);
    if (sub_evaluate->parsed()) return cmd_evaluate(cfg, dir, prov, seed_override);
    if (sub_oracle->parsed()) return cmd_oracle(cfg, dir, prov, seed_override);
    if (sub_bench->parsed()) return cmd_bench_tcl(cfg, dir, prov, seed_override, timings);
    throw ConfigError("config: no subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const NegativeCost& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const NonInvertibleDiffusion& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const InvalidParams& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const CoverageError& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 2;
  }
}
