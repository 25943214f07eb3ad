#include "epmc/simulate.hpp"

#include <cmath>

#include "epmc/csv.hpp"
#include "epmc/parallel.hpp"
#include "epmc/rng.hpp"

namespace epmc {

PathBatch simulate_paths(const ControlProblem& problem, const MarkovPolicy& policy, int n_paths,
                         const TimeGrid& grid, std::uint64_t master_seed) {
  if (n_paths < 1) throw InvalidParams("simulate: n_paths must be >= 1");
  if (!(policy.grid() == grid)) throw InvalidParams("simulate: policy grid differs from grid");
  if (problem.start.size() != problem.dim)
    throw InvalidParams("simulate: start state dimension mismatch");

  const int M = grid.num_steps();
  const int d = problem.dim;
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);

  PathBatch batch;
  batch.grid = grid;
  batch.n_paths = n_paths;
  batch.dim = d;
  batch.master_seed = master_seed;
  batch.states.resize(static_cast<std::size_t>(n_paths) * (M + 1) * d);
  batch.controls.resize(static_cast<std::size_t>(n_paths) * M * d);
  batch.stream_ids.resize(n_paths);
  for (int n = 0; n < n_paths; ++n) batch.stream_ids[n] = static_cast<std::uint64_t>(n);

  const bool diag = problem.diffusion_diag.has_value();

  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t n) {
    const std::uint64_t stream = batch.stream_ids[n];
    double* xs = batch.states.data() + n * static_cast<std::size_t>(M + 1) * d;
    double* us = batch.controls.data() + n * static_cast<std::size_t>(M) * d;

    Eigen::VectorXd x = problem.start;
    Eigen::Map<Eigen::VectorXd>(xs, d) = x;
    Eigen::VectorXd z(d);
    for (int m = 0; m < M; ++m) {
      const double t = grid.node(m);
      const Eigen::VectorXd u = policy.at_step(m, x);
      Eigen::Map<Eigen::VectorXd>(us + static_cast<std::size_t>(m) * d, d) = u;

      for (int j = 0; j < d; ++j)
        z[j] = rng::standard_normal(master_seed, stream,
                                    static_cast<std::uint64_t>(m) * d + j);

      Eigen::VectorXd next = x + (problem.drift(t, x) + u) * dt;
      if (diag) {
        next.noalias() += sqrt_dt * (*problem.diffusion_diag)(t, x).cwiseProduct(z);
      } else {
        next.noalias() += sqrt_dt * (problem.diffusion(t, x) * z);
      }
      if (!next.allFinite())
        throw NonFiniteState("simulate: non-finite state at step " + std::to_string(m + 1) +
                             " of path " + std::to_string(n));
      x = std::move(next);
      Eigen::Map<Eigen::VectorXd>(xs + static_cast<std::size_t>(m + 1) * d, d) = x;
    }
  });
  return batch;
}

std::vector<double> path_costs(const PathBatch& paths, const ControlProblem& problem) {
  const int M = paths.grid.num_steps();
  const double dt = paths.grid.dt();
  std::vector<double> costs(paths.n_paths);
  parallel_for(static_cast<std::size_t>(paths.n_paths), [&](std::size_t n) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m)
      acc += problem.f(paths.grid.node(m), paths.state(static_cast<int>(n), m),
                       paths.control(static_cast<int>(n), m)) *
             dt;
    acc += problem.g(paths.state(static_cast<int>(n), M));
    costs[n] = acc;
  });
  return costs;
}

void export_paths_csv(const PathBatch& paths, const std::string& path,
                      const std::string& provenance) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  std::vector<std::string> header = {"path_id", "step", "t"};
  for (int j = 1; j <= paths.dim; ++j) header.push_back("x_" + std::to_string(j));
  for (int j = 1; j <= paths.dim; ++j) header.push_back("u_" + std::to_string(j));
  out.header(header);

  const int M = paths.grid.num_steps();
  std::vector<std::string> cells;
  for (int n = 0; n < paths.n_paths; ++n) {
    for (int m = 0; m <= M; ++m) {
      cells.clear();
      cells.push_back(std::to_string(n));
      cells.push_back(std::to_string(m));
      cells.push_back(csv::format_double(paths.grid.node(m)));
      const auto x = paths.state(n, m);
      for (int j = 0; j < paths.dim; ++j) cells.push_back(csv::format_double(x[j]));
      if (m < M) {
        const auto u = paths.control(n, m);
        for (int j = 0; j < paths.dim; ++j) cells.push_back(csv::format_double(u[j]));
      } else {
        for (int j = 0; j < paths.dim; ++j) cells.push_back("");
      }
      out.row(cells);
    }
  }
}

}  // namespace epmc
