#ifndef EPMC_SIMULATE_HPP
#define EPMC_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "epmc/model.hpp"

namespace epmc {

// N trajectories on the time grid plus the seed lineage that produced them.
// Row-major layout: states[n][m][j], controls[n][m][j].
struct PathBatch {
  TimeGrid grid;
  int n_paths = 0;
  int dim = 0;
  std::vector<double> states;    // n_paths * (M+1) * dim
  std::vector<double> controls;  // n_paths * M * dim
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> stream_ids;  // one stream per path

  Eigen::Map<const Eigen::VectorXd> state(int n, int m) const {
    return {states.data() + (static_cast<std::size_t>(n) * (grid.num_steps() + 1) + m) * dim,
            dim};
  }
  Eigen::Map<const Eigen::VectorXd> control(int n, int m) const {
    return {controls.data() + (static_cast<std::size_t>(n) * grid.num_steps() + m) * dim, dim};
  }
};

// Euler-Maruyama forward simulation under a Markov policy. The policy is
// evaluated at the left endpoint of each step:
//   X_{m+1} = X_m + [b(t_m,X_m) + u(t_m,X_m)] dt + sigma(t_m,X_m) sqrt(dt) Z_m.
// Noise is counter-based per (master_seed, path); results are bit-identical
// for any worker count.
PathBatch simulate_paths(const ControlProblem& problem, const MarkovPolicy& policy, int n_paths,
                         const TimeGrid& grid, std::uint64_t master_seed);

// Cost sample Y_n = sum_m f(t_m, X_m, u_m) dt + g(X_M) for every path.
std::vector<double> path_costs(const PathBatch& paths, const ControlProblem& problem);

// One row per (path, step): path_id, step, t, x_1..x_d, u_1..u_d.
// The terminal row (step = M) has empty control cells.
void export_paths_csv(const PathBatch& paths, const std::string& path,
                      const std::string& provenance = "");

}  // namespace epmc

#endif  // EPMC_SIMULATE_HPP
