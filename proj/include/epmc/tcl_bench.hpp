#ifndef EPMC_TCL_BENCH_HPP
#define EPMC_TCL_BENCH_HPP

#include <string>
#include <vector>

#include "epmc/model.hpp"

namespace epmc {

// Aggregated air-conditioner clusters: per-cluster thermal dynamics
//   dX^i = -theta_i (X^i - x_out_i) dt - kappa_i p_max_i u_i dt + sigma_i dW^i
// with physical controls u in [0,1]^d (prescribed ON-proportions).
// Units are hours and degrees Celsius.
struct ClusterParams {
  Eigen::VectorXd theta;      // 1/h
  Eigen::VectorXd x_out;      // C
  Eigen::VectorXd kappa;      // heat-exchange constant, C/(h kW)
  Eigen::VectorXd p_max;      // kW
  Eigen::VectorXd sigma;      // C / sqrt(h)
  Eigen::VectorXd x0;         // C
  Eigen::VectorXd x_min;      // comfort band, C
  Eigen::VectorXd x_max;
  Eigen::VectorXd x_target;   // C
  Eigen::VectorXd devices;    // N_i, used only through rho
  double mu = 10.0;           // tracking weight
  Eigen::VectorXd gamma;      // control regularity weights
  Eigen::VectorXd eta;        // comfort-band weights

  int dim() const { return static_cast<int>(theta.size()); }
  // rho_i = N_i p_max_i / sum_j N_j p_max_j.
  Eigen::VectorXd rho() const;
  // Drift scale of one unit of physical control: kappa_i * p_max_i.
  Eigen::VectorXd control_gain() const { return kappa.cwiseProduct(p_max); }
  void validate() const;
};

// Piecewise-linear consumption target r(t) over [0, T].
class TargetProfile {
 public:
  TargetProfile() = default;
  // Knots are (time, value) pairs; they get sorted by time.
  explicit TargetProfile(std::vector<std::pair<double, double>> knots);
  static TargetProfile constant(double value);

  double value(double t) const;  // constant extrapolation outside the knots
  bool covers(double t0, double t1) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

// CSV with header "t,r"; unsorted rows are fine.
TargetProfile load_profile(const std::string& path);

// The control framework works with an additive drift control nu; the
// physical ON-proportion u in [0,1]^d maps to nu_i = -kappa_i p_max_i u_i,
// so the transformed box is [-kappa_i p_max_i, 0] per coordinate.
struct TclProblem {
  ControlProblem problem;  // in nu-space
  ClusterParams params;
  TargetProfile profile;
  std::string box_note;  // records the affine reparameterization

  Eigen::VectorXd to_physical(const Eigen::VectorXd& nu) const {
    return -nu.cwiseQuotient(params.control_gain());
  }
  Eigen::VectorXd from_physical(const Eigen::VectorXd& u) const {
    return -u.cwiseProduct(params.control_gain());
  }
  // Constant-in-x policy from physical per-step controls.
  MarkovPolicy physical_policy(const TimeGrid& grid, const Eigen::MatrixXd& u_steps) const;
};

TclProblem build_tcl_problem(const ClusterParams& params, const TargetProfile& profile,
                             double horizon);

// Repo default parameter pack (documented in the README); these are artifact
// defaults, not values from any reference.
ClusterParams default_cluster_params(int dim);

}  // namespace epmc

#endif  // EPMC_TCL_BENCH_HPP
