#ifndef EPMC_REGRESS_HPP
#define EPMC_REGRESS_HPP

#include <string>
#include <vector>

#include "epmc/simulate.hpp"
#include "epmc/twist.hpp"

namespace epmc {

// All monomials x^alpha with |alpha| <= degree, graded-lexicographic order:
// total degree ascending, first coordinate varying slowest within a degree.
// Feature 0 is the constant 1.
class PolynomialBasis {
 public:
  PolynomialBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int count() const { return static_cast<int>(exponents_.size()); }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  // Index of a given exponent tuple; -1 when absent.
  int index_of(const std::vector<int>& alpha) const;

 private:
  int dim_;
  int degree_;
  std::vector<std::vector<int>> exponents_;
};

struct StepFitDiagnostics {
  double weighted_residual_norm = 0.0;
  double gram_condition = 0.0;
  // Weighted kurtosis of the regression target deviations; the heavy-tail
  // indicator mentioned by the drift estimator's integrability caveat.
  double target_kurtosis = 0.0;
};

// Per-time-step polynomial coefficient sets for beta_m(x) = C_m^T features(x),
// coefficients expressed in the plain monomial basis.
struct DriftEstimate {
  TimeGrid grid;
  PolynomialBasis basis{1, 0};
  std::vector<Eigen::MatrixXd> coeffs;  // per step, F x d
  std::vector<StepFitDiagnostics> diagnostics;

  Eigen::VectorXd eval(int step, const Eigen::VectorXd& x) const {
    return coeffs[step].transpose() * basis.eval(x);
  }
};

struct FitOptions {
  // Ridge jitter as a fraction of trace(G)/F.
  double ridge_rel = 1e-10;
};

// Algorithm Step 2: for every step m independently, the D_n-weighted least
// squares fit of phi(X_m) to the increments (X_{m+1}-X_m)/dt - b(t_m, X_m).
// Features are standardized by weighted mean/std internally and the solution
// is mapped back to monomial coefficients.
DriftEstimate fit_drift(const PathBatch& paths, const WeightSet& weights,
                        const ControlProblem& problem, const PolynomialBasis& basis,
                        const FitOptions& options = {});

void export_drift_csv(const DriftEstimate& drift, const std::string& path,
                      const std::string& provenance = "");
void export_drift_diagnostics_csv(const DriftEstimate& drift, const std::string& path,
                                  const std::string& provenance = "");

}  // namespace epmc

#endif  // EPMC_REGRESS_HPP
