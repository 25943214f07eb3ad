#include "epmc/regress.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>

#include "epmc/csv.hpp"
#include "epmc/parallel.hpp"

namespace epmc {

namespace {

void enumerate_degree(int dim, int total, std::vector<int>& current,
                      std::vector<std::vector<int>>& out, int coord) {
  if (coord == dim - 1) {
    current[coord] = total;
    out.push_back(current);
    return;
  }
  for (int e = total; e >= 0; --e) {
    current[coord] = e;
    enumerate_degree(dim, total - e, current, out, coord + 1);
  }
}

}  // namespace

PolynomialBasis::PolynomialBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1) throw InvalidParams("basis: dim must be >= 1");
  if (degree < 0) throw InvalidParams("basis: degree must be >= 0");
  std::vector<int> current(dim, 0);
  for (int g = 0; g <= degree; ++g) enumerate_degree(dim, g, current, exponents_, 0);
}

Eigen::VectorXd PolynomialBasis::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd phi(count());
  for (int k = 0; k < count(); ++k) {
    double v = 1.0;
    const auto& alpha = exponents_[k];
    for (int j = 0; j < dim_; ++j)
      for (int e = 0; e < alpha[j]; ++e) v *= x[j];
    phi[k] = v;
  }
  return phi;
}

int PolynomialBasis::index_of(const std::vector<int>& alpha) const {
  for (int k = 0; k < count(); ++k)
    if (exponents_[k] == alpha) return k;
  return -1;
}

namespace {

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// Expands coefficients of the standardized features ((x-c)/s)^alpha into
// plain monomial coefficients. Exact rewrite of the same polynomial.
Eigen::MatrixXd to_monomial(const Eigen::MatrixXd& scaled_coeffs, const Eigen::VectorXd& center,
                            const Eigen::VectorXd& scale, const PolynomialBasis& basis) {
  const int F = basis.count();
  const int d = static_cast<int>(scaled_coeffs.cols());
  std::map<std::vector<int>, int> lookup;
  for (int k = 0; k < F; ++k) lookup[basis.exponents()[k]] = k;

  Eigen::MatrixXd mono = Eigen::MatrixXd::Zero(F, d);
  const int dim = basis.dim();
  std::vector<int> idx(dim, 0);
  for (int k = 0; k < F; ++k) {
    const auto& alpha = basis.exponents()[k];
    double base = 1.0;
    for (int j = 0; j < dim; ++j)
      for (int e = 0; e < alpha[j]; ++e) base /= scale[j];
    // Odometer over all exponent tuples i <= alpha.
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double coef = base;
      for (int j = 0; j < dim; ++j)
        coef *= binomial(alpha[j], idx[j]) * std::pow(-center[j], alpha[j] - idx[j]);
      mono.row(lookup.at(idx)) += coef * scaled_coeffs.row(k);
      int j = dim - 1;
      while (j >= 0 && idx[j] == alpha[j]) idx[j--] = 0;
      if (j < 0) break;
      ++idx[j];
    }
  }
  return mono;
}

}  // namespace

DriftEstimate fit_drift(const PathBatch& paths, const WeightSet& weights,
                        const ControlProblem& problem, const PolynomialBasis& basis,
                        const FitOptions& options) {
  const int N = paths.n_paths;
  const int M = paths.grid.num_steps();
  const int d = paths.dim;
  const int F = basis.count();
  if (static_cast<int>(weights.normalized.size()) != N)
    throw InvalidParams("regress: weights and paths have different sample counts");
  if (basis.dim() != d) throw InvalidParams("regress: basis dimension mismatch");
  if (N < F)
    throw InvalidParams("regress: need at least " + std::to_string(F) + " paths for " +
                        std::to_string(F) + " features");

  DriftEstimate drift;
  drift.grid = paths.grid;
  drift.basis = basis;
  drift.coeffs.resize(M);
  drift.diagnostics.resize(M);

  const double dt = paths.grid.dt();

  parallel_for(static_cast<std::size_t>(M), [&](std::size_t ms) {
    const int m = static_cast<int>(ms);
    const double t = paths.grid.node(m);

    // Weighted standardization of X_m. Coordinates with no spread (the
    // initial step, or point-mass weights) get unit scale.
    Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
    for (int n = 0; n < N; ++n) center += weights.normalized[n] * paths.state(n, m);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (int n = 0; n < N; ++n) {
      const Eigen::VectorXd dev = paths.state(n, m) - center;
      var += weights.normalized[n] * dev.cwiseProduct(dev);
    }
    Eigen::VectorXd scale(d);
    for (int j = 0; j < d; ++j) {
      const double s = std::sqrt(var[j]);
      scale[j] = (s > 1e-12 * (1.0 + std::fabs(center[j]))) ? s : 1.0;
    }

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(F, F);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(F, d);
    double kurt_num = 0.0, kurt_den = 0.0;
    Eigen::VectorXd target_mean = Eigen::VectorXd::Zero(d);
    for (int n = 0; n < N; ++n) {
      const Eigen::VectorXd y =
          (paths.state(n, m + 1) - paths.state(n, m)) / dt - problem.drift(t, paths.state(n, m));
      target_mean += weights.normalized[n] * y;
    }
    for (int n = 0; n < N; ++n) {
      const double w = weights.normalized[n];
      const Eigen::VectorXd x = paths.state(n, m);
      const Eigen::VectorXd z = (x - center).cwiseQuotient(scale);
      const Eigen::VectorXd phi = basis.eval(z);
      const Eigen::VectorXd y = (paths.state(n, m + 1) - x) / dt - problem.drift(t, x);
      gram.noalias() += w * phi * phi.transpose();
      rhs.noalias() += w * phi * y.transpose();
      const double dev2 = (y - target_mean).squaredNorm();
      kurt_num += w * dev2 * dev2;
      kurt_den += w * dev2;
    }

    const double jitter = options.ridge_rel * (gram.trace() / F);
    Eigen::MatrixXd reg = gram + jitter * Eigen::MatrixXd::Identity(F, F);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    Eigen::MatrixXd scaled_coeffs;
    if (ldlt.info() == Eigen::Success) scaled_coeffs = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !scaled_coeffs.allFinite()) {
      // One retry with a much larger jitter before giving up.
      reg = gram + (jitter * 1e6 + 1e-300) * Eigen::MatrixXd::Identity(F, F);
      Eigen::LDLT<Eigen::MatrixXd> retry(reg);
      if (retry.info() != Eigen::Success)
        throw SingularRegression("regress: Gram factorization failed at step " +
                                 std::to_string(m));
      scaled_coeffs = retry.solve(rhs);
      if (!scaled_coeffs.allFinite())
        throw SingularRegression("regress: non-finite coefficients at step " + std::to_string(m));
    }

    drift.coeffs[m] = to_monomial(scaled_coeffs, center, scale, basis);

    StepFitDiagnostics diag;
    double resid = 0.0;
    for (int n = 0; n < N; ++n) {
      const Eigen::VectorXd x = paths.state(n, m);
      const Eigen::VectorXd z = (x - center).cwiseQuotient(scale);
      const Eigen::VectorXd y = (paths.state(n, m + 1) - x) / dt - problem.drift(t, x);
      const Eigen::VectorXd fit = scaled_coeffs.transpose() * basis.eval(z);
      resid += weights.normalized[n] * (y - fit).squaredNorm();
    }
    diag.weighted_residual_norm = std::sqrt(resid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reg);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    diag.gram_condition = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    diag.target_kurtosis = (kurt_den > 0.0) ? kurt_num / (kurt_den * kurt_den) : 0.0;
    drift.diagnostics[m] = diag;
  });

  return drift;
}

void export_drift_csv(const DriftEstimate& drift, const std::string& path,
                      const std::string& provenance) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  const int d = drift.coeffs.empty() ? 0 : static_cast<int>(drift.coeffs[0].cols());
  std::vector<std::string> header = {"step", "t", "feature_index"};
  for (int j = 1; j <= d; ++j) header.push_back("c_" + std::to_string(j));
  out.header(header);
  for (std::size_t m = 0; m < drift.coeffs.size(); ++m) {
    for (int k = 0; k < drift.coeffs[m].rows(); ++k) {
      std::vector<std::string> cells = {std::to_string(m),
                                        csv::format_double(drift.grid.node(static_cast<int>(m))),
                                        std::to_string(k)};
      for (int j = 0; j < d; ++j) cells.push_back(csv::format_double(drift.coeffs[m](k, j)));
      out.row(cells);
    }
  }
}

void export_drift_diagnostics_csv(const DriftEstimate& drift, const std::string& path,
                                  const std::string& provenance) {
  csv::Writer out(path);
  if (!provenance.empty()) out.comment(provenance);
  out.header({"step", "t", "weighted_residual_norm", "gram_condition", "target_kurtosis"});
  for (std::size_t m = 0; m < drift.diagnostics.size(); ++m) {
    const auto& diag = drift.diagnostics[m];
    out.row({std::to_string(m), csv::format_double(drift.grid.node(static_cast<int>(m))),
             csv::format_double(diag.weighted_residual_norm),
             csv::format_double(diag.gram_condition),
             csv::format_double(diag.target_kurtosis)});
  }
}

}  // namespace epmc
