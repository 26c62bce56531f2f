#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "randmat.hpp"
#include "seqmodel.hpp"

namespace ridgelab {

/// Ridge estimate (X^T X + (d/c^2) I)^{-1} X^T y, indexed by the signal norm c.
///
/// c == 0 gives the zero vector and c == +inf gives OLS. The d x d system is
/// factored when d <= n; otherwise the push-through form
/// X^T (X X^T + (d/c^2) I)^{-1} y factors the n x n one. A relative residual
/// above 1e-8 raises NumericalFailure.
VectorXd ridge(const VectorXd& y, const MatrixXd& X, double c);

/// Minimum-norm least squares solution X^+ y, defined for any (d, n).
VectorXd ols(const VectorXd& y, const MatrixXd& X);

/// Shrinkage factor applied to OLS by the scaled-OLS oracle.
double scaled_ols_factor(std::int64_t d, std::int64_t n, double c);

/// factor(d, n, c) * ols(y, X), with c the true signal norm.
VectorXd scaled_ols_oracle(const VectorXd& y, const MatrixXd& X, double c);

/// max(||y||^2 / n - 1, 0), an estimate of ||beta||^2.
double signal_norm_estimate(const VectorXd& y);

/// ridge(y, X, sqrt(signal_norm_estimate(y))).
VectorXd adaptive_ridge(const VectorXd& y, const MatrixXd& X);

/// Posterior mean of beta under the uniform prior on the radius-c sphere,
/// evaluated through the sufficient statistics z = OLS, Sigma = (X^T X)^{-1}.
/// Requires d <= n. `mc_stream` seeds the Monte Carlo mode only.
PosteriorMean sphere_bayes(const VectorXd& y, const MatrixXd& X, double c,
                           const SphereOptions& options = {}, SeedStream mc_stream = {});

VectorXd null_estimator(std::int64_t d);

enum class EstimatorKind {
  Ridge,
  OracleRidge,
  AdaptiveRidge,
  Ols,
  ScaledOlsOracle,
  Null,
  SphereBayes,
};

/// Tagged estimator choice. `c` is the tuning norm for Ridge and SphereBayes;
/// an empty `c` on SphereBayes means the oracle norm is used. Oracle kinds
/// receive the true norm from the harness at evaluation time.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Null;
  std::optional<double> c;

  static EstimatorSpec ridge(double c) { return {EstimatorKind::Ridge, c}; }
  static EstimatorSpec oracle_ridge() { return {EstimatorKind::OracleRidge, {}}; }
  static EstimatorSpec adaptive_ridge() { return {EstimatorKind::AdaptiveRidge, {}}; }
  static EstimatorSpec ols() { return {EstimatorKind::Ols, {}}; }
  static EstimatorSpec scaled_ols_oracle() { return {EstimatorKind::ScaledOlsOracle, {}}; }
  static EstimatorSpec null() { return {EstimatorKind::Null, {}}; }
  static EstimatorSpec sphere_bayes(std::optional<double> c = {}) {
    return {EstimatorKind::SphereBayes, c};
  }

  /// Parses "ridge:<c>", "oracle_ridge", "adaptive_ridge", "ols",
  /// "scaled_ols_oracle", "null", "sphere_bayes" or "sphere_bayes:<c>".
  /// "inf" is accepted for c.
  static EstimatorSpec parse(std::string_view tag);

  std::string tag() const;

  /// True for estimators that consume the true signal norm.
  bool uses_oracle_norm() const;

  friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

/// Evaluates the estimator on (y, X). `true_c` is the generating norm for
/// oracle kinds; `mc_stream` feeds sphere_bayes in Monte Carlo mode.
VectorXd apply_estimator(const EstimatorSpec& spec, const VectorXd& y, const MatrixXd& X,
                         double true_c, const SphereOptions& sphere = {},
                         SeedStream mc_stream = {});

}  // namespace ridgelab
