#include "estimators.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "format.hpp"

namespace ridgelab {

namespace {

void check_shapes(const VectorXd& y, const MatrixXd& X, const char* who) {
  if (y.size() != X.rows())
    fail(ErrorCode::InvalidArgument,
         std::string(who) + ": y has " + std::to_string(y.size()) + " entries, X has " +
             std::to_string(X.rows()) + " rows");
  if (X.cols() < 1) fail(ErrorCode::InvalidArgument, std::string(who) + ": X has no columns");
}

void check_finite(const VectorXd& y, const MatrixXd& X, const char* who) {
  if (!y.allFinite() || !X.allFinite())
    fail(ErrorCode::DomainError, std::string(who) + ": inputs must be finite");
}

// Solves the SPD system, verifying the relative residual.
VectorXd solve_spd(const MatrixXd& A, const VectorXd& rhs) {
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return VectorXd::Zero(rhs.size());
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "ridge: regularized Gram matrix is not numerically SPD");
  VectorXd x = llt.solve(rhs);
  const double residual = (A * x - rhs).norm();
  if (!(residual <= 1e-8 * rhs_norm))
    fail(ErrorCode::NumericalFailure,
         "ridge: relative residual " + format_double(residual / rhs_norm) + " exceeds 1e-8");
  return x;
}

}  // namespace

VectorXd ridge(const VectorXd& y, const MatrixXd& X, double c) {
  check_shapes(y, X, "ridge");
  check_finite(y, X, "ridge");
  if (!(c >= 0.0)) fail(ErrorCode::DomainError, "ridge: c must be in [0, inf]");
  const auto d = X.cols();
  const auto n = X.rows();
  if (c == 0.0) return VectorXd::Zero(d);
  if (std::isinf(c)) return ols(y, X);

  const double lambda = static_cast<double>(d) / (c * c);
  if (!std::isfinite(lambda)) return VectorXd::Zero(d);

  MatrixXd gram = smaller_gram(X);
  gram.diagonal().array() += lambda;
  if (d <= n) {
    const VectorXd rhs = X.transpose() * y;
    return solve_spd(gram, rhs);
  }
  const VectorXd alpha = solve_spd(gram, y);
  return X.transpose() * alpha;
}

VectorXd ols(const VectorXd& y, const MatrixXd& X) {
  check_shapes(y, X, "ols");
  check_finite(y, X, "ols");
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(X);
  return cod.solve(y);
}

double scaled_ols_factor(std::int64_t d, std::int64_t n, double c) {
  if (!(c >= 0.0)) fail(ErrorCode::DomainError, "scaled_ols: c must be in [0, inf]");
  if (c == 0.0) return 0.0;
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  const double head = 1.0 - (dd + 1.0) / nn;
  const double penalty = std::isinf(c) ? 0.0 : dd / (nn * c * c);
  const double denom = head + penalty;
  if (penalty == 0.0) return 1.0;  // c -> inf limit, including head == 0
  if (denom == 0.0)
    fail(ErrorCode::NumericalFailure, "scaled_ols: shrinkage factor denominator is zero");
  return head / denom;
}

VectorXd scaled_ols_oracle(const VectorXd& y, const MatrixXd& X, double c) {
  check_shapes(y, X, "scaled_ols_oracle");
  const double factor = scaled_ols_factor(X.cols(), X.rows(), c);
  if (factor == 0.0) return VectorXd::Zero(X.cols());
  return factor * ols(y, X);
}

double signal_norm_estimate(const VectorXd& y) {
  if (y.size() < 1) fail(ErrorCode::InvalidArgument, "signal_norm_estimate: empty y");
  return std::max(y.squaredNorm() / static_cast<double>(y.size()) - 1.0, 0.0);
}

VectorXd adaptive_ridge(const VectorXd& y, const MatrixXd& X) {
  return ridge(y, X, std::sqrt(signal_norm_estimate(y)));
}

PosteriorMean sphere_bayes(const VectorXd& y, const MatrixXd& X, double c,
                           const SphereOptions& options, SeedStream mc_stream) {
  check_shapes(y, X, "sphere_bayes");
  check_finite(y, X, "sphere_bayes");
  if (X.cols() > X.rows())
    fail(ErrorCode::DomainError, "sphere_bayes: requires d <= n");
  if (!(c >= 0.0) || std::isinf(c))
    fail(ErrorCode::DomainError, "sphere_bayes: c must be finite and >= 0");
  Dataset data{X, y, VectorXd::Zero(X.cols())};
  const SequenceInstance inst = from_linear_model(data);
  return posterior_mean_sphere(inst, c, options, mc_stream);
}

VectorXd null_estimator(std::int64_t d) { return VectorXd::Zero(d); }

EstimatorSpec EstimatorSpec::parse(std::string_view tag) {
  const auto colon = tag.find(':');
  const std::string_view name = tag.substr(0, colon);
  std::optional<double> param;
  if (colon != std::string_view::npos) {
    param = parse_double(tag.substr(colon + 1));
    if (!param || !(*param >= 0.0))
      fail(ErrorCode::InvalidArgument,
           "estimator '" + std::string(tag) + "': parameter must be a number in [0, inf]");
  }
  auto no_param = [&](EstimatorSpec spec) {
    if (param)
      fail(ErrorCode::InvalidArgument,
           "estimator '" + std::string(name) + "' takes no parameter");
    return spec;
  };
  if (name == "ridge") {
    if (!param) fail(ErrorCode::InvalidArgument, "estimator 'ridge' needs a norm, e.g. ridge:1.5");
    return ridge(*param);
  }
  if (name == "oracle_ridge") return no_param(oracle_ridge());
  if (name == "adaptive_ridge") return no_param(adaptive_ridge());
  if (name == "ols") return no_param(ols());
  if (name == "scaled_ols_oracle") return no_param(scaled_ols_oracle());
  if (name == "null") return no_param(null());
  if (name == "sphere_bayes") {
    if (param && std::isinf(*param))
      fail(ErrorCode::InvalidArgument, "estimator 'sphere_bayes' needs a finite norm");
    return sphere_bayes(param);
  }
  fail(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(tag) + "'");
}

std::string EstimatorSpec::tag() const {
  switch (kind) {
    case EstimatorKind::Ridge: return "ridge:" + format_double(c.value_or(0.0));
    case EstimatorKind::OracleRidge: return "oracle_ridge";
    case EstimatorKind::AdaptiveRidge: return "adaptive_ridge";
    case EstimatorKind::Ols: return "ols";
    case EstimatorKind::ScaledOlsOracle: return "scaled_ols_oracle";
    case EstimatorKind::Null: return "null";
    case EstimatorKind::SphereBayes:
      return c ? "sphere_bayes:" + format_double(*c) : std::string("sphere_bayes");
  }
  return "unknown";
}

bool EstimatorSpec::uses_oracle_norm() const {
  return kind == EstimatorKind::OracleRidge || kind == EstimatorKind::ScaledOlsOracle ||
         (kind == EstimatorKind::SphereBayes && !c);
}

VectorXd apply_estimator(const EstimatorSpec& spec, const VectorXd& y, const MatrixXd& X,
                         double true_c, const SphereOptions& sphere, SeedStream mc_stream) {
  switch (spec.kind) {
    case EstimatorKind::Ridge: return ridge(y, X, spec.c.value_or(0.0));
    case EstimatorKind::OracleRidge: return ridge(y, X, true_c);
    case EstimatorKind::AdaptiveRidge: return adaptive_ridge(y, X);
    case EstimatorKind::Ols: return ols(y, X);
    case EstimatorKind::ScaledOlsOracle: return scaled_ols_oracle(y, X, true_c);
    case EstimatorKind::Null: return null_estimator(X.cols());
    case EstimatorKind::SphereBayes:
      return sphere_bayes(y, X, spec.c.value_or(true_c), sphere, mc_stream).mean;
  }
  fail(ErrorCode::InvalidArgument, "apply_estimator: unknown estimator kind");
}

}  // namespace ridgelab
