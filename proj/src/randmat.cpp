#include "randmat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace ridgelab {

void ModelSpec::validate() const {
  if (d < 1) fail(ErrorCode::DomainError, "model: d must be >= 1, got " + std::to_string(d));
  if (n < 3) fail(ErrorCode::DomainError, "model: n must be >= 3, got " + std::to_string(n));
  if (!(c >= 0.0) || !std::isfinite(c))
    fail(ErrorCode::DomainError, "model: c must be finite and >= 0");
}

MatrixXd sample_gaussian_matrix(std::int64_t rows, std::int64_t cols, CounterRng& rng) {
  MatrixXd m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

VectorXd sample_sphere(std::int64_t m, double c, CounterRng& rng) {
  if (m < 1) fail(ErrorCode::DomainError, "sample_sphere: m must be >= 1");
  if (!(c >= 0.0)) fail(ErrorCode::DomainError, "sample_sphere: c must be >= 0");
  VectorXd v(m);
  double norm = 0.0;
  // A zero Gaussian vector has probability zero; redraw rather than divide by 0.
  do {
    for (std::int64_t i = 0; i < m; ++i) v(i) = rng.normal();
    norm = v.norm();
  } while (norm == 0.0);
  if (c == 0.0) return VectorXd::Zero(m);
  return v * (c / norm);
}

VectorXd sample_sphere(std::int64_t m, double c, SeedStream stream) {
  CounterRng rng(stream);
  return sample_sphere(m, c, rng);
}

Dataset sample_design(const ModelSpec& spec, SeedStream stream) {
  spec.validate();
  CounterRng rng(stream);
  Dataset data;
  data.X = sample_gaussian_matrix(spec.n, spec.d, rng);
  VectorXd eps(spec.n);
  for (std::int64_t i = 0; i < spec.n; ++i) eps(i) = rng.normal();

  if (spec.direction == DirectionPolicy::FixedFirstAxis) {
    data.beta = VectorXd::Zero(spec.d);
    data.beta(0) = spec.c;
  } else {
    data.beta = sample_sphere(spec.d, spec.c, rng);
  }
  if (spec.c == 0.0) {
    data.y = eps;
  } else {
    data.y.noalias() = data.X * data.beta;
    data.y += eps;
  }
  return data;
}

MatrixXd haar_orthogonal(std::int64_t m, CounterRng& rng) {
  if (m < 1) fail(ErrorCode::DomainError, "haar_orthogonal: m must be >= 1");
  const MatrixXd g = sample_gaussian_matrix(m, m, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd& r = qr.matrixQR();
  for (std::int64_t j = 0; j < m; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

MatrixXd haar_orthogonal(std::int64_t m, SeedStream stream) {
  CounterRng rng(stream);
  return haar_orthogonal(m, rng);
}

MatrixXd smaller_gram(const MatrixXd& X) {
  if (X.cols() <= X.rows()) {
    MatrixXd g(X.cols(), X.cols());
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    return g.selfadjointView<Eigen::Lower>();
  }
  MatrixXd g(X.rows(), X.rows());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(X);
  return g.selfadjointView<Eigen::Lower>();
}

VectorXd gram_eigenvalues(const MatrixXd& X) {
  const MatrixXd g = smaller_gram(X);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "gram_eigenvalues: eigensolver did not converge");
  return solver.eigenvalues();
}

SpectralSummary spectral_summary(const MatrixXd& X) {
  if (!X.allFinite()) fail(ErrorCode::DomainError, "spectral_summary: X has non-finite entries");
  const VectorXd ascending = gram_eigenvalues(X);
  SpectralSummary out;
  out.eigenvalues.assign(ascending.data(), ascending.data() + ascending.size());
  std::reverse(out.eigenvalues.begin(), out.eigenvalues.end());
  const double largest = out.eigenvalues.front();
  const double smallest = out.eigenvalues.back();
  if (!(largest > 0.0) || smallest <= kRankTolerance * largest) {
    fail(ErrorCode::NumericalRankDeficiency,
         "spectral_summary: smallest eigenvalue " + std::to_string(smallest) +
             " below 1e-12 x largest " + std::to_string(largest));
  }
  out.s_max_inv = 1.0 / smallest;
  out.s_min_inv = 1.0 / largest;
  return out;
}

}  // namespace ridgelab
