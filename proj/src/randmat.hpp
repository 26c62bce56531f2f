#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace ridgelab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class DirectionPolicy {
  FixedFirstAxis,        // beta = c * e_1
  HaarRandomPerReplicate // beta uniform on the radius-c sphere, redrawn per replicate
};

/// Sampling law y = X beta + eps with X, eps iid N(0, 1) and ||beta|| = c.
struct ModelSpec {
  std::int64_t d = 1;
  std::int64_t n = 3;
  double c = 0.0;
  DirectionPolicy direction = DirectionPolicy::FixedFirstAxis;

  /// Throws DomainError unless d >= 1, n >= 3 and c is finite and >= 0.
  void validate() const;
};

struct Dataset {
  MatrixXd X;     // n x d
  VectorXd y;     // n
  VectorXd beta;  // d, the generating signal

  std::int64_t n() const { return X.rows(); }
  std::int64_t d() const { return X.cols(); }
};

/// Eigenvalues of the smaller Gram matrix, sorted nonincreasing.
struct SpectralSummary {
  std::vector<double> eigenvalues;
  double s_max_inv = 0.0;  // largest eigenvalue of the (pseudo)inverse
  double s_min_inv = 0.0;  // smallest nonzero eigenvalue of the (pseudo)inverse

  /// Condition number max/min of the nonzero spectrum, i.e. s1 / s_{d^n}.
  double condition() const { return s_max_inv / s_min_inv; }
};

inline constexpr double kRankTolerance = 1e-12;

/// rows x cols matrix of iid N(0, 1), filled row by row.
MatrixXd sample_gaussian_matrix(std::int64_t rows, std::int64_t cols, CounterRng& rng);

/// Draw order within a stream: X (row-major), eps, then the direction.
Dataset sample_design(const ModelSpec& spec, SeedStream stream);

/// Haar-distributed m x m orthogonal matrix (Gaussian QR, R-diagonal sign fix).
MatrixXd haar_orthogonal(std::int64_t m, SeedStream stream);
MatrixXd haar_orthogonal(std::int64_t m, CounterRng& rng);

/// Uniform point on the radius-c sphere in R^m.
VectorXd sample_sphere(std::int64_t m, double c, SeedStream stream);
VectorXd sample_sphere(std::int64_t m, double c, CounterRng& rng);

/// Ascending eigenvalues of X^T X when d <= n, else of X X^T. No rank check.
VectorXd gram_eigenvalues(const MatrixXd& X);

/// Gram matrix X^T X (d <= n) or X X^T (d > n).
MatrixXd smaller_gram(const MatrixXd& X);

/// Throws NumericalRankDeficiency if min eigenvalue <= 1e-12 * max eigenvalue.
SpectralSummary spectral_summary(const MatrixXd& X);

}  // namespace ridgelab
