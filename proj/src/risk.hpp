#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "estimators.hpp"
#include "randmat.hpp"

namespace ridgelab {

/// Monte Carlo estimate of an expectation; the unit of every empirical result.
struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(reps)
  std::uint64_t reps = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t resampled = 0;  // degenerate draws replaced

  /// False when the quantity is flagged infinite (mean == +inf).
  bool finite() const;
};

/// Two estimators evaluated on common random numbers.
struct PairedRiskEstimate {
  RiskEstimate first;
  RiskEstimate second;
  RiskEstimate difference;  // first - second, per replicate
};

struct BoundReport {
  double lower = 0.0;
  double upper = 0.0;
  double stderr_lower = 0.0;
  double stderr_upper = 0.0;
  bool finite = true;
};

struct RunOptions {
  unsigned workers = 1;
  std::uint64_t block_size = 16;        // replicates per work item
  double max_resample_rate = 1e-3;      // fraction of reps that may be redrawn
  int max_attempts_per_replicate = 16;
  SphereOptions sphere;
};

/// Summarizes per-replicate values (pairwise summation, fixed order).
RiskEstimate summarize(std::span<const double> values, std::uint64_t seed,
                       std::uint64_t resampled = 0);

/// Replicate driver. Replicate i runs fn(stream, out) on SeedStream{seed, i}
/// and writes `width` values into `out`. A NumericalRankDeficiency from fn
/// redraws on stream.derive(attempt); the total number of redraws may not
/// exceed ceil(max_resample_rate * reps). Returns a reps x width row-major
/// table plus the redraw count.
struct ReplicateTable {
  std::vector<double> values;
  std::uint64_t width = 1;
  std::uint64_t reps = 0;
  std::uint64_t resampled = 0;

  std::vector<double> column(std::uint64_t j) const;
};

using ReplicateFn = std::function<void(SeedStream, std::span<double>)>;
ReplicateTable run_replicates(std::uint64_t reps, std::uint64_t seed, std::uint64_t width,
                              const RunOptions& options, const ReplicateFn& fn);

/// Risk E||beta_hat - beta||^2 over fresh (X, eps[, beta]) per replicate.
RiskEstimate mc_risk(const EstimatorSpec& est, const ModelSpec& spec, std::uint64_t reps,
                     std::uint64_t seed, const RunOptions& options = {});

/// Risks of two estimators on shared (X, eps) draws, plus the paired difference.
PairedRiskEstimate mc_risk_paired(const EstimatorSpec& first, const EstimatorSpec& second,
                                  const ModelSpec& spec, std::uint64_t reps, std::uint64_t seed,
                                  const RunOptions& options = {});

/// Oracle-ridge risk through the trace identity:
/// E tr(X^T X + (d/c^2) I)^{-1} for d <= n, and
/// E tr(X X^T + (d/c^2) I)^{-1} + ((d - n)/d) c^2 for d > n.
RiskEstimate trace_risk_oracle_ridge(std::int64_t d, std::int64_t n, double c,
                                     std::uint64_t reps, std::uint64_t seed,
                                     const RunOptions& options = {});

/// Closed-form sandwich for the oracle-ridge risk; requires d + 1 < n.
BoundReport jensen_bounds(std::int64_t d, std::int64_t n, double c);

/// (d/n) / (1 - (d+1)/n); requires d + 1 < n.
double ols_risk_exact(std::int64_t d, std::int64_t n);

/// Bound on |oracle-ridge risk - minimal equivariant risk| for d <= n:
/// (1/d) E{ (s_1/s_d) tr(X^T X + (d/c^2) I)^{-1} }. Infinite when n - d <= 1.
RiskEstimate ridge_gap_bound_low_dim(std::int64_t d, std::int64_t n, double c,
                                     std::uint64_t reps, std::uint64_t seed,
                                     const RunOptions& options = {});

/// Same bound for d > n:
/// (1/n) E{ (s_1/s_n) tr(XX^T + (d/c^2) I)^{-1} }
///   + 2 (d - n)/(n - 2) c^{-2} E tr(XX^T + (d/c^2) I)^{-2}.
/// Infinite when d - n <= 1; DomainError when n <= 2.
RiskEstimate ridge_gap_bound_high_dim(std::int64_t d, std::int64_t n, double c,
                                      std::uint64_t reps, std::uint64_t seed,
                                      const RunOptions& options = {});

/// Dispatches on d <= n.
RiskEstimate ridge_gap_bound(std::int64_t d, std::int64_t n, double c, std::uint64_t reps,
                             std::uint64_t seed, const RunOptions& options = {});

/// ((d - n)/d) c^2, the squared-bias floor of any equivariant estimator when d > n.
double equivariant_floor(std::int64_t d, std::int64_t n, double c);

/// Risk of the sphere-prior posterior mean at ||beta|| = c (fixed direction),
/// i.e. the minimal risk among orthogonally equivariant estimators.
RiskEstimate equivariant_risk_estimate(std::int64_t d, std::int64_t n, double c,
                                       std::uint64_t reps, std::uint64_t seed,
                                       const RunOptions& options = {});

}  // namespace ridgelab
