#include "risk.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"
#include "parallel.hpp"

namespace ridgelab {

namespace {

// Salt for the inner Monte Carlo stream of sphere_bayes; far from the small
// resampling salts.
constexpr std::uint64_t kSphereSalt = 0x5350484552450001ULL;

void require_reps(std::uint64_t reps, const char* who) {
  if (reps < 2) fail(ErrorCode::InvalidArgument, std::string(who) + ": reps must be >= 2");
}

void require_dims(std::int64_t d, std::int64_t n, const char* who) {
  if (d < 1 || n < 3)
    fail(ErrorCode::DomainError,
         std::string(who) + ": need d >= 1 and n >= 3, got d = " + std::to_string(d) +
             ", n = " + std::to_string(n));
}

void require_norm(double c, const char* who) {
  if (!(c >= 0.0)) fail(ErrorCode::DomainError, std::string(who) + ": c must be in [0, inf]");
}

RiskEstimate exact(double value, std::uint64_t reps, std::uint64_t seed) {
  return RiskEstimate{value, 0.0, reps, seed, 0};
}

double ridge_penalty(std::int64_t d, double c) {
  return std::isinf(c) ? 0.0 : static_cast<double>(d) / (c * c);
}

}  // namespace

bool RiskEstimate::finite() const { return std::isfinite(mean); }

std::vector<double> ReplicateTable::column(std::uint64_t j) const {
  std::vector<double> out(reps);
  for (std::uint64_t i = 0; i < reps; ++i) out[i] = values[i * width + j];
  return out;
}

RiskEstimate summarize(std::span<const double> values, std::uint64_t seed,
                       std::uint64_t resampled) {
  RiskEstimate est;
  est.reps = values.size();
  est.master_seed = seed;
  est.resampled = resampled;
  if (values.empty()) return est;
  bool constant = true;
  for (double v : values) constant = constant && v == values.front();
  if (constant) {
    est.mean = values.front();
    return est;
  }
  const double n = static_cast<double>(values.size());
  est.mean = pairwise_sum(values) / n;
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = values[i] - est.mean;
    dev[i] = r * r;
  }
  const double variance = values.size() > 1 ? pairwise_sum(dev) / (n - 1.0) : 0.0;
  est.std_error = std::sqrt(variance / n);
  return est;
}

ReplicateTable run_replicates(std::uint64_t reps, std::uint64_t seed, std::uint64_t width,
                              const RunOptions& options, const ReplicateFn& fn) {
  ReplicateTable table;
  table.width = width;
  table.reps = reps;
  table.values.assign(reps * width, 0.0);
  const std::uint64_t block = std::max<std::uint64_t>(options.block_size, 1);
  const std::uint64_t blocks = (reps + block - 1) / block;
  std::vector<std::uint64_t> redraws(blocks, 0);

  parallel_for(blocks, options.workers, [&](std::size_t b) {
    const std::uint64_t begin = b * block;
    const std::uint64_t end = std::min(reps, begin + block);
    for (std::uint64_t i = begin; i < end; ++i) {
      std::span<double> out(table.values.data() + i * width, width);
      const SeedStream base{seed, i};
      for (int attempt = 0;; ++attempt) {
        try {
          fn(base.derive(static_cast<std::uint64_t>(attempt)), out);
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NumericalRankDeficiency) throw;
          if (attempt + 1 >= options.max_attempts_per_replicate)
            fail(ErrorCode::NumericalFailure,
                 "replicate " + std::to_string(i) + ": degenerate on every redraw");
          ++redraws[b];
        }
      }
    }
  });

  for (auto r : redraws) table.resampled += r;
  const auto allowed = static_cast<std::uint64_t>(
      std::ceil(options.max_resample_rate * static_cast<double>(reps)));
  if (table.resampled > allowed)
    fail(ErrorCode::NumericalFailure,
         "resample budget exceeded: " + std::to_string(table.resampled) + " of " +
             std::to_string(reps) + " draws were numerically rank deficient");
  return table;
}

RiskEstimate mc_risk(const EstimatorSpec& est, const ModelSpec& spec, std::uint64_t reps,
                     std::uint64_t seed, const RunOptions& options) {
  require_reps(reps, "mc_risk");
  spec.validate();
  const ReplicateTable table =
      run_replicates(reps, seed, 1, options, [&](SeedStream stream, std::span<double> out) {
        const Dataset data = sample_design(spec, stream);
        const VectorXd b = apply_estimator(est, data.y, data.X, spec.c, options.sphere,
                                           stream.derive(kSphereSalt));
        out[0] = (b - data.beta).squaredNorm();
      });
  return summarize(table.values, seed, table.resampled);
}

PairedRiskEstimate mc_risk_paired(const EstimatorSpec& first, const EstimatorSpec& second,
                                  const ModelSpec& spec, std::uint64_t reps, std::uint64_t seed,
                                  const RunOptions& options) {
  require_reps(reps, "mc_risk_paired");
  spec.validate();
  const ReplicateTable table =
      run_replicates(reps, seed, 3, options, [&](SeedStream stream, std::span<double> out) {
        const Dataset data = sample_design(spec, stream);
        const SeedStream inner = stream.derive(kSphereSalt);
        const VectorXd a = apply_estimator(first, data.y, data.X, spec.c, options.sphere, inner);
        const VectorXd b = apply_estimator(second, data.y, data.X, spec.c, options.sphere, inner);
        out[0] = (a - data.beta).squaredNorm();
        out[1] = (b - data.beta).squaredNorm();
        out[2] = out[0] - out[1];
      });
  PairedRiskEstimate result;
  result.first = summarize(table.column(0), seed, table.resampled);
  result.second = summarize(table.column(1), seed, table.resampled);
  result.difference = summarize(table.column(2), seed, table.resampled);
  return result;
}

RiskEstimate trace_risk_oracle_ridge(std::int64_t d, std::int64_t n, double c,
                                     std::uint64_t reps, std::uint64_t seed,
                                     const RunOptions& options) {
  require_reps(reps, "trace_risk_oracle_ridge");
  require_dims(d, n, "trace_risk_oracle_ridge");
  require_norm(c, "trace_risk_oracle_ridge");
  if (c == 0.0) return exact(0.0, reps, seed);
  const double lambda = ridge_penalty(d, c);
  const double null_part =
      d > n ? static_cast<double>(d - n) / static_cast<double>(d) * c * c : 0.0;
  const ReplicateTable table =
      run_replicates(reps, seed, 1, options, [&](SeedStream stream, std::span<double> out) {
        CounterRng rng(stream);
        const MatrixXd X = sample_gaussian_matrix(n, d, rng);
        double trace = 0.0;
        if (lambda == 0.0) {
          const SpectralSummary s = spectral_summary(X);
          for (double e : s.eigenvalues) trace += 1.0 / e;
        } else {
          const VectorXd eig = gram_eigenvalues(X);
          for (Eigen::Index i = 0; i < eig.size(); ++i) trace += 1.0 / (eig(i) + lambda);
        }
        out[0] = trace + null_part;
      });
  return summarize(table.values, seed, table.resampled);
}

BoundReport jensen_bounds(std::int64_t d, std::int64_t n, double c) {
  require_norm(c, "jensen_bounds");
  if (d < 1 || d + 1 >= n)
    fail(ErrorCode::DomainError, "jensen_bounds: requires d + 1 < n, got d = " +
                                     std::to_string(d) + ", n = " + std::to_string(n));
  BoundReport report;
  if (c == 0.0) return report;
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  const double ratio = dd / nn;
  const double penalty = std::isinf(c) ? 0.0 : dd / (nn * c * c);
  report.lower = ratio / (1.0 + penalty);
  report.upper = ratio / (1.0 - (dd + 1.0) / nn + penalty);
  return report;
}

double ols_risk_exact(std::int64_t d, std::int64_t n) {
  if (d < 1 || d + 1 >= n)
    fail(ErrorCode::DomainError, "ols_risk_exact: requires d + 1 < n, got d = " +
                                     std::to_string(d) + ", n = " + std::to_string(n));
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  return (dd / nn) / (1.0 - (dd + 1.0) / nn);
}

RiskEstimate ridge_gap_bound_low_dim(std::int64_t d, std::int64_t n, double c,
                                     std::uint64_t reps, std::uint64_t seed,
                                     const RunOptions& options) {
  require_reps(reps, "ridge_gap_bound_low_dim");
  require_dims(d, n, "ridge_gap_bound_low_dim");
  require_norm(c, "ridge_gap_bound_low_dim");
  if (d > n) fail(ErrorCode::DomainError, "ridge_gap_bound_low_dim: requires d <= n");
  if (n - d <= 1) return exact(std::numeric_limits<double>::infinity(), reps, seed);
  if (c == 0.0) return exact(0.0, reps, seed);
  const double lambda = ridge_penalty(d, c);
  const ReplicateTable table =
      run_replicates(reps, seed, 1, options, [&](SeedStream stream, std::span<double> out) {
        CounterRng rng(stream);
        const SpectralSummary s = spectral_summary(sample_gaussian_matrix(n, d, rng));
        double trace = 0.0;
        for (double e : s.eigenvalues) trace += 1.0 / (e + lambda);
        out[0] = s.condition() * trace / static_cast<double>(d);
      });
  return summarize(table.values, seed, table.resampled);
}

RiskEstimate ridge_gap_bound_high_dim(std::int64_t d, std::int64_t n, double c,
                                      std::uint64_t reps, std::uint64_t seed,
                                      const RunOptions& options) {
  require_reps(reps, "ridge_gap_bound_high_dim");
  require_norm(c, "ridge_gap_bound_high_dim");
  if (n <= 2) fail(ErrorCode::DomainError, "ridge_gap_bound_high_dim: requires n > 2");
  if (d <= n) fail(ErrorCode::DomainError, "ridge_gap_bound_high_dim: requires d > n");
  if (d - n <= 1) return exact(std::numeric_limits<double>::infinity(), reps, seed);
  if (c == 0.0) return exact(0.0, reps, seed);
  const double lambda = ridge_penalty(d, c);
  const double second_scale =
      std::isinf(c) ? 0.0
                    : 2.0 * static_cast<double>(d - n) / static_cast<double>(n - 2) / (c * c);
  const ReplicateTable table =
      run_replicates(reps, seed, 1, options, [&](SeedStream stream, std::span<double> out) {
        CounterRng rng(stream);
        const SpectralSummary s = spectral_summary(sample_gaussian_matrix(n, d, rng));
        double trace = 0.0;
        double trace_sq = 0.0;
        for (double e : s.eigenvalues) {
          const double inv = 1.0 / (e + lambda);
          trace += inv;
          trace_sq += inv * inv;
        }
        out[0] = s.condition() * trace / static_cast<double>(n) + second_scale * trace_sq;
      });
  return summarize(table.values, seed, table.resampled);
}

RiskEstimate ridge_gap_bound(std::int64_t d, std::int64_t n, double c, std::uint64_t reps,
                             std::uint64_t seed, const RunOptions& options) {
  return d <= n ? ridge_gap_bound_low_dim(d, n, c, reps, seed, options)
                : ridge_gap_bound_high_dim(d, n, c, reps, seed, options);
}

double equivariant_floor(std::int64_t d, std::int64_t n, double c) {
  require_norm(c, "equivariant_floor");
  if (d <= n) fail(ErrorCode::DomainError, "equivariant_floor: requires d > n");
  if (c == 0.0) return 0.0;
  return static_cast<double>(d - n) / static_cast<double>(d) * c * c;
}

RiskEstimate equivariant_risk_estimate(std::int64_t d, std::int64_t n, double c,
                                       std::uint64_t reps, std::uint64_t seed,
                                       const RunOptions& options) {
  require_dims(d, n, "equivariant_risk_estimate");
  if (d > n) fail(ErrorCode::DomainError, "equivariant_risk_estimate: requires d <= n");
  if (!(c >= 0.0) || std::isinf(c))
    fail(ErrorCode::DomainError, "equivariant_risk_estimate: c must be finite and >= 0");
  return mc_risk(EstimatorSpec::sphere_bayes(c), ModelSpec{d, n, c, DirectionPolicy::FixedFirstAxis},
                 reps, seed, options);
}

}  // namespace ridgelab
