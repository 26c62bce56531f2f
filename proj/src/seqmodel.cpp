#include "seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "errors.hpp"
#include "estimators.hpp"
#include "quadrature.hpp"

namespace ridgelab {

void IidSeqSpec::validate() const {
  if (m < 1) fail(ErrorCode::DomainError, "iid sequence model: m must be >= 1");
  if (!(tau2 > 0.0) || !std::isfinite(tau2))
    fail(ErrorCode::DomainError, "iid sequence model: tau2 must be finite and > 0");
  if (!(c >= 0.0) || !std::isfinite(c))
    fail(ErrorCode::DomainError, "iid sequence model: c must be finite and >= 0");
}

SequenceInstance from_linear_model(const Dataset& data) {
  if (data.d() > data.n())
    fail(ErrorCode::DomainError, "from_linear_model: requires d <= n");
  spectral_summary(data.X);  // rank check only
  const MatrixXd gram = smaller_gram(data.X);
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NumericalRankDeficiency, "from_linear_model: X^T X is not positive definite");
  SequenceInstance inst;
  inst.Sigma = llt.solve(MatrixXd::Identity(data.d(), data.d()));
  inst.Sigma = 0.5 * (inst.Sigma + inst.Sigma.transpose()).eval();
  inst.z = llt.solve(data.X.transpose() * data.y);
  inst.theta = data.beta.size() == data.d() ? data.beta : VectorXd::Zero(data.d());
  return inst;
}

MatrixXd symmetric_sqrt(const MatrixXd& spd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(spd);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "symmetric_sqrt: eigensolver did not converge");
  const VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

SequenceInstance sample_sequence(std::int64_t n, const VectorXd& theta, SeedStream stream) {
  const auto m = theta.size();
  if (m < 1 || n < m) fail(ErrorCode::DomainError, "sample_sequence: requires 1 <= m <= n");
  CounterRng rng(stream);
  const MatrixXd X = sample_gaussian_matrix(n, m, rng);
  VectorXd delta(m);
  for (Eigen::Index i = 0; i < m; ++i) delta(i) = rng.normal();
  spectral_summary(X);
  Eigen::LLT<MatrixXd> llt(smaller_gram(X));
  SequenceInstance inst;
  inst.Sigma = llt.solve(MatrixXd::Identity(m, m));
  inst.Sigma = 0.5 * (inst.Sigma + inst.Sigma.transpose()).eval();
  inst.theta = theta;
  inst.z = theta + symmetric_sqrt(inst.Sigma) * delta;
  return inst;
}

VectorXd seq_ridge(const SequenceInstance& inst, double c) {
  const auto m = inst.m();
  if (inst.Sigma.rows() != m || inst.Sigma.cols() != m)
    fail(ErrorCode::InvalidArgument, "seq_ridge: Sigma must be m x m");
  if (!(c >= 0.0)) fail(ErrorCode::DomainError, "seq_ridge: c must be in [0, inf]");
  if (c == 0.0) return VectorXd::Zero(m);
  if (std::isinf(c)) return inst.z;
  const double prior_var = c * c / static_cast<double>(m);
  MatrixXd A = inst.Sigma;
  A.diagonal().array() += prior_var;
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "seq_ridge: Sigma + (c^2/m) I is not SPD");
  return prior_var * llt.solve(inst.z);
}

// ---------------------------------------------------------------------------
// Sphere integration

namespace {

SphereRule build_sphere_rule(std::int64_t m, int nodes) {
  SphereRule rule;
  if (m == 1) {
    rule.points.resize(1, 2);
    rule.points << -1.0, 1.0;
    rule.weights = VectorXd::Constant(2, 0.5);
    return rule;
  }
  const QuadratureRule angle = gauss_legendre(nodes, 0.0, 2.0 * std::numbers::pi);
  if (m == 2) {
    rule.points.resize(2, nodes);
    rule.weights.resize(nodes);
    for (int k = 0; k < nodes; ++k) {
      rule.points(0, k) = std::cos(angle.nodes[k]);
      rule.points(1, k) = std::sin(angle.nodes[k]);
      rule.weights(k) = angle.weights[k] / (2.0 * std::numbers::pi);
    }
    return rule;
  }
  // m == 3: the uniform law on S^2 is du dphi / (4 pi) with u = cos(polar angle).
  const QuadratureRule& height = gauss_legendre(nodes);
  const auto count = static_cast<Eigen::Index>(nodes) * nodes;
  rule.points.resize(3, count);
  rule.weights.resize(count);
  Eigen::Index k = 0;
  for (int i = 0; i < nodes; ++i) {
    const double u = height.nodes[i];
    const double rad = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int j = 0; j < nodes; ++j, ++k) {
      rule.points(0, k) = rad * std::cos(angle.nodes[j]);
      rule.points(1, k) = rad * std::sin(angle.nodes[j]);
      rule.points(2, k) = u;
      rule.weights(k) = height.weights[i] * angle.weights[j] / (4.0 * std::numbers::pi);
    }
  }
  return rule;
}

// Likelihood-weighted average of c * points over a fixed rule.
VectorXd weighted_sphere_mean(const SphereRule& rule, const MatrixXd& precision,
                              const VectorXd& a, double c) {
  VectorXd exponent = c * (rule.points.transpose() * a);
  const MatrixXd p_points = precision * rule.points;
  exponent -= 0.5 * c * c * (rule.points.array() * p_points.array()).colwise().sum().matrix().transpose();
  if (!exponent.allFinite())
    fail(ErrorCode::NumericalUnderflow, "posterior_mean_sphere: non-finite log-weights");
  const double top = exponent.maxCoeff();
  const VectorXd w = rule.weights.array() * (exponent.array() - top).exp();
  const double total = w.sum();
  if (!(total >= 1e-300))
    fail(ErrorCode::NumericalUnderflow, "posterior_mean_sphere: all weights underflow");
  return c * (rule.points * w) / total;
}

}  // namespace

const SphereRule& unit_sphere_rule(std::int64_t m, int nodes) {
  if (m < 1 || m > 3)
    fail(ErrorCode::DimensionTooLarge, "unit_sphere_rule: quadrature supports m <= 3");
  if (nodes < 1) fail(ErrorCode::InvalidArgument, "unit_sphere_rule: nodes must be >= 1");
  static std::map<std::pair<std::int64_t, int>, std::unique_ptr<SphereRule>> cache;
  static std::mutex mutex;
  const int key_nodes = m == 1 ? 1 : nodes;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{m, key_nodes}];
  if (!slot) slot = std::make_unique<SphereRule>(build_sphere_rule(m, key_nodes));
  return *slot;
}

PosteriorMean posterior_mean_sphere_precision(const MatrixXd& precision, const VectorXd& a,
                                              double c, const SphereOptions& options,
                                              SeedStream mc_stream) {
  const auto m = a.size();
  if (m < 1) fail(ErrorCode::InvalidArgument, "posterior_mean_sphere: empty observation");
  if (precision.rows() != m || precision.cols() != m)
    fail(ErrorCode::InvalidArgument, "posterior_mean_sphere: precision must be m x m");
  if (!(c >= 0.0) || !std::isfinite(c))
    fail(ErrorCode::DomainError, "posterior_mean_sphere: c must be finite and >= 0");

  PosteriorMean out;
  out.std_error = VectorXd::Zero(m);
  if (c == 0.0) {
    out.mean = VectorXd::Zero(m);
    return out;
  }

  const std::int64_t dim_max = std::min(options.quadrature_dim_max, 3);
  bool use_quadrature = true;
  switch (options.mode) {
    case SphereIntegration::Auto: use_quadrature = m <= dim_max; break;
    case SphereIntegration::Quadrature:
      if (m > dim_max)
        fail(ErrorCode::DimensionTooLarge,
             "posterior_mean_sphere: quadrature limited to m <= " + std::to_string(dim_max) +
                 ", got m = " + std::to_string(m));
      break;
    case SphereIntegration::MonteCarlo: use_quadrature = false; break;
  }

  if (use_quadrature) {
    int nodes = std::max(options.nodes, 1);
    VectorXd current = weighted_sphere_mean(unit_sphere_rule(m, nodes), precision, a, c);
    if (m > 1 && options.adaptive) {
      const double tol = options.tolerance * std::max(c, 1.0);
      // A 3-sphere rule holds nodes^2 points; 1024 per angle bounds it at ~1e6.
      const int cap = m == 3 ? std::min(options.max_nodes, 1024) : options.max_nodes;
      while (2 * nodes <= cap) {
        VectorXd refined = weighted_sphere_mean(unit_sphere_rule(m, 2 * nodes), precision, a, c);
        nodes *= 2;
        const double change = (refined - current).cwiseAbs().maxCoeff();
        current = std::move(refined);
        if (change < tol) break;
      }
    }
    out.mean = std::move(current);
    out.nodes = nodes;
    return out;
  }

  const std::int64_t samples = std::max<std::int64_t>(options.mc_samples, 2);
  CounterRng rng(mc_stream);
  MatrixXd thetas(m, samples);
  for (std::int64_t k = 0; k < samples; ++k) thetas.col(k) = sample_sphere(m, c, rng);
  VectorXd exponent = thetas.transpose() * a;
  exponent -= 0.5 * (thetas.array() * (precision * thetas).array()).colwise().sum().matrix().transpose();
  if (!exponent.allFinite())
    fail(ErrorCode::NumericalUnderflow, "posterior_mean_sphere: non-finite log-weights");
  const VectorXd w = (exponent.array() - exponent.maxCoeff()).exp();
  const double total = w.sum();
  if (!(total >= 1e-300))
    fail(ErrorCode::NumericalUnderflow, "posterior_mean_sphere: all weights underflow");
  out.mean = thetas * w / total;
  // Delta-method standard error of the self-normalized ratio estimator.
  const MatrixXd centered = thetas.colwise() - out.mean;
  out.std_error =
      ((centered.array().square().rowwise() * w.array().square().transpose()).rowwise().sum())
          .sqrt()
          .matrix() /
      total;
  out.samples = samples;
  return out;
}

PosteriorMean posterior_mean_sphere(const SequenceInstance& inst, double c,
                                    const SphereOptions& options, SeedStream mc_stream) {
  const auto m = inst.m();
  if (inst.Sigma.rows() != m || inst.Sigma.cols() != m)
    fail(ErrorCode::InvalidArgument, "posterior_mean_sphere: Sigma must be m x m");
  Eigen::LLT<MatrixXd> llt(inst.Sigma);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NumericalRankDeficiency, "posterior_mean_sphere: Sigma is not SPD");
  MatrixXd precision = llt.solve(MatrixXd::Identity(m, m));
  precision = 0.5 * (precision + precision.transpose()).eval();
  const VectorXd a = llt.solve(inst.z);
  return posterior_mean_sphere_precision(precision, a, c, options, mc_stream);
}

// ---------------------------------------------------------------------------
// Iid-model checks

double sphere_mean_ratio(std::int64_t m, double kappa) {
  if (!(kappa >= 0.0)) fail(ErrorCode::DomainError, "sphere_mean_ratio: kappa must be >= 0");
  if (kappa == 0.0) return 0.0;
  switch (m) {
    case 1:
      return std::tanh(kappa);
    case 2: {
      if (kappa > 600.0) {
        const double k = 1.0 / kappa;
        return 1.0 - 0.5 * k - 0.125 * k * k - 0.125 * k * k * k;
      }
      return std::cyl_bessel_i(1.0, kappa) / std::cyl_bessel_i(0.0, kappa);
    }
    case 3: {
      if (kappa < 0.1) {
        const double k2 = kappa * kappa;
        return kappa * (1.0 / 3.0 - k2 * (1.0 / 45.0 - k2 * (2.0 / 945.0 - k2 / 4725.0)));
      }
      return 1.0 / std::tanh(kappa) - 1.0 / kappa;
    }
    default:
      fail(ErrorCode::DimensionTooLarge, "sphere_mean_ratio: supports m <= 3");
  }
}

namespace {

// E f(u), u ~ N(0, I_m), for f invariant under rotations that fix e_1.
// Each normal coordinate uses the composite rule; m = 3 writes
// u = (u_1, r, 0) with r^2 / 2 ~ Exp(1) and integrates r^2/2 by Gauss-Laguerre.
template <typename F>
double axial_normal_expectation(std::int64_t m, int nodes, F&& f) {
  const QuadratureRule& g = normal_composite(nodes);
  VectorXd u = VectorXd::Zero(m);
  double total = 0.0;
  if (m == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      u(0) = g.nodes[i];
      total += g.weights[i] * f(u);
    }
  } else if (m == 2) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      u(0) = g.nodes[i];
      double inner = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        u(1) = g.nodes[j];
        inner += g.weights[j] * f(u);
      }
      total += g.weights[i] * inner;
    }
  } else if (m == 3) {
    const QuadratureRule& lag = gauss_laguerre(std::min(nodes, 64));
    for (std::size_t i = 0; i < g.size(); ++i) {
      u(0) = g.nodes[i];
      double inner = 0.0;
      for (std::size_t j = 0; j < lag.size(); ++j) {
        u(1) = std::sqrt(2.0 * lag.nodes[j]);
        inner += lag.weights[j] * f(u);
      }
      total += g.weights[i] * inner;
    }
  } else {
    fail(ErrorCode::DimensionTooLarge, "iid check: quadrature supports m <= 3");
  }
  return total;
}

struct IidRisks {
  double ridge = 0.0;
  double bayes = 0.0;
};

IidRisks iid_risks(const IidSeqSpec& spec, int quad_nodes) {
  const auto m = spec.m;
  const double tau = std::sqrt(spec.tau2);
  VectorXd theta = VectorXd::Zero(m);
  theta(0) = spec.c;
  SequenceInstance inst{spec.tau2 * MatrixXd::Identity(m, m), theta, theta};
  IidRisks risks;
  risks.ridge = axial_normal_expectation(m, quad_nodes, [&](const VectorXd& u) {
    inst.z = theta + tau * u;
    return (seq_ridge(inst, spec.c) - theta).squaredNorm();
  });
  risks.bayes = axial_normal_expectation(m, quad_nodes, [&](const VectorXd& u) {
    const VectorXd z = theta + tau * u;
    const double r = z.norm();
    if (r == 0.0) return theta.squaredNorm();
    const double shrink = spec.c * sphere_mean_ratio(m, spec.c * r / spec.tau2) / r;
    return (shrink * z - theta).squaredNorm();
  });
  return risks;
}

constexpr double kFisherStep = 1e-4;
constexpr int kLogMarginalNodes = 512;

// Sum over coordinates of the central second difference of log A at z, where
// A(z) = E exp(z^T theta / tau2) over theta uniform on the radius-c sphere.
// Each difference is evaluated as log of a ratio A(z +/- h e_j) / A(z) so the
// O(1) part of log A cancels before rounding.
double log_marginal_laplacian(const SphereRule& rule, double c, double tau2, const VectorXd& z) {
  const VectorXd exponent = (c / tau2) * (rule.points.transpose() * z);
  const double top = exponent.maxCoeff();
  VectorXd p = rule.weights.array() * (exponent.array() - top).exp();
  p /= p.sum();
  const double step = kFisherStep * c / tau2;
  double laplacian = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    double up = 0.0;
    double down = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double t = step * rule.points(j, k);
      up += p(k) * std::expm1(t);
      down += p(k) * std::expm1(-t);
    }
    laplacian += (std::log1p(up) + std::log1p(down)) / (kFisherStep * kFisherStep);
  }
  return laplacian;
}

}  // namespace

double marginal_fisher_trace(const IidSeqSpec& spec, int quad_nodes) {
  spec.validate();
  if (spec.m > 2)
    fail(ErrorCode::DimensionTooLarge, "marginal_fisher_trace: supports m <= 2");
  const auto m = spec.m;
  const double gaussian_part = static_cast<double>(m) / spec.tau2;
  if (spec.c == 0.0) return gaussian_part;
  const SphereRule& rule = unit_sphere_rule(m, kLogMarginalNodes);
  const double tau = std::sqrt(spec.tau2);
  VectorXd center = VectorXd::Zero(m);
  center(0) = spec.c;
  // The marginal is rotation invariant, so averaging over z = c e_1 + tau u
  // equals averaging over the mixture.
  const double mean_laplacian = axial_normal_expectation(m, quad_nodes, [&](const VectorXd& u) {
    return log_marginal_laplacian(rule, spec.c, spec.tau2, center + tau * u);
  });
  return gaussian_part - mean_laplacian;
}

MarchandReport marchand_gap_check(const IidSeqSpec& spec, int quad_nodes) {
  spec.validate();
  if (spec.m > 3) fail(ErrorCode::DimensionTooLarge, "marchand_gap_check: supports m <= 3");
  MarchandReport report;
  const double md = static_cast<double>(spec.m);
  report.bound = spec.c * spec.c * spec.tau2 / (spec.c * spec.c + spec.tau2 * md);
  if (spec.c == 0.0) return report;
  const IidRisks risks = iid_risks(spec, quad_nodes);
  report.ridge_risk = risks.ridge;
  report.bayes_risk = risks.bayes;
  report.gap = std::abs(risks.ridge - risks.bayes);
  return report;
}

BrownReport brown_identity_check(const IidSeqSpec& spec, int quad_nodes) {
  spec.validate();
  if (spec.m > 2) fail(ErrorCode::DimensionTooLarge, "brown_identity_check: supports m <= 2");
  BrownReport report;
  const double md = static_cast<double>(spec.m);
  report.fisher_trace = marginal_fisher_trace(spec, quad_nodes);
  report.rhs = md * spec.tau2 - spec.tau2 * spec.tau2 * report.fisher_trace;
  report.lhs = spec.c == 0.0 ? 0.0 : iid_risks(spec, quad_nodes).bayes;
  return report;
}

StamReport stam_bound_check(std::int64_t m, const IidSeqSpec& spec_v, double tau2_w,
                            int quad_nodes, std::vector<double> sigmas) {
  if (m != 1 || spec_v.m != 1)
    fail(ErrorCode::DomainError, "stam_bound_check: only the scalar case m = 1 is supported");
  spec_v.validate();
  if (!(tau2_w > 0.0) || !std::isfinite(tau2_w))
    fail(ErrorCode::DomainError, "stam_bound_check: tau2_w must be finite and > 0");
  if (sigmas.empty()) fail(ErrorCode::InvalidArgument, "stam_bound_check: empty Sigma grid");

  StamReport report;
  report.fisher_v = marginal_fisher_trace(spec_v, quad_nodes);
  report.fisher_w = marginal_fisher_trace({1, tau2_w, 0.0}, quad_nodes);
  report.fisher_sum = marginal_fisher_trace({1, spec_v.tau2 + tau2_w, spec_v.c}, quad_nodes);
  const double harmonic = 1.0 / (1.0 / report.fisher_v + 1.0 / report.fisher_w);
  report.sigmas = std::move(sigmas);
  report.min_slack = std::numeric_limits<double>::infinity();
  report.holds = true;
  for (double s : report.sigmas) {
    const double lhs = s * s * report.fisher_sum;
    const double rhs = s * s * harmonic;
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    const double slack = rhs - lhs;
    report.min_slack = std::min(report.min_slack, slack);
    // Equality holds in the Gaussian case; allow quadrature round-off.
    if (slack < -1e-9 * std::max(rhs, 1.0)) report.holds = false;
  }
  return report;
}

}  // namespace ridgelab
