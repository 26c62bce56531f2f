#pragma once

#include <cstdint>
#include <vector>

#include "randmat.hpp"

namespace ridgelab {

/// Observation z = theta + Sigma^{1/2} delta with Sigma observed.
struct SequenceInstance {
  MatrixXd Sigma;  // m x m, symmetric positive definite
  VectorXd z;
  VectorXd theta;  // generating value, kept for risk evaluation

  std::int64_t m() const { return z.size(); }
};

/// Sigma = tau2 * I specialization of the sequence model.
struct IidSeqSpec {
  std::int64_t m = 1;
  double tau2 = 1.0;
  double c = 0.0;

  void validate() const;
};

/// Sigma = (X^T X)^{-1}, z = OLS estimate, theta = beta. Requires d <= n.
SequenceInstance from_linear_model(const Dataset& data);

/// Draws X (n x m, iid N(0,1)) and delta, returns Sigma = (X^T X)^{-1} and
/// z = theta + Sigma^{1/2} delta.
SequenceInstance sample_sequence(std::int64_t n, const VectorXd& theta, SeedStream stream);

/// Symmetric square root through the eigendecomposition.
MatrixXd symmetric_sqrt(const MatrixXd& spd);

/// (c^2/m) (Sigma + (c^2/m) I)^{-1} z; c == 0 gives 0 and c == inf gives z.
VectorXd seq_ridge(const SequenceInstance& inst, double c);

enum class SphereIntegration { Auto, Quadrature, MonteCarlo };

struct SphereOptions {
  SphereIntegration mode = SphereIntegration::Auto;
  int nodes = 256;          // Gauss-Legendre nodes per angle
  bool adaptive = true;     // double nodes until successive means agree
  int max_nodes = 4096;
  double tolerance = 1e-9;  // max-norm change, scaled by max(c, 1)
  int quadrature_dim_max = 3;
  std::int64_t mc_samples = 100000;
};

struct PosteriorMean {
  VectorXd mean;
  VectorXd std_error;  // zero in quadrature mode
  int nodes = 0;       // nodes per angle actually used (quadrature)
  std::int64_t samples = 0;
};

/// E(theta | z, Sigma) under theta uniform on the radius-c sphere.
///
/// Quadrature handles m <= quadrature_dim_max (product Gauss-Legendre over
/// the angles); Monte Carlo averages over uniform sphere draws with
/// likelihood weights. Weights are rescaled by the largest exponent.
PosteriorMean posterior_mean_sphere(const SequenceInstance& inst, double c,
                                    const SphereOptions& options = {},
                                    SeedStream mc_stream = {});

/// Same computation from the likelihood in precision form:
/// weight(theta) = exp(a^T theta - theta^T P theta / 2), a = P z, P = Sigma^{-1}.
PosteriorMean posterior_mean_sphere_precision(const MatrixXd& precision, const VectorXd& a,
                                              double c, const SphereOptions& options = {},
                                              SeedStream mc_stream = {});

/// Points and weights (summing to 1) for the uniform law on the unit sphere
/// S^{m-1}, m <= 3, with `nodes` Gauss-Legendre nodes per angle.
struct SphereRule {
  MatrixXd points;  // m x K
  VectorXd weights; // K
};
const SphereRule& unit_sphere_rule(std::int64_t m, int nodes);

/// E[u_1] for u uniform on S^{m-1} tilted by exp(kappa u_1), m <= 3. In the
/// iid model the sphere posterior mean is c * ratio(c |z| / tau2) * z / |z|.
double sphere_mean_ratio(std::int64_t m, double kappa);

struct MarchandReport {
  double gap = 0.0;
  double bound = 0.0;
  double ridge_risk = 0.0;
  double bayes_risk = 0.0;
};

/// Risk gap between the Gaussian-prior and sphere-prior Bayes estimators
/// in the iid model at ||theta|| = c, by quadrature over z. m <= 3.
/// `quad_nodes` is the normal-rule size per noise coordinate.
MarchandReport marchand_gap_check(const IidSeqSpec& spec, int quad_nodes = 240);

struct BrownReport {
  double lhs = 0.0;  // risk of the sphere-prior posterior mean
  double rhs = 0.0;  // tr(Sigma) - tr(Sigma^2 I(z))
  double fisher_trace = 0.0;
};

/// Both sides of Brown's identity in the iid model. m <= 2.
BrownReport brown_identity_check(const IidSeqSpec& spec, int quad_nodes = 240);

struct StamReport {
  double fisher_v = 0.0;
  double fisher_w = 0.0;
  double fisher_sum = 0.0;
  std::vector<double> sigmas;
  std::vector<double> lhs;  // sigma^2 I(v + w)
  std::vector<double> rhs;  // sigma^2 [I(v)^{-1} + I(w)^{-1}]^{-1}
  double min_slack = 0.0;
  bool holds = false;
};

/// Scalar Stam inequality with v = theta + tau delta (theta = +/-c equally
/// likely) and w ~ N(0, tau2_w). Requires m == 1.
StamReport stam_bound_check(std::int64_t m, const IidSeqSpec& spec_v, double tau2_w,
                            int quad_nodes = 240,
                            std::vector<double> sigmas = {0.25, 0.5, 1.0, 2.0, 4.0});

/// Fisher information trace of z = theta + tau delta, theta uniform on the
/// radius-c sphere, from central second differences (h = 1e-4) of the
/// log-marginal averaged over the marginal. m <= 2.
double marginal_fisher_trace(const IidSeqSpec& spec, int quad_nodes = 240);

}  // namespace ridgelab
