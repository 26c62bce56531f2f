#include <doctest.h>

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "estimators.hpp"
#include "risk.hpp"
#include "seqmodel.hpp"

using namespace ridgelab;

namespace {

SequenceInstance iid_instance(const VectorXd& z, double tau2) {
  const auto m = z.size();
  return {tau2 * MatrixXd::Identity(m, m), z, VectorXd::Zero(m)};
}

// Posterior mean on the circle by a plain periodic trapezoid rule.
Eigen::Vector2d circle_oracle(const MatrixXd& Sigma, const Eigen::Vector2d& z, double c) {
  const MatrixXd P = Sigma.inverse();
  const long K = 1000000;
  double best = -INFINITY;
  for (long k = 0; k < K; k += 997) {
    const double phi = 2 * std::numbers::pi * k / K;
    const Eigen::Vector2d t(c * std::cos(phi), c * std::sin(phi));
    best = std::max(best, -0.5 * (z - t).dot(P * (z - t)));
  }
  Eigen::Vector2d num = Eigen::Vector2d::Zero();
  double den = 0.0;
  for (long k = 0; k < K; ++k) {
    const double phi = 2 * std::numbers::pi * k / K;
    const Eigen::Vector2d t(c * std::cos(phi), c * std::sin(phi));
    const double w = std::exp(-0.5 * (z - t).dot(P * (z - t)) - best);
    num += w * t;
    den += w;
  }
  return num / den;
}

SphereOptions quadrature(int nodes = 256, bool adaptive = true) {
  SphereOptions o;
  o.mode = SphereIntegration::Quadrature;
  o.nodes = nodes;
  o.adaptive = adaptive;
  return o;
}

}  // namespace

TEST_CASE("from_linear_model") {
  Dataset data{MatrixXd::Identity(3, 3), VectorXd::LinSpaced(3, 1.0, 3.0), VectorXd::Zero(3)};
  const SequenceInstance inst = from_linear_model(data);
  CHECK((inst.Sigma - MatrixXd::Identity(3, 3)).norm() < 1e-14);
  CHECK((inst.z - data.y).norm() < 1e-14);

  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dataset d = sample_design({4, 9, 1.2, DirectionPolicy::HaarRandomPerReplicate}, {17, s});
    const SequenceInstance si = from_linear_model(d);
    for (double c : {0.5, 1.2, 3.0})
      CHECK((ridge(d.y, d.X, c) - seq_ridge(si, c)).norm() <= 1e-10);
  }
  const Dataset wide = sample_design({6, 4, 1.0}, {1, 1});
  CHECK_THROWS_AS(from_linear_model(wide), Error);
}

TEST_CASE("seq_ridge special cases") {
  VectorXd z(4);
  z << 0.3, -1.0, 2.0, 0.5;
  const SequenceInstance inst = iid_instance(z, 0.25);
  const double factor = 1.0 / (1.0 + 4.0 * 0.25);
  CHECK((seq_ridge(inst, 1.0) - factor * z).norm() < 1e-14);
  CHECK((seq_ridge(inst, INFINITY) - z).norm() == 0.0);
  CHECK(seq_ridge(inst, 0.0).norm() == 0.0);

  const SequenceInstance general = from_linear_model(sample_design({4, 10, 1.0}, {2, 2}));
  const MatrixXd U = haar_orthogonal(4, SeedStream{5, 5});
  const SequenceInstance rotated{U * general.Sigma * U.transpose(), U * general.z, general.theta};
  CHECK((U * seq_ridge(general, 1.3) - seq_ridge(rotated, 1.3)).norm() < 1e-10);
}

TEST_CASE("sphere posterior mean closed forms") {
  CHECK(posterior_mean_sphere(iid_instance(VectorXd::Zero(2), 1.0), 1.0, quadrature()).mean.norm() < 1e-14);
  for (double z0 : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    VectorXd z(1);
    z << z0;
    const double expected = 1.5 * std::tanh(1.5 * z0 / 0.5);
    CHECK(posterior_mean_sphere(iid_instance(z, 0.5), 1.5, quadrature()).mean(0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  for (double r : {0.2, 1.0, 4.0}) {
    Eigen::Vector2d z(r / std::sqrt(2.0), -r / std::sqrt(2.0));
    const double kappa = 1.3 * r / 0.8;
    const double bessel = std::cyl_bessel_i(1.0, kappa) / std::cyl_bessel_i(0.0, kappa);
    const VectorXd mean = posterior_mean_sphere(iid_instance(z, 0.8), 1.3, quadrature()).mean;
    CHECK((mean - 1.3 * bessel * z / r).norm() < 1e-10);
    CHECK(sphere_mean_ratio(2, kappa) == doctest::Approx(bessel).epsilon(1e-13));

    Eigen::Vector3d z3(r, 0.0, 0.0);
    const double langevin = 1.0 / std::tanh(kappa) - 1.0 / kappa;
    const VectorXd mean3 = posterior_mean_sphere(iid_instance(z3, 0.8), 1.3, quadrature()).mean;
    CHECK((mean3 - 1.3 * langevin * z3 / r).norm() < 1e-10);
  }
  CHECK(sphere_mean_ratio(3, 1e-3) == doctest::Approx(1e-3 / 3.0).epsilon(1e-10));
  CHECK(sphere_mean_ratio(3, 0.0999) == doctest::Approx(1.0 / std::tanh(0.0999) - 1.0 / 0.0999).epsilon(1e-12));
  CHECK(sphere_mean_ratio(2, 700.0) ==
        doctest::Approx(1.0 - 1.0 / 1400.0 - 1.0 / (8.0 * 700 * 700)).epsilon(1e-9));
}

TEST_CASE("circle quadrature agrees with a dense trapezoid oracle") {
  MatrixXd Sigma(2, 2);
  Sigma << 0.5, 0.2, 0.2, 0.3;
  const Eigen::Vector2d z(0.7, -1.1);
  const SequenceInstance inst{Sigma, z, VectorXd::Zero(2)};
  const VectorXd mean = posterior_mean_sphere(inst, 1.4, quadrature()).mean;
  CHECK((mean - circle_oracle(Sigma, z, 1.4)).norm() < 1e-9);
}

TEST_CASE("quadrature self-convergence at 256 versus 4096 nodes") {
  MatrixXd Sigma(2, 2);
  Sigma << 0.9, -0.3, -0.3, 0.4;
  const SequenceInstance inst{Sigma, Eigen::Vector2d(-0.4, 1.9), VectorXd::Zero(2)};
  const VectorXd a = posterior_mean_sphere(inst, 2.0, quadrature(256, false)).mean;
  const VectorXd b = posterior_mean_sphere(inst, 2.0, quadrature(4096, false)).mean;
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Monte Carlo posterior mean agrees with quadrature within its standard error") {
  MatrixXd Sigma(3, 3);
  Sigma << 0.6, 0.1, 0.0, 0.1, 0.5, 0.05, 0.0, 0.05, 0.4;
  const SequenceInstance inst{Sigma, Eigen::Vector3d(0.5, -0.2, 0.9), VectorXd::Zero(3)};
  SphereOptions mc;
  mc.mode = SphereIntegration::MonteCarlo;
  const PosteriorMean p = posterior_mean_sphere(inst, 1.0, mc, SeedStream{4, 0});
  const VectorXd q = posterior_mean_sphere(inst, 1.0, quadrature()).mean;
  for (int j = 0; j < 3; ++j) CHECK(std::abs(p.mean(j) - q(j)) <= 4.0 * p.std_error(j) + 1e-12);
  CHECK(p.samples == mc.mc_samples);
  SphereOptions forced = quadrature();
  forced.quadrature_dim_max = 3;
  const SequenceInstance big = iid_instance(VectorXd::Ones(4), 1.0);
  CHECK_THROWS_AS(posterior_mean_sphere(big, 1.0, forced), Error);
}

TEST_CASE("posterior mean norm never exceeds c") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SequenceInstance inst = from_linear_model(sample_design({3, 8, 2.0}, {6, s}));
    CHECK(posterior_mean_sphere(inst, 2.0, quadrature()).mean.norm() <= 2.0 + 1e-12);
  }
}

TEST_CASE("Marchand gap check") {
  const MarchandReport zero = marchand_gap_check({2, 1.0, 0.0});
  CHECK(zero.gap == 0.0);
  CHECK(zero.bound == 0.0);
  const MarchandReport one = marchand_gap_check({1, 1.0, 1.0});
  CHECK(one.bound == doctest::Approx(0.5));
  CHECK(one.gap <= one.bound + 1e-6);
  const MarchandReport two = marchand_gap_check({2, 1.0, 2.0});
  CHECK(two.bound == doctest::Approx(2.0 / 3.0));
  CHECK(two.gap <= two.bound + 1e-6);
  // Bayes dominance on the sphere.
  for (const IidSeqSpec& s : {IidSeqSpec{1, 1.0, 1.0}, IidSeqSpec{2, 0.25, 1.5}, IidSeqSpec{3, 1.0, 2.0}}) {
    const MarchandReport r = marchand_gap_check(s);
    CHECK(r.bayes_risk <= r.ridge_risk + 1e-6);
  }
  // The Gaussian-prior rule is linear, so its risk has a closed form.
  const double s = 4.0 / (4.0 + 2.0);
  CHECK(two.ridge_risk == doctest::Approx(s * s * 2.0 + (1 - s) * (1 - s) * 4.0).epsilon(1e-10));
  CHECK_THROWS_AS(marchand_gap_check({4, 1.0, 1.0}), Error);
}

TEST_CASE("Brown identity") {
  const BrownReport zero = brown_identity_check({2, 0.7, 0.0});
  CHECK(zero.lhs == 0.0);
  CHECK(std::abs(zero.rhs) < 1e-12);
  for (const IidSeqSpec& s : {IidSeqSpec{1, 1.0, 1.0}, IidSeqSpec{2, 0.25, 1.5}}) {
    const BrownReport r = brown_identity_check(s);
    CHECK(std::abs(r.lhs - r.rhs) <= 1e-5);
  }
  CHECK_THROWS_AS(brown_identity_check({3, 1.0, 1.0}), Error);
}

TEST_CASE("Stam inequality") {
  const StamReport gaussian = stam_bound_check(1, {1, 1.0, 0.0}, 2.0);
  CHECK(gaussian.holds);
  for (std::size_t i = 0; i < gaussian.sigmas.size(); ++i) {
    const double s2 = gaussian.sigmas[i] * gaussian.sigmas[i];
    CHECK(gaussian.lhs[i] == doctest::Approx(s2 / 3.0).epsilon(1e-9));
  }
  CHECK(stam_bound_check(1, {1, 1.0, 1.0}, 1.0).min_slack >= 0.0);
  CHECK(stam_bound_check(1, {1, 0.25, 3.0}, 4.0).holds);
  CHECK_THROWS_AS(stam_bound_check(2, {2, 1.0, 1.0}, 1.0), Error);
}

TEST_CASE("rotating theta leaves sequence-model risks unchanged") {
  const std::int64_t m = 3, n = 12;
  VectorXd axis = VectorXd::Zero(m);
  axis(0) = 1.5;
  const VectorXd rotated = haar_orthogonal(m, SeedStream{31, 0}) * axis;
  SphereOptions opts = quadrature(64, false);
  auto risk = [&](const VectorXd& theta, bool bayes) {
    RunOptions ro;
    const ReplicateTable t = run_replicates(400, 77, 1, ro, [&](SeedStream s, std::span<double> out) {
      const SequenceInstance inst = sample_sequence(n, theta, s);
      const VectorXd est = bayes ? posterior_mean_sphere(inst, 1.5, opts).mean : seq_ridge(inst, 1.5);
      out[0] = (est - theta).squaredNorm();
    });
    return summarize(t.values, 77);
  };
  for (bool bayes : {false, true}) {
    const RiskEstimate a = risk(axis, bayes);
    const RiskEstimate b = risk(rotated, bayes);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
  }
}

TEST_CASE("linear-model and sequence-model ridge risks agree") {
  const ModelSpec spec{3, 12, 1.0};
  const RiskEstimate lin = mc_risk(EstimatorSpec::oracle_ridge(), spec, 2000, 41);
  VectorXd theta = VectorXd::Zero(3);
  theta(0) = 1.0;
  const ReplicateTable t = run_replicates(2000, 42, 1, {}, [&](SeedStream s, std::span<double> out) {
    out[0] = (seq_ridge(sample_sequence(12, theta, s), 1.0) - theta).squaredNorm();
  });
  const RiskEstimate seq = summarize(t.values, 42);
  CHECK(std::abs(lin.mean - seq.mean) <= 3.0 * std::hypot(lin.std_error, seq.std_error));
}
