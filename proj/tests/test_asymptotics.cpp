#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "risk.hpp"

using namespace ridgelab;

namespace {

// Adaptive tanh-sinh over the support; it tolerates the inverse square-root
// endpoint behaviour of the density at rho = 1.
template <class F>
double mp_integral(double rho, F&& f) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto g = [&](double lambda) { return f(lambda) * mp_density(rho, lambda); };
  return integrator.integrate(g, mp_lower_edge(rho), mp_upper_edge(rho));
}

}  // namespace

TEST_CASE("linear minimax risk") {
  CHECK(linear_minimax_risk(0.3, 0.0) == 0.0);
  CHECK(linear_minimax_risk(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(linear_minimax_risk(0.7, 1e8) == doctest::Approx(0.7));
  CHECK(linear_minimax_risk(0.7, INFINITY) == 0.7);
  CHECK_THROWS_AS(linear_minimax_risk(0.0, 1.0), Error);
}

TEST_CASE("limiting ridge risk values") {
  CHECK(limiting_ridge_risk(0.4, 0.0) == 0.0);
  CHECK(limiting_ridge_risk(1.0, std::sqrt(2.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(limiting_ridge_residual(2.0, 0.0) == 0.0);
  for (auto [rho, c] : {std::pair{1.0, std::sqrt(2.0)}, std::pair{0.5, 3.0}}) {
    CHECK(std::abs(limiting_ridge_residual(rho, c)) <= 1e-10 * (1 + std::pow(c, 4) + rho * rho));
  }
  // Naive evaluation loses digits for tiny rho; compare with the series c^2 rho / (c^2 + rho).
  CHECK(limiting_ridge_risk(1e-12, 1.0) == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("limiting ridge residual vanishes on a 20 x 20 grid") {
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double rho = 0.01 * std::pow(1.6, i);
      const double c = 0.02 * std::pow(1.5, j);
      CHECK(std::abs(limiting_ridge_residual(rho, c)) <= 1e-10 * (1 + std::pow(c, 4) + rho * rho));
    }
}

TEST_CASE("regime properties of the limits") {
  for (double rho : {0.001, 0.005, 0.01})
    for (double c = 0.1; c <= 10.0; c *= 1.3)
      CHECK(std::abs(limiting_ridge_risk(rho, c) / linear_minimax_risk(rho, c) - 1.0) <= 0.05);
  for (double c : {0.5, 1.0, 2.0})
    CHECK(std::abs(limiting_ridge_risk(100.0, c) / (c * c) - 0.99) <= 0.02);
  for (double rho : {0.1, 0.25, 0.5, 0.8})
    for (double c : {0.5, 1.0, 2.0, 5.0}) {
      const std::int64_t n = 100000;
      const auto d = static_cast<std::int64_t>(rho * n);
      CHECK(limiting_ridge_risk(rho, c) <= scaled_ols_risk_exact(d, n, c) + 1e-9);
    }
  double prev_rho_r0 = 0.0, prev_rho_r = 0.0;
  for (double rho = 0.05; rho < 20.0; rho *= 1.4) {
    double prev_c_r0 = 0.0, prev_c_r = 0.0;
    for (double c = 0.05; c < 20.0; c *= 1.4) {
      CHECK(linear_minimax_risk(rho, c) >= prev_c_r0);
      CHECK(limiting_ridge_risk(rho, c) >= prev_c_r);
      prev_c_r0 = linear_minimax_risk(rho, c);
      prev_c_r = limiting_ridge_risk(rho, c);
    }
    CHECK(linear_minimax_risk(rho, 1.0) >= prev_rho_r0);
    CHECK(limiting_ridge_risk(rho, 1.0) >= prev_rho_r);
    prev_rho_r0 = linear_minimax_risk(rho, 1.0);
    prev_rho_r = limiting_ridge_risk(rho, 1.0);
  }
}

TEST_CASE("scaled OLS exact risk") {
  CHECK(scaled_ols_risk_exact(10, 30, 1.0) == doctest::Approx(10.0 / 29.0).epsilon(1e-14));
  CHECK(scaled_ols_risk_exact(10, 30, 1e9) == doctest::Approx(ols_risk_exact(10, 30)));
  CHECK(scaled_ols_risk_exact(10, 30, 0.0) == 0.0);
  CHECK_THROWS_AS(scaled_ols_risk_exact(29, 30, 1.0), Error);
}

TEST_CASE("Marchenko-Pastur law is normalized") {
  for (double rho : {0.25, 0.5, 2.0}) {
    const double mass = mp_integral(rho, [](double) { return 1.0; }) + mp_atom(rho);
    CHECK(std::abs(mass - 1.0) <= 1e-8);
    const double mean = mp_integral(rho, [](double l) { return l; });
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-8));  // E lambda = tr(X^T X) / (n d) = 1
  }
  CHECK(mp_density(0.5, 0.0) == 0.0);
  CHECK(mp_density(0.5, 10.0) == 0.0);
  CHECK(mp_atom(0.5) == 0.0);
  CHECK(mp_atom(4.0) == doctest::Approx(0.75));
}

TEST_CASE("Stieltjes transform matches quadrature") {
  for (double rho : {0.25, 0.5, 1.0, 2.0, 4.0})
    for (double z : {-0.01, -0.3, -1.0, -7.0}) {
      const double q = mp_integral(rho, [z](double l) { return 1.0 / (l - z); }) +
                       mp_atom(rho) / (0.0 - z);
      CHECK(std::abs(mp_stieltjes(rho, z) - q) <= 1e-8);
    }
  CHECK(mp_stieltjes(0.5, -1e12) < 1e-11);
  CHECK_THROWS_AS(mp_stieltjes(0.5, 0.0), Error);
  CHECK_THROWS_AS(mp_stieltjes(0.5, 0.1), Error);
}

TEST_CASE("Stieltjes transform matches sampled spectra") {
  const std::int64_t d = 500, n = 1000;
  CounterRng rng(SeedStream{8, 0});
  const MatrixXd X = sample_gaussian_matrix(n, d, rng);
  const VectorXd eig = gram_eigenvalues(X) / static_cast<double>(n);
  for (double z : {-0.2, -1.0}) {
    const double avg = (1.0 / (eig.array() - z)).mean();
    CHECK(std::abs(avg - mp_stieltjes(0.5, z)) <= 0.01);
  }
}

TEST_CASE("Stieltjes identity with the limiting ridge risk") {
  for (double rho : {0.25, 0.5, 1.0, 2.0, 4.0})
    for (double c : {0.1, 0.5, 1.0, 2.0, 10.0})
      CHECK(std::abs(rho * mp_stieltjes(rho, -rho / (c * c)) - limiting_ridge_risk(rho, c)) <= 1e-8);
}

TEST_CASE("trace risk converges to the limit") {
  const RiskEstimate t = trace_risk_oracle_ridge(200, 400, 1.0, 500, 3);
  CHECK(std::abs(t.mean - limiting_ridge_risk(0.5, 1.0)) <= 0.02);
}
