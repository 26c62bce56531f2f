#include <doctest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "risk.hpp"

using namespace ridgelab;

namespace {

RunOptions workers(unsigned w) {
  RunOptions o;
  o.workers = w;
  return o;
}

}  // namespace

TEST_CASE("summarize uses the sample standard deviation") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const RiskEstimate e = summarize(v, 9);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.std_error == doctest::Approx(std::sqrt((5.0 / 3.0) / 4.0)));
  CHECK(e.reps == 4);
  CHECK(e.master_seed == 9);
  const std::vector<double> flat(7, 0.1);
  const RiskEstimate f = summarize(flat, 0);
  CHECK(f.mean == 0.1);
  CHECK(f.std_error == 0.0);
}

TEST_CASE("null estimator risk is exactly c squared") {
  for (double c : {0.0, 1.0, 0.7, 3.0}) {
    const RiskEstimate e = mc_risk(EstimatorSpec::null(), {10, 30, c}, 50, 1);
    CHECK(e.mean == c * c);
    CHECK(e.std_error == 0.0);
  }
}

TEST_CASE("results do not depend on the worker count") {
  const ModelSpec spec{12, 40, 1.0, DirectionPolicy::HaarRandomPerReplicate};
  const RiskEstimate one = mc_risk(EstimatorSpec::adaptive_ridge(), spec, 301, 5, workers(1));
  for (unsigned w : {2u, 4u, 8u}) {
    const RiskEstimate many = mc_risk(EstimatorSpec::adaptive_ridge(), spec, 301, 5, workers(w));
    CHECK(many.mean == one.mean);
    CHECK(many.std_error == one.std_error);
  }
}

TEST_CASE("replicate driver redraws degenerate replicates within budget") {
  std::atomic<int> calls{0};
  auto flaky = [&](SeedStream s, std::span<double> out) {
    ++calls;
    if (s.stream_index == 17 && s == SeedStream{3, 17}) fail(ErrorCode::NumericalRankDeficiency, "x");
    out[0] = 1.0;
  };
  const ReplicateTable t = run_replicates(1000, 3, 1, {}, flaky);
  CHECK(t.resampled == 1);
  CHECK(calls == 1001);

  auto always = [](SeedStream s, std::span<double> out) {
    if (s.stream_index % 100 == 0) fail(ErrorCode::NumericalRankDeficiency, "x");
    out[0] = 0.0;
  };
  try {
    run_replicates(1000, 3, 1, {}, always);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalFailure);
  }

  auto other = [](SeedStream, std::span<double>) { fail(ErrorCode::DomainError, "bad"); };
  try {
    run_replicates(10, 3, 1, {}, other);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainError);
  }
}

TEST_CASE("closed forms") {
  CHECK(ols_risk_exact(10, 30) == doctest::Approx(10.0 / 19.0).epsilon(1e-14));
  const BoundReport b = jensen_bounds(10, 30, 1.0);
  CHECK(b.lower == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(b.upper == doctest::Approx(10.0 / 29.0).epsilon(1e-14));
  CHECK(jensen_bounds(10, 30, INFINITY).upper == doctest::Approx(ols_risk_exact(10, 30)));
  CHECK(jensen_bounds(10, 30, 0.0).upper == 0.0);
  CHECK_THROWS_AS(jensen_bounds(29, 30, 1.0), Error);
  CHECK_THROWS_AS(ols_risk_exact(30, 30), Error);
  CHECK(equivariant_floor(400, 40, 1.0) == doctest::Approx(0.9));
  CHECK(equivariant_floor(400, 40, 2.0) == doctest::Approx(3.6));
  CHECK_THROWS_AS(equivariant_floor(40, 40, 1.0), Error);
}

TEST_CASE("trace risk agrees with the Monte Carlo risk of oracle ridge") {
  for (auto [d, n] : {std::pair{8, 25}, std::pair{30, 12}}) {
    const RiskEstimate t = trace_risk_oracle_ridge(d, n, 1.0, 2000, 11);
    const RiskEstimate m = mc_risk(EstimatorSpec::oracle_ridge(),
                                   {d, n, 1.0, DirectionPolicy::HaarRandomPerReplicate}, 4000, 12);
    CHECK(std::abs(t.mean - m.mean) <= 3.0 * std::hypot(t.std_error, m.std_error));
  }
  CHECK(trace_risk_oracle_ridge(8, 25, 0.0, 10, 1).mean == 0.0);
}

TEST_CASE("scaled OLS and OLS match their exact risks") {
  const RiskEstimate o = mc_risk(EstimatorSpec::ols(), {10, 30, 1.0}, 4000, 21);
  CHECK(std::abs(o.mean - ols_risk_exact(10, 30)) <= 3.0 * o.std_error);
  const RiskEstimate s = mc_risk(EstimatorSpec::scaled_ols_oracle(), {150, 300, 1.0}, 5000, 22);
  CHECK(std::abs(s.mean - scaled_ols_risk_exact(150, 300, 1.0)) <= 3.0 * s.std_error);
}

TEST_CASE("gap bounds") {
  CHECK_FALSE(ridge_gap_bound(9, 10, 1.0, 10, 1).finite());
  CHECK_FALSE(ridge_gap_bound(10, 10, 1.0, 10, 1).finite());
  CHECK_FALSE(ridge_gap_bound(11, 10, 1.0, 10, 1).finite());
  CHECK(ridge_gap_bound(12, 10, 1.0, 10, 1).finite());
  CHECK(ridge_gap_bound(2, 10, 0.0, 10, 1).mean == 0.0);
  CHECK_THROWS_AS(ridge_gap_bound_high_dim(5, 2, 1.0, 10, 1), Error);
  const RiskEstimate low = ridge_gap_bound(2, 10, 1.0, 500, 1);
  CHECK(low.mean > 0.0);
  // The condition number is at least one, so the bound dominates the trace term.
  const RiskEstimate trace = trace_risk_oracle_ridge(2, 10, 1.0, 500, 1);
  CHECK(low.mean >= trace.mean / 2.0);
}

TEST_CASE("paired risks share draws") {
  const PairedRiskEstimate p = mc_risk_paired(EstimatorSpec::ridge(1.0), EstimatorSpec::ridge(1.0),
                                              {5, 20, 1.0}, 100, 3);
  CHECK(p.difference.mean == 0.0);
  CHECK(p.first.mean == p.second.mean);
}

TEST_CASE("equivariant risk does not exceed the oracle ridge risk") {
  RunOptions opts;
  opts.sphere.mode = SphereIntegration::Quadrature;
  const PairedRiskEstimate p = mc_risk_paired(EstimatorSpec::oracle_ridge(),
                                              EstimatorSpec::sphere_bayes(), {2, 10, 1.0}, 1000, 8, opts);
  CHECK(p.difference.mean >= -3.0 * p.difference.std_error);
  const RiskEstimate e = equivariant_risk_estimate(2, 10, 1.0, 1000, 8, opts);
  CHECK(e.mean == p.second.mean);
}
