#include "asymptotics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "format.hpp"
#include "risk.hpp"

namespace ridgelab {

namespace {

void check(double rho, double c, const char* who) {
  if (!(rho > 0.0) || std::isinf(rho))
    fail(ErrorCode::DomainError, std::string(who) + ": rho must be positive and finite");
  if (!(c >= 0.0)) fail(ErrorCode::DomainError, std::string(who) + ": c must be in [0, inf]");
}

}  // namespace

void RegimePoint::validate() const { check(rho, c, "RegimePoint"); }

double linear_minimax_risk(double rho, double c) {
  check(rho, c, "linear_minimax_risk");
  if (std::isinf(c)) return rho;
  const double c2 = c * c;
  if (c2 == 0.0) return 0.0;
  return c2 * rho / (c2 + rho);
}

double limiting_ridge_risk(double rho, double c) {
  check(rho, c, "limiting_ridge_risk");
  if (c == 0.0) return 0.0;
  if (std::isinf(c))
    return rho < 1.0 ? rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
  const double c2 = c * c;
  const double b = c2 * (rho - 1.0) - rho;
  const double root = std::hypot(b, 2.0 * c * rho);
  if (b >= 0.0) return (b + root) / (2.0 * rho);
  return 2.0 * c2 * rho / (root - b);
}

double limiting_ridge_residual(double rho, double c) {
  const double r = limiting_ridge_risk(rho, c);
  const double c2 = c * c;
  const double b = c2 * (rho - 1.0) - rho;
  return rho * r * r - b * r - c2 * rho;
}

double scaled_ols_risk_exact(std::int64_t d, std::int64_t n, double c) {
  return jensen_bounds(d, n, c).upper;
}

double mp_lower_edge(double rho) {
  const double s = 1.0 - std::sqrt(rho);
  return s * s;
}

double mp_upper_edge(double rho) {
  const double s = 1.0 + std::sqrt(rho);
  return s * s;
}

double mp_density(double rho, double lambda) {
  check(rho, 0.0, "mp_density");
  const double lo = mp_lower_edge(rho);
  const double hi = mp_upper_edge(rho);
  if (!(lambda > lo && lambda < hi) || lambda <= 0.0) return 0.0;
  return std::sqrt((hi - lambda) * (lambda - lo)) / (2.0 * std::numbers::pi * rho * lambda);
}

double mp_atom(double rho) {
  check(rho, 0.0, "mp_atom");
  return std::max(1.0 - 1.0 / rho, 0.0);
}

double mp_stieltjes(double rho, double z) {
  check(rho, 0.0, "mp_stieltjes");
  if (!(z < 0.0))
    fail(ErrorCode::DomainError, "mp_stieltjes: z must be negative, got " + format_double(z));
  if (std::isinf(z)) return 0.0;
  const double a = 1.0 - rho - z;
  const double s = std::sqrt(a * a - 4.0 * rho * z);
  if (a > 0.0) return 2.0 / (a + s);
  return (a - s) / (2.0 * rho * z);
}

}  // namespace ridgelab
