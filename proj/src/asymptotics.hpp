#pragma once

#include <cstdint>

namespace ridgelab {

struct RegimePoint {
  double rho = 1.0;  // d / n
  double c = 1.0;

  void validate() const;
};

/// Limiting minimax risk among linear estimators as d/n -> 0: c^2 rho / (c^2 + rho).
double linear_minimax_risk(double rho, double c);
inline double linear_minimax_risk(const RegimePoint& p) { return linear_minimax_risk(p.rho, p.c); }

/// Limiting oracle-ridge risk at aspect ratio rho.
double limiting_ridge_risk(double rho, double c);
inline double limiting_ridge_risk(const RegimePoint& p) { return limiting_ridge_risk(p.rho, p.c); }

/// rho r^2 - (c^2 (rho - 1) - rho) r - c^2 rho at r = limiting_ridge_risk(rho, c).
double limiting_ridge_residual(double rho, double c);

/// Finite-sample risk of the oracle-scaled OLS estimator; requires d + 1 < n.
double scaled_ols_risk_exact(std::int64_t d, std::int64_t n, double c);

/// Absolutely continuous part of the Marchenko-Pastur law of X^T X / n.
double mp_density(double rho, double lambda);
/// Point mass at zero, max(1 - 1/rho, 0).
double mp_atom(double rho);
double mp_lower_edge(double rho);
double mp_upper_edge(double rho);
/// Stieltjes transform of the full law (atom included) at real z < 0.
double mp_stieltjes(double rho, double z);

}  // namespace ridgelab
