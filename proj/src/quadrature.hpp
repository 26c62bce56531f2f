#pragma once

#include <cstddef>
#include <vector>

namespace ridgelab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once per size by Newton
/// iteration on P_n and shared read-only afterwards.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Rule for E f(U), U ~ N(0, 1) (probabilists' Hermite, weights sum to 1).
const QuadratureRule& gauss_hermite_normal(int n);

/// Rule for E f(U), U ~ N(0, 1): 8-point Gauss-Legendre panels on [-9, 9]
/// with Gaussian weights, renormalized. Suited to integrands with sharp
/// transitions where Gauss-Hermite converges slowly.
const QuadratureRule& normal_composite(int n);

/// Rule for E f(S), S ~ Exp(1) (Laguerre, weights sum to 1).
const QuadratureRule& gauss_laguerre(int n);

}  // namespace ridgelab
