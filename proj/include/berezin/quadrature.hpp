#ifndef BEREZIN_QUADRATURE_HPP
#define BEREZIN_QUADRATURE_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace berezin {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes on (0, 1).
inline GaussRule gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    rule.nodes[0] = 0.5;
    rule.weights[0] = 1.0;
    return rule;
  }
  // Legendre P_n and its derivative at x
  const auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> (0, 1), ascending
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

/// Product rule for Fubini-Study integrals over CP^1 in the South chart.
/// Radial variable t = |z|^2 is mapped to u = t / (1 + t) in (0, 1); the
/// angle uses an equispaced trapezoid rule.
struct QuadratureScheme {
  int radial_order = 0;
  int angular_order = 0;
  /// Azimuthal bandwidth of the observable the scheme was sized for.
  int bandwidth = 0;

  /// Default sizing for level k: radial k + 24, angular 2(k + bandwidth) + 1.
  static QuadratureScheme for_level(int k, int bandwidth) {
    return {k + 24, 2 * (k + bandwidth) + 1, bandwidth};
  }

  /// Whether the scheme resolves every entry of a level-k matrix exactly
  /// for a symbol of the given bandwidth.
  bool sufficient_for(int k, int symbol_bandwidth) const {
    return angular_order >= 2 * (k + symbol_bandwidth) + 1 && 2 * radial_order >= k + 2;
  }
};

/// Integral of f over CP^1 against dA / (1 + |z|^2)^2 (total mass pi).
/// In (u, theta) coordinates the measure is du dtheta / 2 with u = (1 + u3) / 2.
template <class F>
double sphere_integral(F&& f_of_u3_phi, int radial_order = 200, int angular_order = 64) {
  const auto rule = gauss_legendre_unit(radial_order);
  double total = 0.0;
  const double dphi = 2.0 * std::numbers::pi / angular_order;
  for (int a = 0; a < radial_order; ++a) {
    const double u3 = 2.0 * rule.nodes[a] - 1.0;
    double ring = 0.0;
    for (int b = 0; b < angular_order; ++b) ring += f_of_u3_phi(u3, b * dphi);
    total += rule.weights[a] * ring * dphi;
  }
  return 0.5 * total;
}

}  // namespace berezin

#endif  // BEREZIN_QUADRATURE_HPP
