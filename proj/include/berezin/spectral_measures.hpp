#ifndef BEREZIN_SPECTRAL_MEASURES_HPP
#define BEREZIN_SPECTRAL_MEASURES_HPP

// Local spectral measures sum_j |e_kj(m)|^2 delta_{lambda_kj}, global
// counting measures sum_j delta_{lambda_kj}, and their pairings with test
// functions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "berezin/cp1_model.hpp"
#include "berezin/eigensolver.hpp"
#include "berezin/observables.hpp"

namespace berezin {

struct PointMeasure {
  enum class Kind { Local, Global };

  std::vector<double> atoms;
  std::vector<double> weights;
  Kind kind = Kind::Global;
  std::optional<ModelPoint> point;

  double total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Weights |sum_i V_ij shat_{k,i}(m)|^2 at the eigenvalues.
inline PointMeasure local_measure(const SpectralData& s, const ModelPoint& m) {
  const int n = s.dim();
  const auto sections = BasisTable(Level(s.k)).section_values(m);
  PointMeasure mu{s.eigenvalues, std::vector<double>(static_cast<std::size_t>(n)),
                  PointMeasure::Kind::Local, m};
  for (int j = 0; j < n; ++j) {
    complex e = 0.0;
    for (int i = 0; i < n; ++i) e += s.v(i, j) * sections[i];
    mu.weights[j] = std::norm(e);
  }
  return mu;
}

inline PointMeasure global_measure(const SpectralData& s) {
  return PointMeasure{s.eigenvalues, std::vector<double>(s.eigenvalues.size(), 1.0),
                      PointMeasure::Kind::Global, std::nullopt};
}

inline double pair(const PointMeasure& mu, const TestFunction& chi) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.atoms.size(); ++j) s += mu.weights[j] * chi(mu.atoms[j]);
  return s;
}

/// Both sides of <mu_{T + c}, chi(. - c)> = <mu_T, chi>.
inline std::pair<double, double> pair_shifted(const PointMeasure& shifted, const PointMeasure& base,
                                              const TestFunction& chi, double c) {
  return {pair(shifted, chi.translated(c)), pair(base, chi)};
}

/// Eigenvalues multiplied by k: the spectrum of D o T on H_k.
inline SpectralData scale_to_prime(SpectralData s) {
  for (auto& l : s.eigenvalues) l *= s.k;
  return s;
}

/// Pairing through the Fourier side:
/// (2 pi)^{-1/2} int (sum_j w_j e^{i k lambda_j tau}) chi_hat_k(tau) d tau,
/// chi_k(s) = chi(s / k).  Trapezoid rule in tau with truncation and step set
/// from the Gaussian envelopes of chi.
inline double pair_via_fourier(const PointMeasure& mu, int k, const TestFunction& chi) {
  if (!chi.has_exact_fourier())
    throw std::invalid_argument("pair_via_fourier needs a Gaussian-Hermite test function");
  const double kk = std::max(k, 1);
  double min_width = std::numeric_limits<double>::infinity();
  double reach = 0.0;
  int degree = 0;
  double coef_scale = 0.0;
  for (const auto& comp : chi.components()) {
    const auto& g = std::get<GaussianHermite>(comp);
    min_width = std::min(min_width, g.width);
    degree = std::max(degree, static_cast<int>(g.coefficients.size()) - 1);
    for (double c : g.coefficients) coef_scale = std::max(coef_scale, std::abs(c));
    for (double a : mu.atoms) reach = std::max(reach, std::abs(a - g.center) / g.width);
  }
  double max_width = 0.0;
  for (const auto& comp : chi.components())
    max_width = std::max(max_width, std::get<GaussianHermite>(comp).width);
  // |chi_hat(xi)| <~ width (1 + |width xi|)^degree e^{-(width xi)^2/2}; cut below 1e-16.
  double eta = 1.0;
  const auto envelope = [&](double e) {
    return max_width * std::max(1.0, coef_scale) * std::pow(1.0 + e, degree) * std::exp(-0.5 * e * e);
  };
  while (envelope(eta) > 1e-18) eta += 0.5;
  const double xi_max = eta / min_width;
  // Trapezoid aliasing brings in chi at distance 2 pi / h from each atom.
  const double alias_distance = (reach + 40.0) * max_width;
  const double h_xi = 2.0 * std::numbers::pi / alias_distance;
  const int steps = static_cast<int>(std::ceil(xi_max / h_xi));
  const double h_tau = h_xi / kk;

  double total = 0.0;
  for (int n = -steps; n <= steps; ++n) {
    const double tau = n * h_tau;
    // chi_hat_k(tau) = k chi_hat(k tau)
    const std::complex<double> kernel = kk * chi.fourier(kk * tau);
    std::complex<double> trace = 0.0;
    for (std::size_t j = 0; j < mu.atoms.size(); ++j)
      trace += mu.weights[j] * std::polar(1.0, kk * mu.atoms[j] * tau);
    total += (trace * kernel).real();
  }
  return total * h_tau / std::sqrt(2.0 * std::numbers::pi);
}

/// Convenience overload taking the spectral data and point directly.
inline double pair_via_fourier(const SpectralData& s, const ModelPoint& m, const TestFunction& chi) {
  return pair_via_fourier(local_measure(s, m), s.k, chi);
}

}  // namespace berezin

#endif  // BEREZIN_SPECTRAL_MEASURES_HPP
