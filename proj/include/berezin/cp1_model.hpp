#ifndef BEREZIN_CP1_MODEL_HPP
#define BEREZIN_CP1_MODEL_HPP

// Geometry of the Riemann sphere M = CP^1 with the Fubini-Study area form
// dA / (1 + |z|^2)^2 (total volume pi), and the level-k space of holomorphic
// sections of O(k) spanned by the monomials z^j, j = 0..k.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace berezin {

using complex = std::complex<double>;

enum class Chart { South, North };

/// A point of CP^1 in one of the two affine charts.  South uses z, North uses
/// w = 1/z.  The stored coordinate always has modulus <= 1.
class ModelPoint {
 public:
  ModelPoint() = default;

  static ModelPoint from_z(complex z) {
    if (std::abs(z) > 1.0) return ModelPoint(Chart::North, 1.0 / z);
    return ModelPoint(Chart::South, z);
  }

  static ModelPoint from_w(complex w) {
    if (std::abs(w) > 1.0) return ModelPoint(Chart::South, 1.0 / w);
    return ModelPoint(Chart::North, w);
  }

  static ModelPoint south_pole() { return ModelPoint(Chart::South, 0.0); }
  static ModelPoint north_pole() { return ModelPoint(Chart::North, 0.0); }

  /// Point with height u3 in [-1, 1] and azimuth phi on the unit sphere.
  static ModelPoint from_latitude(double u3, double phi) {
    if (!(u3 >= -1.0 && u3 <= 1.0)) throw std::invalid_argument("u3 outside [-1, 1]");
    // |z|^2 = (1 + u3) / (1 - u3); pick the chart with the bounded coordinate.
    if (u3 <= 0.0) {
      const double rho = std::sqrt((1.0 + u3) / (1.0 - u3));
      return ModelPoint(Chart::South, std::polar(rho, phi));
    }
    const double rho = std::sqrt((1.0 - u3) / (1.0 + u3));
    return ModelPoint(Chart::North, std::polar(rho, -phi));
  }

  Chart chart() const { return chart_; }
  complex coordinate() const { return w_; }

  /// Sphere coordinates (u1, u2, u3) via inverse stereographic projection.
  std::array<double, 3> sphere_coords() const {
    const double r2 = std::norm(w_);
    const double d = 1.0 + r2;
    if (chart_ == Chart::South)
      return {2.0 * w_.real() / d, 2.0 * w_.imag() / d, (r2 - 1.0) / d};
    return {2.0 * w_.real() / d, -2.0 * w_.imag() / d, (1.0 - r2) / d};
  }

  /// Probability p = |z|^2 / (1 + |z|^2) = (1 + u3) / 2.
  double p() const {
    const double r2 = std::norm(w_);
    return chart_ == Chart::South ? r2 / (1.0 + r2) : 1.0 / (1.0 + r2);
  }

 private:
  ModelPoint(Chart c, complex w) : chart_(c), w_(w) {}

  Chart chart_ = Chart::South;
  complex w_ = 0.0;
};

inline std::array<double, 3> sphere_coords(const ModelPoint& m) { return m.sphere_coords(); }

/// Tensor power k of the hyperplane bundle; H_k has dimension k + 1.
struct Level {
  int k = 0;

  explicit constexpr Level(int kk) : k(kk) {
    if (kk < 0) throw std::invalid_argument("level must be nonnegative");
  }
  constexpr int dim() const { return k + 1; }
};

namespace detail {

inline void check_index(int k, int j) {
  if (k < 0) throw std::invalid_argument("level must be nonnegative");
  if (j < 0 || j > k)
    throw std::out_of_range("section index " + std::to_string(j) + " outside [0, " +
                            std::to_string(k) + "]");
}

}  // namespace detail

/// log of the squared Fubini-Study norm of z^j at level k,
/// log(pi * j! (k-j)! / (k+1)!).
inline double log_basis_norm(int k, int j) {
  detail::check_index(k, j);
  return std::log(std::numbers::pi) + std::lgamma(j + 1.0) + std::lgamma(k - j + 1.0) -
         std::lgamma(k + 2.0);
}

/// Squared norm of z^j in H_k: integral of |z|^{2j} / (1+|z|^2)^{k+2} dA,
/// i.e. pi / ((k + 1) C(k, j)).  The binomial is a running product while it
/// fits in a double (C(1000, 500) ~ 2.7e299), which keeps the relative error
/// near j ulps instead of the lgamma route's |log n| ulps.
inline double basis_norm(int k, int j) {
  detail::check_index(k, j);
  if (k > 1000) return std::exp(log_basis_norm(k, j));
  const int m = std::min(j, k - j);
  double c = 1.0;
  for (int i = 1; i <= m; ++i) c = c * (k - m + i) / i;
  return std::numbers::pi / ((k + 1.0) * c);
}

namespace detail {

/// (t, 1 + t) for t = |w|^2, with t nudged by at most one ulp so that 1 + t
/// is exact.  Then sum_j C(k, j) t^j = (1 + t)^k holds without the k-fold
/// amplification of the rounding in 1 + t.
inline std::pair<double, double> radial_pair(double rho) {
  const double s = 1.0 + rho * rho;
  return {s - 1.0, s};
}

}  // namespace detail

/// Squared monomial norms for one level, built once and shared read-only.
class BasisTable {
 public:
  explicit BasisTable(Level level) : k_(level.k) {
    log_norms_.resize(static_cast<std::size_t>(k_) + 1);
    norms_.resize(log_norms_.size());
    for (int j = 0; j <= k_; ++j) {
      log_norms_[j] = log_basis_norm(k_, j);
      norms_[j] = basis_norm(k_, j);
    }
  }

  int k() const { return k_; }
  int dim() const { return k_ + 1; }
  double norm(int j) const {
    detail::check_index(k_, j);
    return norms_[j];
  }
  double log_norm(int j) const {
    detail::check_index(k_, j);
    return log_norms_[j];
  }
  const std::vector<double>& norms() const { return norms_; }

  /// Orthonormal section values shat_{k,j}(m) for all j at once.
  std::vector<complex> section_values(const ModelPoint& m) const {
    std::vector<complex> out(static_cast<std::size_t>(k_) + 1);
    const complex w = m.coordinate();
    const double rho = std::abs(w);
    const double phase = std::arg(w);
    const bool north = m.chart() == Chart::North;
    // In the North chart the section z^j reads w^{k-j} up to a unit factor
    // common to all j, which drops out of every |sum_j c_j shat_j|^2.
    if (rho == 0.0) {
      const int nonzero = north ? k_ : 0;
      for (auto& v : out) v = 0.0;
      out[nonzero] = std::exp(-0.5 * log_norms_[nonzero]);
      return out;
    }
    const auto [t, s] = detail::radial_pair(rho);
    if (k_ <= 512) {
      const double den = std::pow(s, 0.5 * k_);
      for (int j = 0; j <= k_; ++j) {
        const int power = north ? k_ - j : j;
        out[j] = std::polar(std::pow(t, 0.5 * power) / (std::sqrt(norms_[j]) * den), power * phase);
      }
      return out;
    }
    const double log_t = std::log(t);
    const double log_den = 0.5 * k_ * std::log(s);
    for (int j = 0; j <= k_; ++j) {
      const int power = north ? k_ - j : j;
      const double mag = std::exp(0.5 * power * log_t - 0.5 * log_norms_[j] - log_den);
      out[j] = std::polar(mag, power * phase);
    }
    return out;
  }

 private:
  int k_;
  std::vector<double> log_norms_;
  std::vector<double> norms_;
};

/// Value of the orthonormal section z^j / sqrt(n_{k,j}) in the unitary frame
/// of the chart that stores m.
inline complex section_value(int k, int j, const ModelPoint& m) {
  detail::check_index(k, j);
  const complex w = m.coordinate();
  const int power = m.chart() == Chart::North ? k - j : j;
  if (w == 0.0) return power == 0 ? complex(std::exp(-0.5 * log_basis_norm(k, j))) : 0.0;
  const auto [t, s] = detail::radial_pair(std::abs(w));
  if (k <= 512) {
    const double mag = std::pow(t, 0.5 * power) / (std::sqrt(basis_norm(k, j)) * std::pow(s, 0.5 * k));
    return std::polar(mag, power * std::arg(w));
  }
  const double log_mag = 0.5 * power * std::log(t) - 0.5 * log_basis_norm(k, j) - 0.5 * k * std::log(s);
  return std::polar(std::exp(log_mag), power * std::arg(w));
}

/// Bergman density Pi_k(x, x) = sum_j |shat_{k,j}(m)|^2; equals (k+1)/pi on CP^1.
inline double bergman_diagonal(int k, const ModelPoint& m) {
  if (k < 0) throw std::invalid_argument("level must be nonnegative");
  double s = 0.0;
  for (const auto& v : BasisTable(Level(k)).section_values(m)) s += std::norm(v);
  return s;
}

}  // namespace berezin

#endif  // BEREZIN_CP1_MODEL_HPP
