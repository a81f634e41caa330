#ifndef BEREZIN_ASYMPTOTICS_HPP
#define BEREZIN_ASYMPTOTICS_HPP

// Large-k behaviour of the normalized pairings a_k = (pi/k) <T_{m,k}, chi>:
// least-squares and Richardson extraction of the 1/k expansion, plus exact
// binomial and Edgeworth oracles for the diagonal symbol u3.

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "berezin/cp1_model.hpp"
#include "berezin/eigensolver.hpp"
#include "berezin/observables.hpp"
#include "berezin/quadrature.hpp"
#include "berezin/spectral_measures.hpp"
#include "berezin/toeplitz.hpp"

namespace berezin {

/// Complex dimension of the model manifold; the pairings are normalized by (pi/k)^d.
inline constexpr int kModelDimension = 1;

class KGrid {
 public:
  KGrid(std::vector<int> ks, int fit_order) : ks_(std::move(ks)) {
    if (ks_.empty()) throw std::invalid_argument("k-grid is empty");
    for (std::size_t i = 0; i < ks_.size(); ++i) {
      if (ks_[i] <= 0) throw std::invalid_argument("k-grid entries must be positive");
      if (i > 0 && ks_[i] <= ks_[i - 1]) throw std::invalid_argument("k-grid must be strictly increasing");
    }
    if (static_cast<int>(ks_.size()) < fit_order + 2)
      throw std::invalid_argument("k-grid needs at least fit order + 2 entries");
    if (ks_.back() < 4 * ks_.front())
      throw std::invalid_argument("k-grid max/min ratio must be at least 4");
  }

  static KGrid standard() { return KGrid({32, 48, 64, 96, 128, 192, 256}, 2); }

  const std::vector<int>& values() const { return ks_; }
  std::size_t size() const { return ks_.size(); }

 private:
  std::vector<int> ks_;
};

using SpectrumProvider = std::function<SpectralData(const Observable&, int)>;

inline SpectralData compute_spectrum(const Observable& f, int k) { return eigh(assemble(Level(k), f)); }

namespace detail {

/// Evaluate fn(i) for i in [0, n) on up to hardware_concurrency workers.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn fn) {
  std::vector<T> out(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace detail

/// (pi/k)^d <T_{m,k}, chi> for one spectral decomposition.
inline double normalized_pairing(const SpectralData& s, const ModelPoint& m, const TestFunction& chi) {
  if (s.k <= 0) throw std::invalid_argument("normalized pairing needs k >= 1");
  return std::pow(std::numbers::pi / s.k, kModelDimension) * pair(local_measure(s, m), chi);
}

inline std::vector<double> normalized_pairing_sequence(const Observable& f, const TestFunction& chi,
                                                       const ModelPoint& m, const KGrid& grid,
                                                       const SpectrumProvider& provider = compute_spectrum) {
  const auto& ks = grid.values();
  return detail::parallel_map<double>(ks.size(), [&](std::size_t i) {
    try {
      return normalized_pairing(provider(f, ks[i]), m, chi);
    } catch (const std::exception& e) {
      throw std::runtime_error("level " + std::to_string(ks[i]) + ": " + e.what());
    }
  });
}

struct ExpansionFit {
  std::vector<double> coefficients;  ///< c_0 .. c_J
  std::vector<int> grid;
  double residual = 0.0;   ///< max_k |a_k - sum_j c_j k^{-j}|
  double condition = 0.0;  ///< singular value ratio of the design matrix

  double evaluate(double k) const {
    double s = 0.0;
    for (std::size_t j = coefficients.size(); j-- > 0;) s = s / k + coefficients[j];
    return s;
  }

  /// residual <= 10 |c_J| k_min^{-J}
  bool self_consistent() const {
    const int order = static_cast<int>(coefficients.size()) - 1;
    return residual <= 10.0 * std::abs(coefficients.back()) * std::pow(grid.front(), -order);
  }
};

class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(double cond)
      : std::runtime_error("fit system condition " + std::to_string(cond) + " exceeds 1e12"), condition(cond) {}
  double condition;
};

namespace detail {

/// One-sided Jacobi SVD of a tall m x n matrix (column-major columns).
/// Returns singular values, and overwrites cols with U * Sigma and v with V.
inline std::vector<double> one_sided_jacobi(std::vector<std::vector<double>>& cols,
                                            std::vector<std::vector<double>>& v) {
  const std::size_t n = cols.size();
  v.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < cols[p].size(); ++r) {
          alpha += cols[p][r] * cols[p][r];
          beta += cols[q][r] * cols[q][r];
          gamma += cols[p][r] * cols[q][r];
        }
        if (std::abs(gamma) <= 1e-17 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < cols[p].size(); ++r) {
          const double x = cols[p][r];
          const double y = cols[q][r];
          cols[p][r] = c * x - s * y;
          cols[q][r] = s * x + c * y;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double x = v[p][r];
          const double y = v[q][r];
          v[p][r] = c * x - s * y;
          v[q][r] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double x : cols[i]) s += x * x;
    sigma[i] = std::sqrt(s);
  }
  return sigma;
}

}  // namespace detail

/// Least-squares fit a_k ~ sum_{j<=J} c_j k^{-j}.
inline ExpansionFit fit_expansion(std::span<const double> a, std::span<const int> grid, int order) {
  if (a.size() != grid.size()) throw std::invalid_argument("sequence and grid lengths differ");
  if (order < 0) throw std::invalid_argument("fit order must be nonnegative");
  if (static_cast<int>(grid.size()) < order + 2)
    throw std::invalid_argument("fit needs at least order + 2 grid points");
  const std::size_t m = grid.size();
  const std::size_t n = static_cast<std::size_t>(order) + 1;
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j < n; ++j) cols[j][r] = std::pow(1.0 / grid[r], static_cast<double>(j));
  std::vector<std::vector<double>> v;
  const auto sigma = detail::one_sided_jacobi(cols, v);
  const double smax = *std::max_element(sigma.begin(), sigma.end());
  const double smin = *std::min_element(sigma.begin(), sigma.end());
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) throw ConditioningError(cond);

  // x = V Sigma^{-1} U^T a, where cols[i] = sigma_i u_i
  std::vector<double> coeffs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double proj = 0.0;
    for (std::size_t r = 0; r < m; ++r) proj += cols[i][r] * a[r];
    proj /= sigma[i] * sigma[i];
    for (std::size_t j = 0; j < n; ++j) coeffs[j] += v[i][j] * proj;
  }
  ExpansionFit fit{std::move(coeffs), std::vector<int>(grid.begin(), grid.end()), 0.0, cond};
  for (std::size_t r = 0; r < m; ++r) fit.residual = std::max(fit.residual, std::abs(a[r] - fit.evaluate(grid[r])));
  return fit;
}

inline ExpansionFit fit_expansion(std::span<const double> a, const KGrid& grid, int order) {
  return fit_expansion(a, std::span<const int>(grid.values()), order);
}

/// Limit as k -> infinity of a sequence a_k = c_0 + c_1/k + ... by polynomial
/// extrapolation in 1/k to zero (Neville's scheme); on a doubling grid this is
/// repeated Richardson elimination.
inline double richardson_limit(std::span<const double> a, std::span<const int> grid) {
  if (a.size() != grid.size() || a.empty()) throw std::invalid_argument("bad Richardson input");
  std::vector<double> p(a.begin(), a.end());
  const std::size_t n = p.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double xi = 1.0 / grid[i];
      const double xl = 1.0 / grid[i + level];
      p[i] = (xi * p[i + 1] - xl * p[i]) / (xi - xl);
    }
  }
  return p[0];
}

struct RichardsonEstimate {
  double c0 = 0.0;
  double c1 = 0.0;
};

/// c0 as the extrapolated limit, c1 as the extrapolated limit of k (a_k - c0).
inline RichardsonEstimate richardson_extract(std::span<const double> a, std::span<const int> grid) {
  RichardsonEstimate est;
  est.c0 = richardson_limit(a, grid);
  std::vector<double> b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) b[i] = grid[i] * (a[i] - est.c0);
  // the k-weighted sequence has one fewer reliable term
  est.c1 = richardson_limit(std::span<const double>(b).subspan(1), grid.subspan(1));
  return est;
}

/// (1 + 1/k) sum_j C(k,j) p^j (1-p)^{k-j} chi((2j - k)/(k + 2)): the normalized
/// pairing for u3 computed without assembly or diagonalization.
inline double binomial_oracle(int k, double p, const TestFunction& chi) {
  if (k <= 0) throw std::invalid_argument("binomial oracle needs k >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    double w;
    if (p == 0.0) {
      w = j == 0 ? 1.0 : 0.0;
    } else if (p == 1.0) {
      w = j == k ? 1.0 : 0.0;
    } else {
      w = std::exp(std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) + j * lp +
                   (k - j) * lq);
    }
    if (w != 0.0) sum += w * chi((2.0 * j - k) / (k + 2.0));
  }
  return (1.0 + 1.0 / k) * sum;
}

/// First correction of the u3 expansion:
/// chi(f) - 2 f chi'(f) + (1 - f^2)/2 chi''(f).
inline double edgeworth_c1(const TestFunction& chi, double fval) {
  if (std::abs(fval) > 1.0) throw std::invalid_argument("fval must lie in [-1, 1]");
  return chi(fval) - 2.0 * fval * chi.eval(fval, 1) + 0.5 * (1.0 - fval * fval) * chi.eval(fval, 2);
}

struct SzegoCheck {
  std::vector<int> ks;
  std::vector<double> values;  ///< (pi/k) <T_k, chi>
  double target = 0.0;         ///< int_M chi(f) d mu

  double error(std::size_t i) const { return std::abs(values[i] - target); }
};

/// int_M chi(f(m)) d mu_M(m) by product quadrature over the sphere.
inline double symbol_integral(const Observable& f, const TestFunction& chi, int radial_order = 256,
                              int angular_order = 128) {
  return sphere_integral(
      [&](double u3, double phi) { return chi(f(ModelPoint::from_latitude(u3, phi))); }, radial_order,
      angular_order);
}

inline SzegoCheck szego_limit_check(const Observable& f, const TestFunction& chi, std::span<const int> ks,
                                    const SpectrumProvider& provider = compute_spectrum) {
  SzegoCheck out;
  out.ks.assign(ks.begin(), ks.end());
  for (int k : ks)
    if (k <= 0) throw std::invalid_argument("Szego check needs k >= 1");
  out.values = detail::parallel_map<double>(ks.size(), [&](std::size_t i) {
    return std::pow(std::numbers::pi / ks[i], kModelDimension) * pair(global_measure(provider(f, ks[i])), chi);
  });
  out.target = symbol_integral(f, chi);
  return out;
}

/// Nine sample points: both poles, four equatorial points, three off-axis points.
inline std::vector<ModelPoint> default_point_grid() {
  using std::numbers::pi;
  return {
      ModelPoint::south_pole(),
      ModelPoint::north_pole(),
      ModelPoint::from_latitude(0.0, 0.0),
      ModelPoint::from_latitude(0.0, 0.5 * pi),
      ModelPoint::from_latitude(0.0, pi),
      ModelPoint::from_latitude(0.0, 1.5 * pi),
      ModelPoint::from_latitude(-0.6, 0.7),
      ModelPoint::from_latitude(0.35, 2.3),
      ModelPoint::from_latitude(0.8, -1.9),
  };
}

}  // namespace berezin

#endif  // BEREZIN_ASYMPTOTICS_HPP
