#ifndef BEREZIN_PHASE_LAB_HPP
#define BEREZIN_PHASE_LAB_HPP

// The complex phase
//   Psi(t, theta, vartheta, lambda, tau, r)
//     = -r w0 theta + tau r q + c2 tau^2 r - lambda tau
//       + i t (1 - e^{i(theta + vartheta)}) - vartheta
// of the inner oscillatory integral: its stationary point and Hessian.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace berezin::phase {

using complex = std::complex<double>;

struct PhaseParams {
  double omega0 = 1.0;
  double qval = 1.0;
  /// Coefficient of the c2 tau^2 r remainder term.
  double c2 = 0.0;

  PhaseParams() = default;
  PhaseParams(double w0, double q, double c = 0.0) : omega0(w0), qval(q), c2(c) {
    if (!(w0 > 0.0)) throw std::invalid_argument("omega0 must be positive");
  }
};

/// Variables in the fixed order (t, theta, vartheta, lambda, tau, r).
struct PhasePoint {
  double t = 1.0;
  double theta = 0.0;
  double vartheta = 0.0;
  double lambda = 0.0;
  double tau = 0.0;
  double r = 1.0;

  std::array<double, 6> as_array() const { return {t, theta, vartheta, lambda, tau, r}; }
  static PhasePoint from_array(const std::array<double, 6>& x) { return {x[0], x[1], x[2], x[3], x[4], x[5]}; }
};

using Gradient = std::array<complex, 6>;
using Hessian = std::array<std::array<complex, 6>, 6>;

inline complex phase_eval(const PhaseParams& p, const PhasePoint& x) {
  const complex i(0.0, 1.0);
  const complex e = std::polar(1.0, x.theta + x.vartheta);
  return -x.r * p.omega0 * x.theta + x.tau * x.r * p.qval + p.c2 * x.tau * x.tau * x.r - x.lambda * x.tau +
         i * x.t * (1.0 - e) - x.vartheta;
}

inline Gradient phase_gradient(const PhaseParams& p, const PhasePoint& x) {
  const complex i(0.0, 1.0);
  const complex e = std::polar(1.0, x.theta + x.vartheta);
  return {
      i * (1.0 - e),                                              // t
      -x.r * p.omega0 + x.t * e,                                  // theta
      x.t * e - 1.0,                                              // vartheta
      -x.tau,                                                     // lambda
      x.r * p.qval + 2.0 * p.c2 * x.tau * x.r - x.lambda,         // tau
      -p.omega0 * x.theta + x.tau * p.qval + p.c2 * x.tau * x.tau,  // r
  };
}

inline Hessian phase_hessian(const PhaseParams& p, const PhasePoint& x) {
  const complex i(0.0, 1.0);
  const complex e = std::polar(1.0, x.theta + x.vartheta);
  Hessian h{};
  enum { T, TH, VT, L, TAU, R };
  h[T][TH] = h[TH][T] = e;
  h[T][VT] = h[VT][T] = e;
  h[TH][TH] = i * x.t * e;
  h[TH][VT] = h[VT][TH] = i * x.t * e;
  h[VT][VT] = i * x.t * e;
  h[TH][R] = h[R][TH] = -p.omega0;
  h[L][TAU] = h[TAU][L] = -1.0;
  h[TAU][TAU] = 2.0 * p.c2 * x.r;
  h[TAU][R] = h[R][TAU] = p.qval + 2.0 * p.c2 * x.tau;
  return h;
}

inline double gradient_norm(const Gradient& g) {
  double s = 0.0;
  for (const auto& v : g) s += std::norm(v);
  return std::sqrt(s);
}

/// (1, 0, 0, q / w0, 0, 1 / w0).
inline PhasePoint critical_point(const PhaseParams& p) {
  return {1.0, 0.0, 0.0, p.qval / p.omega0, 0.0, 1.0 / p.omega0};
}

struct Determinant {
  complex value;
  /// Parity of the row permutation used by the elimination (+1 even, -1 odd);
  /// already folded into value.
  int permutation_parity = 1;
};

/// Determinant by Gaussian elimination with partial pivoting, rows and
/// columns in the (t, theta, vartheta, lambda, tau, r) order.
inline Determinant determinant(Hessian a) {
  Determinant d{1.0, 1};
  for (int c = 0; c < 6; ++c) {
    int piv = c;
    for (int r = c + 1; r < 6; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return {0.0, d.permutation_parity};
    if (piv != c) {
      std::swap(a[piv], a[c]);
      d.permutation_parity = -d.permutation_parity;
    }
    d.value *= a[c][c];
    for (int r = c + 1; r < 6; ++r) {
      const complex f = a[r][c] / a[c][c];
      for (int cc = c; cc < 6; ++cc) a[r][cc] -= f * a[c][cc];
    }
  }
  d.value *= static_cast<double>(d.permutation_parity);
  return d;
}

/// Determinant of the Hessian at the stationary point; equals -omega0^2.
inline Determinant hessian_det(const PhaseParams& p) { return determinant(phase_hessian(p, critical_point(p))); }

struct ScanBox {
  std::array<double, 6> lo;
  std::array<double, 6> hi;

  /// A box around the stationary point of p, with angles in [-1, 1].
  static ScanBox around(const PhaseParams& p) {
    const PhasePoint c = critical_point(p);
    return {{0.5, -1.0, -1.0, c.lambda - 1.0, -1.0, 0.5 * c.r}, {1.5, 1.0, 1.0, c.lambda + 1.0, 1.0, 1.5 * c.r}};
  }
};

struct ScanCandidate {
  PhasePoint grid_point;
  double grid_norm = 0.0;
  PhasePoint refined;
  double refined_norm = 0.0;
};

struct ScanResult {
  std::vector<ScanCandidate> candidates;
  /// min |grad Psi| over all grid nodes
  double min_grid_norm = 0.0;
  PhasePoint min_grid_point;
};

namespace detail {

/// Gauss-Newton on [Re grad; Im grad] = 0 over the six real variables.
inline PhasePoint refine(const PhaseParams& p, PhasePoint x, int iterations = 50) {
  for (int it = 0; it < iterations; ++it) {
    const auto g = phase_gradient(p, x);
    if (gradient_norm(g) < 1e-15) break;
    const auto h = phase_hessian(p, x);
    // normal equations J^T J dx = -J^T res, J = [Re H; Im H] (12 x 6)
    std::array<std::array<double, 7>, 6> m{};
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        double s = 0.0;
        for (int r = 0; r < 6; ++r) s += h[r][a].real() * h[r][b].real() + h[r][a].imag() * h[r][b].imag();
        m[a][b] = s;
      }
      double rhs = 0.0;
      for (int r = 0; r < 6; ++r) rhs += h[r][a].real() * g[r].real() + h[r][a].imag() * g[r].imag();
      m[a][6] = -rhs;
    }
    for (int c = 0; c < 6; ++c) {
      int piv = c;
      for (int r = c + 1; r < 6; ++r)
        if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
      std::swap(m[piv], m[c]);
      if (m[c][c] == 0.0) return x;
      for (int r = 0; r < 6; ++r) {
        if (r == c) continue;
        const double f = m[r][c] / m[c][c];
        for (int cc = c; cc < 7; ++cc) m[r][cc] -= f * m[c][cc];
      }
    }
    auto arr = x.as_array();
    for (int a = 0; a < 6; ++a) arr[a] += m[a][6] / m[a][a];
    x = PhasePoint::from_array(arr);
  }
  return x;
}

}  // namespace detail

/// Grid scan of |grad Psi| over box with `resolution` nodes per axis.  Local
/// minima (against axis neighbours) are polished by Gauss-Newton; those whose
/// polished gradient is below threshold and which stay in the box are
/// returned, merged when closer than 1e-6.
inline ScanResult scan_stationary(const PhaseParams& p, const ScanBox& box, int resolution,
                                  double threshold = 1e-3) {
  if (resolution < 2) throw std::invalid_argument("scan resolution must be at least 2");
  const int n = resolution;
  std::size_t total = 1;
  for (int d = 0; d < 6; ++d) total *= static_cast<std::size_t>(n);
  const auto node = [&](std::size_t idx) {
    std::array<double, 6> x;
    for (int d = 0; d < 6; ++d) {
      const int id = static_cast<int>(idx % n);
      idx /= n;
      x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * id / (n - 1);
    }
    return PhasePoint::from_array(x);
  };
  std::vector<double> norms(total);
  ScanResult out;
  out.min_grid_norm = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < total; ++idx) {
    const PhasePoint x = node(idx);
    norms[idx] = gradient_norm(phase_gradient(p, x));
    if (norms[idx] < out.min_grid_norm) {
      out.min_grid_norm = norms[idx];
      out.min_grid_point = x;
    }
  }
  std::size_t stride[6];
  stride[0] = 1;
  for (int d = 1; d < 6; ++d) stride[d] = stride[d - 1] * n;
  for (std::size_t idx = 0; idx < total; ++idx) {
    bool is_min = true;
    for (int d = 0; d < 6 && is_min; ++d) {
      const int id = static_cast<int>((idx / stride[d]) % n);
      if (id > 0 && norms[idx - stride[d]] < norms[idx]) is_min = false;
      if (id < n - 1 && norms[idx + stride[d]] < norms[idx]) is_min = false;
    }
    if (!is_min) continue;
    const PhasePoint g = node(idx);
    const PhasePoint r = detail::refine(p, g);
    const double rn = gradient_norm(phase_gradient(p, r));
    if (!(rn < threshold)) continue;
    const auto ra = r.as_array();
    bool inside = true;
    for (int d = 0; d < 6; ++d) inside = inside && ra[d] >= box.lo[d] - 1e-9 && ra[d] <= box.hi[d] + 1e-9;
    if (!inside) continue;
    bool duplicate = false;
    for (auto& c : out.candidates) {
      const auto ca = c.refined.as_array();
      double dist = 0.0;
      for (int d = 0; d < 6; ++d) dist = std::max(dist, std::abs(ca[d] - ra[d]));
      if (dist < 1e-6) {
        duplicate = true;
        if (norms[idx] < c.grid_norm) {
          c.grid_point = g;
          c.grid_norm = norms[idx];
        }
      }
    }
    if (!duplicate) out.candidates.push_back({g, norms[idx], r, rn});
  }
  return out;
}

}  // namespace berezin::phase

#endif  // BEREZIN_PHASE_LAB_HPP
