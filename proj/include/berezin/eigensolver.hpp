#ifndef BEREZIN_EIGENSOLVER_HPP
#define BEREZIN_EIGENSOLVER_HPP

// Cyclic Jacobi diagonalization of complex Hermitian matrices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "berezin/toeplitz.hpp"

namespace berezin {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(int sweeps, double off_norm)
      : std::runtime_error("Jacobi failed to converge after " + std::to_string(sweeps) +
                           " sweeps (off-diagonal norm " + std::to_string(off_norm) + ")"),
        sweeps_(sweeps),
        off_norm_(off_norm) {}

  int sweeps() const { return sweeps_; }
  double off_norm() const { return off_norm_; }

 private:
  int sweeps_;
  double off_norm_;
};

/// Eigenvalues ascending; column j of vectors is the eigenvector of eigenvalue
/// j in the orthonormal monomial basis (row-major n x n).
struct SpectralData {
  int k = 0;
  std::vector<double> eigenvalues;
  std::vector<complex> vectors;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  complex v(int row, int col) const { return vectors[static_cast<std::size_t>(row) * dim() + col]; }
  complex& v(int row, int col) { return vectors[static_cast<std::size_t>(row) * dim() + col]; }
};

struct EighOptions {
  int max_sweeps = 64;
  /// Stop once the off-diagonal Frobenius norm is below tolerance * ||T||_F.
  double tolerance = 1e-14;
  /// Required accuracy; exceeding it after max_sweeps is a convergence failure.
  double required = 1e-12;
};

namespace detail {

inline double off_diagonal_norm(const std::vector<complex>& a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += std::norm(a[static_cast<std::size_t>(i) * n + j]);
  return std::sqrt(s);
}

/// Order ascending; equal eigenvalues by the index of the leading component,
/// and rotate each vector so that component is real positive.
inline void canonicalize(SpectralData& s) {
  const int n = s.dim();
  const double scale = 1.0 + std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0,
                                             [](double m, double x) { return std::max(m, std::abs(x)); });
  std::vector<int> lead(static_cast<std::size_t>(n), 0);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      if (std::abs(s.v(r, c)) > 1e-8) {
        lead[c] = r;
        break;
      }
    }
    const complex z = s.v(lead[c], c);
    const complex phase = std::conj(z) / std::abs(z);
    for (int r = 0; r < n; ++r) s.v(r, c) *= phase;
    s.v(lead[c], c) = std::abs(z);
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return s.eigenvalues[a] < s.eigenvalues[b]; });
  // reorder inside clusters of numerically equal eigenvalues
  const double tie = 1e-9 * scale;
  for (int start = 0; start < n;) {
    int end = start + 1;
    while (end < n && s.eigenvalues[order[end]] - s.eigenvalues[order[end - 1]] <= tie) ++end;
    std::stable_sort(order.begin() + start, order.begin() + end,
                     [&](int a, int b) { return lead[a] < lead[b]; });
    start = end;
  }
  SpectralData out{s.k, std::vector<double>(static_cast<std::size_t>(n)),
                   std::vector<complex>(s.vectors.size())};
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[c] = s.eigenvalues[order[c]];
    for (int r = 0; r < n; ++r) out.v(r, c) = s.v(r, order[c]);
  }
  s = std::move(out);
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
inline SpectralData eigh(const HermitianMatrix& t, const EighOptions& opt = {}) {
  const int n = t.dim();
  std::vector<complex> a = t.data();
  std::vector<complex> vec(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i) * n + i] = 1.0;
  const auto at = [&](int i, int j) -> complex& { return a[static_cast<std::size_t>(i) * n + j]; };
  const auto vt = [&](int i, int j) -> complex& { return vec[static_cast<std::size_t>(i) * n + j]; };

  const double norm = t.frobenius_norm();
  double off = detail::off_diagonal_norm(a, n);
  int sweep = 0;
  while (off > opt.tolerance * norm && sweep < opt.max_sweeps) {
    ++sweep;
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const complex apq = at(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300 || mag <= 1e-18 * norm) continue;
        rotated = true;
        const double app = at(p, p).real();
        const double aqq = at(q, q).real();
        const complex phase = apq / mag;
        const double theta = (aqq - app) / (2.0 * mag);
        const double tt = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        const double s = tt * c;
        // U = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, q); A <- U^H A U
        const complex spq = s * phase;
        const complex sqp = -s * std::conj(phase);
        for (int r = 0; r < n; ++r) {
          const complex arp = at(r, p);
          const complex arq = at(r, q);
          at(r, p) = c * arp + sqp * arq;
          at(r, q) = spq * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          const complex apr = at(p, r);
          const complex aqr = at(q, r);
          at(p, r) = c * apr + std::conj(sqp) * aqr;
          at(q, r) = std::conj(spq) * apr + c * aqr;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        at(p, p) = app - tt * mag;
        at(q, q) = aqq + tt * mag;
        for (int r = 0; r < n; ++r) {
          const complex vrp = vt(r, p);
          const complex vrq = vt(r, q);
          vt(r, p) = c * vrp + sqp * vrq;
          vt(r, q) = spq * vrp + c * vrq;
        }
      }
    }
    off = detail::off_diagonal_norm(a, n);
    if (!rotated) break;
  }
  if (off > opt.required * std::max(norm, 1e-300) && off > 0.0) throw ConvergenceError(sweep, off);

  SpectralData out{t.k(), std::vector<double>(static_cast<std::size_t>(n)), std::move(vec)};
  for (int i = 0; i < n; ++i) out.eigenvalues[i] = at(i, i).real();
  detail::canonicalize(out);
  return out;
}

struct SpectralCheck {
  double residual = 0.0;         ///< max_j ||T v_j - lambda_j v_j||_2
  double orthonormality = 0.0;   ///< max |V^H V - I|
};

inline SpectralCheck check_spectral(const HermitianMatrix& t, const SpectralData& s) {
  const int n = s.dim();
  SpectralCheck chk;
  std::vector<complex> col(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) col[r] = s.v(r, c);
    const auto tv = t.apply(col);
    double res = 0.0;
    for (int r = 0; r < n; ++r) res += std::norm(tv[r] - s.eigenvalues[c] * col[r]);
    chk.residual = std::max(chk.residual, std::sqrt(res));
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      complex dot = 0.0;
      for (int r = 0; r < n; ++r) dot += std::conj(s.v(r, a)) * s.v(r, b);
      if (a == b) dot -= 1.0;
      chk.orthonormality = std::max(chk.orthonormality, std::abs(dot));
    }
  }
  return chk;
}

}  // namespace berezin

#endif  // BEREZIN_EIGENSOLVER_HPP
