#ifndef BEREZIN_TOEPLITZ_HPP
#define BEREZIN_TOEPLITZ_HPP

// Level-k Berezin-Toeplitz matrices (T_k)_{ij} = <f shat_j, shat_i> in the
// orthonormal monomial basis of H_k.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "berezin/cp1_model.hpp"
#include "berezin/observables.hpp"
#include "berezin/quadrature.hpp"

namespace berezin {

struct Provenance {
  enum class Kind { ClosedForm, Quadrature };
  Kind kind = Kind::ClosedForm;
  int radial_order = 0;
  int angular_order = 0;
  /// Set when the quadrature scheme could not resolve the symbol exactly.
  bool accuracy_warning = false;
  /// max |A_ij - conj(A_ji)| before Hermitization.
  double presymmetrization_defect = 0.0;

  std::string describe() const {
    if (kind == Kind::ClosedForm) return "closed";
    return "quadrature(" + std::to_string(radial_order) + "," + std::to_string(angular_order) +
           ")" + (accuracy_warning ? "!" : "");
  }
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedClass : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense (k+1) x (k+1) complex Hermitian matrix, row-major.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(Level level, Provenance prov = {})
      : k_(level.k), n_(level.dim()), a_(static_cast<std::size_t>(n_) * n_), prov_(prov) {}

  int k() const { return k_; }
  int dim() const { return n_; }

  complex& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const complex& operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }

  const std::vector<complex>& data() const { return a_; }
  const Provenance& provenance() const { return prov_; }
  Provenance& provenance() { return prov_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  double hermiticity_defect() const {
    double d = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j <= i; ++j) d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return d;
  }

  std::vector<complex> apply(const std::vector<complex>& x) const {
    std::vector<complex> y(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      complex s = 0.0;
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }

  HermitianMatrix& operator*=(double s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

  /// Replace by (A + A^H) / 2 and return the defect removed.
  double hermitize() {
    const double defect = hermiticity_defect();
    for (int i = 0; i < n_; ++i) {
      (*this)(i, i) = (*this)(i, i).real();
      for (int j = 0; j < i; ++j) {
        const complex avg = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
        (*this)(i, j) = avg;
        (*this)(j, i) = std::conj(avg);
      }
    }
    return defect;
  }

 private:
  void check_same(const HermitianMatrix& o) const {
    if (o.k_ != k_) throw std::invalid_argument("level mismatch in matrix arithmetic");
  }

  int k_;
  int n_;
  std::vector<complex> a_;
  Provenance prov_;
};

namespace detail {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0)));
}

inline void add_linear(HermitianMatrix& t, const LinearU& f) {
  const int k = t.k();
  const double denom = k + 2.0;
  for (int j = 0; j <= k; ++j) t(j, j) += f.b + f.a[2] * (2.0 * j - k) / denom;
  // u1 + i u2 = 2z / (1 + |z|^2) raises the degree by one
  const complex raise(f.a[0], -f.a[1]);
  for (int j = 0; j < k; ++j) {
    const double band = std::sqrt((j + 1.0) * (k - j)) / denom;
    t(j + 1, j) += raise * band;
    t(j, j + 1) += std::conj(raise) * band;
  }
}

/// zeta^p conj(zeta)^q u3^c with zeta = u1 + i u2.
struct ZetaTerm {
  complex coefficient;
  int p;
  int q;
  int c;
};

inline std::vector<ZetaTerm> expand_monomial(const Monomial& m) {
  // u1 = (zeta + zbar) / 2, u2 = (zeta - zbar) / (2i)
  std::vector<ZetaTerm> out;
  const complex scale = m.coefficient / (std::pow(2.0, m.e1) * std::pow(complex(0.0, 2.0), m.e2));
  for (int a = 0; a <= m.e1; ++a) {
    for (int b = 0; b <= m.e2; ++b) {
      const double sign = ((m.e2 - b) % 2 == 0) ? 1.0 : -1.0;
      const complex coef = scale * binomial(m.e1, a) * binomial(m.e2, b) * sign;
      out.push_back({coef, a + b, m.e1 + m.e2 - a - b, m.e3});
    }
  }
  return out;
}

inline void add_zeta_term(HermitianMatrix& t, const BasisTable& basis, const ZetaTerm& term) {
  const int k = t.k();
  const int p = term.p;
  const int q = term.q;
  const int c = term.c;
  const double log_front = std::log(std::numbers::pi) + (p + q) * std::numbers::ln2;
  for (int j = 0; j <= k; ++j) {
    const int i = j + p - q;
    if (i < 0 || i > k) continue;
    const double log_norm = 0.5 * (basis.log_norm(i) + basis.log_norm(j));
    // (t - 1)^c = sum_l C(c,l) t^l (-1)^{c-l}; each piece is a Beta integral
    double sum = 0.0;
    for (int l = 0; l <= c; ++l) {
      const double a = j + p + l + 1.0;
      const double b = k + 1.0 + q + c - j - l;
      const double sign = ((c - l) % 2 == 0) ? 1.0 : -1.0;
      sum += sign * binomial(c, l) * std::exp(log_front + log_beta(a, b) - log_norm);
    }
    t(i, j) += term.coefficient * sum;
  }
}

}  // namespace detail

/// Exact matrix of T_f for linear and polynomial symbols in (u1, u2, u3).
inline HermitianMatrix assemble_closed(Level level, const Observable& f) {
  HermitianMatrix t(level, Provenance{Provenance::Kind::ClosedForm});
  if (const auto* lin = std::get_if<LinearU>(&f.kind())) {
    detail::add_linear(t, *lin);
    return t;
  }
  const auto* poly = std::get_if<PolynomialU>(&f.kind());
  if (poly == nullptr)
    throw UnsupportedClass("closed-form assembly needs a linear or polynomial symbol");
  const BasisTable basis(level);
  for (const auto& mono : poly->terms)
    for (const auto& term : detail::expand_monomial(mono)) detail::add_zeta_term(t, basis, term);
  t.hermitize();
  return t;
}

/// T_f by Fubini-Study quadrature: angular Fourier modes of f first, then a
/// Gauss-Legendre radial rule in u = |z|^2 / (1 + |z|^2).
inline HermitianMatrix assemble_quadrature(Level level, const Observable& f, const QuadratureScheme& q) {
  if (q.radial_order < 1 || q.angular_order < 1)
    throw std::invalid_argument("quadrature orders must be positive");
  const int k = level.k;
  const int n = level.dim();
  Provenance prov{Provenance::Kind::Quadrature, q.radial_order, q.angular_order};
  prov.accuracy_warning = !q.sufficient_for(k, f.bandwidth());
  HermitianMatrix t(level, prov);

  const BasisTable basis(level);
  const auto rule = gauss_legendre_unit(q.radial_order);
  const int m_ang = q.angular_order;
  const int modes = std::min(k, (m_ang - 1) / 2);
  const double dtheta = 2.0 * std::numbers::pi / m_ang;

  std::vector<complex> twiddle(static_cast<std::size_t>(m_ang));
  for (int b = 0; b < m_ang; ++b) twiddle[b] = std::polar(1.0, -b * dtheta);

  // fourier[r][d + modes] = (1/M) sum_b f(z_b) e^{-i d theta_b}
  std::vector<std::vector<complex>> fourier(rule.nodes.size(),
                                            std::vector<complex>(2 * modes + 1));
  std::vector<double> ring(static_cast<std::size_t>(m_ang));
  for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
    const double u = rule.nodes[r];
    const double rho = std::sqrt(u / (1.0 - u));
    for (int b = 0; b < m_ang; ++b) ring[b] = f(ModelPoint::from_z(std::polar(rho, b * dtheta)));
    for (int d = -modes; d <= modes; ++d) {
      complex s = 0.0;
      for (int b = 0; b < m_ang; ++b) {
        const int idx = static_cast<int>((static_cast<long long>(d) * b % m_ang + m_ang) % m_ang);
        s += ring[b] * twiddle[idx];
      }
      fourier[r][d + modes] = s / static_cast<double>(m_ang);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int d = i - j;
      if (std::abs(d) > modes) continue;
      const double s = 0.5 * (i + j);
      const double log_norm = 0.5 * (basis.log_norm(i) + basis.log_norm(j));
      complex acc = 0.0;
      for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
        const double u = rule.nodes[r];
        const double radial = std::exp(s * std::log(u) + (k - s) * std::log1p(-u) - log_norm);
        acc += rule.weights[r] * radial * fourier[r][d + modes];
      }
      t(i, j) = std::numbers::pi * acc;
      if (!std::isfinite(t(i, j).real()) || !std::isfinite(t(i, j).imag()))
        throw AssemblyError("non-finite quadrature entry at level " + std::to_string(k) + " (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
  t.provenance().presymmetrization_defect = t.hermitize();
  return t;
}

inline HermitianMatrix assemble_quadrature(Level level, const Observable& f) {
  return assemble_quadrature(level, f, QuadratureScheme::for_level(level.k, f.bandwidth()));
}

/// Closed form when the symbol class allows it, quadrature otherwise.
inline HermitianMatrix assemble(Level level, const Observable& f) {
  if (f.exactly_integrable()) return assemble_closed(level, f);
  return assemble_quadrature(level, f);
}

/// T + c Pi_k.
inline HermitianMatrix shift_operator(HermitianMatrix t, double c) {
  for (int i = 0; i < t.dim(); ++i) t(i, i) += c;
  return t;
}

}  // namespace berezin

#endif  // BEREZIN_TOEPLITZ_HPP
