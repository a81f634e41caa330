#ifndef BEREZIN_OBSERVABLES_HPP
#define BEREZIN_OBSERVABLES_HPP

// Classical symbols f on CP^1 and test functions chi on the real line.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "berezin/cp1_model.hpp"

namespace berezin {

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// f = a1 u1 + a2 u2 + a3 u3 + b.
struct LinearU {
  std::array<double, 3> a{0.0, 0.0, 0.0};
  double b = 0.0;
};

/// coefficient * u1^e1 * u2^e2 * u3^e3
struct Monomial {
  double coefficient = 0.0;
  int e1 = 0;
  int e2 = 0;
  int e3 = 0;
};

struct PolynomialU {
  std::vector<Monomial> terms;
};

struct GeneralSymbol {
  std::function<double(const ModelPoint&)> fn;
  std::string name = "general";
  /// Highest azimuthal Fourier mode of f in the South chart, if known.
  int bandwidth = 8;
};

class Observable {
 public:
  using Kind = std::variant<LinearU, PolynomialU, GeneralSymbol>;

  Observable(LinearU f) : kind_(std::move(f)) {}
  Observable(PolynomialU f) : kind_(std::move(f)) {
    for (const auto& t : std::get<PolynomialU>(kind_).terms)
      if (t.e1 < 0 || t.e2 < 0 || t.e3 < 0)
        throw std::invalid_argument("negative exponent in polynomial observable");
  }
  Observable(GeneralSymbol f) : kind_(std::move(f)) {
    if (!std::get<GeneralSymbol>(kind_).fn) throw std::invalid_argument("empty symbol callable");
  }

  static Observable u1() { return LinearU{{1.0, 0.0, 0.0}, 0.0}; }
  static Observable u2() { return LinearU{{0.0, 1.0, 0.0}, 0.0}; }
  static Observable u3() { return LinearU{{0.0, 0.0, 1.0}, 0.0}; }
  static Observable constant(double c) { return LinearU{{0.0, 0.0, 0.0}, c}; }
  static Observable linear(double a1, double a2, double a3, double b) {
    return LinearU{{a1, a2, a3}, b};
  }

  const Kind& kind() const { return kind_; }
  bool is_linear() const { return std::holds_alternative<LinearU>(kind_); }
  bool is_polynomial() const { return std::holds_alternative<PolynomialU>(kind_); }
  bool exactly_integrable() const { return !std::holds_alternative<GeneralSymbol>(kind_); }

  double operator()(const ModelPoint& m) const {
    const auto u = m.sphere_coords();
    return std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearU>) {
            return f.a[0] * u[0] + f.a[1] * u[1] + f.a[2] * u[2] + f.b;
          } else if constexpr (std::is_same_v<T, PolynomialU>) {
            double s = 0.0;
            for (const auto& t : f.terms)
              s += t.coefficient * std::pow(u[0], t.e1) * std::pow(u[1], t.e2) *
                   std::pow(u[2], t.e3);
            return s;
          } else {
            return f.fn(m);
          }
        },
        kind_);
  }

  /// Largest azimuthal Fourier mode |d| of f(z e^{i theta}).
  int bandwidth() const {
    return std::visit(
        [](const auto& f) -> int {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearU>) {
            return (f.a[0] != 0.0 || f.a[1] != 0.0) ? 1 : 0;
          } else if constexpr (std::is_same_v<T, PolynomialU>) {
            int bw = 0;
            for (const auto& t : f.terms) bw = std::max(bw, t.e1 + t.e2);
            return bw;
          } else {
            return f.bandwidth;
          }
        },
        kind_);
  }

  /// f + c.
  Observable shifted(double c) const {
    return std::visit(
        [c](const auto& f) -> Observable {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearU>) {
            LinearU g = f;
            g.b += c;
            return g;
          } else if constexpr (std::is_same_v<T, PolynomialU>) {
            PolynomialU g = f;
            g.terms.push_back({c, 0, 0, 0});
            return g;
          } else {
            GeneralSymbol g = f;
            g.fn = [fn = f.fn, c](const ModelPoint& m) { return fn(m) + c; };
            g.name = f.name + "+shift";
            return g;
          }
        },
        kind_);
  }

 private:
  Kind kind_;
};

/// Reduced symbol of the Berezin-Toeplitz operator T_f at m, which is f(m).
inline double reduced_symbol(const Observable& f, const ModelPoint& m) { return f(m); }

/// Quasi-uniform sample of the sphere (Fibonacci lattice), n points.
inline std::vector<ModelPoint> fibonacci_sphere(int n) {
  std::vector<ModelPoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double u3 = -1.0 + (2.0 * i + 1.0) / n;
    pts.push_back(ModelPoint::from_latitude(u3, golden * i));
  }
  return pts;
}

/// Interval containing f(M).  Exact for linear symbols, sampled otherwise.
inline std::pair<double, double> symbol_range(const Observable& f) {
  if (const auto* lin = std::get_if<LinearU>(&f.kind())) {
    const double na = std::hypot(lin->a[0], lin->a[1], lin->a[2]);
    return {lin->b - na, lin->b + na};
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& m : fibonacci_sphere(10000)) {
    const double v = f(m);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // poles are not on the lattice
  for (const auto& m : {ModelPoint::south_pole(), ModelPoint::north_pole()}) {
    lo = std::min(lo, f(m));
    hi = std::max(hi, f(m));
  }
  return {lo - 1e-6, hi + 1e-6};
}

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

inline constexpr int kMaxDerivativeOrder = 4;

class UnsupportedOrder : public std::invalid_argument {
 public:
  explicit UnsupportedOrder(int order)
      : std::invalid_argument("derivative order " + std::to_string(order) +
                              " unsupported (max 4)") {}
};

/// sum_n c_n He_n(x) exp(-x^2/2) with x = (s - center) / width and He_n the
/// probabilists' Hermite polynomials.
struct GaussianHermite {
  double center = 0.0;
  double width = 1.0;
  std::vector<double> coefficients{1.0};
};

/// Smooth compactly supported exp(-1/(1-x^2)) on (lo, hi), times amplitude.
struct Bump {
  double lo = -1.0;
  double hi = 1.0;
  double amplitude = 1.0;
};

/// sum_n c_n s^n.  Not of rapid decrease; used for moment-type pairings only.
struct PolynomialChi {
  std::vector<double> coefficients;
};

namespace detail {

/// He_0..He_n at x.
inline std::vector<double> hermite_he(int n, double x) {
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  h[0] = 1.0;
  if (n >= 1) h[1] = x;
  for (int i = 2; i <= n; ++i) h[i] = x * h[i - 1] - (i - 1) * h[i - 2];
  return h;
}

/// Truncated Taylor series of order kMaxDerivativeOrder.
struct Jet {
  std::array<double, kMaxDerivativeOrder + 1> c{};

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= kMaxDerivativeOrder; ++i)
      for (int j = 0; i + j <= kMaxDerivativeOrder; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
};

inline Jet jet_reciprocal(const Jet& a) {
  Jet r;
  r.c[0] = 1.0 / a.c[0];
  for (int n = 1; n <= kMaxDerivativeOrder; ++n) {
    double s = 0.0;
    for (int i = 1; i <= n; ++i) s += a.c[i] * r.c[n - i];
    r.c[n] = -s / a.c[0];
  }
  return r;
}

inline Jet jet_exp(const Jet& a) {
  // r' = a' r
  Jet r;
  r.c[0] = std::exp(a.c[0]);
  for (int n = 1; n <= kMaxDerivativeOrder; ++n) {
    double s = 0.0;
    for (int i = 1; i <= n; ++i) s += i * a.c[i] * r.c[n - i];
    r.c[n] = s / n;
  }
  return r;
}

inline double component_eval(const GaussianHermite& g, double s, int order) {
  const double x = (s - g.center) / g.width;
  const int n = static_cast<int>(g.coefficients.size()) - 1;
  const auto he = hermite_he(n + order, x);
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) sum += g.coefficients[i] * he[i + order];
  // d/dx [He_n e^{-x^2/2}] = -He_{n+1} e^{-x^2/2}
  return sum * std::pow(-1.0 / g.width, order) * std::exp(-0.5 * x * x);
}

inline double component_eval(const Bump& b, double s, int order) {
  if (s <= b.lo || s >= b.hi) return 0.0;
  const double half = 0.5 * (b.hi - b.lo);
  const double x = (s - 0.5 * (b.hi + b.lo)) / half;
  Jet xj;
  xj.c[0] = x;
  xj.c[1] = 1.0;
  Jet one_minus_x2 = xj * xj;
  for (auto& v : one_minus_x2.c) v = -v;
  one_minus_x2.c[0] += 1.0;
  Jet g = jet_reciprocal(one_minus_x2);
  for (auto& v : g.c) v = -v;
  const Jet e = jet_exp(g);
  double factorial = 1.0;
  for (int i = 2; i <= order; ++i) factorial *= i;
  return b.amplitude * e.c[order] * factorial / std::pow(half, order);
}

inline double component_eval(const PolynomialChi& p, double s, int order) {
  double sum = 0.0;
  const int n = static_cast<int>(p.coefficients.size());
  for (int i = order; i < n; ++i) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= (i - j);
    sum += p.coefficients[i] * falling * std::pow(s, i - order);
  }
  return sum;
}

inline std::complex<double> component_fourier(const GaussianHermite& g, double xi) {
  // (2 pi)^{-1/2} int He_n(x) e^{-x^2/2} e^{-i x eta} dx = (-i eta)^n e^{-eta^2/2}
  const double eta = g.width * xi;
  std::complex<double> poly = 0.0;
  std::complex<double> power = 1.0;
  const std::complex<double> step(0.0, -eta);
  for (double c : g.coefficients) {
    poly += c * power;
    power *= step;
  }
  return g.width * std::polar(1.0, -g.center * xi) * poly * std::exp(-0.5 * eta * eta);
}

}  // namespace detail

class TestFunction {
 public:
  using Component = std::variant<GaussianHermite, Bump, PolynomialChi>;

  TestFunction() = default;
  TestFunction(GaussianHermite g) { add(std::move(g)); }
  TestFunction(Bump b) { add(b); }
  TestFunction(PolynomialChi p) { add(std::move(p)); }

  /// exp(-(s - center)^2 / (2 width^2)).
  static TestFunction gaussian(double center, double width) {
    return GaussianHermite{center, width, {1.0}};
  }
  static TestFunction hermite(double center, double width, std::vector<double> coefficients) {
    return GaussianHermite{center, width, std::move(coefficients)};
  }
  static TestFunction bump(double lo, double hi) { return Bump{lo, hi, 1.0}; }
  static TestFunction polynomial(std::vector<double> coefficients) {
    return PolynomialChi{std::move(coefficients)};
  }

  TestFunction& add(Component c) {
    std::visit(
        [](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, GaussianHermite>) {
            if (!(x.width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
            if (x.coefficients.empty())
              throw std::invalid_argument("hermite expansion needs a coefficient");
          } else if constexpr (std::is_same_v<T, Bump>) {
            if (!(x.hi > x.lo)) throw std::invalid_argument("bump support must be nonempty");
          }
        },
        c);
    components_.push_back(std::move(c));
    return *this;
  }

  const std::vector<Component>& components() const { return components_; }

  double operator()(double s) const { return eval(s, 0); }

  double eval(double s, int order) const {
    if (order < 0 || order > kMaxDerivativeOrder) throw UnsupportedOrder(order);
    double sum = 0.0;
    for (const auto& c : components_)
      sum += std::visit([&](const auto& x) { return detail::component_eval(x, s, order); }, c);
    return sum;
  }

  bool has_exact_fourier() const {
    if (components_.empty()) return false;
    return std::all_of(components_.begin(), components_.end(), [](const Component& c) {
      return std::holds_alternative<GaussianHermite>(c);
    });
  }

  /// chi_hat(xi) = (2 pi)^{-1/2} int chi(s) e^{-i xi s} ds.
  std::complex<double> fourier(double xi) const {
    if (!has_exact_fourier())
      throw std::invalid_argument("test function has no closed-form Fourier transform");
    std::complex<double> sum = 0.0;
    for (const auto& c : components_)
      sum += detail::component_fourier(std::get<GaussianHermite>(c), xi);
    return sum;
  }

  /// s -> chi(s - c).
  TestFunction translated(double c) const {
    TestFunction out;
    for (const auto& comp : components_) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            T y = x;
            if constexpr (std::is_same_v<T, GaussianHermite>) {
              y.center += c;
            } else if constexpr (std::is_same_v<T, Bump>) {
              y.lo += c;
              y.hi += c;
            } else {
              // p(s - c) = sum_n p_n sum_i C(n,i) s^i (-c)^{n-i}
              const std::size_t n = x.coefficients.size();
              std::vector<double> q(n, 0.0);
              for (std::size_t d = 0; d < n; ++d) {
                double binom = 1.0;
                for (std::size_t i = 0; i <= d; ++i) {
                  if (i > 0) binom = binom * static_cast<double>(d - i + 1) / static_cast<double>(i);
                  q[i] += x.coefficients[d] * binom * std::pow(-c, static_cast<double>(d - i));
                }
              }
              y.coefficients = std::move(q);
            }
            out.components_.push_back(std::move(y));
          },
          comp);
    }
    return out;
  }

  /// s -> chi(factor * s), factor > 0.
  TestFunction dilated(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("dilation factor must be positive");
    TestFunction out;
    for (const auto& comp : components_) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            T y = x;
            if constexpr (std::is_same_v<T, GaussianHermite>) {
              y.center /= factor;
              y.width /= factor;
            } else if constexpr (std::is_same_v<T, Bump>) {
              y.lo /= factor;
              y.hi /= factor;
            } else {
              for (std::size_t i = 0; i < y.coefficients.size(); ++i)
                y.coefficients[i] *= std::pow(factor, static_cast<double>(i));
            }
            out.components_.push_back(std::move(y));
          },
          comp);
    }
    return out;
  }

  TestFunction scaled(double alpha) const {
    TestFunction out;
    for (const auto& comp : components_) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            T y = x;
            if constexpr (std::is_same_v<T, Bump>) {
              y.amplitude *= alpha;
            } else {
              for (auto& v : y.coefficients) v *= alpha;
            }
            out.components_.push_back(std::move(y));
          },
          comp);
    }
    return out;
  }

  friend TestFunction operator+(TestFunction a, const TestFunction& b) {
    for (const auto& c : b.components_) a.components_.push_back(c);
    return a;
  }

 private:
  std::vector<Component> components_;
};

inline double test_eval(const TestFunction& chi, double s, int order) { return chi.eval(s, order); }

}  // namespace berezin

#endif  // BEREZIN_OBSERVABLES_HPP
