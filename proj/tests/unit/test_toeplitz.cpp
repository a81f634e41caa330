#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "berezin/cp1_model.hpp"
#include "berezin/toeplitz.hpp"

namespace {

using berezin::HermitianMatrix;
using berezin::Level;
using berezin::ModelPoint;
using berezin::Observable;
using std::numbers::pi;

double max_entry_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
  double d = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

// <f shat_j, shat_i> by brute-force product quadrature in (u3, phi): composite
// Simpson in u3 and the trapezoid rule in phi, using only pointwise section
// values.  Independent of both assembly paths.
berezin::complex brute_force_entry(int k, const Observable& f, int i, int j) {
  const int nu = 4000;
  const int nphi = 64;
  berezin::complex total = 0.0;
  for (int a = 0; a <= nu; ++a) {
    const double u3 = -1.0 + 2.0 * a / nu;
    const double w = (a == 0 || a == nu) ? 1.0 : (a % 2 ? 4.0 : 2.0);
    berezin::complex ring = 0.0;
    for (int b = 0; b < nphi; ++b) {
      const auto m = ModelPoint::from_latitude(u3, 2.0 * pi * b / nphi);
      // |z|^2 = (1 + u3)/(1 - u3) and arg z = phi, written so both poles are finite
      const double phi = 2.0 * pi * b / nphi;
      const auto section = [&](int s) {
        const double mag = std::pow(0.5 * (1.0 + u3), 0.5 * s) * std::pow(0.5 * (1.0 - u3), 0.5 * (k - s)) /
                           std::sqrt(berezin::basis_norm(k, s));
        return std::polar(mag, s * phi);
      };
      const auto sj = section(j);
      const auto si = section(i);
      ring += f(m) * sj * std::conj(si);
    }
    total += w * ring;
  }
  // d mu = (1/2) du dphi with u = (1 + u3)/2, i.e. (1/4) du3 dphi
  return total * (2.0 / nu / 3.0) * (2.0 * pi / nphi) * 0.25;
}

TEST(AssembleClosed, ExamplesAtLevelTwo) {
  const auto t3 = berezin::assemble_closed(Level(2), Observable::u3());
  EXPECT_NEAR(t3(0, 0).real(), -0.5, 1e-15);
  EXPECT_NEAR(t3(1, 1).real(), 0.0, 1e-15);
  EXPECT_NEAR(t3(2, 2).real(), 0.5, 1e-15);
  EXPECT_EQ(t3(0, 1), 0.0);

  const auto t1 = berezin::assemble_closed(Level(2), Observable::u1());
  EXPECT_NEAR(t1(1, 0).real(), std::sqrt(2.0) / 4.0, 1e-15);
  EXPECT_NEAR(t1(2, 1).real(), std::sqrt(2.0) / 4.0, 1e-15);
  EXPECT_NEAR(t1(0, 1).real(), std::sqrt(2.0) / 4.0, 1e-15);
  EXPECT_EQ(t1(0, 0), 0.0);
  EXPECT_EQ(t1(0, 2), 0.0);

  const berezin::PolynomialU sq{{{1.0, 0, 0, 2}}};
  const auto t33 = berezin::assemble_closed(Level(2), Observable(sq));
  EXPECT_NEAR(t33(1, 1).real(), 0.2, 1e-14);
  for (int k : {2, 5, 9}) {
    const auto t = berezin::assemble_closed(Level(k), Observable(sq));
    for (int j = 0; j <= k; ++j) {
      const double expected = ((j + 1.0) * (j + 2.0) - 2.0 * (j + 1.0) * (k + 1.0 - j) +
                               (k + 1.0 - j) * (k + 2.0 - j)) / ((k + 2.0) * (k + 3.0));
      EXPECT_NEAR(t(j, j).real(), expected, 1e-13);
    }
  }
}

TEST(AssembleClosed, ConstantIsScalar) {
  const auto t = berezin::assemble_closed(Level(7), Observable::constant(1.75));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_EQ(t(i, j), i == j ? berezin::complex(1.75) : berezin::complex(0.0));
}

TEST(AssembleClosed, U2IsImaginaryBand) {
  const auto t = berezin::assemble_closed(Level(6), Observable::u2());
  for (int j = 0; j < 6; ++j) {
    const double band = std::sqrt((j + 1.0) * (6.0 - j)) / 8.0;
    EXPECT_NEAR(t(j + 1, j).imag(), -band, 1e-15);
    EXPECT_NEAR(t(j, j + 1).imag(), band, 1e-15);
    EXPECT_EQ(t(j + 1, j).real(), 0.0);
  }
}

TEST(AssembleClosed, PolynomialPathReproducesLinearFormulas) {
  const berezin::PolynomialU lin{{{0.5, 1, 0, 0}, {-0.3, 0, 1, 0}, {0.7, 0, 0, 1}, {0.1, 0, 0, 0}}};
  for (int k : {1, 4, 30}) {
    const auto a = berezin::assemble_closed(Level(k), Observable(lin));
    const auto b = berezin::assemble_closed(Level(k), Observable::linear(0.5, -0.3, 0.7, 0.1));
    EXPECT_LT(max_entry_diff(a, b), 1e-13) << k;
  }
}

TEST(AssembleClosed, MatchesBruteForceQuadrature) {
  const berezin::PolynomialU poly{{{1.0, 2, 0, 0}, {0.5, 1, 1, 1}, {-0.4, 0, 0, 3}, {0.2, 0, 2, 0}}};
  const Observable f(poly);
  const int k = 4;
  const auto t = berezin::assemble_closed(Level(k), f);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) EXPECT_NEAR(std::abs(t(i, j) - brute_force_entry(k, f, i, j)), 0.0, 1e-9);
}

TEST(AssembleClosed, RejectsGeneralSymbols) {
  const berezin::GeneralSymbol g{[](const ModelPoint& m) { return std::exp(m.sphere_coords()[2]); }};
  EXPECT_THROW(berezin::assemble_closed(Level(3), Observable(g)), berezin::UnsupportedClass);
}

TEST(QuadratureScheme, IntegratesBetaFamily) {
  for (int k : {0, 3, 16, 64}) {
    const auto scheme = berezin::QuadratureScheme::for_level(k, 2);
    const auto rule = berezin::gauss_legendre_unit(scheme.radial_order);
    for (int j = 0; j <= k; ++j) {
      // int_0^inf t^j / (1+t)^{k+2} dt = B(j+1, k+1-j) = int_0^1 u^j (1-u)^{k-j} du
      double q = 0.0;
      for (std::size_t r = 0; r < rule.nodes.size(); ++r)
        q += rule.weights[r] * std::pow(rule.nodes[r], j) * std::pow(1.0 - rule.nodes[r], k - j);
      const double exact = berezin::basis_norm(k, j) / pi;
      EXPECT_NEAR(q / exact, 1.0, 1e-12) << k << "," << j;
    }
  }
}

TEST(AssembleQuadrature, MatchesClosedForm) {
  const berezin::PolynomialU sq{{{1.0, 0, 0, 2}}};
  for (const Observable& f : {Observable::u3(), Observable::u1(), Observable::u2(), Observable(sq),
                              Observable::linear(0.5, 0.0, -0.2, 0.3)}) {
    const auto q = berezin::assemble_quadrature(Level(8), f);
    const auto c = berezin::assemble_closed(Level(8), f);
    EXPECT_LT(max_entry_diff(q, c), 1e-10);
    EXPECT_FALSE(q.provenance().accuracy_warning);
    EXPECT_EQ(q.provenance().kind, berezin::Provenance::Kind::Quadrature);
  }
  const auto one = berezin::assemble_quadrature(Level(8), Observable::constant(1.0));
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) EXPECT_NEAR(std::abs(one(i, j) - (i == j ? 1.0 : 0.0)), 0.0, 1e-12);
}

TEST(AssembleQuadrature, GramMatrixIsIdentity) {
  for (int k : {1, 16, 64}) {
    const auto g = berezin::assemble_quadrature(Level(k), Observable::constant(1.0));
    double d = 0.0;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
    EXPECT_LT(d, 1e-10) << k;
  }
}

TEST(AssembleQuadrature, GeneralSymbolIsHermitianAndWarnsWhenUnderResolved) {
  const berezin::GeneralSymbol g{[](const ModelPoint& m) {
                                   const auto u = m.sphere_coords();
                                   return std::exp(u[0]) * std::cos(u[1]) + u[2];
                                 },
                                 "smooth", 12};
  const Observable f(g);
  const auto t = berezin::assemble_quadrature(Level(10), f);
  EXPECT_LT(t.hermiticity_defect(), 1e-15);
  EXPECT_LT(t.provenance().presymmetrization_defect, 1e-12);
  EXPECT_FALSE(t.provenance().accuracy_warning);
  const auto coarse = berezin::assemble_quadrature(Level(10), f, {6, 9, 12});
  EXPECT_TRUE(coarse.provenance().accuracy_warning);
}

TEST(AssembleQuadrature, NonFiniteSymbolIsAnError) {
  const berezin::GeneralSymbol g{[](const ModelPoint& m) { return m.sphere_coords()[2] > 0.5 ? NAN : 0.0; }};
  EXPECT_THROW(berezin::assemble_quadrature(Level(4), Observable(g)), berezin::AssemblyError);
}

TEST(Assembly, Linearity) {
  const auto f = Observable::linear(0.2, -0.4, 0.9, 0.0);
  const auto g = Observable::linear(-0.6, 0.1, 0.3, 1.5);
  const double alpha = 1.3, beta = -0.7;
  const auto combo = Observable::linear(alpha * 0.2 + beta * -0.6, alpha * -0.4 + beta * 0.1,
                                        alpha * 0.9 + beta * 0.3, beta * 1.5);
  for (int k : {3, 20, 64}) {
    const auto lhs = berezin::assemble_closed(Level(k), combo);
    const auto rhs = alpha * berezin::assemble_closed(Level(k), f) + beta * berezin::assemble_closed(Level(k), g);
    EXPECT_LT(max_entry_diff(lhs, rhs), 1e-11);
    const auto lq = berezin::assemble_quadrature(Level(k), combo);
    const auto rq =
        alpha * berezin::assemble_quadrature(Level(k), f) + beta * berezin::assemble_quadrature(Level(k), g);
    EXPECT_LT(max_entry_diff(lq, rq), 1e-11);
  }
}

TEST(Assembly, QuantizationIsNotMultiplicative) {
  const auto t3 = berezin::assemble_closed(Level(2), Observable::u3());
  const berezin::PolynomialU sq{{{1.0, 0, 0, 2}}};
  const auto t33 = berezin::assemble_closed(Level(2), Observable(sq));
  const double squared_middle = std::norm(t3(1, 1));
  EXPECT_NEAR(t33(1, 1).real(), 0.2, 1e-14);
  EXPECT_EQ(squared_middle, 0.0);
}

TEST(ShiftOperator, Examples) {
  const auto t = berezin::assemble_closed(Level(2), Observable::u3());
  const auto s = berezin::shift_operator(t, 1.0);
  EXPECT_NEAR(s(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(s(1, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(s(2, 2).real(), 1.5, 1e-15);
  EXPECT_EQ(s.provenance().kind, t.provenance().kind);
  const auto z = berezin::shift_operator(t, 0.0);
  EXPECT_EQ(z.data(), t.data());
}

}  // namespace
