#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "berezin/asymptotics.hpp"
#include "berezin/eigensolver.hpp"
#include "berezin/spectral_measures.hpp"
#include "berezin/toeplitz.hpp"

namespace {

using berezin::Level;
using berezin::ModelPoint;
using berezin::Observable;
using berezin::SpectralData;
using berezin::TestFunction;
using std::numbers::pi;

SpectralData spectrum(const Observable& f, int k) { return berezin::eigh(berezin::assemble_closed(Level(k), f)); }

TEST(Eigh, ExactSpectraAtLevelTwo) {
  const auto s3 = spectrum(Observable::u3(), 2);
  ASSERT_EQ(s3.dim(), 3);
  EXPECT_NEAR(s3.eigenvalues[0], -0.5, 1e-15);
  EXPECT_NEAR(s3.eigenvalues[1], 0.0, 1e-15);
  EXPECT_NEAR(s3.eigenvalues[2], 0.5, 1e-15);
  // tridiagonal with off-diagonal b has eigenvalues 2 b cos(m pi / 4), m = 1..3
  const auto s1 = spectrum(Observable::u1(), 2);
  const double b = std::sqrt(2.0) / 4.0;
  EXPECT_NEAR(s1.eigenvalues[0], 2.0 * b * std::cos(3.0 * pi / 4.0), 1e-14);
  EXPECT_NEAR(s1.eigenvalues[1], 2.0 * b * std::cos(2.0 * pi / 4.0), 1e-14);
  EXPECT_NEAR(s1.eigenvalues[2], 2.0 * b * std::cos(pi / 4.0), 1e-14);
}

TEST(Eigh, ScalarMatrixKeepsIdentityBasis) {
  const auto s = spectrum(Observable::constant(0.7), 6);
  for (int j = 0; j <= 6; ++j) {
    EXPECT_EQ(s.eigenvalues[j], 0.7);
    for (int i = 0; i <= 6; ++i) EXPECT_EQ(s.v(i, j), i == j ? berezin::complex(1.0) : berezin::complex(0.0));
  }
}

TEST(Eigh, ResidualAndOrthonormality) {
  const berezin::PolynomialU poly{{{1.0, 1, 0, 1}, {0.4, 0, 1, 0}, {-0.3, 2, 0, 0}}};
  for (const Observable& f : {Observable::u1(), Observable::u2(), Observable::linear(0.5, 0.2, -0.2, 0.3),
                              Observable(poly)}) {
    for (int k : {1, 9, 40}) {
      const auto t = berezin::assemble_closed(Level(k), f);
      const auto s = berezin::eigh(t);
      const auto chk = berezin::check_spectral(t, s);
      EXPECT_LT(chk.residual, 1e-10 * (1.0 + t.frobenius_norm()));
      EXPECT_LT(chk.orthonormality, 1e-10);
      EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    }
  }
}

TEST(Eigh, DeterministicAndPhaseNormalized) {
  const auto t = berezin::assemble_closed(Level(12), Observable::linear(0.3, 0.6, 0.1, 0.0));
  const auto a = berezin::eigh(t);
  const auto b = berezin::eigh(t);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.vectors, b.vectors);
  for (int c = 0; c < a.dim(); ++c) {
    int lead = 0;
    while (std::abs(a.v(lead, c)) <= 1e-8) ++lead;
    EXPECT_EQ(a.v(lead, c).imag(), 0.0);
    EXPECT_GT(a.v(lead, c).real(), 0.0);
  }
}

TEST(Eigh, SpectrumInsideSymbolRange) {
  const berezin::PolynomialU poly{{{1.0, 0, 0, 2}, {-0.5, 1, 1, 0}}};
  for (const Observable& f : {Observable::u1(), Observable::u3(), Observable::linear(0.5, 0.0, -0.2, 0.3),
                              Observable(poly)}) {
    const auto [lo, hi] = berezin::symbol_range(f);
    for (int k : {1, 8, 33, 128}) {
      const auto s = spectrum(f, k);
      EXPECT_GE(s.eigenvalues.front(), lo - 1e-9);
      EXPECT_LE(s.eigenvalues.back(), hi + 1e-9);
    }
  }
}

TEST(Eigh, RotationEquivarianceU1U3) {
  for (int k : {5, 32, 77}) {
    const auto a = spectrum(Observable::u1(), k);
    const auto b = spectrum(Observable::u3(), k);
    for (int j = 0; j <= k; ++j) EXPECT_NEAR(a.eigenvalues[j], b.eigenvalues[j], 1e-9);
  }
}

TEST(LocalMeasure, Examples) {
  const auto s = spectrum(Observable::u3(), 2);
  const auto mu = berezin::local_measure(s, ModelPoint::south_pole());
  EXPECT_NEAR(mu.weights[0], 3.0 / pi, 1e-14);
  EXPECT_EQ(mu.weights[1], 0.0);
  EXPECT_EQ(mu.weights[2], 0.0);
  EXPECT_NEAR(berezin::pair(mu, TestFunction::gaussian(0.0, 1.0)), 3.0 / pi * std::exp(-0.125), 1e-14);

  const auto c = spectrum(Observable::constant(-0.4), 9);
  const auto mc = berezin::local_measure(c, ModelPoint::from_z({0.3, 0.8}));
  EXPECT_NEAR(mc.total_mass(), 10.0 / pi, 1e-13);
  for (double a : mc.atoms) EXPECT_EQ(a, -0.4);
}

TEST(LocalMeasure, MassIsBergmanDensity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int k : {1, 10, 50}) {
    const auto s = spectrum(Observable::linear(0.4, -0.3, 0.5, 0.0), k);
    for (int i = 0; i < 10; ++i) {
      const auto m = ModelPoint::from_z({d(rng), d(rng)});
      EXPECT_NEAR(berezin::local_measure(s, m).total_mass(), berezin::bergman_diagonal(k, m), 1e-10);
    }
  }
}

TEST(LocalMeasure, IndependentOfEigenbasisChoiceInDegenerateBlocks) {
  // rotate each degenerate eigenspace by a random unitary
  const int k = 6;
  const berezin::PolynomialU poly{{{1.0, 0, 0, 2}}};  // u3^2: pairs j and k-j are degenerate
  const auto t = berezin::assemble_closed(Level(k), Observable(poly));
  auto s = berezin::eigh(t);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  auto rotated = s;
  for (int start = 0; start < s.dim();) {
    int end = start + 1;
    while (end < s.dim() && std::abs(s.eigenvalues[end] - s.eigenvalues[start]) < 1e-9) ++end;
    const int b = end - start;
    if (b > 1) {
      // random unitary via Gram-Schmidt on a complex Gaussian matrix
      std::vector<berezin::complex> u(static_cast<std::size_t>(b * b));
      for (auto& x : u) x = {g(rng), g(rng)};
      for (int c = 0; c < b; ++c) {
        for (int p = 0; p < c; ++p) {
          berezin::complex dot = 0.0;
          for (int r = 0; r < b; ++r) dot += std::conj(u[r * b + p]) * u[r * b + c];
          for (int r = 0; r < b; ++r) u[r * b + c] -= dot * u[r * b + p];
        }
        double nrm = 0.0;
        for (int r = 0; r < b; ++r) nrm += std::norm(u[r * b + c]);
        for (int r = 0; r < b; ++r) u[r * b + c] /= std::sqrt(nrm);
      }
      for (int row = 0; row < s.dim(); ++row)
        for (int c = 0; c < b; ++c) {
          berezin::complex acc = 0.0;
          for (int r = 0; r < b; ++r) acc += s.v(row, start + r) * u[r * b + c];
          rotated.v(row, start + c) = acc;
        }
    }
    start = end;
  }
  EXPECT_LT(berezin::check_spectral(t, rotated).residual, 1e-12);
  const auto chi = TestFunction::gaussian(0.2, 0.5);
  for (const auto& m : berezin::default_point_grid()) {
    EXPECT_NEAR(berezin::pair(berezin::local_measure(s, m), chi), berezin::pair(berezin::local_measure(rotated, m), chi),
                1e-10);
  }
}

TEST(GlobalMeasure, Examples) {
  const auto s = spectrum(Observable::u3(), 2);
  const auto g = berezin::global_measure(s);
  EXPECT_EQ(g.total_mass(), 3.0);
  EXPECT_EQ(g.weights, std::vector<double>(3, 1.0));
  EXPECT_NEAR(berezin::pair(g, TestFunction::polynomial({0.0, 1.0})), 0.0, 1e-15);
  EXPECT_EQ(berezin::global_measure(spectrum(Observable::u1(), 17)).total_mass(), 18.0);
}

TEST(GlobalMeasure, IntegralOfLocalMeasures) {
  const int k = 12;
  const auto s = spectrum(Observable::linear(0.6, 0.0, 0.5, 0.1), k);
  std::vector<double> integrated(static_cast<std::size_t>(k) + 1, 0.0);
  // sphere integral of each local weight; d mu has total mass pi and the
  // eigensections are normalized, so each integrates to 1
  for (int j = 0; j <= k; ++j) {
    integrated[j] = berezin::sphere_integral(
        [&](double u3, double phi) { return berezin::local_measure(s, ModelPoint::from_latitude(u3, phi)).weights[j]; },
        40, 40);
  }
  for (double w : integrated) EXPECT_NEAR(w, 1.0, 1e-6);
  const auto chi = TestFunction::gaussian(0.1, 0.4);
  const double local_integral = berezin::sphere_integral(
      [&](double u3, double phi) { return berezin::pair(berezin::local_measure(s, ModelPoint::from_latitude(u3, phi)), chi); },
      40, 40);
  EXPECT_NEAR(local_integral, berezin::pair(berezin::global_measure(s), chi), 1e-6);
}

TEST(Pair, EmptyMeasure) { EXPECT_EQ(berezin::pair(berezin::PointMeasure{}, TestFunction::gaussian(0, 1)), 0.0); }

TEST(PairShifted, AgreesWithTranslatedTestFunction) {
  const auto chi = TestFunction::gaussian(0.3, 0.6);
  const auto m = ModelPoint::from_latitude(0.2, 1.0);
  const auto t = berezin::assemble_closed(Level(4), Observable::u3());
  for (double c : {2.0, 0.0, -1.0}) {
    const auto base = berezin::local_measure(berezin::eigh(t), m);
    const auto shifted = berezin::local_measure(berezin::eigh(berezin::shift_operator(t, c)), m);
    const auto [lhs, rhs] = berezin::pair_shifted(shifted, base, chi, c);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
  // shifting by c and back by -c gives the original pairing
  const auto s = berezin::eigh(t);
  const auto there = berezin::eigh(berezin::shift_operator(berezin::shift_operator(t, 1.5), -1.5));
  EXPECT_NEAR(berezin::pair(berezin::local_measure(there, m), chi), berezin::pair(berezin::local_measure(s, m), chi),
              1e-14);
}

TEST(PairViaFourier, SingleAtomIsFourierInversion) {
  berezin::PointMeasure mu{{0.37}, {2.5}, berezin::PointMeasure::Kind::Global, std::nullopt};
  for (const auto& chi : {TestFunction::gaussian(0.0, 1.0), TestFunction::hermite(0.2, 0.4, {1.0, 0.3, -0.1})}) {
    for (int k : {1, 4, 30}) EXPECT_NEAR(berezin::pair_via_fourier(mu, k, chi), 2.5 * chi(0.37), 1e-10);
  }
}

TEST(PairViaFourier, MatchesDirectPairing) {
  const auto s = spectrum(Observable::u3(), 8);
  const auto m = ModelPoint::south_pole();
  const auto chi = TestFunction::gaussian(0.0, 1.0);
  EXPECT_NEAR(berezin::pair_via_fourier(s, m, chi), berezin::pair(berezin::local_measure(s, m), chi), 1e-6);
  // dilation chi(./sigma) for sigma in {1, 2}
  const auto s2 = spectrum(Observable::linear(0.3, 0.4, 0.2, 0.0), 16);
  const auto m2 = ModelPoint::from_latitude(-0.3, 2.0);
  for (double sigma : {1.0, 2.0}) {
    const auto chis = TestFunction::gaussian(0.1, 0.5).dilated(1.0 / sigma);
    EXPECT_NEAR(berezin::pair_via_fourier(s2, m2, chis), berezin::pair(berezin::local_measure(s2, m2), chis), 1e-10);
  }
  EXPECT_THROW(berezin::pair_via_fourier(s, m, TestFunction::bump(-1.0, 1.0)), std::invalid_argument);
}

TEST(ScaleToPrime, Examples) {
  const auto s = berezin::scale_to_prime(spectrum(Observable::u3(), 2));
  EXPECT_NEAR(s.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[1], 0.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[2], 1.0, 1e-15);
  const auto z = berezin::scale_to_prime(spectrum(Observable::u1(), 0));
  EXPECT_EQ(z.eigenvalues, std::vector<double>{0.0});

  const int k = 10;
  const auto base = spectrum(Observable::linear(0.2, 0.0, 0.7, 0.0), k);
  const auto prime = berezin::scale_to_prime(base);
  EXPECT_EQ(prime.vectors, base.vectors);
  const auto chi = TestFunction::gaussian(1.0, 3.0);
  const auto m = ModelPoint::from_latitude(0.1, 0.4);
  EXPECT_NEAR(berezin::pair(berezin::local_measure(prime, m), chi),
              berezin::pair(berezin::local_measure(base, m), chi.dilated(k)), 1e-13);
}

}  // namespace
