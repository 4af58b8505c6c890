#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "kwave/spectral.hpp"

using namespace kwave;

namespace {

// theta profile of sY_lm and its theta-derivative by complex step.
std::pair<double, double> swsh_with_derivative(int s, int m, int l, double th) {
  const double h = 1e-20;
  const auto col = swsh_column<std::complex<double>>(s, m, l, std::complex<double>(th, h));
  const auto v = col.back();
  return {v.real(), v.imag() / h};
}

// Coordinate edth (sign = +1) or edth' (sign = -1) on f(theta) e^{i m phi} of spin s.
double coord_edth(int s, int m, int l, double th, int sign) {
  const auto [f, df] = swsh_with_derivative(s, m, l, th);
  const double csc = 1.0 / std::sin(th), cot = std::cos(th) / std::sin(th);
  return (df - sign * (m * csc + s * cot) * f) / std::sqrt(2.0);
}

Eigen::VectorXcd random_coeffs(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXcd c(n);
  for (int i = 0; i < n; ++i) c[i] = cplx(N(rng), N(rng));
  return c;
}

}  // namespace

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto g = gauss_legendre(12);
  double sw = 0.0;
  for (double w : g.w) sw += w;
  EXPECT_NEAR(sw, 2.0, 1e-14);
  for (int p = 0; p <= 23; ++p) {
    double q = 0.0;
    for (int j = 0; j < 12; ++j) q += g.w[j] * std::pow(g.x[j], p);
    const double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
    EXPECT_NEAR(q, exact, 1e-14) << p;
  }
  for (int j = 1; j < 12; ++j) EXPECT_LT(g.x[j - 1], g.x[j]);
}

TEST(WignerD, RecurrenceMatchesExplicitSum) {
  const int pairs[][2] = {{0, 0}, {1, -2}, {-2, 2}, {3, 0}, {0, -1}, {2, 2}, {-3, 1}};
  for (auto [mp, m] : pairs) {
    for (double th : {0.05, 0.7, 1.5, 2.9}) {
      const auto col = wigner_d_column<double>(mp, m, 12, th);
      const int l0 = std::max(std::abs(mp), std::abs(m));
      // the alternating explicit sum itself loses digits to cancellation beyond l ~ 12
      for (int l = l0; l <= 12; ++l) {
        EXPECT_NEAR(col[l - l0], wigner_d_explicit(l, mp, m, th), 1e-12)
            << mp << " " << m << " " << l << " " << th;
      }
    }
  }
}

TEST(WignerD, HighDegreeMatchesLegendre) {
  for (double th : {0.05, 0.7, 1.5, 2.9}) {
    const auto d0 = wigner_d_column<double>(0, 0, 64, th);
    const auto d2 = wigner_d_column<double>(2, 0, 64, th);
    for (int l = 2; l <= 64; ++l) {
      EXPECT_NEAR(d0[l], std::legendre(l, std::cos(th)), 1e-13) << l;
      // d^l_{m0} = sqrt((l-m)!/(l+m)!) P_l^m (cos), P_l^m without the Condon-Shortley phase
      const double norm = std::sqrt(1.0 / ((l + 2.0) * (l + 1.0) * l * (l - 1.0)));
      EXPECT_NEAR(d2[l - 2], norm * std::assoc_legendre(l, 2, std::cos(th)), 1e-13) << l;
    }
  }
}

TEST(HarmonicBasis, GramIsIdentity) {
  for (int s : {-3, -2, 0, 1, 3}) {
    for (int m : {0, 2, -5}) {
      const HarmonicBasis b(s, m, 64);
      const Eigen::MatrixXd G = b.gram();
      const double err = (G - Eigen::MatrixXd::Identity(b.n_ell(), b.n_ell())).cwiseAbs().maxCoeff();
      EXPECT_LE(err, 1e-12) << s << " " << m;
    }
  }
}

TEST(HarmonicBasis, ConditionCondonShortley) {
  // (s=0) Y_11 = -sqrt(3/2) sin(theta), with the 4 pi normalization.
  const auto col = swsh_column<double>(0, 1, 1, 0.8);
  EXPECT_NEAR(col[0], -std::sqrt(1.5) * std::sin(0.8), 1e-15);
  const auto col0 = swsh_column<double>(0, 0, 1, 0.8);
  EXPECT_NEAR(col0[0], 1.0, 1e-15);
  EXPECT_NEAR(col0[1], std::sqrt(3.0) * std::cos(0.8), 1e-15);
}

TEST(HarmonicBasis, RejectsBadParameters) {
  EXPECT_THROW(HarmonicBasis(4, 0, 8), std::invalid_argument);
  EXPECT_THROW(HarmonicBasis(2, 3, 2), std::invalid_argument);
  const HarmonicBasis b(0, 0, 4);
  EXPECT_THROW(b.analyze(Eigen::VectorXcd::Zero(3)), std::invalid_argument);
}

TEST(Transforms, AnalyzeSingleHarmonic) {
  const HarmonicBasis b(-2, 1, 10);
  for (int l = b.lmin(); l <= b.lmax(); ++l) {
    Eigen::VectorXcd samples(b.n_theta());
    for (int j = 0; j < b.n_theta(); ++j) samples[j] = b.values()(j, l - b.lmin());
    const ModalField f = b.analyze(samples);
    for (int k = 0; k < f.size(); ++k) {
      const double expect = (k == l - b.lmin()) ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(f.c[k] - expect), 0.0, 1e-12);
    }
  }
  const ModalField z = b.analyze(Eigen::VectorXcd::Zero(b.n_theta()));
  EXPECT_EQ(z.c.norm(), 0.0);
}

TEST(Transforms, RoundTripAndPlancherel) {
  std::mt19937_64 rng(3);
  for (int s = -3; s <= 3; ++s) {
    const HarmonicBasis b(s, 1, 24);
    ModalField f(s, 1, 24);
    f.c = random_coeffs(f.size(), rng);
    const Eigen::VectorXcd x = b.synthesize(f);
    const ModalField g = b.analyze(x);
    EXPECT_LE((g.c - f.c).cwiseAbs().maxCoeff(), 1e-11);
    const Eigen::VectorXcd y = b.synthesize(g);
    EXPECT_LE((y - x).cwiseAbs().maxCoeff(), 1e-11);
    // integral of |phi|^2 = 2 pi * sum w_j |phi_j|^2 * 2, weights integrate dOmega/(4 pi)
    double q = 0.0;
    for (int j = 0; j < b.n_theta(); ++j) q += b.weights()[j] * std::norm(x[j]);
    EXPECT_NEAR(4.0 * M_PI * q / f.norm2(), 1.0, 1e-11);
  }
}

TEST(Ladder, MatchesCoordinateOperators) {
  for (int s = -3; s <= 3; ++s) {
    for (int m : {0, 1, -2}) {
      for (int l = degree_min(s, m); l <= 9; ++l) {
        for (double th : {0.3, 1.2, 2.5}) {
          if (s + 1 <= 3) {
            const double up = coord_edth(s, m, l, th, +1);
            const double expect =
                l >= degree_min(s + 1, m) ? hedt_factor(s, l) * swsh_column<double>(s + 1, m, l, th).back() : 0.0;
            EXPECT_NEAR(up, expect, 1e-9) << s << " " << m << " " << l;
          }
          if (s - 1 >= -3) {
            const double dn = coord_edth(s, m, l, th, -1);
            const double expect =
                l >= degree_min(s - 1, m) ? hedtp_factor(s, l) * swsh_column<double>(s - 1, m, l, th).back() : 0.0;
            EXPECT_NEAR(dn, expect, 1e-9) << s << " " << m << " " << l;
          }
        }
      }
    }
  }
}

// Acceptance 3: the norm ratio for the coordinate edth, by quadrature.
TEST(Ladder, EigenvalueRatioByQuadrature) {
  const auto g = gauss_legendre(40);
  double worst = 0.0;
  for (int s = -3; s <= 3; ++s) {
    for (int l = std::abs(s); l <= 16; ++l) {
      const int m = 0;
      double num = 0.0, den = 0.0;
      for (int j = 0; j < 40; ++j) {
        const double th = std::acos(g.x[j]);
        const double e = coord_edth(s, m, l, th, +1);
        const double f = swsh_column<double>(s, m, l, th).back();
        num += g.w[j] * e * e;
        den += g.w[j] * f * f;
      }
      const double expect = 0.5 * (l + s + 1) * (l - s);
      worst = std::max(worst, std::abs(num / den - expect));
    }
  }
  EXPECT_LE(worst, 1e-11);
}

TEST(Ladder, Examples) {
  ModalField f(-2, 0, 6);
  f.c[0] = 1.0;  // (-2)Y_20
  const ModalField e = apply_hedt(f);
  EXPECT_NEAR(e.norm2() / f.norm2(), 2.0, 1e-14);
  EXPECT_EQ(apply_hedtp(f).c.norm(), 0.0);
  EXPECT_NEAR(coord_edth(-2, 0, 2, 0.9, -1), 0.0, 1e-12);
  EXPECT_NEAR(hedt4_ladder(2), 6.0, 1e-12);
  EXPECT_NEAR(hedt4_ladder(3), 30.0, 1e-12);
  ModalField x = f;
  for (int i = 0; i < 4; ++i) x = apply_hedt(x);
  EXPECT_EQ(x.s, 2);
  EXPECT_NEAR(std::abs(x.c[0] - 6.0), 0.0, 1e-10);
  ModalField y(-2, 1, 8);
  y.c[1] = 1.0;  // l = 3
  for (int i = 0; i < 4; ++i) y = apply_hedt(y);
  EXPECT_NEAR(std::abs(y.c[1] - 30.0), 0.0, 1e-10);
}

TEST(Ladder, CommutatorAndNormRelation) {
  std::mt19937_64 rng(9);
  for (int s = -2; s <= 2; ++s) {
    ModalField f(s, 1, 20);
    f.c = random_coeffs(f.size(), rng);
    const ModalField a = apply_hedt(apply_hedtp(f));
    const ModalField b = apply_hedtp(apply_hedt(f));
    EXPECT_LE((a.c - b.c + s * f.c).cwiseAbs().maxCoeff(), 1e-11 * f.c.cwiseAbs().maxCoeff() * 20);
    EXPECT_NEAR(apply_hedt(f).norm2(), apply_hedtp(f).norm2() - s * f.norm2(),
                1e-11 * apply_hedt(f).norm2());
  }
}

TEST(Ladder, LowerBoundsAndAzimuthalControl) {
  std::mt19937_64 rng(21);
  for (int s = -3; s <= 3; ++s) {
    for (int m : {0, 2, -3}) {
      ModalField f(s, m, 15);
      f.c = random_coeffs(f.size(), rng);
      const double n = f.norm2();
      EXPECT_GE(apply_hedt(f).norm2(), 0.5 * (std::abs(s) - s) * n - 1e-10 * n);
      EXPECT_GE(apply_hedtp(f).norm2(), 0.5 * (std::abs(s) + s) * n - 1e-10 * n);
      EXPECT_LE(0.5 * m * m * n, apply_hedt(f).norm2() + 0.5 * s * s * n + 1e-10 * n);
    }
  }
}

TEST(SRing, Eigenvalues) {
  EXPECT_EQ(HarmonicBasis(0, 0, 3).s_ring_eigen()[1], -2.0);
  EXPECT_EQ(HarmonicBasis(-2, 0, 3).s_ring_eigen()[0], 0.0);
  EXPECT_EQ(HarmonicBasis(2, 0, 3).s_ring_eigen()[0], -4.0);
  // oracle: 2 edth edth' by the coordinate formulas on sampled harmonics
  for (int s : {-2, 2}) {
    const double th = 1.1;
    const double f = swsh_column<double>(s, 0, 2, th).back();
    const double down = hedtp_factor(s, 2);
    const double up_again = std::abs(s - 1) <= 2 ? coord_edth(s - 1, 0, 2, th, +1) : 0.0;
    EXPECT_NEAR(2.0 * down * up_again, s_ring_value(s, 2) * f, 1e-9);
  }
}

TEST(Couplings, CosAndSin2) {
  const HarmonicBasis b(0, 0, 12);
  const Eigen::MatrixXd C = b.cos_matrix();
  EXPECT_NEAR(C(1, 0), 1.0 / std::sqrt(3.0), 1e-14);
  const Eigen::MatrixXd S = b.sin2_matrix();
  for (int i = 0; i < b.n_ell(); ++i)
    for (int j = 0; j < b.n_ell(); ++j) {
      if (std::abs(i - j) > 1) EXPECT_LE(std::abs(C(i, j)), 1e-13);
      if (std::abs(i - j) > 2) EXPECT_LE(std::abs(S(i, j)), 1e-13);
      EXPECT_NEAR(C(i, j), C(j, i), 1e-14);
      EXPECT_NEAR(S(i, j), S(j, i), 1e-14);
    }
  // pointwise product on band-limited data away from the band edge
  std::mt19937_64 rng(1);
  for (int s : {-2, 0, 2}) {
    const HarmonicBasis bs(s, 1, 16);
    ModalField f(s, 1, 16);
    f.c.head(f.size() - 2) = random_coeffs(f.size() - 2, rng);
    ModalField g = f;
    g.c = bs.sin2_matrix().cast<cplx>() * f.c;
    const Eigen::VectorXcd lhs = bs.synthesize(g);
    const Eigen::VectorXcd x = bs.synthesize(f);
    for (int j = 0; j < bs.n_theta(); ++j) {
      const double s2 = 1.0 - bs.cos_theta()[j] * bs.cos_theta()[j];
      EXPECT_NEAR(std::abs(lhs[j] - s2 * x[j]), 0.0, 1e-10);
    }
  }
}
