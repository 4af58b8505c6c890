#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "kwave/background.hpp"

using namespace kwave;

namespace {

constexpr double kRt2 = 1.4142135623730951;

// Covariant metric by direct transcription, used with finite differences below.
Matrix4 g_lower(double M, double a, double r, double th) {
  return metric_lower_t<double>(M, a, r, th);
}

// rho' = mbar^a m^b nabla_b n_a, with Christoffels from central differences of g_ab.
cplx rho_prime_fd(double M, double a, double r, double th) {
  const double hr = 1e-5, ht = 1e-5;
  const Matrix4 g = g_lower(M, a, r, th);
  Matrix4 dg[4]{};
  const Matrix4 gpr = g_lower(M, a, r + hr, th), gmr = g_lower(M, a, r - hr, th);
  const Matrix4 gpt = g_lower(M, a, r, th + ht), gmt = g_lower(M, a, r, th - ht);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      dg[1][i][j] = (gpr[i][j] - gmr[i][j]) / (2 * hr);
      dg[2][i][j] = (gpt[i][j] - gmt[i][j]) / (2 * ht);
    }
  // n^a = -(1/sqrt2) d_r, n_a = g_ab n^b; its derivative follows from dg.
  double n_low[4], dn_low[4][4]{};
  for (int a_ = 0; a_ < 4; ++a_) {
    n_low[a_] = -g[a_][1] / kRt2;
    for (int b = 0; b < 4; ++b) dn_low[b][a_] = -dg[b][a_][1] / kRt2;
  }
  // Gamma^c_{ba} n_c = (1/2) n^d (d_b g_da + d_a g_db - d_d g_ba) with n^d raised.
  double nup[4] = {0, -1 / kRt2, 0, 0};
  double cov[4][4];
  for (int b = 0; b < 4; ++b)
    for (int a_ = 0; a_ < 4; ++a_) {
      double gam = 0.0;
      for (int d = 0; d < 4; ++d) gam += 0.5 * nup[d] * (dg[b][d][a_] + dg[a_][d][b] - dg[d][b][a_]);
      cov[b][a_] = dn_low[b][a_] - gam;
    }
  const TetradSet t = tetrad(KerrBackground(M, a), r, th);
  cplx out = 0.0;
  for (int a_ = 0; a_ < 4; ++a_)
    for (int b = 0; b < 4; ++b) out += t.mbar[a_] * t.m[b] * cov[b][a_];
  return out;
}

double dot(const Matrix4& g, const std::array<cplx, 4>& x, const std::array<cplx, 4>& y,
           bool imag_part = false) {
  cplx s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += g[i][j] * x[i] * y[j];
  return imag_part ? s.imag() : s.real();
}

std::array<cplx, 4> to_c(const std::array<double, 4>& v) {
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

TEST(MakeBackground, HorizonRadius) {
  EXPECT_DOUBLE_EQ(make_background(1.0, 0.0).r_plus(), 2.0);
  EXPECT_NEAR(make_background(1.0, 0.6).r_plus(), 1.8, 1e-15);
  const KerrBackground bg(1.0, 0.6);
  EXPECT_NEAR(bg.Delta(bg.r_plus()), 0.0, 1e-15);
  EXPECT_EQ(bg.C_hyp(), 1e6);
  EXPECT_EQ(bg.tau0(), 10.0);
}

TEST(MakeBackground, RejectsExtremeAndBadMass) {
  EXPECT_THROW(make_background(1.0, 1.0), DomainError);
  EXPECT_THROW(make_background(1.0, -1.2), DomainError);
  EXPECT_THROW(make_background(0.0, 0.0), DomainError);
  EXPECT_THROW(make_background(-1.0, 0.0), DomainError);
}

TEST(BackgroundScalars, Examples) {
  const auto s = background_scalars(make_background(1.0, 0.0), 2.0, M_PI / 2);
  EXPECT_NEAR(s.Delta, 0.0, 1e-15);
  EXPECT_NEAR(s.Sigma, 4.0, 1e-15);
  EXPECT_NEAR(s.kappa1.real(), -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.kappa1.imag(), 0.0, 1e-15);
  // independent evaluation of -M (r - i a cos)^-3
  const cplx z(2.0, 0.0);
  EXPECT_NEAR(std::abs(s.Psi2 - (-1.0 / std::pow(z, 3))), 0.0, 1e-15);
  EXPECT_NEAR(s.Psi2.real(), -0.125, 1e-15);
  EXPECT_NEAR(s.uplambda, 1.0, 1e-15);
  const KerrBackground bg(1.0, 0.6);
  EXPECT_NEAR(background_scalars(bg, bg.r_plus(), 0.4).Delta, 0.0, 1e-14);
  EXPECT_THROW(background_scalars(bg, 1.0, 0.4), DomainError);
}

TEST(SpinCoefficients, RhoPrimeMatchesNumericalConnection) {
  const auto sc = spin_coefficients(make_background(1.0, 0.0), 2.0, M_PI / 2);
  EXPECT_NEAR(sc.rho_prime.real(), 1.0 / (2.0 * kRt2), 1e-15);
  const cplx fd = rho_prime_fd(1.0, 0.0, 2.0, M_PI / 2);
  EXPECT_NEAR(std::abs(fd - sc.rho_prime), 0.0, 1e-8);
  for (double a : {0.3, 0.9}) {
    const KerrBackground bg(1.0, a);
    const cplx fd2 = rho_prime_fd(1.0, a, 3.1, 1.1);
    EXPECT_NEAR(std::abs(fd2 - spin_coefficients(bg, 3.1, 1.1).rho_prime), 0.0, 1e-8) << a;
  }
}

TEST(SpinCoefficients, VanishingAndLambda) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double a : {0.0, 0.3, 0.9, 0.999}) {
    const KerrBackground bg(1.0, a);
    for (int i = 0; i < 200; ++i) {
      const double r = bg.r_plus() + 20.0 * U(rng);
      const double th = 0.01 + (M_PI - 0.02) * U(rng);
      const auto sc = spin_coefficients(bg, r, th);
      EXPECT_EQ(sc.kappa, cplx(0.0));
      EXPECT_EQ(sc.kappa_prime, cplx(0.0));
      EXPECT_EQ(sc.sigma, cplx(0.0));
      EXPECT_EQ(sc.sigma_prime, cplx(0.0));
      EXPECT_EQ(sc.epsilon_prime, cplx(0.0));
      const auto bs = background_scalars(bg, r, th);
      EXPECT_NEAR(std::abs(-3.0 * kRt2 * bs.kappa1 * sc.rho_prime - 1.0), 0.0, 1e-14);
      // cross relations
      const cplx k1 = bs.kappa1, k1b = std::conj(k1);
      EXPECT_LE(std::abs(k1b * std::conj(sc.rho_prime) - k1 * sc.rho_prime),
                1e-12 * std::abs(k1 * sc.rho_prime));
      EXPECT_LE(std::abs(k1b * std::conj(sc.tau_prime) + k1 * sc.tau),
                1e-12 * std::max(1e-300, std::abs(k1 * sc.tau)) + 1e-300);
    }
  }
}

TEST(SpinCoefficients, PolesRejected) {
  const KerrBackground bg(1.0, 0.5);
  EXPECT_THROW(spin_coefficients(bg, 3.0, 0.0), DomainError);
  EXPECT_THROW(spin_coefficients(bg, 3.0, M_PI), DomainError);
}

TEST(Tetrad, NormalizationRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double a : {0.0, 0.3, 0.9, 0.999}) {
    const KerrBackground bg(1.0, a);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double r = bg.r_plus() * (1.0 + 1e-3) + 30.0 * U(rng);
      const double th = 1e-3 + (M_PI - 2e-3) * U(rng);
      const Matrix4 g = metric_components(bg, r, th).g;
      const TetradSet t = tetrad(bg, r, th);
      const auto l = to_c(t.l), n = to_c(t.n);
      double e = std::abs(dot(g, l, n) - 1.0) + std::abs(dot(g, t.m, t.mbar) + 1.0);
      e += std::abs(dot(g, l, l)) + std::abs(dot(g, n, n)) + std::abs(dot(g, l, t.m)) +
           std::abs(dot(g, l, t.m, true)) + std::abs(dot(g, n, t.m)) + std::abs(dot(g, n, t.m, true)) +
           std::abs(dot(g, t.m, t.m)) + std::abs(dot(g, t.m, t.m, true)) +
           std::abs(dot(g, t.m, t.mbar, true));
      // scale-free: normalize by the size of the largest metric entry involved
      double gmax = 1.0;
      for (auto& row : g)
        for (double x : row) gmax = std::max(gmax, std::abs(x));
      worst = std::max(worst, e / gmax);
    }
    EXPECT_LE(worst, 1e-12) << "a = " << a;
  }
}

TEST(Metric, Examples) {
  const KerrBackground bg(1.0, 0.0);
  EXPECT_NEAR(metric_components(bg, 3.0, 1.0).g[0][0], 1.0 / 3.0, 1e-15);
  EXPECT_LE(reconstruct_from_tetrad(bg, 3.0, 1.0), 1e-12);
  EXPECT_LE(reconstruct_from_tetrad(KerrBackground(1.0, 0.9), 2.0, 1.0), 1e-12);
}

TEST(Metric, ReconstructionRandomPoints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double a : {0.0, 0.3, 0.9, 0.999}) {
    const KerrBackground bg(1.0, a);
    for (int i = 0; i < 1000; ++i) {
      const double r = bg.r_plus() * 1.001 + 30.0 * U(rng);
      const double th = 1e-2 + (M_PI - 2e-2) * U(rng);
      ASSERT_LE(reconstruct_from_tetrad(bg, r, th), 1e-12) << a << " " << r << " " << th;
    }
  }
}

TEST(Chart, HeightFunction) {
  for (double a : {0.0, 0.6, 0.999}) {
    const KerrBackground bg(1.0, a);
    const HyperboloidalChart ch(bg);
    EXPECT_NEAR(ch.h(bg.r_plus()), 0.0, 1e-12);
    EXPECT_NEAR(ch.H(0.0), 2.0, 0.0);
    // slowly converging: h/r - 2 ~ 4 M log(r)/r
    const double r = 1e6;
    EXPECT_LT(std::abs(ch.h(r) / r - 2.0), 1e-2 * (1.0 + 4.0 * std::log(r)));
    const double r2 = 1e12;
    EXPECT_LT(std::abs(ch.h(r2) / r2 - 2.0), 1e-9);
    for (int k = 0; k <= 600; ++k) {
      const double rr = bg.r_plus() * std::pow(1e6 / bg.r_plus(), k / 600.0);
      ASSERT_GT(ch.h_prime(rr), 0.0) << rr;
      // sufficient spacelike-slice condition
      if (rr > bg.r_plus() * (1 + 1e-12)) {
        const double apr = a * a + rr * rr;
        ASSERT_GT(ch.h_prime(rr), a * a / apr);
        ASSERT_LT(ch.h_prime(rr), 2.0 * apr / bg.Delta(rr) - a * a / apr);
      }
    }
  }
}

TEST(Chart, DerivativeConsistency) {
  const KerrBackground bg(1.0, 0.7);
  for (double C : {1.0, 3.0, 1e6}) {
    const HyperboloidalChart ch(bg, C);
    for (double r : {bg.r_plus() + 0.1, 3.0, 10.0, 200.0}) {
      const double eps = 1e-6 * r;
      const double fd = (ch.h(r + eps) - ch.h(r - eps)) / (2 * eps);
      EXPECT_NEAR(fd, ch.h_prime(r), 1e-7 * std::max(1.0, std::abs(ch.h_prime(r))));
      EXPECT_NEAR(ch.H(1.0 / r), ch.h_prime(r), 1e-13 * std::abs(ch.h_prime(r)) + 1e-13);
    }
    for (double R : {0.0, 0.1, 0.3, 1.0 / bg.r_plus()}) {
      const double e = 1e-7;
      const double Rm = std::max(0.0, R - e);
      const double fd = (ch.H(R + e) - ch.H(Rm)) / (R + e - Rm);
      if (C < 10) EXPECT_NEAR(fd, ch.dH(R), 1e-6) << C << " " << R;
    }
  }
}

TEST(Chart, VTauLimitIsC) {
  for (double a : {0.0, 0.5}) {
    const KerrBackground bg(1.0, a);
    const HyperboloidalChart ch(bg);
    EXPECT_NEAR(ch.V_tau_over_R2(0.0), 1e6, 1e-6);
    EXPECT_NEAR(ch.A(0.0), 4e6, 1e-4);
  }
}

// (2 + 2a^2R^2 - H R^2 Delta)/R^2 -> 2 C M^2, with H transcribed in long double.
TEST(Chart, HPrimeExpansionConstantRichardson) {
  for (double a : {0.0, 0.4}) {
    const long double M = 1.0L, C = 1e6L, rp = 1.0L + std::sqrt(1.0L - (long double)a * a);
    const long double K = (C - 1) * M;
    auto X = [&](long double R) {
      const long double r = 1 / R;
      const long double hp = 2 + 4 * M / r + 6 * M * M * (r - rp) / (r * r * r) -
                             2 * (C - 1) * M * M / (K * K + r * r);
      const long double R2D = 1 - 2 * M * R + (long double)a * a * R * R;
      return (2 + 2 * (long double)a * a * R * R - hp * R2D) / (R * R);
    };
    // two Richardson levels remove the O(R) and O(R^2) terms
    const long double R0 = 1e-8L;
    const long double f1 = X(R0), f2 = X(R0 / 2), f3 = X(R0 / 4);
    const long double g1 = 2 * f2 - f1, g2 = 2 * f3 - f2;
    const long double lim = (4 * g2 - g1) / 3;
    EXPECT_NEAR((double)(lim / 2e6L), 1.0, 1e-6);
    const HyperboloidalChart ch{KerrBackground(1.0, a)};
    EXPECT_NEAR(ch.X_over_R2(0.0) / 2e6, 1.0, 1e-12);
  }
}

TEST(Chart, CoordinateMaps) {
  const KerrBackground bg(1.0, 0.6);
  const HyperboloidalChart ch(bg);
  auto [tau, R] = ch.to_hyperboloidal(bg.tau0(), bg.r_plus());
  EXPECT_NEAR(tau, bg.tau0(), 1e-12);
  EXPECT_NEAR(R, 1.0 / bg.r_plus(), 1e-15);
  auto [t2, R2] = ch.to_hyperboloidal(37.2, 5.5);
  auto [v, r] = ch.to_ingoing(t2, R2);
  EXPECT_LE(std::abs(v - 37.2) + std::abs(r - 5.5), 1e-12);
  EXPECT_THROW(ch.to_ingoing(1.0, 0.0), DomainError);
  EXPECT_THROW(ch.to_hyperboloidal(1.0, 0.0), DomainError);
  EXPECT_NEAR(ch.tau_hat(10.0, bg.r_plus()), 10.0, 1e-12);
}

TEST(Tortoise, NormalizationAndClosedForm) {
  const KerrBackground bg(1.0, 0.0);
  EXPECT_NEAR(tortoise(bg, 3.0), 0.0, 1e-14);
  auto closed = [](double r) { return r + 2.0 * std::log(r / 2.0 - 1.0); };
  for (double r : {2.001, 2.5, 4.0, 10.0, 100.0, 1e4}) {
    EXPECT_NEAR(tortoise(bg, r), closed(r) - closed(3.0), 1e-10 * std::max(1.0, r)) << r;
  }
  EXPECT_TRUE(std::isinf(tortoise(bg, 2.0)));
  EXPECT_LT(tortoise(bg, 2.0), 0.0);
}

TEST(Tortoise, MonotoneAndKerrDerivative) {
  const KerrBackground bg(1.0, 0.8);
  double prev = -INFINITY;
  for (int k = 1; k <= 200; ++k) {
    const double r = bg.r_plus() + 0.01 * k * k;
    const double x = tortoise(bg, r);
    ASSERT_GT(x, prev);
    prev = x;
  }
  const double r = 4.0, e = 1e-4;
  const double fd = (tortoise(bg, r + e) - tortoise(bg, r - e)) / (2 * e);
  EXPECT_NEAR(fd, (r * r + 0.64) / bg.Delta(r), 1e-7);
  EXPECT_NEAR(azimuthal_tortoise(bg, 3.0), 0.0, 1e-14);
  const double fda = (azimuthal_tortoise(bg, r + e) - azimuthal_tortoise(bg, r - e)) / (2 * e);
  EXPECT_NEAR(fda, 0.8 / bg.Delta(r), 1e-7);
  EXPECT_NEAR(bl_time(bg, 5.0, 3.0), 5.0, 1e-14);
  EXPECT_NEAR(retarded_time(bg, 5.0, 4.0), 5.0 - 2.0 * tortoise(bg, 4.0), 1e-14);
}
