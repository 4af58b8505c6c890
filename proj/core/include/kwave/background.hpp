#pragma once

// Kerr background in ingoing Eddington-Finkelstein coordinates (v, r, theta, phi),
// the Znajek principal tetrad, its spin coefficients, and the hyperboloidal chart.
// Signature (+,-,-,-); coordinate index order is (v, r, theta, phi).

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "kwave/dual.hpp"

namespace kwave {

using cplx = std::complex<double>;

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class KerrBackground {
 public:
  static constexpr double kHyperboloidalConstant = 1.0e6;

  KerrBackground(double M, double a);

  double M() const { return M_; }
  double a() const { return a_; }
  double r_plus() const { return r_plus_; }
  double r_minus() const { return r_minus_; }
  double C_hyp() const { return kHyperboloidalConstant; }
  double tau0() const { return 10.0 * M_; }

  double Delta(double r) const { return a_ * a_ - 2.0 * M_ * r + r * r; }
  double Sigma(double r, double theta) const {
    const double c = std::cos(theta);
    return a_ * a_ * c * c + r * r;
  }
  // r >= r_plus up to a relative slack of 1e-12; throws DomainError otherwise.
  void require_exterior(double r) const;

 private:
  double M_;
  double a_;
  double r_plus_;
  double r_minus_;
};

KerrBackground make_background(double M, double a);

struct BackgroundScalars {
  double Sigma;
  double Delta;
  cplx kappa1;
  cplx Psi2;
  double uplambda;
};

BackgroundScalars background_scalars(const KerrBackground& bg, double r, double theta);

struct SpinCoefficientSet {
  cplx rho, rho_prime, tau, tau_prime, beta, beta_prime, epsilon;
  cplx kappa, kappa_prime, sigma, sigma_prime, epsilon_prime;
};

// theta must lie in (0, pi): beta and beta' carry cot and csc.
SpinCoefficientSet spin_coefficients(const KerrBackground& bg, double r, double theta);

using Matrix4 = std::array<std::array<double, 4>, 4>;

struct TetradSet {
  std::array<double, 4> l;
  std::array<double, 4> n;
  std::array<cplx, 4> m;
  std::array<cplx, 4> mbar;
};

TetradSet tetrad(const KerrBackground& bg, double r, double theta);

struct MetricComponents {
  Matrix4 g;  // covariant components g_ab
};

MetricComponents metric_components(const KerrBackground& bg, double r, double theta);

// Covariant metric obtained by inverting g^ab = 2 l^(a n^b) - 2 m^(a mbar^b), the
// contravariant form of g_ab = 2(l_(a n_b) - m_(a mbar_b)).
Matrix4 metric_from_tetrad(const KerrBackground& bg, double r, double theta);

// max_ab |g_closed - g_tetrad| / max(1, |g_closed|)
double reconstruct_from_tetrad(const KerrBackground& bg, double r, double theta);

// Inverse metric g^ab from the tetrad, g^ab = 2 l^(a n^b) - 2 Re(m^a mbar^b).
Matrix4 inverse_metric(const KerrBackground& bg, double r, double theta);

// Closed forms templated on the scalar type so that exact derivatives can be taken.
template <class T>
std::array<std::array<T, 4>, 4> metric_lower_t(double M, double a, T r, T theta) {
  using std::cos;
  using std::sin;
  const T s = sin(theta);
  const T c = cos(theta);
  const T s2 = s * s;
  const T Sigma = a * a * c * c + r * r;
  const T Delta = a * a - 2.0 * M * r + r * r;
  const T apr = a * a + r * r;
  std::array<std::array<T, 4>, 4> g{};
  for (auto& row : g) row.fill(T(0.0));
  // index 0 = v, 1 = r, 2 = theta, 3 = phi
  g[0][1] = g[1][0] = T(-1.0);
  g[3][1] = g[1][3] = a * s2;
  g[3][0] = g[0][3] = 2.0 * M * a * r * s2 / Sigma;
  g[0][0] = (Delta - a * a * s2) / Sigma;
  g[3][3] = (a * a * s2 * Delta - apr * apr) / Sigma * s2;
  g[2][2] = -Sigma;
  return g;
}

template <class T>
struct TetradT {
  std::array<T, 4> l;
  std::array<T, 4> n;
  std::array<T, 4> m_re;
  std::array<T, 4> m_im;
};

template <class T>
TetradT<T> tetrad_t(double M, double a, T r, T theta) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T s = sin(theta);
  const T c = cos(theta);
  const T Sigma = a * a * c * c + r * r;
  const T Delta = a * a - 2.0 * M * r + r * r;
  const double rt2 = std::sqrt(2.0);
  TetradT<T> t;
  t.l = {rt2 * (a * a + r * r) / Sigma, Delta / (rt2 * Sigma), T(0.0), rt2 * a / Sigma};
  t.n = {T(0.0), T(-1.0 / rt2), T(0.0), T(0.0)};
  // 1/(sqrt2 (r - i a cos)) = (r + i a cos)/(sqrt2 Sigma)
  const T wr = r / (rt2 * Sigma);
  const T wi = a * c / (rt2 * Sigma);
  // m = w d_theta + i csc w d_phi + i a sin w d_v
  const T csc = T(1.0) / s;
  t.m_re = {-a * s * wi, T(0.0), wr, -csc * wi};
  t.m_im = {a * s * wr, T(0.0), wi, csc * wr};
  return t;
}

// Hyperboloidal chart tau = v - h(r), R = 1/r with height function parameter C.
// The background value is C = 1e6; the constant is a parameter so that a
// numerically resolvable chart can be used by the evolver.
class HyperboloidalChart {
 public:
  explicit HyperboloidalChart(const KerrBackground& bg);
  HyperboloidalChart(const KerrBackground& bg, double C);

  double C() const { return C_; }
  double M() const { return M_; }
  double a() const { return a_; }
  double r_plus() const { return r_plus_; }

  double h(double r) const;
  double h_prime(double r) const;

  // H(R) = h'(1/R), with H(0) = 2.
  double H(double R) const;
  double dH(double R) const;  // dH/dR
  double q(double R) const;   // (H - 2)/R
  double q2(double R) const;  // (q - 4M)/R
  // R^2 Delta = 1 - 2MR + a^2R^2
  double R2Delta(double R) const { return 1.0 - 2.0 * M_ * R + a_ * a_ * R * R; }
  // (2 + 2a^2R^2 - H R^2 Delta)/R^2, cancellation free; equals 2 C M^2 at R = 0.
  double X_over_R2(double R) const;
  // Coefficient of d_tau^2 in R_s: H (2 + 2a^2R^2 - H R^2 Delta)/R^2.
  double A(double R) const { return H(R) * X_over_R2(R); }
  // Coefficient of d_tau d_R in R_s divided by 2: 1 + a^2R^2 - H R^2 Delta.
  double B(double R) const;
  // V^a grad_a tau = 1 - H R^2 Delta/(2(1 + a^2R^2))
  double V_tau(double R) const;
  // V^a grad_a tau / R^2, finite at R = 0 where it equals C M^2.
  double V_tau_over_R2(double R) const;

  std::pair<double, double> to_hyperboloidal(double v, double r) const;  // (tau, R)
  std::pair<double, double> to_ingoing(double tau, double R) const;      // (v, r), R > 0
  double tau_hat(double v, double r) const { return v - 0.5 * h(r); }

 private:
  double M_;
  double a_;
  double r_plus_;
  double C_;
  double K_;  // (C - 1) M
};

// r* with dr*/dr = (r^2 + a^2)/Delta and r*(3M) = 0, by adaptive quadrature.
// Returns -infinity when r - r_plus falls below 1e-10 M.
double tortoise(const KerrBackground& bg, double r);

// r# with dr#/dr = a/Delta and r#(3M) = 0.
double azimuthal_tortoise(const KerrBackground& bg, double r);

// Boyer-Lindquist time and retarded time: t = v - r*, u = v - 2 r*.
double bl_time(const KerrBackground& bg, double v, double r);
double retarded_time(const KerrBackground& bg, double v, double r);

}  // namespace kwave
