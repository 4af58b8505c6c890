#include "kwave/background.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

namespace kwave {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double csc_of(double theta) {
  // Leading terms of the Laurent series near the poles.
  if (theta < 1e-6) return 1.0 / theta + theta / 6.0;
  const double d = M_PI - theta;
  if (d < 1e-6) return 1.0 / d + d / 6.0;
  return 1.0 / std::sin(theta);
}

void require_open_theta(double theta) {
  if (!(theta > 0.0 && theta < M_PI)) {
    throw DomainError("theta must lie in (0, pi), got " + std::to_string(theta));
  }
}

double radial_integral(const KerrBackground& bg, double r, double (*numer)(double, double)) {
  // Substituting r = r_plus + e^x removes the simple pole of 1/Delta at the horizon,
  // leaving the smooth integrand numer(r)/(r - r_minus) in x.
  const double a = bg.a();
  const double rp = bg.r_plus();
  const double rm = bg.r_minus();
  auto f = [&](double x) {
    const double y = rp + std::exp(x);
    return numer(y, a) / (y - rm);
  };
  const double x0 = std::log(3.0 * bg.M() - rp);
  const double x1 = std::log(r - rp);
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x0, x1, 12, 1e-13,
                                                                       &err);
}

}  // namespace

KerrBackground::KerrBackground(double M, double a) : M_(M), a_(a) {
  if (!(M > 0.0) || !std::isfinite(M)) {
    throw DomainError("mass must be positive and finite, got M = " + std::to_string(M));
  }
  if (!(std::abs(a) < M)) {
    throw DomainError("spin must satisfy |a| < M (subextreme), got a = " + std::to_string(a) +
                      ", M = " + std::to_string(M));
  }
  const double root = std::sqrt(M * M - a * a);
  r_plus_ = M + root;
  r_minus_ = M - root;
}

void KerrBackground::require_exterior(double r) const {
  if (!(r >= r_plus_ * (1.0 - 1e-12))) {
    throw DomainError("radius " + std::to_string(r) + " lies inside the horizon r_plus = " +
                      std::to_string(r_plus_));
  }
}

KerrBackground make_background(double M, double a) { return KerrBackground(M, a); }

BackgroundScalars background_scalars(const KerrBackground& bg, double r, double theta) {
  bg.require_exterior(r);
  const double a = bg.a();
  const cplx zeta(r, -a * std::cos(theta));  // r - i a cos(theta)
  BackgroundScalars out;
  out.Sigma = bg.Sigma(r, theta);
  out.Delta = bg.Delta(r);
  out.kappa1 = -zeta / 3.0;
  out.Psi2 = -bg.M() / (zeta * zeta * zeta);
  const cplx rho_prime = -1.0 / (3.0 * kSqrt2 * out.kappa1);
  out.uplambda = std::real(1.0 / (-3.0 * kSqrt2 * out.kappa1 * rho_prime));
  return out;
}

SpinCoefficientSet spin_coefficients(const KerrBackground& bg, double r, double theta) {
  bg.require_exterior(r);
  require_open_theta(theta);
  const double M = bg.M();
  const double a = bg.a();
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double csc = csc_of(theta);
  const double cot = c * csc;
  const double Sigma = bg.Sigma(r, theta);
  const double Delta = bg.Delta(r);
  const cplx I(0.0, 1.0);
  const cplx k1 = -cplx(r, -a * c) / 3.0;
  const cplx k1b = std::conj(k1);

  SpinCoefficientSet sc{};
  sc.kappa = sc.kappa_prime = sc.sigma = sc.sigma_prime = sc.epsilon_prime = 0.0;
  sc.rho = Delta / (3.0 * kSqrt2 * k1 * Sigma);
  sc.rho_prime = -1.0 / (3.0 * kSqrt2 * k1);
  sc.tau = -I * a * s / (9.0 * kSqrt2 * k1 * k1);
  sc.tau_prime = -I * a * s / (kSqrt2 * Sigma);
  sc.beta_prime = -cot / (6.0 * kSqrt2 * k1b);
  sc.beta = -I * csc * (2.0 * a - 3.0 * I * c * k1b) / (18.0 * kSqrt2 * k1 * k1);
  sc.epsilon = (2.0 * Delta - 6.0 * M * k1 - 9.0 * k1 * k1 - Sigma) / (6.0 * kSqrt2 * k1 * Sigma);
  return sc;
}

TetradSet tetrad(const KerrBackground& bg, double r, double theta) {
  require_open_theta(theta);
  const auto t = tetrad_t<double>(bg.M(), bg.a(), r, theta);
  TetradSet out;
  out.l = t.l;
  out.n = t.n;
  for (int i = 0; i < 4; ++i) {
    out.m[i] = cplx(t.m_re[i], t.m_im[i]);
    out.mbar[i] = std::conj(out.m[i]);
  }
  return out;
}

MetricComponents metric_components(const KerrBackground& bg, double r, double theta) {
  return {metric_lower_t<double>(bg.M(), bg.a(), r, theta)};
}

Matrix4 inverse_metric(const KerrBackground& bg, double r, double theta) {
  const TetradSet t = tetrad(bg, r, theta);
  Matrix4 gi{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      gi[i][j] = t.l[i] * t.n[j] + t.n[i] * t.l[j] - 2.0 * std::real(t.m[i] * t.mbar[j]);
    }
  }
  return gi;
}

Matrix4 metric_from_tetrad(const KerrBackground& bg, double r, double theta) {
  const Matrix4 gi = inverse_metric(bg, r, theta);
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = gi[i][j];
  const Eigen::Matrix4d g = m.inverse();
  Matrix4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = g(i, j);
  return out;
}

double reconstruct_from_tetrad(const KerrBackground& bg, double r, double theta) {
  const Matrix4 g = metric_components(bg, r, theta).g;
  const Matrix4 gt = metric_from_tetrad(bg, r, theta);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double d = std::abs(g[i][j] - gt[i][j]) / std::max(1.0, std::abs(g[i][j]));
      worst = std::max(worst, d);
    }
  }
  return worst;
}

HyperboloidalChart::HyperboloidalChart(const KerrBackground& bg)
    : HyperboloidalChart(bg, bg.C_hyp()) {}

HyperboloidalChart::HyperboloidalChart(const KerrBackground& bg, double C)
    : M_(bg.M()), a_(bg.a()), r_plus_(bg.r_plus()), C_(C), K_((C - 1.0) * bg.M()) {
  if (!(C >= 1.0)) throw DomainError("hyperboloidal constant must satisfy C >= 1");
}

double HyperboloidalChart::h(double r) const {
  const double M = M_;
  const double rp = r_plus_;
  const double d = rp - r;
  return 2.0 * (r - rp) + 4.0 * M * std::log(r / rp) + 3.0 * M * M * d * d / (rp * r * r) +
         2.0 * M * (std::atan(K_ / r) - std::atan(K_ / rp));
}

double HyperboloidalChart::h_prime(double r) const {
  const double M = M_;
  return 2.0 + 4.0 * M / r + 6.0 * M * M * (r - r_plus_) / (r * r * r) -
         2.0 * (C_ - 1.0) * M * M / (K_ * K_ + r * r);
}

double HyperboloidalChart::q2(double R) const {
  const double M = M_;
  return 6.0 * M * M * (1.0 - r_plus_ * R) - 2.0 * (C_ - 1.0) * M * M / (1.0 + K_ * K_ * R * R);
}

double HyperboloidalChart::q(double R) const { return 4.0 * M_ + R * q2(R); }

double HyperboloidalChart::H(double R) const { return 2.0 + R * q(R); }

double HyperboloidalChart::dH(double R) const {
  const double M = M_;
  const double den = 1.0 + K_ * K_ * R * R;
  return 4.0 * M + 12.0 * M * M * R - 18.0 * M * M * r_plus_ * R * R -
         4.0 * (C_ - 1.0) * M * M * R / (den * den);
}

double HyperboloidalChart::X_over_R2(double R) const {
  const double qq = q(R);
  return -q2(R) + 2.0 * M_ * qq - a_ * a_ * R * qq;
}

double HyperboloidalChart::B(double R) const {
  return 1.0 + a_ * a_ * R * R - H(R) * R2Delta(R);
}

double HyperboloidalChart::V_tau(double R) const {
  return R * R * V_tau_over_R2(R);
}

double HyperboloidalChart::V_tau_over_R2(double R) const {
  return X_over_R2(R) / (2.0 * (1.0 + a_ * a_ * R * R));
}

std::pair<double, double> HyperboloidalChart::to_hyperboloidal(double v, double r) const {
  if (!(r > 0.0)) throw DomainError("to_hyperboloidal requires r > 0");
  return {v - h(r), 1.0 / r};
}

std::pair<double, double> HyperboloidalChart::to_ingoing(double tau, double R) const {
  if (!(R > 0.0)) throw DomainError("to_ingoing requires R > 0 (R = 0 is null infinity)");
  const double r = 1.0 / R;
  return {tau + h(r), r};
}

double tortoise(const KerrBackground& bg, double r) {
  if (r - bg.r_plus() < 1e-10 * bg.M()) return -std::numeric_limits<double>::infinity();
  return radial_integral(bg, r, [](double x, double a) { return x * x + a * a; });
}

double azimuthal_tortoise(const KerrBackground& bg, double r) {
  if (r - bg.r_plus() < 1e-10 * bg.M()) {
    if (bg.a() == 0.0) return 0.0;
    return bg.a() > 0 ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
  }
  return radial_integral(bg, r, [](double, double a) { return a; });
}

double bl_time(const KerrBackground& bg, double v, double r) { return v - tortoise(bg, r); }

double retarded_time(const KerrBackground& bg, double v, double r) {
  return v - 2.0 * tortoise(bg, r);
}

}  // namespace kwave
