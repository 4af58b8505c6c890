#include "kwave/spectral.hpp"

#include <stdexcept>
#include <string>

namespace kwave {

namespace {

template <class T>
T ipow(T x, int n) {
  T out(1.0);
  for (int i = 0; i < n; ++i) out *= x;
  return out;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Explicit finite sum for d^l_{mp,m}; terms with a negative factorial argument vanish.
template <class T>
T wigner_sum(int l, int mp, int m, T theta) {
  using std::cos;
  using std::sin;
  const T c = cos(0.5 * theta);
  const T s = sin(0.5 * theta);
  const double pre = 0.5 * (log_factorial(l + mp) + log_factorial(l - mp) +
                            log_factorial(l + m) + log_factorial(l - m));
  T sum(0.0);
  const int kmin = std::max(0, m - mp);
  const int kmax = std::min(l + m, l - mp);
  for (int k = kmin; k <= kmax; ++k) {
    const double lw = pre - log_factorial(l + m - k) - log_factorial(k) -
                      log_factorial(l - k - mp) - log_factorial(k - m + mp);
    const double sign = ((k - m + mp) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::exp(lw) * ipow(c, 2 * l - 2 * k + m - mp) * ipow(s, 2 * k - m + mp);
  }
  return sum;
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendre g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    g.x[i] = -z;
    g.x[n - 1 - i] = z;
    g.w[i] = w;
    g.w[n - 1 - i] = w;
  }
  return g;
}

double wigner_d_explicit(int l, int mp, int m, double theta) {
  if (l < std::max(std::abs(mp), std::abs(m))) return 0.0;
  return wigner_sum<double>(l, mp, m, theta);
}

template <class T>
std::vector<T> wigner_d_column(int mp, int m, int lmax, T theta) {
  using std::cos;
  const int l0 = std::max(std::abs(mp), std::abs(m));
  std::vector<T> d;
  if (lmax < l0) return d;
  d.reserve(lmax - l0 + 1);
  d.push_back(wigner_sum<T>(l0, mp, m, theta));
  if (lmax == l0) return d;
  const T ct = cos(theta);
  const double mm = static_cast<double>(m) * mp;
  if (l0 == 0) {
    d.push_back(ct);
  } else {
    const double j = l0;
    const double lhs = j * std::sqrt((j + 1) * (j + 1) - m * m) * std::sqrt((j + 1) * (j + 1) - mp * mp);
    d.push_back((2 * j + 1) * (j * (j + 1) * ct - mm) * d[0] / lhs);
  }
  for (int jj = l0 + 1; jj < lmax; ++jj) {
    const double j = jj;
    const double lhs = j * std::sqrt((j + 1) * (j + 1) - m * m) * std::sqrt((j + 1) * (j + 1) - mp * mp);
    const double back = (j + 1) * std::sqrt(j * j - m * m) * std::sqrt(j * j - mp * mp);
    const std::size_t k = d.size();
    d.push_back(((2 * j + 1) * (j * (j + 1) * ct - mm) * d[k - 1] - back * d[k - 2]) / lhs);
  }
  return d;
}

template std::vector<double> wigner_d_column<double>(int, int, int, double);
template std::vector<std::complex<double>> wigner_d_column<std::complex<double>>(
    int, int, int, std::complex<double>);

double hedt4_ladder(int l) {
  double f = 1.0;
  for (int s = -2; s <= 1; ++s) f *= hedt_factor(s, l);
  return f;
}

ModalField::ModalField(int s_, int m_, int lmax_) : s(s_), m(m_), lmax(lmax_) {
  const int n = lmax - lmin() + 1;
  c = Eigen::VectorXcd::Zero(std::max(n, 0));
}

double ModalField::norm2() const { return 4.0 * M_PI * c.squaredNorm(); }

namespace {

ModalField ladder(const ModalField& f, int ds) {
  ModalField out(f.s + ds, f.m, f.lmax);
  const int lin = f.lmin();
  const int lout = out.lmin();
  for (int l = std::max(lin, lout); l <= f.lmax; ++l) {
    const double k = ds > 0 ? hedt_factor(f.s, l) : hedtp_factor(f.s, l);
    out.c[l - lout] = k * f.c[l - lin];
  }
  return out;
}

}  // namespace

ModalField apply_hedt(const ModalField& f) { return ladder(f, +1); }
ModalField apply_hedtp(const ModalField& f) { return ladder(f, -1); }

HarmonicBasis::HarmonicBasis(int s, int m, int lmax, int n_theta) : s_(s), m_(m), lmax_(lmax) {
  if (std::abs(s) > 3) throw std::invalid_argument("HarmonicBasis: |s| must be <= 3");
  if (lmax < degree_min(s, m)) {
    throw std::invalid_argument("HarmonicBasis: lmax " + std::to_string(lmax) +
                                " below max(|s|,|m|) = " + std::to_string(degree_min(s, m)));
  }
  if (lmax > 128) throw std::invalid_argument("HarmonicBasis: lmax must be <= 128");
  const int n = n_theta > 0 ? n_theta : lmax + 4;
  const GaussLegendre g = gauss_legendre(n);
  x_ = g.x;
  w_.resize(n);
  theta_.resize(n);
  Y_.resize(n, n_ell());
  for (int j = 0; j < n; ++j) {
    w_[j] = 0.5 * g.w[j];
    theta_[j] = std::acos(x_[j]);
    const std::vector<double> col = swsh_column<double>(s, m, lmax, theta_[j]);
    for (int k = 0; k < n_ell(); ++k) Y_(j, k) = col[k];
  }
}

ModalField HarmonicBasis::analyze(const Eigen::VectorXcd& samples) const {
  if (samples.size() != n_theta()) {
    throw std::invalid_argument("analyze: expected " + std::to_string(n_theta()) +
                                " samples, got " + std::to_string(samples.size()));
  }
  ModalField f(s_, m_, lmax_);
  const Eigen::Map<const Eigen::VectorXd> w(w_.data(), n_theta());
  f.c = Y_.transpose() * (w.cast<cplx>().asDiagonal() * samples);
  return f;
}

Eigen::VectorXcd HarmonicBasis::synthesize(const ModalField& f) const {
  if (f.s != s_ || f.m != m_ || f.size() != n_ell()) {
    throw std::invalid_argument("synthesize: field does not match basis");
  }
  return Y_.cast<cplx>() * f.c;
}

Eigen::MatrixXd HarmonicBasis::weighted_product(const std::vector<double>& f) const {
  Eigen::VectorXd wf(n_theta());
  for (int j = 0; j < n_theta(); ++j) wf[j] = w_[j] * f[j];
  return Y_.transpose() * wf.asDiagonal() * Y_;
}

Eigen::MatrixXd HarmonicBasis::gram() const {
  return weighted_product(std::vector<double>(n_theta(), 1.0));
}

Eigen::MatrixXd HarmonicBasis::cos_matrix() const { return weighted_product(x_); }

Eigen::MatrixXd HarmonicBasis::sin2_matrix() const {
  std::vector<double> f(n_theta());
  for (int j = 0; j < n_theta(); ++j) f[j] = 1.0 - x_[j] * x_[j];
  return weighted_product(f);
}

Eigen::VectorXd HarmonicBasis::s_ring_eigen() const {
  Eigen::VectorXd e(n_ell());
  for (int k = 0; k < n_ell(); ++k) e[k] = s_ring_value(s_, lmin() + k);
  return e;
}

}  // namespace kwave
