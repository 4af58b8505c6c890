#pragma once

// Spin-weighted spherical harmonics sY_lm, Gauss-Legendre quadrature in cos(theta),
// per-mode transforms, the ladder action of the edth operators, and coupling matrices.
//
// Normalization: the integral of |sY_lm|^2 over the unit sphere is 4 pi, so that
// the integral of |phi|^2 is 4 pi sum |c_l|^2. Quadrature weights are stored divided
// by 2, i.e. they integrate dOmega/(4 pi) once the phi integral is done.
//
// Convention: sY_lm(theta, phi) = (-1)^s sqrt(2l + 1) d^l_{m,-s}(theta) e^{i m phi}, which
// satisfies, for the coordinate operators
//   edth  = (d_theta + i csc d_phi - s cot)/sqrt2,
//   edth' = (d_theta - i csc d_phi + s cot)/sqrt2,
// the ladder relations
//   edth  sY_l = -sqrt((l+s+1)(l-s)/2) (s+1)Y_l,
//   edth' sY_l = +sqrt((l+s)(l-s+1)/2) (s-1)Y_l.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

namespace kwave {

using cplx = std::complex<double>;

struct GaussLegendre {
  std::vector<double> x;  // nodes in (-1, 1), ascending
  std::vector<double> w;  // weights, summing to 2
};

GaussLegendre gauss_legendre(int n);

inline int degree_min(int s, int m) { return std::max(std::abs(s), std::abs(m)); }

// Wigner small-d d^l_{mp,m}(theta) by the explicit finite sum (reference evaluation).
double wigner_d_explicit(int l, int mp, int m, double theta);

// d^l_{mp,m}(theta) for l = max(|mp|,|m|) .. lmax by three-term recurrence in l.
// T is double or std::complex<double> (the latter for complex-step differentiation).
template <class T>
std::vector<T> wigner_d_column(int mp, int m, int lmax, T theta);

// theta part of sY_lm for l = degree_min(s, m) .. lmax.
template <class T>
std::vector<T> swsh_column(int s, int m, int lmax, T theta) {
  std::vector<T> d = wigner_d_column<T>(m, -s, lmax, theta);
  const int l0 = degree_min(s, m);
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] *= sign * std::sqrt(2.0 * (l0 + static_cast<int>(k)) + 1.0);
  }
  return d;
}

// Ladder constants.
inline double hedt_factor(int s, int l) {
  const double p = static_cast<double>(l + s + 1) * static_cast<double>(l - s);
  return p > 0.0 ? -std::sqrt(0.5 * p) : 0.0;
}
inline double hedtp_factor(int s, int l) {
  const double p = static_cast<double>(l + s) * static_cast<double>(l - s + 1);
  return p > 0.0 ? std::sqrt(0.5 * p) : 0.0;
}
// Eigenvalue of 2 edth edth' on sY_l: -(l+s)(l-s+1).
inline double s_ring_value(int s, int l) {
  return -static_cast<double>(l + s) * static_cast<double>(l - s + 1);
}
// edth^4 (-2)Y_l = (l+2)!/(4 (l-2)!) (+2)Y_l.
double hedt4_ladder(int l);

struct ModalField {
  int s = 0;
  int m = 0;
  int lmax = 0;
  Eigen::VectorXcd c;  // coefficients for l = lmin() .. lmax

  ModalField() = default;
  ModalField(int s_, int m_, int lmax_);
  int lmin() const { return degree_min(s, m); }
  int size() const { return static_cast<int>(c.size()); }
  // Integral of |phi|^2 over the sphere, 4 pi sum |c_l|^2.
  double norm2() const;
};

// Coefficient-space ladder operators; valid for any spin weight.
ModalField apply_hedt(const ModalField& f);
ModalField apply_hedtp(const ModalField& f);

class HarmonicBasis {
 public:
  // n_theta = 0 selects lmax + 4 nodes, enough for exact Gram and coupling matrices.
  HarmonicBasis(int s, int m, int lmax, int n_theta = 0);

  int s() const { return s_; }
  int m() const { return m_; }
  int lmin() const { return degree_min(s_, m_); }
  int lmax() const { return lmax_; }
  int n_ell() const { return lmax_ - lmin() + 1; }
  int n_theta() const { return static_cast<int>(theta_.size()); }

  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& cos_theta() const { return x_; }
  const std::vector<double>& weights() const { return w_; }  // sum to 1
  // Y(j, k) = sY_{lmin + k, m}(theta_j)
  const Eigen::MatrixXd& values() const { return Y_; }

  ModalField analyze(const Eigen::VectorXcd& samples) const;
  Eigen::VectorXcd synthesize(const ModalField& f) const;

  // Gram matrix under the quadrature (identity for exact quadrature).
  Eigen::MatrixXd gram() const;
  // Matrices of multiplication by cos(theta) and sin^2(theta) on the retained band.
  Eigen::MatrixXd cos_matrix() const;
  Eigen::MatrixXd sin2_matrix() const;
  // Diagonal of 2 edth edth'.
  Eigen::VectorXd s_ring_eigen() const;

 private:
  Eigen::MatrixXd weighted_product(const std::vector<double>& f) const;

  int s_;
  int m_;
  int lmax_;
  std::vector<double> x_;
  std::vector<double> theta_;
  std::vector<double> w_;
  Eigen::MatrixXd Y_;
};

}  // namespace kwave
