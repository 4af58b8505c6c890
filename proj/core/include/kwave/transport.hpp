#pragma once

// Transport system for the ORG metric reconstruction along the ingoing principal null
// direction (Y = -d_r at fixed v, theta, phi) and the 1/h' expansion at null infinity.
//
// Fields are ordered sigma', G2, tau', G1, beta', G0 (all hatted, boost weight 0) with
// spin weights -2, -2, -1, -1, -1, 0.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "kwave/background.hpp"
#include "kwave/evolver.hpp"
#include "kwave/spectral.hpp"

namespace kwave {

enum TransportField : int { kSigmaHat = 0, kG2Hat, kTauHat, kG1Hat, kBetaHat, kG0Hat };
inline constexpr int kTransportFieldCount = 6;
inline constexpr std::array<int, 6> kTransportSpin = {-2, -2, -1, -1, -1, 0};
const char* transport_field_name(int f);

// Sign multiplying the coordinate edth in the relation between edth and the GHP edt.
// With the Znajek tetrad and spin-coefficient table used here, -1 is the consistent
// choice (it reproduces edt kappa1 = -kappa1 tau and the angular-momentum fixture).
inline constexpr int kEdtSign = -1;

// edt of a spin-s, boost-weight-0 field from its coordinate edth and its v-derivative:
// (sign hedth phi + 9 kappa1^2 tau L_xi phi - 3 s kappa1 tau phi)/(3 kappa1).
cplx ghp_edt(const KerrBackground& bg, double r, double theta, int s, cplx phi, cplx hedth_phi,
             cplx dv_phi, int sign = kEdtSign);
// edt' analogue: (sign hedth' phi + 9 kbar1^2 taubar L_xi phi + 3 s kbar1 taubar phi)/(3 kbar1).
cplx ghp_edtp(const KerrBackground& bg, double r, double theta, int s, cplx phi,
              cplx hedthp_phi, cplx dv_phi, int sign = kEdtSign);

// Pointwise inputs of the six right-hand sides.
struct TransportPointInput {
  std::array<cplx, 6> f{};
  cplx G1_bar = 0.0;
  cplx beta_bar = 0.0;
  cplx edt_sigma = 0.0;      // edt sigma'
  cplx edt_G2 = 0.0;         // edt G2
  cplx edt_G1 = 0.0;         // edt G1
  cplx edt_beta = 0.0;       // edt beta'
  cplx edtp_G1_bar = 0.0;    // edt' conj(G1)
  cplx edtp_beta_bar = 0.0;  // edt' conj(beta')
  cplx psi_m2 = 0.0;
};

// Y-derivatives of the six fields.
std::array<cplx, 6> transport_rhs(const KerrBackground& bg, double r, double theta,
                                  const TransportPointInput& in);

// Source psi_{-2}: spin -2 coefficients for l = degree_min(-2, m) .. lmax at (v, r).
class Psi2Source {
 public:
  virtual ~Psi2Source() = default;
  virtual int lmax() const = 0;
  virtual Eigen::VectorXcd coefficients(int m, double v, double r) const = 0;
};

class ZeroSource : public Psi2Source {
 public:
  explicit ZeroSource(int lmax) : lmax_(lmax) {}
  int lmax() const override { return lmax_; }
  Eigen::VectorXcd coefficients(int m, double v, double r) const override;

 private:
  int lmax_;
};

class FunctionSource : public Psi2Source {
 public:
  using Fn = std::function<Eigen::VectorXcd(int m, double v, double r)>;
  FunctionSource(int lmax, Fn f) : lmax_(lmax), f_(std::move(f)) {}
  int lmax() const override { return lmax_; }
  Eigen::VectorXcd coefficients(int m, double v, double r) const override { return f_(m, v, r); }

 private:
  int lmax_;
  Fn f_;
};

// psi_{-2} history from evolver snapshots (one series per azimuthal mode), resampled
// by cubic Lagrange interpolation in tau at fixed R and 4-point Lagrange in R.
class EvolverHistorySource : public Psi2Source {
 public:
  enum class BeforeStart { Throw, Zero };
  // All series share the chart, radial grid and lmax of op.
  explicit EvolverHistorySource(const TeukolskyOperator& op,
                                BeforeStart policy = BeforeStart::Throw);
  // Appends a snapshot of the field; tau must increase within each mode. Spin must be -2.
  void add(const EvolutionState& st);

  int lmax() const override { return lmax_; }
  Eigen::VectorXcd coefficients(int m, double v, double r) const override;
  double tau_first(int m) const;
  double tau_last(int m) const;

 private:
  struct Series {
    int m = 0;
    int lmin = 0;
    std::vector<double> tau;
    std::vector<Eigen::MatrixXcd> psi;
  };
  const Series& series_for(int m) const;

  HyperboloidalChart chart_;
  RadialGrid radial_;
  int lmax_;
  BeforeStart policy_;
  std::vector<Series> series_;
};

// Hatted fields on Sigma_init as functions of (r, theta) for mode m (the e^{i m phi} part).
struct InitialSurfaceData {
  std::function<std::array<cplx, 6>(int m, double r, double theta)> values;
  static InitialSurfaceData zero();
};

struct TransportGridSpec {
  double r_max = 20.0;     // outermost line start radius on Sigma_init, units of M
  int n_r = 400;           // radial levels r_j = r_plus + j dr, j = 0..n_r-1
  int lmax = 16;           // angular truncation of the transport fields
  int n_theta = 0;         // 0 selects lmax + 4
  int m = 0;
  int output_stride = 4;   // keep every stride-th line and level
  double chart_constant = 1e6;  // C of the height function defining Sigma_init
};

// Output on the triangle {line j, level i : i <= j}, subsampled by output_stride.
struct TransportState {
  TransportGridSpec spec;
  std::vector<double> r;      // all levels
  std::vector<double> v;      // all line times v_j = tau0 + h(r_j)/2
  std::vector<double> theta;  // angular nodes
  std::vector<int> modes;     // m, and -m when m != 0
  // values[mode][field](k, point): samples at theta[k], point = index into points
  std::vector<std::array<Eigen::MatrixXcd, 7>> values;  // field 6 is psi_{-2}
  std::vector<std::pair<int, int>> points;              // (line j, level i)

  int point_index(int line, int level) const;
  cplx at(int mode_index, int field, int line, int level, int k) const;
};

TransportState integrate_chain(const KerrBackground& bg, const Psi2Source& source,
                               const InitialSurfaceData& init, const TransportGridSpec& spec);

// 1/h'(1/R) = sum_k a_k R^k + b_l(R) R^{l+1}. The a_k are Richardson-extrapolated
// central differences of d/dR (1/H) at R = 0; b_l is obtained by subtraction.
struct HPrimeExpansion {
  int order;
  std::vector<double> a;  // a_0 .. a_order
  double a_next;          // a_{order+1}, the value of b at R = 0
  HyperboloidalChart chart;
  double b(double R) const;
  double one_over_hprime(double R) const { return 1.0 / chart.H(R); }
  double polynomial(double R) const;
  double reconstruct(double R) const;  // sum a_k R^k + b(R) R^(order+1)
};

HPrimeExpansion h_prime_expansion(const KerrBackground& bg, int order, double chart_constant);
inline HPrimeExpansion h_prime_expansion(const KerrBackground& bg, int order) {
  return h_prime_expansion(bg, order, bg.C_hyp());
}

}  // namespace kwave
