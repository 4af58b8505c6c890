#pragma once

// Method-of-lines evolution of the spin-weight s Teukolsky equation for one azimuthal
// mode in the compactified hyperboloidal chart (tau, R = 1/r). Angular dependence is
// spectral in l, radial derivatives are 4th-order finite differences on a uniform grid
// R in [0, 1/r_plus], and time stepping is classical RK4.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "kwave/background.hpp"
#include "kwave/spectral.hpp"

namespace kwave {

struct GridSpec {
  int n_r = 200;
  int lmax = 8;
  int fd_order = 4;
  double cfl = 0.5;
  double dissipation = 0.0;     // Kreiss-Oliger strength, 0 disables it
  double chart_constant = 1.0;  // C in the height function used by the evolver
};

// Coefficients over (l, R): rows are l = lmin .. lmax, columns are R nodes.
struct SpinField {
  int s = 0;
  int m = 0;
  int lmin = 0;
  Eigen::MatrixXcd c;

  SpinField() = default;
  SpinField(int s_, int m_, int lmax, int n_r)
      : s(s_), m(m_), lmin(degree_min(s_, m_)),
        c(Eigen::MatrixXcd::Zero(lmax - degree_min(s_, m_) + 1, n_r)) {}
  int n_ell() const { return static_cast<int>(c.rows()); }
  int n_r() const { return static_cast<int>(c.cols()); }
};

struct EvolutionState {
  double tau = 0.0;
  SpinField psi;
  SpinField Pi;
};

// Finite-difference weights for derivatives 0..order at x0 on nodes x (Fornberg).
// Returns w[k][j], the weight of node j in the k-th derivative.
std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& x,
                                                  int order);

// Sparse row stencil: out_k = sum_j w_k[j] in_{start_k + j}.
struct Stencil {
  std::vector<int> start;
  std::vector<std::vector<double>> w;
  void apply(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
  Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& in) const {
    Eigen::MatrixXcd out(in.rows(), in.cols());
    apply(in, out);
    return out;
  }
};

class RadialGrid {
 public:
  RadialGrid(double R_max, int n);
  int size() const { return static_cast<int>(R_.size()); }
  double dR() const { return dR_; }
  const std::vector<double>& R() const { return R_; }
  const Stencil& D1() const { return D1_; }
  const Stencil& D2() const { return D2_; }
  // 4-point Lagrange interpolation weights at R; returns the first node index.
  int interpolation_weights(double R, double w[4]) const;

 private:
  std::vector<double> R_;
  double dR_;
  Stencil D1_;
  Stencil D2_;
};

struct OperatorOptions {
  // Negative control: evaluates the lower-order spin terms with -s.
  bool flip_spin_terms = false;
};

class TeukolskyOperator {
 public:
  TeukolskyOperator(const KerrBackground& bg, const GridSpec& grid, int s, int m,
                    OperatorOptions options = {});

  int s() const { return s_; }
  int m() const { return m_; }
  const KerrBackground& background() const { return bg_; }
  const HyperboloidalChart& chart() const { return chart_; }
  const HarmonicBasis& basis() const { return basis_; }
  const RadialGrid& radial() const { return radial_; }
  const GridSpec& grid() const { return spec_; }
  int n_ell() const { return basis_.n_ell(); }
  int n_r() const { return radial_.size(); }

  SpinField zero_field() const { return SpinField(s_, m_, spec_.lmax, n_r()); }

  // d_tau Pi from (psi, Pi).
  Eigen::MatrixXcd acceleration(const Eigen::MatrixXcd& psi, const Eigen::MatrixXcd& Pi) const;

  // Left side of L psi_tautau = T with exact radial derivatives supplied by the caller.
  Eigen::MatrixXcd source_term(const Eigen::MatrixXcd& psi, const Eigen::MatrixXcd& psi_R,
                               const Eigen::MatrixXcd& psi_RR, const Eigen::MatrixXcd& Pi,
                               const Eigen::MatrixXcd& Pi_R) const;
  // Applies (A(R) - a^2 sin^2)^{-1} column-wise.
  Eigen::MatrixXcd solve_principal(const Eigen::MatrixXcd& T) const;

  // Smallest eigenvalue of A(R) - a^2 sin^2 over the grid.
  double principal_min() const { return principal_min_; }

  void rhs(const EvolutionState& st, Eigen::MatrixXcd& dpsi, Eigen::MatrixXcd& dPi) const;

  // Largest |dR/dtau| over all radial characteristics on the grid.
  double max_speed() const;
  double stable_dt() const;

 private:
  KerrBackground bg_;
  GridSpec spec_;
  int s_;
  int m_;
  HyperboloidalChart chart_;
  HarmonicBasis basis_;
  RadialGrid radial_;
  // per-node coefficients of the compactified operator
  std::vector<double> B2_, R4D_, FR_, F0_, Ftau_;
  std::vector<cplx> cPi_, cR_, c0_;
  Eigen::VectorXd sring_;
  Eigen::MatrixXcd spin_cos_;  // -2 i a s_eff cos coupling acting on Pi
  std::vector<Eigen::MatrixXd> Linv_;
  std::vector<double> Ainv_;  // used when a = 0
  double principal_min_ = 0.0;
};

struct SpeedReport {
  double R;
  double c_minus;  // smaller root
  double c_plus;   // larger root
};

// Radial characteristic speeds dR/dtau: roots of A c^2 - 2 B c - R^4 Delta = 0.
SpeedReport characteristic_speeds(const HyperboloidalChart& chart, double R);

struct BoundarySpeeds {
  SpeedReport scri;
  SpeedReport horizon;
  bool outflow_ok;  // both speeds <= 0 at R = 0 and >= 0 at the horizon
};
BoundarySpeeds boundary_speeds(const HyperboloidalChart& chart);

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Classical RK4 step with optional Kreiss-Oliger dissipation.
void step(const TeukolskyOperator& op, EvolutionState& st, double dt);

struct ProbeSpec {
  double R = 0.0;
  int l = 2;
};

struct ProbeSample {
  double tau;
  double R;
  int l;
  cplx value;
};

struct EvolveSchedule {
  double tau_end = 100.0;
  double dt = 0.0;                // 0 selects cfl-limited dt aligned to the output cadence
  double output_every = 1.0;      // probe and snapshot cadence in tau
  std::vector<ProbeSpec> probes;  // sampled every output_every
  double growth_limit = 1e10;
  // Clock origin: output times are origin + k output_every. NaN selects the initial tau;
  // restarts pass the original origin so that resumed runs are bit-exact.
  double tau_origin = std::numeric_limits<double>::quiet_NaN();
};

using SnapshotCallback = std::function<void(const EvolutionState&)>;

// Evolves st to tau_end, sampling probes and calling on_output at each cadence point
// (including the initial state). Returns the probe series.
std::vector<ProbeSample> evolve(const TeukolskyOperator& op, EvolutionState& st,
                                const EvolveSchedule& schedule,
                                const SnapshotCallback& on_output = {});

// Value of coefficient l at radius R by 4-point interpolation of the field.
cplx probe_value(const TeukolskyOperator& op, const SpinField& f, double R, int l);

struct InitialData {
  int l = 2;
  double center = 10.0;  // in r*, units of M
  double width = 2.0;    // units of M
  double amplitude = 1.0;
};

// psi = 0, Pi = amplitude exp(-(r* - center)^2/(2 width^2)) sY_lm at tau0.
EvolutionState gaussian_initial_data(const TeukolskyOperator& op, const InitialData& d);

// tau-derivative jet: d_0 = psi, d_1 = Pi, d_{j+2} from the equation.
std::vector<Eigen::MatrixXcd> tau_jet(const TeukolskyOperator& op, const Eigen::MatrixXcd& psi,
                                      const Eigen::MatrixXcd& Pi, int order);

// Operators applied to jets; the result is one order shorter.
using Jet = std::vector<Eigen::MatrixXcd>;
Jet apply_Y(const TeukolskyOperator& op, const Jet& g);
Jet apply_V(const TeukolskyOperator& op, const Jet& g);
// (a^2 + r^2)/M V
Jet apply_Vprime(const TeukolskyOperator& op, const Jet& g);
// Y + r/(a^2 + r^2)
Jet apply_Z(const TeukolskyOperator& op, const Jet& g);
// Spin-raising and lowering on every jet level (coefficient ladders), spin s -> s +/- 1.
Jet apply_hedt_jet(int s, int m, int lmax, const Jet& g);
Jet apply_hedtp_jet(int s, int m, int lmax, const Jet& g);

struct DerivedStack {
  std::vector<SpinField> psi;  // psi^(i), i = 0..4
};

DerivedStack derived_stack(const TeukolskyOperator& op, const EvolutionState& st);

}  // namespace kwave
