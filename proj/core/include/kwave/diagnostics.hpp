#pragma once

// Measured norms on hyperboloidal slices, the Teukolsky-Starobinsky residual, BEAM
// monitoring and late-time power-index fits.
//
// Slice integrals use nu = d tau, the Leray form dr ^ sin(theta) dtheta ^ dphi, and the
// trapezoidal rule on the uniform R grid of the operator (dr = dR/R^2). Angular integrals
// are exact in coefficient space: the harmonics integrate to 4 pi in |.|^2.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kwave/evolver.hpp"

namespace kwave {

// A tau-jet of a spin-weighted field of azimuthal mode op.m().
struct SpinJet {
  int s = 0;
  Jet g;
};

SpinJet state_jet(const TeukolskyOperator& op, const EvolutionState& st, int order);

// E^1 integrand per R node (already multiplied by M, 4 pi and 1/R^2): needs g.size() >= 2.
Eigen::VectorXd energy_density(const TeukolskyOperator& op, const SpinJet& f);

// E^k = sum_{|a| <= k-1} M^{2|a|} E^1(B^a phi), B = {Y, V, r^-1 edth, r^-1 edth'}.
// The jet must have at least k + 1 levels. k in 1..3.
double slice_energy(const TeukolskyOperator& op, const SpinJet& f, int k);
double slice_energy(const TeukolskyOperator& op, const EvolutionState& st, int k);

enum class NormRegion { Slice, Exterior, Interior };  // exterior r >= tau, interior r <= tau

// W^k_alpha = M^{-alpha-1} int r^alpha sum_{|a| <= k} |D^a phi|^2 d^3mu, D = {MY, rV, edth, edth'}.
// Returns +inf when the weight is singular at Scri and the field does not vanish there.
double weighted_norm(const TeukolskyOperator& op, const SpinJet& f, int k, double alpha,
                     NormRegion region = NormRegion::Slice, double tau = 0.0);

// Slice integrand of the Morawetz bulk B^1: int_{r >= 10M} M^3 r^-3 sum_B |B phi|^2 d^3mu
// + int M r^-3 |phi|^2 d^3mu.
double morawetz_slice(const TeukolskyOperator& op, const SpinJet& f);

// Trapezoidal accumulation of slice values in tau.
class TimeIntegral {
 public:
  void add(double tau, double value);
  double value() const { return total_; }

 private:
  bool started_ = false;
  double last_tau_ = 0.0;
  double last_ = 0.0;
  double total_ = 0.0;
};

struct NormReport {
  double tau = 0.0;
  double E1 = 0.0;
  std::vector<double> Ek;  // E^1 .. E^kmax
  struct Weighted {
    int k;
    double alpha;
    double value;
  };
  std::vector<Weighted> W;
  double morawetz = 0.0;  // accumulated bulk from the first report
};

struct NormSpec {
  int kmax = 2;
  std::vector<std::pair<int, double>> weighted = {{0, -2.0}, {1, -2.0}};
};

// Builds reports along a history; call add() at each output point in increasing tau.
class NormTracker {
 public:
  NormTracker(const TeukolskyOperator& op, NormSpec spec);
  const NormReport& add(const EvolutionState& st);
  const std::vector<NormReport>& reports() const { return reports_; }

 private:
  const TeukolskyOperator& op_;
  NormSpec spec_;
  TimeIntegral bulk_;
  std::vector<NormReport> reports_;
};

// tau-ring = i a sin(theta)/sqrt2 with spin weight 1; the residual of
// edth^4 psi_{-2} + 3M L_xi conj(psi_{-2}) + sum_k C(4,k) tau-ring^k edth^{4-k} L_xi^k psi_{-2}
// - (1/4)(Y + r/(a^2 + r^2))^4 psi_{+2}, as spin +2 coefficients of mode m (lmax x R).
// minus2 is the jet of psi_{-2} for mode m and minus2_mirror that of mode -m (the same jet
// when m = 0); plus2 is the jet of psi_{+2}. All jets need five levels.
// op_minus2 and op_plus2 must share background, chart, radial grid, m and lmax.
Eigen::MatrixXcd tsi_residual(const TeukolskyOperator& op_minus2, const Jet& minus2,
                              const Jet& minus2_mirror, const TeukolskyOperator& op_plus2,
                              const Jet& plus2);

// Coefficients of conj(f) for a spin-s field of mode m, as a spin -s field of mode -m.
Eigen::MatrixXcd conjugate_field(int s, int m, int lmax, const Eigen::MatrixXcd& c);

struct PowerFit {
  double tau_a = 0.0;
  double tau_b = 0.0;
  double p = 0.0;         // local power index, |phi| ~ tau^-p
  double drift = 0.0;     // max - min of the sub-window indices
  double residual = 0.0;  // rms of the log-log fit residual
  int samples = 0;
  std::vector<double> sub_p;  // indices on log-spaced sub-windows, early to late
};

struct FitOptions {
  int subwindows = 4;
  // Fit the upper envelope (local maxima of |phi|) instead of all samples; for signals
  // with zero crossings or oscillation.
  bool envelope = false;
};

// Least-squares slope of ln|phi| against ln tau on [tau_a, tau_b].
// Throws std::invalid_argument for non-positive samples or fewer than 3 points.
PowerFit fit_local_power(const std::vector<double>& tau, const std::vector<double>& value,
                         double tau_a, double tau_b, FitOptions options = {});

struct BeamReport {
  std::vector<double> tau;
  std::vector<double> total;  // sum_{i <= 2} E^k(psi^(i))
  double reference = 0.0;     // value at the first sample
  double sup_ratio = 0.0;     // sup over tau >= transient_end of total / reference
  bool bounded = true;
};

// Monitors sum_{i <= 2} E^k(psi^(i)) for a spin -2 history, psi^(i) = (V')^i psi.
class BeamMonitor {
 public:
  BeamMonitor(const TeukolskyOperator& op, int k = 1, double transient_end = 50.0,
              double tolerance = 0.01);
  void add(const EvolutionState& st);
  BeamReport report() const;

 private:
  const TeukolskyOperator& op_;
  int k_;
  double transient_end_;
  double tolerance_;
  std::vector<double> tau_;
  std::vector<double> total_;
};

}  // namespace kwave
