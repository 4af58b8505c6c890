#include "kwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kwave {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

std::vector<double> trapezoid_weights(const RadialGrid& g) {
  const auto& R = g.R();
  const int n = g.size();
  std::vector<double> w(n, 0.0);
  for (int k = 0; k + 1 < n; ++k) {
    const double h = R[k + 1] - R[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

// sum over l of |c_l|^2 per column
Eigen::VectorXd col_norm2(const Eigen::MatrixXcd& c) {
  if (c.rows() == 0) return Eigen::VectorXd::Zero(c.cols());
  return c.cwiseAbs2().colwise().sum().transpose();
}

// sum_l (edth factor^2 + edth' factor^2) |c_l|^2 per column
Eigen::VectorXd angular_norm2(int s, int m, const Eigen::MatrixXcd& c) {
  const int lmin = degree_min(s, m);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.cols());
  for (int i = 0; i < c.rows(); ++i) {
    const int l = lmin + i;
    const double f = hedt_factor(s, l) * hedt_factor(s, l) + hedtp_factor(s, l) * hedtp_factor(s, l);
    out += f * c.row(i).cwiseAbs2().transpose();
  }
  return out;
}

Eigen::MatrixXcd scale_by_R(const RadialGrid& g, Eigen::MatrixXcd x, double power) {
  for (int k = 0; k < g.size(); ++k) {
    const double R = g.R()[k];
    x.col(k) *= R == 0.0 ? (power > 0.0 ? 0.0 : 1.0) : std::pow(R, power);
  }
  return x;
}

// r V phi = V phi / R; V phi = O(R^2) so the limit at Scri is 0.
Eigen::MatrixXcd over_R(const RadialGrid& g, Eigen::MatrixXcd x) {
  for (int k = 0; k < g.size(); ++k) {
    const double R = g.R()[k];
    if (R == 0.0) x.col(k).setZero();
    else x.col(k) /= R;
  }
  return x;
}

enum class BOp { Y, V, Edth, Edthp };
constexpr BOp kBOps[] = {BOp::Y, BOp::V, BOp::Edth, BOp::Edthp};

// Operator set {Y, V, r^-1 edth, r^-1 edth'}.
SpinJet apply_b(const TeukolskyOperator& op, const SpinJet& f, BOp b) {
  const int m = op.m(), lmax = op.grid().lmax;
  switch (b) {
    case BOp::Y:
      return {f.s, apply_Y(op, f.g)};
    case BOp::V:
      return {f.s, apply_V(op, f.g)};
    case BOp::Edth: {
      Jet g = apply_hedt_jet(f.s, m, lmax, f.g);
      for (auto& x : g) x = scale_by_R(op.radial(), x, 1.0);
      return {f.s + 1, g};
    }
    case BOp::Edthp: {
      Jet g = apply_hedtp_jet(f.s, m, lmax, f.g);
      for (auto& x : g) x = scale_by_R(op.radial(), x, 1.0);
      return {f.s - 1, g};
    }
  }
  return f;
}

// Rescaled operator set {M Y, r V, edth, edth'}.
SpinJet apply_d(const TeukolskyOperator& op, const SpinJet& f, BOp b) {
  const int m = op.m(), lmax = op.grid().lmax;
  switch (b) {
    case BOp::Y: {
      Jet g = apply_Y(op, f.g);
      for (auto& x : g) x *= op.background().M();
      return {f.s, g};
    }
    case BOp::V: {
      Jet g = apply_V(op, f.g);
      for (auto& x : g) x = over_R(op.radial(), x);
      return {f.s, g};
    }
    case BOp::Edth:
      return {f.s + 1, apply_hedt_jet(f.s, m, lmax, f.g)};
    case BOp::Edthp:
      return {f.s - 1, apply_hedtp_jet(f.s, m, lmax, f.g)};
  }
  return f;
}

double integrate(const TeukolskyOperator& op, const Eigen::VectorXd& density) {
  const auto w = trapezoid_weights(op.radial());
  double sum = 0.0;
  for (int k = 0; k < op.n_r(); ++k) sum += w[k] * density[k];
  return sum;
}

void energy_words(const TeukolskyOperator& op, const SpinJet& f, int depth, int max_depth,
                  double weight, double& total) {
  total += weight * integrate(op, energy_density(op, f));
  if (depth == max_depth) return;
  const double M2 = op.background().M() * op.background().M();
  for (BOp b : kBOps) energy_words(op, apply_b(op, f, b), depth + 1, max_depth, weight * M2, total);
}

void norm_words(const TeukolskyOperator& op, const SpinJet& f, int depth, int max_depth,
                Eigen::VectorXd& density) {
  density += kFourPi * col_norm2(f.g.at(0));
  if (depth == max_depth) return;
  for (BOp b : kBOps) norm_words(op, apply_d(op, f, b), depth + 1, max_depth, density);
}

}  // namespace

SpinJet state_jet(const TeukolskyOperator& op, const EvolutionState& st, int order) {
  return {op.s(), tau_jet(op, st.psi.c, st.Pi.c, order)};
}

Eigen::VectorXd energy_density(const TeukolskyOperator& op, const SpinJet& f) {
  if (f.g.size() < 2) throw std::invalid_argument("energy density needs a jet with two levels");
  const auto& ch = op.chart();
  const auto& R = op.radial().R();
  const double M = op.background().M();
  const Eigen::VectorXd v2 = col_norm2(apply_V(op, f.g)[0]);
  const Eigen::VectorXd y2 = col_norm2(apply_Y(op, f.g)[0]);
  const Eigen::VectorXd a2 = angular_norm2(f.s, op.m(), f.g[0]);
  Eigen::VectorXd d(op.n_r());
  for (int k = 0; k < op.n_r(); ++k) {
    const double H = ch.H(R[k]);
    const double eV = R[k] == 0.0 ? 0.0 : H * v2[k] / (R[k] * R[k]);
    const double eY = ch.V_tau_over_R2(R[k]) * y2[k];
    const double eA = (H + ch.V_tau(R[k])) * a2[k];
    d[k] = M * kFourPi * (eV + eY + eA);
  }
  return d;
}

double slice_energy(const TeukolskyOperator& op, const SpinJet& f, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("slice energy order must lie in 1..3");
  if (static_cast<int>(f.g.size()) < k + 1) throw std::invalid_argument("jet too short for E^k");
  double total = 0.0;
  energy_words(op, f, 0, k - 1, 1.0, total);
  return total;
}

double slice_energy(const TeukolskyOperator& op, const EvolutionState& st, int k) {
  return slice_energy(op, state_jet(op, st, k), k);
}

double weighted_norm(const TeukolskyOperator& op, const SpinJet& f, int k, double alpha,
                     NormRegion region, double tau) {
  if (k < 0 || static_cast<int>(f.g.size()) < k + 1) throw std::invalid_argument("jet too short for W^k");
  if (alpha < -3.0 || alpha > 9.0) throw std::invalid_argument("alpha must lie in [-3, 9]");
  Eigen::VectorXd density = Eigen::VectorXd::Zero(op.n_r());
  norm_words(op, f, 0, k, density);
  const auto& R = op.radial().R();
  const double M = op.background().M();
  const double p = -alpha - 2.0;  // r^alpha dr = R^{-alpha-2} dR
  const auto w = trapezoid_weights(op.radial());
  double sum = 0.0;
  for (int i = 0; i < op.n_r(); ++i) {
    const double r_inv = R[i];
    const bool exterior = tau <= 0.0 || r_inv * tau <= 1.0;  // r >= tau
    const bool interior = r_inv * tau >= 1.0;                // r <= tau
    if (region == NormRegion::Exterior && !exterior) continue;
    if (region == NormRegion::Interior && !interior) continue;
    if (r_inv == 0.0 && p < 0.0) {
      if (density[i] != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    sum += w[i] * std::pow(r_inv, p) * density[i];
  }
  return std::pow(M, -alpha - 1.0) * sum;
}

double morawetz_slice(const TeukolskyOperator& op, const SpinJet& f) {
  if (f.g.size() < 2) throw std::invalid_argument("Morawetz density needs a jet with two levels");
  const auto& R = op.radial().R();
  const double M = op.background().M();
  Eigen::VectorXd first = Eigen::VectorXd::Zero(op.n_r());
  for (BOp b : kBOps) first += col_norm2(apply_b(op, f, b).g.at(0));
  const Eigen::VectorXd zeroth = col_norm2(f.g[0]);
  Eigen::VectorXd d(op.n_r());
  for (int k = 0; k < op.n_r(); ++k) {
    // M^3 r^-3 dr = M^3 R dR and M r^-3 dr = M R dR
    const double far = R[k] * M <= 0.1 ? 1.0 : 0.0;
    d[k] = kFourPi * R[k] * (M * M * M * far * first[k] + M * zeroth[k]);
  }
  return integrate(op, d);
}

void TimeIntegral::add(double tau, double value) {
  if (started_) {
    if (!(tau > last_tau_)) throw std::invalid_argument("time integral samples must increase in tau");
    total_ += 0.5 * (tau - last_tau_) * (value + last_);
  }
  started_ = true;
  last_tau_ = tau;
  last_ = value;
}

NormTracker::NormTracker(const TeukolskyOperator& op, NormSpec spec) : op_(op), spec_(std::move(spec)) {
  if (spec_.kmax < 1 || spec_.kmax > 3) throw std::invalid_argument("kmax must lie in 1..3");
}

const NormReport& NormTracker::add(const EvolutionState& st) {
  int order = spec_.kmax;
  for (const auto& [k, alpha] : spec_.weighted) order = std::max(order, k);
  const SpinJet f = state_jet(op_, st, std::max(order, 1));
  NormReport rep;
  rep.tau = st.tau;
  for (int k = 1; k <= spec_.kmax; ++k) rep.Ek.push_back(slice_energy(op_, f, k));
  rep.E1 = rep.Ek.front();
  for (const auto& [k, alpha] : spec_.weighted) rep.W.push_back({k, alpha, weighted_norm(op_, f, k, alpha)});
  bulk_.add(st.tau, morawetz_slice(op_, f));
  rep.morawetz = bulk_.value();
  reports_.push_back(rep);
  return reports_.back();
}

Eigen::MatrixXcd conjugate_field(int s, int m, int lmax, const Eigen::MatrixXcd& c) {
  const HarmonicBasis b(s, m, lmax);
  const HarmonicBasis bc(-s, -m, lmax);
  Eigen::MatrixXcd out = c.conjugate();
  for (int i = 0; i < b.n_ell(); ++i) {
    double dot = 0.0;
    for (int j = 0; j < b.n_theta(); ++j) dot += b.weights()[j] * b.values()(j, i) * bc.values()(j, i);
    if (dot < 0.0) out.row(i) *= -1.0;
  }
  return out;
}

namespace {

Eigen::MatrixXcd ladder_up(int s, int m, int lmax, const Eigen::MatrixXcd& c, int times) {
  Jet g{c};
  for (int t = 0; t < times; ++t) g = apply_hedt_jet(s + t, m, lmax, g);
  return g[0];
}

// Projection of sin^k(theta) times a spin (2 - k) field onto spin 2.
Eigen::MatrixXd sin_power_matrix(int k, int m, int lmax) {
  const int n_theta = lmax + 8;
  const HarmonicBasis in(2 - k, m, lmax, n_theta);
  const HarmonicBasis out(2, m, lmax, n_theta);
  Eigen::VectorXd ws(n_theta);
  for (int j = 0; j < n_theta; ++j) ws[j] = out.weights()[j] * std::pow(std::sin(out.theta()[j]), k);
  return out.values().transpose() * ws.asDiagonal() * in.values();
}

}  // namespace

Eigen::MatrixXcd tsi_residual(const TeukolskyOperator& op_minus2, const Jet& minus2,
                              const Jet& minus2_mirror, const TeukolskyOperator& op_plus2,
                              const Jet& plus2) {
  if (op_minus2.s() != -2 || op_plus2.s() != 2) throw std::invalid_argument("TSI needs spin -2 and +2 operators");
  if (op_minus2.m() != op_plus2.m() || op_minus2.grid().lmax != op_plus2.grid().lmax ||
      op_minus2.n_r() != op_plus2.n_r() || op_minus2.background().a() != op_plus2.background().a() ||
      op_minus2.chart().C() != op_plus2.chart().C()) {
    throw std::invalid_argument("TSI operators must share grid, mode and background");
  }
  if (minus2.size() < 5 || minus2_mirror.size() < 2 || plus2.size() < 5) {
    throw std::invalid_argument("TSI needs five-level jets");
  }
  const int m = op_minus2.m(), lmax = op_minus2.grid().lmax;
  const double M = op_minus2.background().M(), a = op_minus2.background().a();
  Eigen::MatrixXcd res = ladder_up(-2, m, lmax, minus2[0], 4);
  res += 3.0 * M * conjugate_field(-2, -m, lmax, minus2_mirror[1]);
  const cplx ring(0.0, a / std::sqrt(2.0));
  double binom = 1.0;
  for (int k = 1; k <= 4; ++k) {
    binom = binom * (4 - k + 1) / k;
    if (a == 0.0) break;
    const Eigen::MatrixXcd e = ladder_up(-2, m, lmax, minus2[k], 4 - k);
    res += (binom * std::pow(ring, k)) * (sin_power_matrix(k, m, lmax).cast<cplx>() * e);
  }
  Jet z = plus2;
  for (int t = 0; t < 4; ++t) z = apply_Z(op_plus2, z);
  res -= 0.25 * z[0];
  return res;
}

PowerFit fit_local_power(const std::vector<double>& tau, const std::vector<double>& value,
                         double tau_a, double tau_b, FitOptions options) {
  if (tau.size() != value.size()) throw std::invalid_argument("tau and value sizes differ");
  if (!(tau_a > 0.0) || !(tau_b > tau_a)) throw std::invalid_argument("window must satisfy 0 < tau_a < tau_b");
  std::vector<int> idx;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < tau_a || tau[i] > tau_b) continue;
    if (!(value[i] > 0.0) || !std::isfinite(value[i])) {
      throw std::invalid_argument("fit_local_power: non-positive sample at tau = " + std::to_string(tau[i]));
    }
    idx.push_back(static_cast<int>(i));
  }
  if (options.envelope) {
    std::vector<int> peaks;
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const int i = idx[q];
      const bool left = q == 0 || value[i] >= value[idx[q - 1]];
      const bool right = q + 1 == idx.size() || value[i] >= value[idx[q + 1]];
      if (left && right) peaks.push_back(i);
    }
    idx = peaks;
  }
  if (idx.size() < 3) throw std::invalid_argument("fit_local_power needs at least 3 samples in the window");

  auto fit = [&](const std::vector<int>& pts, double* rms) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (int i : pts) {
      const double x = std::log(tau[i]), y = std::log(value[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    const double b = den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
    const double c = (sy - b * sx) / n;
    if (rms) {
      double e = 0.0;
      for (int i : pts) {
        const double r = std::log(value[i]) - (c + b * std::log(tau[i]));
        e += r * r;
      }
      *rms = std::sqrt(e / n);
    }
    return -b;
  };

  PowerFit out;
  out.tau_a = tau_a;
  out.tau_b = tau_b;
  out.samples = static_cast<int>(idx.size());
  out.p = fit(idx, &out.residual);
  const int nsub = std::max(options.subwindows, 1);
  for (int w = 0; w < nsub; ++w) {
    const double lo = tau_a * std::pow(tau_b / tau_a, double(w) / nsub);
    const double hi = tau_a * std::pow(tau_b / tau_a, double(w + 1) / nsub);
    std::vector<int> pts;
    for (int i : idx)
      if (tau[i] >= lo && tau[i] <= hi) pts.push_back(i);
    if (pts.size() >= 3) out.sub_p.push_back(fit(pts, nullptr));
  }
  if (!out.sub_p.empty()) {
    const auto [mn, mx] = std::minmax_element(out.sub_p.begin(), out.sub_p.end());
    out.drift = *mx - *mn;
  }
  return out;
}

BeamMonitor::BeamMonitor(const TeukolskyOperator& op, int k, double transient_end, double tolerance)
    : op_(op), k_(k), transient_end_(transient_end), tolerance_(tolerance) {
  if (op.s() != -2) throw std::invalid_argument("BEAM monitor expects a spin -2 operator");
  if (k < 1 || k > 3) throw std::invalid_argument("BEAM energy order must lie in 1..3");
}

void BeamMonitor::add(const EvolutionState& st) {
  Jet jet = tau_jet(op_, st.psi.c, st.Pi.c, k_ + 2);
  double total = 0.0;
  for (int i = 0; i <= 2; ++i) {
    total += slice_energy(op_, SpinJet{-2, jet}, k_);
    if (i < 2) jet = apply_Vprime(op_, jet);
  }
  tau_.push_back(st.tau);
  total_.push_back(total);
}

BeamReport BeamMonitor::report() const {
  BeamReport r;
  r.tau = tau_;
  r.total = total_;
  if (total_.empty()) return r;
  r.reference = total_.front();
  for (std::size_t i = 0; i < tau_.size(); ++i) {
    if (tau_[i] < transient_end_) continue;
    const double ratio = r.reference > 0.0 ? total_[i] / r.reference : (total_[i] > 0.0 ? INFINITY : 0.0);
    r.sup_ratio = std::max(r.sup_ratio, ratio);
  }
  r.bounded = r.sup_ratio <= 1.0 + tolerance_;
  return r;
}

}  // namespace kwave
