#include "kwave/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kwave {

std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& x,
                                                  int order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

void Stencil::apply(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const {
  const int n = static_cast<int>(start.size());
  out.resize(in.rows(), n);
  for (int k = 0; k < n; ++k) {
    const auto& wk = w[k];
    auto col = out.col(k);
    col.setZero();
    for (std::size_t j = 0; j < wk.size(); ++j) col += wk[j] * in.col(start[k] + static_cast<int>(j));
  }
}

namespace {

Stencil make_stencil(const std::vector<double>& R, int deriv, int width_interior,
                     int width_boundary) {
  const int n = static_cast<int>(R.size());
  Stencil st;
  st.start.resize(n);
  st.w.resize(n);
  const int half = width_interior / 2;
  for (int k = 0; k < n; ++k) {
    int s0;
    int width;
    if (k < half) {
      s0 = 0;
      width = width_boundary;
    } else if (k >= n - half) {
      width = width_boundary;
      s0 = n - width;
    } else {
      s0 = k - half;
      width = width_interior;
    }
    std::vector<double> x(R.begin() + s0, R.begin() + s0 + width);
    st.start[k] = s0;
    st.w[k] = fornberg_weights(R[k], x, deriv)[deriv];
  }
  return st;
}

// Multiplies column k of g by v[k].
Eigen::MatrixXcd scale_cols(const Eigen::MatrixXcd& g, const std::vector<double>& v) {
  Eigen::MatrixXcd out = g;
  for (int k = 0; k < g.cols(); ++k) out.col(k) *= v[k];
  return out;
}

}  // namespace

RadialGrid::RadialGrid(double R_max, int n) {
  if (n < 32) throw std::invalid_argument("radial grid needs at least 32 nodes, got " + std::to_string(n));
  R_.resize(n);
  dR_ = R_max / (n - 1);
  for (int k = 0; k < n; ++k) R_[k] = k * dR_;
  R_[n - 1] = R_max;
  D1_ = make_stencil(R_, 1, 5, 5);
  D2_ = make_stencil(R_, 2, 5, 6);
}

int RadialGrid::interpolation_weights(double R, double w[4]) const {
  const int n = size();
  int i0 = static_cast<int>(std::floor(R / dR_)) - 1;
  i0 = std::clamp(i0, 0, n - 4);
  std::vector<double> x(R_.begin() + i0, R_.begin() + i0 + 4);
  const auto c = fornberg_weights(R, x, 0)[0];
  for (int j = 0; j < 4; ++j) w[j] = c[j];
  return i0;
}

TeukolskyOperator::TeukolskyOperator(const KerrBackground& bg, const GridSpec& grid, int s, int m,
                                     OperatorOptions options)
    : bg_(bg),
      spec_(grid),
      s_(s),
      m_(m),
      chart_(bg, grid.chart_constant),
      basis_(s, m, grid.lmax),
      radial_(1.0 / bg.r_plus(), grid.n_r) {
  if (std::abs(s) > 2) throw std::invalid_argument("evolver supports |s| <= 2");
  if (grid.fd_order != 4) throw std::invalid_argument("only fd_order = 4 is implemented");
  const double M = bg.M();
  const double a = bg.a();
  const double se = options.flip_spin_terms ? -s : s;
  const cplx im(0.0, m);
  const int n = radial_.size();
  B2_.resize(n);
  R4D_.resize(n);
  FR_.resize(n);
  F0_.resize(n);
  Ftau_.resize(n);
  cPi_.resize(n);
  cR_.resize(n);
  c0_.resize(n);
  std::vector<double> A(n);
  for (int k = 0; k < n; ++k) {
    const double R = radial_.R()[k];
    const double H = chart_.H(R);
    const double q = chart_.q(R);
    const double R2D = chart_.R2Delta(R);
    const double a2R2 = a * a * R * R;
    const double u = 1.0 + a2R2;
    A[k] = chart_.A(R);
    B2_[k] = 2.0 * chart_.B(R);
    R4D_[k] = R * R * R2D;
    FR_[k] = -2.0 * R * (1.0 + se * (1.0 - M * R) - R * (M - a * a * R + 2.0 * M / u));
    Ftau_[k] = 2.0 * H * M * (1.0 - a2R2) / u + 2.0 * se * (H * M - q) - R2D * chart_.dH(R);
    F0_[k] = (2.0 * M * R - 2.0 * se * (1.0 - M * R) * u + a2R2 * (1.0 - 4.0 * M * R + a2R2)) / (u * u);
    cPi_[k] = -(Ftau_[k] + 2.0 * a * im * (H - 1.0));
    cR_[k] = -(2.0 * a * R * R * im + FR_[k]);
    c0_[k] = -(2.0 * a * R * im / u + F0_[k]);
  }
  sring_ = basis_.s_ring_eigen();
  spin_cos_ = cplx(0.0, -2.0 * a * se) * basis_.cos_matrix().cast<cplx>();
  const Eigen::MatrixXd S2 = basis_.sin2_matrix();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(basis_.n_ell(), basis_.n_ell());
  principal_min_ = INFINITY;
  if (a == 0.0) {
    Ainv_.resize(n);
    for (int k = 0; k < n; ++k) {
      Ainv_[k] = 1.0 / A[k];
      principal_min_ = std::min(principal_min_, A[k]);
    }
  } else {
    Linv_.resize(n);
    for (int k = 0; k < n; ++k) {
      const Eigen::MatrixXd L = A[k] * I - a * a * S2;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
      principal_min_ = std::min(principal_min_, es.eigenvalues().minCoeff());
      Linv_[k] = L.inverse();
    }
  }
  if (!(principal_min_ > 0.0)) {
    throw DomainError("coefficient of the second tau-derivative is not positive definite "
                      "(min eigenvalue " + std::to_string(principal_min_) + ")");
  }
}

Eigen::MatrixXcd TeukolskyOperator::source_term(const Eigen::MatrixXcd& psi,
                                                const Eigen::MatrixXcd& psi_R,
                                                const Eigen::MatrixXcd& psi_RR,
                                                const Eigen::MatrixXcd& Pi,
                                                const Eigen::MatrixXcd& Pi_R) const {
  const int n = static_cast<int>(psi.cols());
  Eigen::MatrixXcd T(psi.rows(), n);
  const Eigen::VectorXcd sr = sring_.cast<cplx>();
  for (int k = 0; k < n; ++k) {
    T.col(k) = -B2_[k] * Pi_R.col(k) + cPi_[k] * Pi.col(k) + R4D_[k] * psi_RR.col(k) +
               cR_[k] * psi_R.col(k) + c0_[k] * psi.col(k) +
               sr.cwiseProduct(psi.col(k)) + spin_cos_ * Pi.col(k);
  }
  return T;
}

Eigen::MatrixXcd TeukolskyOperator::solve_principal(const Eigen::MatrixXcd& T) const {
  Eigen::MatrixXcd out(T.rows(), T.cols());
  if (!Ainv_.empty()) {
    for (int k = 0; k < T.cols(); ++k) out.col(k) = Ainv_[k] * T.col(k);
  } else {
    for (int k = 0; k < T.cols(); ++k) out.col(k) = Linv_[k].cast<cplx>() * T.col(k);
  }
  return out;
}

Eigen::MatrixXcd TeukolskyOperator::acceleration(const Eigen::MatrixXcd& psi,
                                                 const Eigen::MatrixXcd& Pi) const {
  const auto& D1 = radial_.D1();
  const auto& D2 = radial_.D2();
  return solve_principal(source_term(psi, D1(psi), D2(psi), Pi, D1(Pi)));
}

void TeukolskyOperator::rhs(const EvolutionState& st, Eigen::MatrixXcd& dpsi,
                            Eigen::MatrixXcd& dPi) const {
  dpsi = st.Pi.c;
  dPi = acceleration(st.psi.c, st.Pi.c);
}

SpeedReport characteristic_speeds(const HyperboloidalChart& chart, double R) {
  const double A = chart.A(R);
  const double B = chart.B(R);
  const double D = R * R * chart.R2Delta(R);
  const double disc = std::sqrt(B * B + A * D);
  // roots of A c^2 - 2 B c - D = 0, written to avoid cancellation
  double c1;
  double c2;
  if (B >= 0.0) {
    c1 = (B + disc) / A;
    c2 = (c1 != 0.0) ? -D / (A * c1) : 0.0;
  } else {
    c1 = (B - disc) / A;
    c2 = (c1 != 0.0) ? -D / (A * c1) : 0.0;
  }
  return {R, std::min(c1, c2), std::max(c1, c2)};
}

BoundarySpeeds boundary_speeds(const HyperboloidalChart& chart) {
  BoundarySpeeds b;
  b.scri = characteristic_speeds(chart, 0.0);
  b.horizon = characteristic_speeds(chart, 1.0 / chart.r_plus());
  const double tol = 1e-14;
  b.outflow_ok = b.scri.c_plus <= tol && b.scri.c_minus <= tol && b.horizon.c_minus >= -tol &&
                 b.horizon.c_plus >= -tol;
  return b;
}

double TeukolskyOperator::max_speed() const {
  double c = 0.0;
  for (double R : radial_.R()) {
    const SpeedReport sp = characteristic_speeds(chart_, R);
    c = std::max({c, std::abs(sp.c_minus), std::abs(sp.c_plus)});
  }
  return c;
}

double TeukolskyOperator::stable_dt() const { return spec_.cfl * radial_.dR() / max_speed(); }

namespace {

void add_dissipation(const TeukolskyOperator& op, const Eigen::MatrixXcd& u, Eigen::MatrixXcd& du) {
  const double sigma = op.grid().dissipation;
  if (sigma == 0.0) return;
  const int n = static_cast<int>(u.cols());
  const double f = sigma / (64.0 * op.radial().dR());
  for (int k = 3; k < n - 3; ++k) {
    du.col(k) += f * (u.col(k - 3) - 6.0 * u.col(k - 2) + 15.0 * u.col(k - 1) - 20.0 * u.col(k) +
                      15.0 * u.col(k + 1) - 6.0 * u.col(k + 2) + u.col(k + 3));
  }
}

void full_rhs(const TeukolskyOperator& op, const Eigen::MatrixXcd& psi, const Eigen::MatrixXcd& Pi,
              Eigen::MatrixXcd& dpsi, Eigen::MatrixXcd& dPi) {
  dpsi = Pi;
  dPi = op.acceleration(psi, Pi);
  add_dissipation(op, psi, dpsi);
  add_dissipation(op, Pi, dPi);
}

}  // namespace

void step(const TeukolskyOperator& op, EvolutionState& st, double dt) {
  const Eigen::MatrixXcd& y0 = st.psi.c;
  const Eigen::MatrixXcd& p0 = st.Pi.c;
  Eigen::MatrixXcd k1y, k1p, k2y, k2p, k3y, k3p, k4y, k4p;
  full_rhs(op, y0, p0, k1y, k1p);
  full_rhs(op, y0 + 0.5 * dt * k1y, p0 + 0.5 * dt * k1p, k2y, k2p);
  full_rhs(op, y0 + 0.5 * dt * k2y, p0 + 0.5 * dt * k2p, k3y, k3p);
  full_rhs(op, y0 + dt * k3y, p0 + dt * k3p, k4y, k4p);
  st.psi.c += (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  st.Pi.c += (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  st.tau += dt;
}

cplx probe_value(const TeukolskyOperator& op, const SpinField& f, double R, int l) {
  if (l < f.lmin || l - f.lmin >= f.n_ell()) return 0.0;
  double w[4];
  const int i0 = op.radial().interpolation_weights(R, w);
  cplx v = 0.0;
  for (int j = 0; j < 4; ++j) v += w[j] * f.c(l - f.lmin, i0 + j);
  return v;
}

std::vector<ProbeSample> evolve(const TeukolskyOperator& op, EvolutionState& st,
                                const EvolveSchedule& schedule, const SnapshotCallback& on_output) {
  std::vector<ProbeSample> out;
  const double dt_max = schedule.dt > 0.0 ? schedule.dt : op.stable_dt();
  const int nsub = std::max(1, static_cast<int>(std::ceil(schedule.output_every / dt_max - 1e-9)));
  const double dt = schedule.output_every / nsub;
  const int n_out = static_cast<int>(std::llround((schedule.tau_end - st.tau) / schedule.output_every));
  const double origin = std::isnan(schedule.tau_origin) ? st.tau : schedule.tau_origin;
  const long long k0 = std::llround((st.tau - origin) / schedule.output_every);
  auto record = [&]() {
    for (const auto& p : schedule.probes) out.push_back({st.tau, p.R, p.l, probe_value(op, st.psi, p.R, p.l)});
    if (on_output) on_output(st);
  };
  const double norm0 = std::max(st.psi.c.cwiseAbs().maxCoeff() + st.Pi.c.cwiseAbs().maxCoeff(), 1e-300);
  record();
  for (int i = 1; i <= n_out; ++i) {
    for (int j = 0; j < nsub; ++j) step(op, st, dt);
    // pin the clock to the cadence so that restarts are bit-exact
    st.tau = origin + static_cast<double>(k0 + i) * schedule.output_every;
    const double nrm = st.psi.c.cwiseAbs().maxCoeff() + st.Pi.c.cwiseAbs().maxCoeff();
    if (!std::isfinite(nrm)) {
      throw InstabilityError("non-finite field at tau = " + std::to_string(st.tau));
    }
    if (nrm > schedule.growth_limit * norm0) {
      throw InstabilityError("field norm grew by more than " + std::to_string(schedule.growth_limit) +
                             " at tau = " + std::to_string(st.tau));
    }
    record();
  }
  return out;
}

EvolutionState gaussian_initial_data(const TeukolskyOperator& op, const InitialData& d) {
  const KerrBackground& bg = op.background();
  if (d.l < degree_min(op.s(), op.m()) || d.l > op.grid().lmax) {
    throw std::invalid_argument("initial-data degree l = " + std::to_string(d.l) +
                                " outside the basis range");
  }
  EvolutionState st;
  st.tau = bg.tau0();
  st.psi = op.zero_field();
  st.Pi = op.zero_field();
  const int row = d.l - st.Pi.lmin;
  for (int k = 0; k < op.n_r(); ++k) {
    const double R = op.radial().R()[k];
    if (R == 0.0 || k == op.n_r() - 1) continue;
    const double rs = tortoise(bg, 1.0 / R) / bg.M();
    const double x = (rs - d.center) / d.width;
    st.Pi.c(row, k) = d.amplitude * std::exp(-0.5 * x * x);
  }
  return st;
}

std::vector<Eigen::MatrixXcd> tau_jet(const TeukolskyOperator& op, const Eigen::MatrixXcd& psi,
                                      const Eigen::MatrixXcd& Pi, int order) {
  std::vector<Eigen::MatrixXcd> d;
  d.push_back(psi);
  if (order >= 1) d.push_back(Pi);
  for (int j = 2; j <= order; ++j) d.push_back(op.acceleration(d[j - 2], d[j - 1]));
  return d;
}

namespace {

struct JetCoefficients {
  std::vector<double> H, R2, Xhalf, R2Dhalf, Vscale, Zshift;
};

JetCoefficients jet_coefficients(const TeukolskyOperator& op) {
  const auto& ch = op.chart();
  const double a = op.background().a();
  JetCoefficients c;
  for (double R : op.radial().R()) {
    const double u = 1.0 + a * a * R * R;
    c.H.push_back(ch.H(R));
    c.R2.push_back(R * R);
    c.Xhalf.push_back(0.5 * ch.X_over_R2(R));
    c.R2Dhalf.push_back(0.5 * ch.R2Delta(R));
    c.Vscale.push_back(R * R / u);
    c.Zshift.push_back(R / u);
  }
  return c;
}

Jet vprime_core(const TeukolskyOperator& op, const Jet& g, const JetCoefficients& c) {
  const cplx am(0.0, op.background().a() * op.m());
  Jet out;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    const Eigen::MatrixXcd dR = op.radial().D1()(g[j]);
    out.push_back(scale_cols(g[j + 1], c.Xhalf) - scale_cols(dR, c.R2Dhalf) + am * g[j]);
  }
  return out;
}

}  // namespace

Jet apply_Y(const TeukolskyOperator& op, const Jet& g) {
  const JetCoefficients c = jet_coefficients(op);
  Jet out;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    out.push_back(scale_cols(g[j + 1], c.H) + scale_cols(op.radial().D1()(g[j]), c.R2));
  }
  return out;
}

Jet apply_V(const TeukolskyOperator& op, const Jet& g) {
  const JetCoefficients c = jet_coefficients(op);
  Jet out = vprime_core(op, g, c);
  for (auto& x : out) x = scale_cols(x, c.Vscale);
  return out;
}

Jet apply_Vprime(const TeukolskyOperator& op, const Jet& g) {
  const JetCoefficients c = jet_coefficients(op);
  Jet out = vprime_core(op, g, c);
  for (auto& x : out) x /= op.background().M();
  return out;
}

Jet apply_Z(const TeukolskyOperator& op, const Jet& g) {
  const JetCoefficients c = jet_coefficients(op);
  Jet out = apply_Y(op, g);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += scale_cols(g[j], c.Zshift);
  return out;
}

namespace {

Jet ladder_jet(int s, int m, int lmax, const Jet& g, int ds) {
  const int lin = degree_min(s, m);
  const int lout = degree_min(s + ds, m);
  Jet out;
  for (const auto& x : g) {
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(std::max(lmax - lout + 1, 0), x.cols());
    for (int l = std::max(lin, lout); l <= lmax; ++l) {
      const double k = ds > 0 ? hedt_factor(s, l) : hedtp_factor(s, l);
      y.row(l - lout) = k * x.row(l - lin);
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace

Jet apply_hedt_jet(int s, int m, int lmax, const Jet& g) { return ladder_jet(s, m, lmax, g, +1); }
Jet apply_hedtp_jet(int s, int m, int lmax, const Jet& g) { return ladder_jet(s, m, lmax, g, -1); }

DerivedStack derived_stack(const TeukolskyOperator& op, const EvolutionState& st) {
  DerivedStack ds;
  Jet jet = tau_jet(op, st.psi.c, st.Pi.c, 4);
  for (int i = 0; i <= 4; ++i) {
    SpinField f = st.psi;
    f.c = jet[0];
    ds.psi.push_back(f);
    if (i < 4) jet = apply_Vprime(op, jet);
  }
  return ds;
}

}  // namespace kwave
