#include "kwave/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace kwave {

const char* transport_field_name(int f) {
  static const char* names[] = {"sigma_hat_prime", "G2_hat", "tau_hat_prime",
                                "G1_hat",          "beta_hat_prime", "G0_hat", "psi_m2"};
  if (f < 0 || f > 6) throw std::out_of_range("transport field index");
  return names[f];
}

namespace {

struct PointGeometry {
  cplx k1, k1b, tau, taub, taup, taupb;
};

PointGeometry geometry(const KerrBackground& bg, double r, double theta) {
  const SpinCoefficientSet sc = spin_coefficients(bg, r, theta);
  PointGeometry g;
  g.k1 = -cplx(r, -bg.a() * std::cos(theta)) / 3.0;
  g.k1b = std::conj(g.k1);
  g.tau = sc.tau;
  g.taub = std::conj(sc.tau);
  g.taup = sc.tau_prime;
  g.taupb = std::conj(sc.tau_prime);
  return g;
}

std::array<cplx, 6> rhs_with(const PointGeometry& g, double r, double a,
                             const TransportPointInput& in) {
  const cplx k1 = g.k1, k1b = g.k1b;
  const cplx sig = in.f[kSigmaHat], G2 = in.f[kG2Hat], th = in.f[kTauHat];
  const cplx G1 = in.f[kG1Hat], be = in.f[kBetaHat];
  const double r2 = r * r;
  std::array<cplx, 6> y;
  y[kSigmaHat] = -12.0 * k1b * in.psi_m2 / std::sqrt(r2 + a * a);
  y[kG2Hat] = -(2.0 / 3.0) * sig;
  y[kTauHat] = -k1 * (in.edt_sigma - 2.0 * g.tau * sig + 2.0 * g.taupb * sig) / (6.0 * k1b * k1b);
  y[kG1Hat] = 2.0 * k1 * k1 * k1b * k1b * th / r2 +
              k1 * k1 * k1b * (in.edt_G2 - g.tau * G2 + g.taupb * G2) / (2.0 * r2);
  y[kBetaHat] = r * G1 / (6.0 * k1 * k1 * k1b * k1b) + k1 * g.tau * G2 / (6.0 * k1b * k1b);
  y[kG0Hat] = -(in.edt_G1 - g.tau * G1) / (3.0 * k1) - g.tau * G1 / r - g.taub * in.G1_bar / r +
              2.0 * k1 * k1 * k1b * (in.edt_beta - g.taupb * be) / r2 -
              (in.edtp_G1_bar - g.taub * in.G1_bar) / (3.0 * k1b) +
              2.0 * k1 * k1b * k1b * (in.edtp_beta_bar - g.taup * in.beta_bar) / r2;
  return y;
}

cplx edt_with(const PointGeometry& g, int s, cplx phi, cplx hedth_phi, cplx dv_phi, int sign) {
  return (double(sign) * hedth_phi + 9.0 * g.k1 * g.k1 * g.tau * dv_phi -
          3.0 * double(s) * g.k1 * g.tau * phi) /
         (3.0 * g.k1);
}

cplx edtp_with(const PointGeometry& g, int s, cplx phi, cplx hedthp_phi, cplx dv_phi, int sign) {
  return (double(sign) * hedthp_phi + 9.0 * g.k1b * g.k1b * g.taub * dv_phi +
          3.0 * double(s) * g.k1b * g.taub * phi) /
         (3.0 * g.k1b);
}

}  // namespace

cplx ghp_edt(const KerrBackground& bg, double r, double theta, int s, cplx phi, cplx hedth_phi,
             cplx dv_phi, int sign) {
  return edt_with(geometry(bg, r, theta), s, phi, hedth_phi, dv_phi, sign);
}

cplx ghp_edtp(const KerrBackground& bg, double r, double theta, int s, cplx phi,
              cplx hedthp_phi, cplx dv_phi, int sign) {
  return edtp_with(geometry(bg, r, theta), s, phi, hedthp_phi, dv_phi, sign);
}

std::array<cplx, 6> transport_rhs(const KerrBackground& bg, double r, double theta,
                                  const TransportPointInput& in) {
  return rhs_with(geometry(bg, r, theta), r, bg.a(), in);
}

Eigen::VectorXcd ZeroSource::coefficients(int m, double, double) const {
  return Eigen::VectorXcd::Zero(std::max(lmax_ - degree_min(-2, m) + 1, 0));
}

EvolverHistorySource::EvolverHistorySource(const TeukolskyOperator& op, BeforeStart policy)
    : chart_(op.chart()), radial_(op.radial()), lmax_(op.grid().lmax), policy_(policy) {}

void EvolverHistorySource::add(const EvolutionState& st) {
  if (st.psi.s != -2) throw std::invalid_argument("history source expects spin -2 fields");
  if (st.psi.n_r() != radial_.size()) throw std::invalid_argument("history snapshot grid mismatch");
  auto it = std::find_if(series_.begin(), series_.end(), [&](const Series& s) { return s.m == st.psi.m; });
  if (it == series_.end()) {
    series_.push_back(Series{st.psi.m, st.psi.lmin, {}, {}});
    it = series_.end() - 1;
  }
  if (!it->tau.empty() && !(st.tau > it->tau.back())) {
    throw std::invalid_argument("history snapshots must have increasing tau");
  }
  it->tau.push_back(st.tau);
  it->psi.push_back(st.psi.c);
}

const EvolverHistorySource::Series& EvolverHistorySource::series_for(int m) const {
  for (const auto& s : series_)
    if (s.m == m) return s;
  throw std::out_of_range("no psi_{-2} history for m = " + std::to_string(m));
}

double EvolverHistorySource::tau_first(int m) const { return series_for(m).tau.front(); }
double EvolverHistorySource::tau_last(int m) const { return series_for(m).tau.back(); }

Eigen::VectorXcd EvolverHistorySource::coefficients(int m, double v, double r) const {
  const Series& s = series_for(m);
  if (s.tau.size() < 4) throw std::out_of_range("history needs at least four snapshots");
  const auto [tau, R] = chart_.to_hyperboloidal(v, r);
  const double eps = 1e-9 * (1.0 + std::abs(tau));
  if (tau < s.tau.front() - eps) {
    if (policy_ == BeforeStart::Zero) return Eigen::VectorXcd::Zero(s.psi.front().rows());
    throw std::out_of_range("psi_{-2} requested at tau = " + std::to_string(tau) +
                            " before the first snapshot " + std::to_string(s.tau.front()));
  }
  if (tau > s.tau.back() + eps) {
    throw std::out_of_range("psi_{-2} requested at tau = " + std::to_string(tau) +
                            " after the last snapshot " + std::to_string(s.tau.back()));
  }
  if (R > radial_.R().back() * (1.0 + 1e-12)) throw std::out_of_range("radius inside the horizon");
  const int n = static_cast<int>(s.tau.size());
  int i = static_cast<int>(std::upper_bound(s.tau.begin(), s.tau.end(), tau) - s.tau.begin()) - 2;
  i = std::clamp(i, 0, n - 4);
  const auto wt = fornberg_weights(tau, std::vector<double>(s.tau.begin() + i, s.tau.begin() + i + 4), 0)[0];
  double wr[4];
  const int k0 = radial_.interpolation_weights(R, wr);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.psi.front().rows());
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out += (wt[a] * wr[b]) * s.psi[i + a].col(k0 + b);
  return out;
}

InitialSurfaceData InitialSurfaceData::zero() {
  return {[](int, double, double) { return std::array<cplx, 6>{}; }};
}

int TransportState::point_index(int line, int level) const {
  for (std::size_t p = 0; p < points.size(); ++p)
    if (points[p].first == line && points[p].second == level) return static_cast<int>(p);
  throw std::out_of_range("transport point (" + std::to_string(line) + ", " +
                          std::to_string(level) + ") not stored");
}

cplx TransportState::at(int mode_index, int field, int line, int level, int k) const {
  return values.at(mode_index)[field](k, point_index(line, level));
}

namespace {

// Angular machinery shared by all lines: synthesis/analysis matrices and the projected
// coordinate edth (spin s -> s+1) and edth' (s -> s-1) acting on theta samples.
class AngularOps {
 public:
  AngularOps(int lmax, int n_theta, const std::vector<int>& modes) : lmax_(lmax) {
    for (int m : modes) {
      for (int s = -2; s <= 1; ++s) {
        if (degree_min(s, m) > lmax) {
          throw std::invalid_argument("transport lmax " + std::to_string(lmax) +
                                      " too small for m = " + std::to_string(m));
        }
        bases_.emplace(std::make_pair(s, m), HarmonicBasis(s, m, lmax, n_theta));
      }
    }
    const HarmonicBasis& b0 = bases_.begin()->second;
    theta_ = b0.theta();
    for (auto& [key, basis] : bases_) {
      const auto [s, m] = key;
      const Eigen::MatrixXd A = analysis(basis);
      if (s < 1) {
        const HarmonicBasis& up = bases_.at({s + 1, m});
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(up.n_ell(), basis.n_ell());
        for (int l = std::max(basis.lmin(), up.lmin()); l <= lmax; ++l)
          L(l - up.lmin(), l - basis.lmin()) = hedt_factor(s, l);
        edth_[key] = up.values() * L * A;
      }
      if (s > -2) {
        const HarmonicBasis& dn = bases_.at({s - 1, m});
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dn.n_ell(), basis.n_ell());
        for (int l = std::max(basis.lmin(), dn.lmin()); l <= lmax; ++l)
          L(l - dn.lmin(), l - basis.lmin()) = hedtp_factor(s, l);
        edthp_[key] = dn.values() * L * A;
      }
    }
  }

  const std::vector<double>& theta() const { return theta_; }
  int n_theta() const { return static_cast<int>(theta_.size()); }
  const Eigen::MatrixXd& edth(int s, int m) const { return edth_.at({s, m}); }
  const Eigen::MatrixXd& edthp(int s, int m) const { return edthp_.at({s, m}); }

  // Samples of the spin -2 field with the given coefficients (zero-padded to lmax).
  Eigen::VectorXcd synthesize_m2(int m, const Eigen::VectorXcd& c) const {
    const HarmonicBasis& b = bases_.at({-2, m});
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(b.n_ell());
    const int n = std::min<int>(static_cast<int>(c.size()), b.n_ell());
    full.head(n) = c.head(n);
    return b.values().cast<cplx>() * full;
  }

 private:
  static Eigen::MatrixXd analysis(const HarmonicBasis& b) {
    Eigen::VectorXd w(b.n_theta());
    for (int j = 0; j < b.n_theta(); ++j) w[j] = b.weights()[j];
    return b.values().transpose() * w.asDiagonal();
  }

  int lmax_;
  std::vector<double> theta_;
  std::map<std::pair<int, int>, HarmonicBasis> bases_;
  std::map<std::pair<int, int>, Eigen::MatrixXd> edth_;
  std::map<std::pair<int, int>, Eigen::MatrixXd> edthp_;
};

// Fields on the active lines: X[mode][field] is n_theta x n_lines (columns j >= lo valid).
using LineFields = std::vector<std::array<Eigen::MatrixXcd, 6>>;

struct ChainContext {
  const KerrBackground& bg;
  const Psi2Source& source;
  const AngularOps& ang;
  std::vector<int> modes;
  std::vector<int> partner;
  std::vector<double> v;
};

// v-derivative stencils across lines lo..n-1 at one level.
struct VStencils {
  std::vector<int> start;
  std::vector<std::vector<double>> w;
};

VStencils v_stencils(const std::vector<double>& v, int lo) {
  const int n = static_cast<int>(v.size());
  VStencils st;
  st.start.assign(n, 0);
  st.w.assign(n, {});
  const int width = std::min(5, n - lo);
  for (int j = lo; j < n; ++j) {
    if (width < 2) {
      st.start[j] = j;
      st.w[j] = {0.0};
      continue;
    }
    const int s0 = std::clamp(j - width / 2, lo, n - width);
    st.start[j] = s0;
    st.w[j] = fornberg_weights(v[j], std::vector<double>(v.begin() + s0, v.begin() + s0 + width), 1)[1];
  }
  return st;
}

Eigen::MatrixXcd dv_of(const Eigen::MatrixXcd& X, const VStencils& st, int lo) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(X.rows(), X.cols());
  for (int j = lo; j < X.cols(); ++j) {
    const auto& w = st.w[j];
    for (std::size_t q = 0; q < w.size(); ++q) D.col(j) += w[q] * X.col(st.start[j] + static_cast<int>(q));
  }
  return D;
}

// Y-derivatives on all lines j >= lo at radius r; psi[mode] holds source samples.
LineFields chain_rhs(const ChainContext& cx, double r, int lo, const LineFields& X,
                     const std::vector<Eigen::MatrixXcd>& psi, const VStencils& st) {
  const int nm = static_cast<int>(cx.modes.size());
  const int nt = cx.ang.n_theta();
  const int nl = static_cast<int>(X[0][0].cols());
  std::vector<PointGeometry> geo(nt);
  for (int k = 0; k < nt; ++k) geo[k] = geometry(cx.bg, r, cx.ang.theta()[k]);

  // edt inputs per mode
  struct Derived {
    Eigen::MatrixXcd edt_sigma, edt_G2, edt_G1, edt_beta, edtp_G1b, edtp_betab, G1b, betab;
  };
  std::vector<Derived> d(nm);
  std::vector<std::array<Eigen::MatrixXcd, 6>> dv(nm);
  for (int mi = 0; mi < nm; ++mi)
    for (int f : {kSigmaHat, kG2Hat, kG1Hat, kBetaHat}) dv[mi][f] = dv_of(X[mi][f], st, lo);
  for (int mi = 0; mi < nm; ++mi) {
    const int m = cx.modes[mi];
    const int pi = cx.partner[mi];
    const auto& x = X[mi];
    Derived& o = d[mi];
    o.G1b = X[pi][kG1Hat].conjugate();
    o.betab = X[pi][kBetaHat].conjugate();
    const Eigen::MatrixXcd dG1b = dv[pi][kG1Hat].conjugate();
    const Eigen::MatrixXcd dbetab = dv[pi][kBetaHat].conjugate();
    const Eigen::MatrixXcd h_sigma = cx.ang.edth(-2, m).cast<cplx>() * x[kSigmaHat];
    const Eigen::MatrixXcd h_G2 = cx.ang.edth(-2, m).cast<cplx>() * x[kG2Hat];
    const Eigen::MatrixXcd h_G1 = cx.ang.edth(-1, m).cast<cplx>() * x[kG1Hat];
    const Eigen::MatrixXcd h_beta = cx.ang.edth(-1, m).cast<cplx>() * x[kBetaHat];
    const Eigen::MatrixXcd hp_G1b = cx.ang.edthp(1, m).cast<cplx>() * o.G1b;
    const Eigen::MatrixXcd hp_betab = cx.ang.edthp(1, m).cast<cplx>() * o.betab;
    o.edt_sigma.resize(nt, nl);
    o.edt_G2.resize(nt, nl);
    o.edt_G1.resize(nt, nl);
    o.edt_beta.resize(nt, nl);
    o.edtp_G1b.resize(nt, nl);
    o.edtp_betab.resize(nt, nl);
    for (int j = lo; j < nl; ++j) {
      for (int k = 0; k < nt; ++k) {
        const PointGeometry& g = geo[k];
        o.edt_sigma(k, j) = edt_with(g, -2, x[kSigmaHat](k, j), h_sigma(k, j), dv[mi][kSigmaHat](k, j), kEdtSign);
        o.edt_G2(k, j) = edt_with(g, -2, x[kG2Hat](k, j), h_G2(k, j), dv[mi][kG2Hat](k, j), kEdtSign);
        o.edt_G1(k, j) = edt_with(g, -1, x[kG1Hat](k, j), h_G1(k, j), dv[mi][kG1Hat](k, j), kEdtSign);
        o.edt_beta(k, j) = edt_with(g, -1, x[kBetaHat](k, j), h_beta(k, j), dv[mi][kBetaHat](k, j), kEdtSign);
        o.edtp_G1b(k, j) = edtp_with(g, 1, o.G1b(k, j), hp_G1b(k, j), dG1b(k, j), kEdtSign);
        o.edtp_betab(k, j) = edtp_with(g, 1, o.betab(k, j), hp_betab(k, j), dbetab(k, j), kEdtSign);
      }
    }
  }
  LineFields out(nm);
  for (int mi = 0; mi < nm; ++mi) {
    for (int f = 0; f < 6; ++f) out[mi][f] = Eigen::MatrixXcd::Zero(nt, nl);
    const Derived& o = d[mi];
    for (int j = lo; j < nl; ++j) {
      for (int k = 0; k < nt; ++k) {
        TransportPointInput in;
        for (int f = 0; f < 6; ++f) in.f[f] = X[mi][f](k, j);
        in.G1_bar = o.G1b(k, j);
        in.beta_bar = o.betab(k, j);
        in.edt_sigma = o.edt_sigma(k, j);
        in.edt_G2 = o.edt_G2(k, j);
        in.edt_G1 = o.edt_G1(k, j);
        in.edt_beta = o.edt_beta(k, j);
        in.edtp_G1_bar = o.edtp_G1b(k, j);
        in.edtp_beta_bar = o.edtp_betab(k, j);
        in.psi_m2 = psi[mi](k, j);
        const auto y = rhs_with(geo[k], r, cx.bg.a(), in);
        for (int f = 0; f < 6; ++f) out[mi][f](k, j) = y[f];
      }
    }
  }
  return out;
}

std::vector<Eigen::MatrixXcd> source_samples(const ChainContext& cx, double r, int lo) {
  const int nl = static_cast<int>(cx.v.size());
  std::vector<Eigen::MatrixXcd> P(cx.modes.size());
  for (std::size_t mi = 0; mi < cx.modes.size(); ++mi) {
    P[mi] = Eigen::MatrixXcd::Zero(cx.ang.n_theta(), nl);
    for (int j = lo; j < nl; ++j)
      P[mi].col(j) = cx.ang.synthesize_m2(cx.modes[mi], cx.source.coefficients(cx.modes[mi], cx.v[j], r));
  }
  return P;
}

LineFields axpy(const LineFields& X, double h, const LineFields& K) {
  LineFields out = X;
  for (std::size_t mi = 0; mi < X.size(); ++mi)
    for (int f = 0; f < 6; ++f) out[mi][f] += h * K[mi][f];
  return out;
}

}  // namespace

TransportState integrate_chain(const KerrBackground& bg, const Psi2Source& source,
                               const InitialSurfaceData& init, const TransportGridSpec& spec) {
  if (spec.n_r < 8) throw std::invalid_argument("integrate_chain needs at least 8 radial levels");
  if (!(spec.r_max > bg.r_plus())) throw std::invalid_argument("r_max must exceed r_plus");
  if (spec.output_stride < 1) throw std::invalid_argument("output_stride must be positive");
  const int N = spec.n_r;
  const int n_theta = spec.n_theta > 0 ? spec.n_theta : spec.lmax + 4;
  const HyperboloidalChart chart(bg, spec.chart_constant);

  TransportState out;
  out.spec = spec;
  out.modes = spec.m == 0 ? std::vector<int>{0} : std::vector<int>{spec.m, -spec.m};
  const double dr = (spec.r_max - bg.r_plus()) / (N - 1);
  out.r.resize(N);
  out.v.resize(N);
  for (int j = 0; j < N; ++j) {
    out.r[j] = j == N - 1 ? spec.r_max : bg.r_plus() + j * dr;
    out.v[j] = bg.tau0() + 0.5 * chart.h(out.r[j]);
  }
  for (int j = 1; j < N; ++j) {
    if (!(out.v[j] > out.v[j - 1])) throw std::runtime_error("initial surface lines are not ordered in v");
  }

  const AngularOps ang(spec.lmax, n_theta, out.modes);
  out.theta = ang.theta();
  ChainContext cx{bg, source, ang, out.modes, {}, out.v};
  for (std::size_t mi = 0; mi < out.modes.size(); ++mi)
    cx.partner.push_back(out.modes.size() == 1 ? 0 : 1 - static_cast<int>(mi));

  const int nm = static_cast<int>(out.modes.size());
  LineFields X(nm);
  for (int mi = 0; mi < nm; ++mi)
    for (int f = 0; f < 6; ++f) X[mi][f] = Eigen::MatrixXcd::Zero(n_theta, N);

  auto seed_line = [&](int j) {
    for (int mi = 0; mi < nm; ++mi) {
      for (int k = 0; k < n_theta; ++k) {
        const auto val = init.values(out.modes[mi], out.r[j], out.theta[k]);
        for (int f = 0; f < 6; ++f) X[mi][f](k, j) = val[f];
      }
    }
  };

  out.values.resize(nm);
  std::vector<std::vector<std::array<Eigen::VectorXcd, 7>>> cols(nm);
  auto keep = [&](int level) {
    if (level % spec.output_stride != 0) return;
    const auto P = source_samples(cx, out.r[level], level);
    for (int j = level; j < N; ++j) {
      if (j % spec.output_stride != 0) continue;
      out.points.emplace_back(j, level);
      for (int mi = 0; mi < nm; ++mi) {
        std::array<Eigen::VectorXcd, 7> c;
        for (int f = 0; f < 6; ++f) c[f] = X[mi][f].col(j);
        c[6] = P[mi].col(j);
        cols[mi].push_back(c);
      }
    }
  };

  seed_line(N - 1);
  keep(N - 1);
  for (int i = N - 1; i >= 1; --i) {
    const double r0 = out.r[i];
    const double h = out.r[i - 1] - r0;  // negative
    const VStencils st = v_stencils(out.v, i);
    // dX/dr = -Y X
    auto deriv = [&](double r, const LineFields& Z) {
      const LineFields y = chain_rhs(cx, r, i, Z, source_samples(cx, r, i), st);
      LineFields m = y;
      for (auto& mf : m)
        for (auto& f : mf) f = -f;
      return m;
    };
    const LineFields k1 = deriv(r0, X);
    const LineFields k2 = deriv(r0 + 0.5 * h, axpy(X, 0.5 * h, k1));
    const LineFields k3 = deriv(r0 + 0.5 * h, axpy(X, 0.5 * h, k2));
    const LineFields k4 = deriv(r0 + h, axpy(X, h, k3));
    for (int mi = 0; mi < nm; ++mi)
      for (int f = 0; f < 6; ++f)
        X[mi][f] += (h / 6.0) * (k1[mi][f] + 2.0 * k2[mi][f] + 2.0 * k3[mi][f] + k4[mi][f]);
    seed_line(i - 1);
    keep(i - 1);
  }

  for (int mi = 0; mi < nm; ++mi) {
    for (int f = 0; f < 7; ++f) {
      Eigen::MatrixXcd M(n_theta, static_cast<int>(out.points.size()));
      for (std::size_t p = 0; p < out.points.size(); ++p) M.col(p) = cols[mi][p][f];
      out.values[mi][f] = M;
    }
  }
  return out;
}

double HPrimeExpansion::polynomial(double R) const {
  double p = 0.0;
  for (int k = order; k >= 0; --k) p = p * R + a[k];
  return p;
}

// The polynomial reaches ~1e3 on [0, 1/(20M)] at C = 1e6 while 1/h' stays near 1/2, so the
// subtraction is carried in extended precision.
namespace {
long double poly_ld(const std::vector<double>& a, int order, long double R) {
  long double p = 0.0L;
  for (int k = order; k >= 0; --k) p = p * R + a[k];
  return p;
}
}  // namespace

double HPrimeExpansion::b(double R) const {
  if (R == 0.0) return a_next;
  const long double x = R;
  return static_cast<double>((one_over_hprime(R) - poly_ld(a, order, x)) / std::pow(x, order + 1));
}

double HPrimeExpansion::reconstruct(double R) const {
  if (R == 0.0) return a[0];
  const long double x = R;
  const long double p = poly_ld(a, order, x);
  const long double bl = (one_over_hprime(R) - p) / std::pow(x, order + 1);
  return static_cast<double>(p + bl * std::pow(x, order + 1));
}

namespace {

// n-th central difference of f at 0 with step h (half-integer offsets for odd n).
double central_difference(const std::function<double(double)>& f, int n, double h) {
  double sum = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    sum += ((j % 2 == 0) ? 1.0 : -1.0) * binom * f((0.5 * n - j) * h);
    binom = binom * (n - j) / (j + 1);
  }
  return sum / std::pow(h, n);
}

// Richardson extrapolation in h^2 of central differences, steps h0, h0/2, ...
double richardson_derivative(const std::function<double(double)>& f, int n, double h0, int levels) {
  if (n == 0) return f(0.0);
  std::vector<std::vector<double>> T(levels);
  for (int i = 0; i < levels; ++i) {
    T[i].resize(i + 1);
    T[i][0] = central_difference(f, n, h0 / std::pow(2.0, i));
    for (int k = 1; k <= i; ++k) {
      const double q = std::pow(4.0, k);
      T[i][k] = (q * T[i][k - 1] - T[i - 1][k - 1]) / (q - 1.0);
    }
  }
  // pick the diagonal entry with the smallest change from its predecessor
  double best = T[levels - 1][levels - 1];
  double best_err = INFINITY;
  for (int i = 1; i < levels; ++i) {
    const double err = std::abs(T[i][i] - T[i - 1][i - 1]);
    if (err < best_err) {
      best_err = err;
      best = T[i][i];
    }
  }
  return best;
}

}  // namespace

HPrimeExpansion h_prime_expansion(const KerrBackground& bg, int order, double chart_constant) {
  if (order < 0 || order > 6) throw std::invalid_argument("h' expansion order must lie in 0..6");
  HyperboloidalChart chart(bg, chart_constant);
  const double M = bg.M();
  // derivative of 1/H, exact in terms of dH
  auto g1 = [&chart](double R) {
    const double H = chart.H(R);
    return -chart.dH(R) / (H * H);
  };
  // the chart varies on the scale 1/((C - 1) M) near R = 0
  const double scale = std::max((chart_constant - 1.0) * M, 4.0 * M);
  const double h0 = 0.25 / scale;
  std::vector<double> a(order + 2);
  a[0] = 1.0 / chart.H(0.0);
  double fact = 1.0;
  for (int k = 1; k <= order + 1; ++k) {
    fact *= k;
    a[k] = richardson_derivative(g1, k - 1, h0, 8) / fact;
  }
  const double next = a.back();
  a.pop_back();
  return HPrimeExpansion{order, a, next, chart};
}

}  // namespace kwave
