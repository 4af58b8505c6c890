#pragma once

// Closed-form linearized-mass and linearized-angular-momentum solutions in outgoing
// radiation gauge (Znajek tetrad, ingoing Eddington-Finkelstein coordinates), and the
// randomized identity harness.

#include <array>
#include <string>
#include <vector>

#include "kwave/background.hpp"
#include "kwave/transport.hpp"

namespace kwave {

enum class FixtureKind { LinearizedMass, LinearizedAngularMomentum };

// Components at one point; entries not listed for a fixture are zero.
struct FixtureValues {
  cplx G00 = 0.0, G01 = 0.0, G10 = 0.0, G20 = 0.0;  // G_{00'}, G_{01'}, G_{10'}, G_{20'}
  cplx epsilon = 0.0, kappa = 0.0, rho = 0.0;       // linearized connection (tilde)
  cplx beta = 0.0, beta_prime = 0.0, tau = 0.0, tau_prime = 0.0;
  cplx sigma = 0.0, sigma_prime = 0.0;
  cplx Psi1 = 0.0, Psi2 = 0.0, Psi3 = 0.0;  // linearized curvature
  cplx Psi0 = 0.0, Psi4 = 0.0;              // both vanish for these fixtures
};

class FieldFixture {
 public:
  FieldFixture(FixtureKind kind, const KerrBackground& bg, double parameter);

  FixtureKind kind() const { return kind_; }
  const KerrBackground& background() const { return bg_; }
  double parameter() const { return parameter_; }
  const char* name() const;

  // Transcribed closed forms.
  FixtureValues values(double r, double theta) const;
  // Hatted fields from the components via their definitions.
  std::array<cplx, 6> hatted(double r, double theta) const;
  // Hatted fields as tabulated for the fixture (only G0, G1, G2 are tabulated).
  std::array<cplx, 3> tabulated_G(double r, double theta) const;  // G0, G1, G2

 private:
  FixtureKind kind_;
  KerrBackground bg_;
  double parameter_;
};

FieldFixture lin_mass_fixture(const KerrBackground& bg, double dM);
FieldFixture lin_angmom_fixture(const KerrBackground& bg, double da);

// Hatted fields (sigma', G2, tau', G1, beta', G0) from metric and connection components.
std::array<cplx, 6> hatted_from_components(const KerrBackground& bg, double r, double theta,
                                           const FixtureValues& v);

// G_{00'} = delta g_ab l^a l^b for delta g_ab = -4 n_a n_b r delta M / Sigma, with n_a lowered
// by the background metric (independent of the transcribed value).
cplx mass_G00_from_metric_variation(const KerrBackground& bg, double r, double theta, double dM);

// Sigma_init data for integrate_chain (axisymmetric fixtures live in the m = 0 mode).
InitialSurfaceData fixture_initial_data(const FieldFixture& fx);

// Residual Y f - F(f) of each transport equation for the stationary, axisymmetric fixture,
// with Y = -d_r and d_theta by 6th-order central differences of step h.
struct TransportResidual {
  std::array<double, 6> max_abs{};
  std::array<double, 6> max_rhs{};  // size of the right-hand side, for context
  int points = 0;
};
// mutate negates the G0 right-hand side (mutation harness).
TransportResidual fixture_transport_residual(const FieldFixture& fx, int n_r, int n_theta,
                                             double r_max, double h = 1e-2, bool mutate = false);

struct IdentityEntry {
  std::string name;
  double a = 0.0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double mutated_residual = 0.0;  // residual with a deliberately negated term
  bool mutation_detected = false;  // mutated residual >= 1e-3
};

struct IdentityReport {
  std::vector<IdentityEntry> entries;
  int points = 0;  // random points per spin value
  double seconds = 0.0;
  bool all_passed() const;
};

struct IdentityOptions {
  std::vector<double> spins = {0.0, 0.3, 0.9, 0.999};
  int sample_count = 1000;
  unsigned seed = 20240611;
  bool include_fixtures = true;
};

IdentityReport verify_identities(const IdentityOptions& options);

}  // namespace kwave
