#pragma once

// Run configuration: a flat sectioned key-value document.
//
//   [background]  M, a
//   [problem]     s, m, l, center, width, amplitude
//   [grid]        n_r, lmax, cfl, dissipation, chart_constant
//   [schedule]    workflow, tau_end, output_every, snapshot_every, probe_r, probe_l
//   [reconstruct] r_max, n_r, lmax, stride, chart_constant
//   [verify]      samples, seed
//   [norms]       kmax, every, beam_transient_end, max_beam_ratio
//   [tails]       window_start, window_end, envelope, min_index
//
// '#' and ';' start comments. Every key is optional; unknown sections and keys are errors.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kwave::runner {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Workflow { Verify, Evolve, Reconstruct, Norms, Tails };
const char* workflow_name(Workflow w);

struct RunConfig {
  struct {
    double M = 1.0;
    double a = 0.0;
  } background;
  struct {
    int s = -2;
    int m = 0;
    int l = 2;
    double center = 10.0;  // r* of the pulse, units of M
    double width = 2.0;
    double amplitude = 1.0;
  } problem;
  struct {
    int n_r = 200;
    int lmax = 8;
    double cfl = 0.5;
    double dissipation = 0.0;
    double chart_constant = 1.0;
  } grid;
  struct {
    Workflow workflow = Workflow::Evolve;
    double tau_end = 100.0;
    double output_every = 1.0;
    double snapshot_every = 10.0;
    std::vector<double> probe_r = {10.0};  // radii in units of M; inf selects Scri
    int probe_l = -1;                      // -1 selects problem.l
  } schedule;
  struct {
    double r_max = 20.0;
    int n_r = 200;
    int lmax = 8;
    int stride = 4;
    double chart_constant = 1e6;
  } reconstruct;
  struct {
    int samples = 1000;
    unsigned seed = 20240611;
  } verify;
  struct {
    int kmax = 2;
    int every = 1;  // evaluate norms every n-th output
    double beam_transient_end = 50.0;
    std::optional<double> max_beam_ratio;
  } norms;
  struct {
    double window_start = 200.0;
    double window_end = 800.0;
    bool envelope = false;
    std::optional<double> min_index;
  } tails;

  int probe_l() const { return schedule.probe_l < 0 ? problem.l : schedule.probe_l; }
};

// Parses and validates; throws ConfigError (with position) or ValidationError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Throws ValidationError naming the violated invariant.
void validate(const RunConfig& config);

}  // namespace kwave::runner
