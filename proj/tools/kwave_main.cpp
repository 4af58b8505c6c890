// kwave: command-line runner for the Teukolsky evolution, reconstruction and diagnostics.
//
// Exit codes: 0 all configured gates passed, 1 a gate failed, 2 configuration or usage
// error, 3 runtime or I/O error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include "runner/config.hpp"
#include "runner/storage.hpp"
#include "runner/workflows.hpp"

namespace {

using namespace kwave::runner;

enum Exit { kOk = 0, kGateFailed = 1, kConfigError = 2, kRuntimeError = 3 };

struct Common {
  std::string config;
  std::string out;
};

fs::path run_dir(const Common& c) {
  if (!c.out.empty()) return fs::path(c.out);
  return output_root() / fs::path(c.config).stem();
}

RunConfig load(const Common& c) { return c.config.empty() ? parse_config("") : load_config(c.config); }

int report(const RunOutcome& o, const fs::path& dir) {
  for (const auto& m : o.messages) fmt::print("{}\n", m);
  fmt::print("{} outputs in {}\n", o.outputs.size(), dir.string());
  return o.gates_passed ? kOk : kGateFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kwave: hyperboloidal Teukolsky runner"};
  app.require_subcommand(1);

  Common common;
  bool resume = false;
  std::string probes;
  std::string plot_dir;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("-c,--config", common.config, "run configuration file")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("-o,--out", common.out, "run directory (default: $KWAVE_OUTPUT_ROOT/<config stem>)");
  };
  auto* verify = app.add_subcommand("verify", "randomized identity suite and fixture residuals");
  add_common(verify, false);
  auto* evolve = app.add_subcommand("evolve", "evolve, writing probes, snapshots and the manifest");
  add_common(evolve, true);
  evolve->add_flag("--resume", resume, "continue from the newest verified snapshot");
  auto* reconstruct = app.add_subcommand("reconstruct", "evolve psi_{-2} and integrate the transport chain");
  add_common(reconstruct, true);
  auto* norms = app.add_subcommand("norms", "evolve and record slice energies and the BEAM monitor");
  add_common(norms, true);
  auto* tails = app.add_subcommand("tails", "fit local power indices to a probe CSV");
  add_common(tails, true);
  tails->add_option("--probes", probes, "probe CSV (default: <run dir>/probes.csv)")->check(CLI::ExistingFile);
  auto* plot = app.add_subcommand("plotdata", "two-column plot files from a run directory");
  plot->add_option("dir", plot_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (plot->parsed()) return report(run_plotdata(plot_dir), plot_dir);
    if (verify->parsed() && common.config.empty() && common.out.empty()) common.out = (output_root() / "verify").string();
    RunConfig cfg = load(common);
    const fs::path dir = run_dir(common);
    fs::create_directories(dir);
    if (verify->parsed()) return report(run_verify(cfg, dir), dir);
    if (evolve->parsed()) return report(run_evolve(cfg, dir, resume), dir);
    if (reconstruct->parsed()) return report(run_reconstruct(cfg, dir), dir);
    if (norms->parsed()) return report(run_norms(cfg, dir), dir);
    if (tails->parsed()) {
      std::optional<fs::path> p;
      if (!probes.empty()) p = probes;
      return report(run_tails(cfg, dir, p), dir);
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "invalid configuration: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
  return kConfigError;
}
