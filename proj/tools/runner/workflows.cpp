#include "workflows.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "kwave/diagnostics.hpp"
#include "kwave/fixtures.hpp"
#include "kwave/transport.hpp"
#include "storage.hpp"

namespace kwave::runner {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

GridSpec grid_spec(const RunConfig& c) {
  GridSpec g;
  g.n_r = c.grid.n_r;
  g.lmax = c.grid.lmax;
  g.cfl = c.grid.cfl;
  g.dissipation = c.grid.dissipation;
  g.chart_constant = c.grid.chart_constant;
  return g;
}

InitialData initial_data(const RunConfig& c) {
  InitialData d;
  d.l = c.problem.l;
  d.center = c.problem.center;
  d.width = c.problem.width;
  d.amplitude = c.problem.amplitude;
  return d;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void emit(RunOutcome& out, Manifest& manifest, const fs::path& dir, const std::string& rel,
          const std::string& text) {
  write_text(dir / rel, text);
  manifest.record(rel);
  out.outputs.push_back(rel);
}

std::string snapshot_name(long long k) { return fmt::format("snapshots/snap_{:08d}.kwv", k); }

using OutputHook = std::function<void(const TeukolskyOperator&, const EvolutionState&)>;

// Evolution with probes, snapshots and resume; hook sees every output state.
RunOutcome evolve_run(const RunConfig& cfg, const fs::path& dir, bool resume, const OutputHook& hook,
                      double tau_end) {
  RunOutcome out;
  fs::create_directories(dir / "snapshots");
  Manifest manifest(dir);
  manifest.load();
  const KerrBackground bg(cfg.background.M, cfg.background.a);
  const TeukolskyOperator op(bg, grid_spec(cfg), cfg.problem.s, cfg.problem.m);
  const double tau0 = bg.tau0();
  const double every = cfg.schedule.output_every;
  const long long snap_ratio = std::llround(cfg.schedule.snapshot_every / every);

  EvolutionState st = gaussian_initial_data(op, initial_data(cfg));
  std::string probes_text = "tau,R,abs,re,im,l," + provenance_header() + "\n";
  bool skip_first = false;
  if (resume) {
    // newest snapshot with a matching hash
    std::optional<Snapshot> best;
    std::vector<std::string> stale;
    for (const auto& [rel, e] : manifest.entries()) {
      if (rel.rfind("snapshots/", 0) != 0) continue;
      if (!manifest.verify(rel)) {
        stale.push_back(rel);
        continue;
      }
      Snapshot s = read_snapshot(dir / rel);
      if (!best || s.header.tau > best->header.tau) best = std::move(s);
    }
    for (const auto& rel : stale) {
      manifest.forget(rel);
      out.messages.push_back("dropped unverifiable snapshot " + rel);
    }
    if (best) {
      const auto& h = best->header;
      if (h.M != cfg.background.M || h.a != cfg.background.a || h.s != cfg.problem.s || h.m != cfg.problem.m ||
          h.lmax != cfg.grid.lmax || h.n_r != cfg.grid.n_r) {
        throw ValidationError("snapshot header does not match the configuration; refusing to resume");
      }
      if (h.tau > tau_end + 1e-9 * every) throw ValidationError("newest snapshot lies beyond tau_end");
      st = best->state;
      // keep probe rows up to the snapshot time
      std::ifstream in(dir / "probes.csv");
      std::string line;
      if (!in || !std::getline(in, line)) throw std::runtime_error("resume needs probes.csv next to the snapshots");
      probes_text = line + "\n";
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (std::stod(split_csv(line).at(0)) <= h.tau + 1e-9 * every) probes_text += line + "\n";
      }
      skip_first = true;
      out.messages.push_back(fmt::format("resumed from tau = {}", h.tau));
    } else {
      out.messages.push_back("no valid snapshot in the manifest; starting from initial data");
    }
  }

  std::vector<double> probe_R;
  for (double r : cfg.schedule.probe_r) probe_R.push_back(std::isinf(r) ? 0.0 : 1.0 / r);
  const int l = cfg.probe_l();
  const std::string prov = provenance_values(cfg);
  std::ofstream probes(dir / "probes.csv", std::ios::binary | std::ios::trunc);
  if (!probes) throw std::runtime_error("cannot write probes.csv");
  probes << probes_text;

  EvolveSchedule sched;
  sched.tau_end = tau_end;
  sched.output_every = every;
  sched.tau_origin = tau0;
  auto on_output = [&](const EvolutionState& s) {
    const long long k = std::llround((s.tau - tau0) / every);
    if (!skip_first) {
      for (double R : probe_R) {
        const cplx v = probe_value(op, s.psi, R, l);
        probes << fmt::format("{},{},{},{},{},{},{}\n", num(s.tau), num(R), num(std::abs(v)), num(v.real()),
                              num(v.imag()), l, prov);
      }
    }
    if (hook && !skip_first) hook(op, s);
    skip_first = false;
    const bool last = s.tau >= tau_end - 1e-9 * every;
    if (k % snap_ratio == 0 || last) {
      probes.flush();
      const std::string rel = snapshot_name(k);
      write_snapshot(dir / rel, op, s);
      manifest.record(rel);
      manifest.record("probes.csv");
    }
  };
  evolve(op, st, sched, on_output);
  probes.close();
  manifest.record("probes.csv");
  out.outputs.push_back("probes.csv");
  out.messages.push_back(fmt::format("evolved to tau = {}", st.tau));
  return out;
}

}  // namespace

fs::path output_root() {
  const char* env = std::getenv("KWAVE_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::current_path();
}

std::string provenance_header() { return "M,a,s,m,n_r,lmax,chart_constant"; }

std::string provenance_values(const RunConfig& c) {
  return fmt::format("{},{},{},{},{},{},{}", num(c.background.M), num(c.background.a), c.problem.s, c.problem.m,
                     c.grid.n_r, c.grid.lmax, num(c.grid.chart_constant));
}

RunOutcome run_verify(const RunConfig& cfg, const fs::path& dir) {
  RunOutcome out;
  Manifest manifest(dir);
  manifest.load();
  IdentityOptions opt;
  opt.sample_count = cfg.verify.samples;
  opt.seed = cfg.verify.seed;
  const IdentityReport rep = verify_identities(opt);
  std::string csv = "identity,M,a,samples,seed,max_residual,tolerance,passed,mutated_residual,mutation_detected\n";
  std::string summary;
  bool ok = true;
  for (const auto& e : rep.entries) {
    csv += fmt::format("{},1,{},{},{},{},{},{},{},{}\n", e.name, num(e.a), rep.points, opt.seed, num(e.max_residual),
                       num(e.tolerance), e.passed ? 1 : 0, num(e.mutated_residual), e.mutation_detected ? 1 : 0);
    const bool pass = e.passed && e.mutation_detected;
    ok = ok && pass;
    summary += fmt::format("{} {} a={} residual={:.3e} tol={:.0e} mutation={:.3e}\n", pass ? "PASS" : "FAIL", e.name,
                           e.a, e.max_residual, e.tolerance, e.mutated_residual);
  }
  summary += fmt::format("{} overall ({} entries, {} points per spin, {:.2f} s)\n", ok ? "PASS" : "FAIL",
                         rep.entries.size(), rep.points, rep.seconds);
  emit(out, manifest, dir, "identities.csv", csv);
  emit(out, manifest, dir, "verify_summary.txt", summary);
  out.gates_passed = ok;
  out.messages.push_back(fmt::format("identity suite: {} ({:.2f} s)", ok ? "PASS" : "FAIL", rep.seconds));
  return out;
}

RunOutcome run_evolve(const RunConfig& cfg, const fs::path& dir, bool resume) {
  return evolve_run(cfg, dir, resume, {}, cfg.schedule.tau_end);
}

RunOutcome run_norms(const RunConfig& cfg, const fs::path& dir) {
  std::unique_ptr<NormTracker> tracker;
  std::unique_ptr<BeamMonitor> beam;
  NormSpec spec;
  spec.kmax = cfg.norms.kmax;
  const bool want_beam = cfg.problem.s == -2;
  long long count = 0;
  // the operator lives inside evolve_run; trackers bind to it on the first output
  auto hook = [&](const TeukolskyOperator& op, const EvolutionState& st) {
    if (!tracker) {
      tracker = std::make_unique<NormTracker>(op, spec);
      if (want_beam) {
        const double tol = cfg.norms.max_beam_ratio ? *cfg.norms.max_beam_ratio - 1.0 : 0.01;
        beam = std::make_unique<BeamMonitor>(op, 1, cfg.norms.beam_transient_end, tol);
      }
    }
    if (count++ % cfg.norms.every != 0) return;
    tracker->add(st);
    if (beam) beam->add(st);
  };
  RunOutcome out = evolve_run(cfg, dir, false, hook, cfg.schedule.tau_end);
  Manifest manifest(dir);
  manifest.load();
  std::string head = "tau";
  for (int k = 1; k <= spec.kmax; ++k) head += fmt::format(",E{}", k);
  for (const auto& [k, alpha] : spec.weighted) head += fmt::format(",W{}_{}", k, alpha);
  head += ",morawetz," + provenance_header() + "\n";
  std::string csv = head;
  const std::string prov = provenance_values(cfg);
  for (const auto& r : tracker->reports()) {
    csv += num(r.tau);
    for (double e : r.Ek) csv += "," + num(e);
    for (const auto& w : r.W) csv += "," + num(w.value);
    csv += "," + num(r.morawetz) + "," + prov + "\n";
  }
  emit(out, manifest, dir, "norms.csv", csv);
  if (beam) {
    const BeamReport b = beam->report();
    std::string bc = "tau,total,ratio," + provenance_header() + "\n";
    for (std::size_t i = 0; i < b.tau.size(); ++i)
      bc += fmt::format("{},{},{},{}\n", num(b.tau[i]), num(b.total[i]), num(b.total[i] / b.reference), prov);
    emit(out, manifest, dir, "beam.csv", bc);
    out.messages.push_back(fmt::format("BEAM sup ratio after tau = {}: {:.6f}", cfg.norms.beam_transient_end,
                                       b.sup_ratio));
    if (cfg.norms.max_beam_ratio) {
      const bool ok = b.sup_ratio <= *cfg.norms.max_beam_ratio;
      out.gates_passed = out.gates_passed && ok;
      out.messages.push_back(fmt::format("{} gate max_beam_ratio = {}", ok ? "PASS" : "FAIL", *cfg.norms.max_beam_ratio));
    }
  } else if (cfg.norms.max_beam_ratio) {
    throw ValidationError("max_beam_ratio requires s = -2");
  }
  return out;
}

RunOutcome run_reconstruct(const RunConfig& cfg, const fs::path& dir) {
  if (cfg.problem.s != -2) throw ValidationError("reconstruct requires s = -2");
  RunOutcome out;
  fs::create_directories(dir);
  Manifest manifest(dir);
  manifest.load();
  const KerrBackground bg(cfg.background.M, cfg.background.a);
  TransportGridSpec spec;
  spec.r_max = cfg.reconstruct.r_max;
  spec.n_r = cfg.reconstruct.n_r;
  spec.lmax = cfg.reconstruct.lmax;
  spec.m = cfg.problem.m;
  spec.output_stride = cfg.reconstruct.stride;
  spec.chart_constant = cfg.reconstruct.chart_constant;
  // latest evolver time the chain reads: v_j - h(r_i) over the triangle i <= j
  const HyperboloidalChart lines(bg, spec.chart_constant);
  const GridSpec g = grid_spec(cfg);
  const TeukolskyOperator op(bg, g, -2, cfg.problem.m);
  const double dr = (spec.r_max - bg.r_plus()) / (spec.n_r - 1);
  double need = bg.tau0();
  for (int j = 0; j < spec.n_r; ++j) {
    const double rj = j == spec.n_r - 1 ? spec.r_max : bg.r_plus() + j * dr;
    const double vj = bg.tau0() + 0.5 * lines.h(rj);
    for (int i = 0; i <= j; ++i) {
      const double ri = std::max(bg.r_plus() + i * dr, bg.r_plus() * (1.0 + 1e-12));
      need = std::max(need, op.chart().to_hyperboloidal(vj, ri).first);
    }
  }
  const double every = cfg.schedule.output_every;
  const double tau_end = std::max(cfg.schedule.tau_end, bg.tau0() + std::ceil((need - bg.tau0()) / every + 4.0) * every);
  out.messages.push_back(fmt::format("chain reads the history up to tau = {:.3f}; evolving to {}", need, tau_end));

  EvolverHistorySource source(op, EvolverHistorySource::BeforeStart::Zero);
  std::vector<int> modes = {cfg.problem.m};
  if (cfg.problem.m != 0) modes.push_back(-cfg.problem.m);
  for (int m : modes) {
    RunConfig c = cfg;
    c.problem.m = m;
    const fs::path sub = m == cfg.problem.m ? dir : dir / fmt::format("mode_{}", m);
    RunOutcome r = evolve_run(c, sub, false, [&](const TeukolskyOperator&, const EvolutionState& st) { source.add(st); },
                              tau_end);
    for (auto& o : r.outputs) out.outputs.push_back((fs::relative(sub, dir) / o).lexically_normal().string());
  }
  const TransportState ts = integrate_chain(bg, source, InitialSurfaceData::zero(), spec);
  std::string head = "line,level,v,r,theta,mode";
  for (int f = 0; f < 6; ++f) head += fmt::format(",{0}_re,{0}_im", transport_field_name(f));
  head += ",psi_m2_re,psi_m2_im," + provenance_header() + "\n";
  std::string csv = head;
  const std::string prov = provenance_values(cfg);
  bool finite = true;
  for (std::size_t mi = 0; mi < ts.modes.size(); ++mi)
    for (std::size_t p = 0; p < ts.points.size(); ++p) {
      const auto [line, level] = ts.points[p];
      for (std::size_t k = 0; k < ts.theta.size(); ++k) {
        csv += fmt::format("{},{},{},{},{},{}", line, level, num(ts.v[line]), num(ts.r[level]), num(ts.theta[k]),
                           ts.modes[mi]);
        for (int f = 0; f < 7; ++f) {
          const cplx z = ts.values[mi][f](static_cast<int>(k), static_cast<int>(p));
          finite = finite && std::isfinite(z.real()) && std::isfinite(z.imag());
          csv += "," + num(z.real()) + "," + num(z.imag());
        }
        csv += "," + prov + "\n";
      }
    }
  emit(out, manifest, dir, "reconstruct.csv", csv);
  out.gates_passed = finite;
  out.messages.push_back(fmt::format("{} reconstructed fields finite", finite ? "PASS" : "FAIL"));
  return out;
}

RunOutcome run_tails(const RunConfig& cfg, const fs::path& dir, const std::optional<fs::path>& probes) {
  RunOutcome out;
  fs::create_directories(dir);
  Manifest manifest(dir);
  manifest.load();
  const fs::path src = probes ? *probes : dir / "probes.csv";
  std::ifstream in(src);
  std::string line;
  if (!in || !std::getline(in, line)) throw std::runtime_error("cannot read probe CSV " + src.string());
  const auto cols = split_csv(line);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    throw std::runtime_error("probe CSV lacks column '" + name + "'");
  };
  const std::size_t c_tau = col("tau"), c_R = col("R"), c_abs = col("abs"), c_l = col("l"), c_M = col("M");
  struct Series {
    std::vector<double> tau, value;
    std::string prov;
  };
  std::map<std::pair<double, int>, Series> series;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto v = split_csv(line);
    if (v.size() != cols.size()) throw std::runtime_error(fmt::format("{}:{}: wrong column count", src.string(), n));
    auto& s = series[{std::stod(v[c_R]), std::stoi(v[c_l])}];
    s.tau.push_back(std::stod(v[c_tau]));
    s.value.push_back(std::stod(v[c_abs]));
    if (s.prov.empty()) {
      for (std::size_t i = c_M; i < v.size(); ++i) s.prov += (i == c_M ? "" : ",") + v[i];
    }
  }
  std::string head = "R,r,l,tau_a,tau_b,p,drift,residual,samples,sub_p,";
  for (std::size_t i = c_M; i < cols.size(); ++i) head += (i == c_M ? "" : ",") + cols[i];
  std::string csv = head + "\n";
  FitOptions fo;
  fo.envelope = cfg.tails.envelope;
  for (const auto& [key, s] : series) {
    const PowerFit f = fit_local_power(s.tau, s.value, cfg.tails.window_start, cfg.tails.window_end, fo);
    std::string sub;
    for (std::size_t i = 0; i < f.sub_p.size(); ++i) sub += (i ? ";" : "") + fmt::format("{:.6f}", f.sub_p[i]);
    const double r = key.first == 0.0 ? INFINITY : 1.0 / key.first;
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", num(key.first), num(r), key.second, num(f.tau_a),
                       num(f.tau_b), num(f.p), num(f.drift), num(f.residual), f.samples, sub, s.prov);
    std::string msg = fmt::format("r = {} l = {}: p = {:.4f} on [{}, {}], drift {:.4f}", r, key.second, f.p, f.tau_a,
                                  f.tau_b, f.drift);
    if (cfg.tails.min_index) {
      const bool ok = f.p >= *cfg.tails.min_index;
      out.gates_passed = out.gates_passed && ok;
      msg = fmt::format("{} {} (gate p >= {})", ok ? "PASS" : "FAIL", msg, *cfg.tails.min_index);
    }
    out.messages.push_back(msg);
  }
  emit(out, manifest, dir, "tails.csv", csv);
  return out;
}

RunOutcome run_plotdata(const fs::path& dir) {
  RunOutcome out;
  Manifest manifest(dir);
  manifest.load();
  auto read_rows = [&](const std::string& name) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(dir / name);
    std::string line;
    while (in && std::getline(in, line))
      if (!line.empty()) rows.push_back(split_csv(line));
    return rows;
  };
  auto index_of = [](const std::vector<std::string>& head, const std::string& name) -> int {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return static_cast<int>(i);
    return -1;
  };
  if (auto rows = read_rows("probes.csv"); rows.size() > 1) {
    const auto& h = rows[0];
    const int t = index_of(h, "tau"), R = index_of(h, "R"), a = index_of(h, "abs"), l = index_of(h, "l");
    std::map<std::string, std::string> files;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double Rv = std::stod(rows[i][R]);
      const std::string name =
          Rv == 0.0 ? fmt::format("plot/probe_scri_l{}.dat", rows[i][l])
                    : fmt::format("plot/probe_r{:g}_l{}.dat", 1.0 / Rv, rows[i][l]);
      auto& f = files[name];
      if (f.empty()) f = "# tau abs(psi)\n";
      f += rows[i][t] + " " + rows[i][a] + "\n";
    }
    for (const auto& [name, text] : files) emit(out, manifest, dir, name, text);
  }
  if (auto rows = read_rows("norms.csv"); rows.size() > 1) {
    const auto& h = rows[0];
    const int pos = index_of(h, "M");
    for (int c = 1; c < pos; ++c) {
      std::string text = "# tau " + h[c] + "\n";
      for (std::size_t i = 1; i < rows.size(); ++i) text += rows[i][0] + " " + rows[i][c] + "\n";
      emit(out, manifest, dir, "plot/" + h[c] + ".dat", text);
    }
  }
  if (auto rows = read_rows("beam.csv"); rows.size() > 1) {
    std::string text = "# tau ratio\n";
    for (std::size_t i = 1; i < rows.size(); ++i) text += rows[i][0] + " " + rows[i][2] + "\n";
    emit(out, manifest, dir, "plot/beam_ratio.dat", text);
  }
  if (auto rows = read_rows("tails.csv"); rows.size() > 1) {
    std::string text = "# r p\n";
    for (std::size_t i = 1; i < rows.size(); ++i) text += rows[i][1] + " " + rows[i][5] + "\n";
    emit(out, manifest, dir, "plot/tail_index.dat", text);
  }
  if (out.outputs.empty()) {
    out.gates_passed = false;
    out.messages.push_back("no plottable CSV in " + dir.string());
  }
  return out;
}

RunOutcome run(const RunConfig& cfg, const fs::path& dir, bool resume) {
  switch (cfg.schedule.workflow) {
    case Workflow::Verify: return run_verify(cfg, dir);
    case Workflow::Evolve: return run_evolve(cfg, dir, resume);
    case Workflow::Reconstruct: return run_reconstruct(cfg, dir);
    case Workflow::Norms: return run_norms(cfg, dir);
    case Workflow::Tails: return run_tails(cfg, dir);
  }
  return {};
}

}  // namespace kwave::runner
