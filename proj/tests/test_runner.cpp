#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "runner/config.hpp"
#include "runner/storage.hpp"
#include "runner/workflows.hpp"

using namespace kwave;
using namespace kwave::runner;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kwave_test_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"(
[background]
a = 0.1
[grid]
n_r = 40
lmax = 4
[schedule]
tau_end = 24
output_every = 1
snapshot_every = 4
probe_r = 8, inf
)";

}  // namespace

TEST(Config, MinimalFillsDefaults) {
  const RunConfig c = parse_config("[background]\nM = 1\n");
  EXPECT_EQ(c.background.a, 0.0);
  EXPECT_EQ(c.problem.s, -2);
  EXPECT_EQ(c.problem.l, 2);
  EXPECT_EQ(c.grid.n_r, 200);
  EXPECT_EQ(c.schedule.workflow, Workflow::Evolve);
  EXPECT_EQ(c.probe_l(), 2);
  EXPECT_FALSE(c.tails.min_index.has_value());
}

TEST(Config, ExtremalSpinRejected) {
  try {
    parse_config("[background]\nM = 1\na = 1\n");
    FAIL() << "a = M accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("|a| < M"), std::string::npos);
  }
}

TEST(Config, UnknownKeyNamed) {
  try {
    parse_config("[problem]\n  spinn = 2\n");
    FAIL() << "typo accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 3);
    EXPECT_NE(std::string(e.what()).find("spinn"), std::string::npos);
  }
}

TEST(Config, SyntaxErrorsCarryPositions) {
  auto where = [](const char* text) -> std::pair<int, int> {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return {e.line(), e.column()};
    }
    return {0, 0};
  };
  EXPECT_EQ(where("[grid]\nn_r = 12x\n"), std::make_pair(2, 7));
  EXPECT_EQ(where("[grid\n"), std::make_pair(1, 1));
  EXPECT_EQ(where("[gird]\n"), std::make_pair(1, 2));
  EXPECT_EQ(where("n_r = 4\n"), std::make_pair(1, 1));
  EXPECT_EQ(where("[grid]\nlmax = 4\nlmax = 5\n"), std::make_pair(3, 1));
  EXPECT_EQ(where("[schedule]\nprobe_r = 10, , 20\n"), std::make_pair(2, 14));
  EXPECT_EQ(where("[grid]\nlmax\n"), std::make_pair(2, 1));
}

TEST(Config, CommentsListsAndInvariants) {
  const RunConfig c = parse_config(
      "# header\n[schedule] ; trailing\nprobe_r = 10, 20 , inf # radii\nworkflow = tails\n[tails]\nmin_index = 2.8\n");
  ASSERT_EQ(c.schedule.probe_r.size(), 3u);
  EXPECT_TRUE(std::isinf(c.schedule.probe_r[2]));
  EXPECT_EQ(c.schedule.workflow, Workflow::Tails);
  EXPECT_EQ(*c.tails.min_index, 2.8);
  EXPECT_THROW(parse_config("[problem]\ns = 3\n"), ValidationError);
  EXPECT_THROW(parse_config("[problem]\nm = 5\n"), ValidationError);
  EXPECT_THROW(parse_config("[schedule]\nsnapshot_every = 2.5\n"), ValidationError);
  EXPECT_THROW(parse_config("[schedule]\nprobe_r = 1.5\n"), ValidationError);
  EXPECT_THROW(parse_config("[schedule]\nworkflow = plot\n"), ConfigError);
}

TEST(Snapshot, RoundTripAndVersioning) {
  const fs::path dir = scratch("snapshot");
  const KerrBackground bg(1.0, 0.4);
  GridSpec g;
  g.n_r = 32;
  g.lmax = 4;
  const TeukolskyOperator op(bg, g, -2, 1);
  EvolutionState st = gaussian_initial_data(op, InitialData{});
  st.psi.c(1, 3) = cplx(0.25, -1.5);
  st.tau = 12.5;
  write_snapshot(dir / "a.kwv", op, st);
  const std::string bytes = slurp(dir / "a.kwv");
  ASSERT_EQ(bytes.substr(0, 4), "KWV1");
  EXPECT_EQ(bytes.size(), 4u + 2 * 8 + 4 * 4 + 8 + 2u * 3 * 32 * 16);
  const Snapshot s = read_snapshot(dir / "a.kwv");
  EXPECT_EQ(s.header.m, 1);
  EXPECT_EQ(s.header.lmax, 4);
  EXPECT_EQ(s.header.n_r, 32);
  EXPECT_EQ(s.header.a, 0.4);
  EXPECT_EQ(s.state.tau, 12.5);
  EXPECT_EQ(s.state.psi.c, st.psi.c);
  EXPECT_EQ(s.state.Pi.c, st.Pi.c);
  // first coefficient of psi sits right after the 44-byte header
  double re = 0.0;
  std::memcpy(&re, bytes.data() + 44 + 16 * 3, 8);
  EXPECT_EQ(re, st.psi.c(0, 3).real());

  std::string v2 = bytes;
  v2[3] = '2';
  std::ofstream(dir / "v2.kwv", std::ios::binary) << v2;
  EXPECT_THROW(read_snapshot(dir / "v2.kwv"), SnapshotError);
  std::ofstream(dir / "bad.kwv", std::ios::binary) << "XXXX";
  EXPECT_THROW(read_snapshot(dir / "bad.kwv"), SnapshotError);
  std::ofstream(dir / "short.kwv", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(read_snapshot(dir / "short.kwv"), SnapshotError);
}

TEST(Manifest, HashesAndDetectsTampering) {
  const fs::path dir = scratch("manifest");
  std::ofstream(dir / "x.txt") << "abc";
  Manifest m(dir);
  m.record("x.txt");
  EXPECT_EQ(m.entries().at("x.txt").sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Manifest again(dir);
  again.load();
  EXPECT_TRUE(again.verify("x.txt"));
  std::ofstream(dir / "x.txt") << "abd";
  EXPECT_FALSE(again.verify("x.txt"));
  EXPECT_FALSE(again.verify("missing.txt"));
}

TEST(Workflow, ResumeMatchesUninterruptedBitExactly) {
  RunConfig full = parse_config(kSmall);
  RunConfig part = full;
  part.schedule.tau_end = 17.0;
  const fs::path a = scratch("full"), b = scratch("resumed");
  run_evolve(full, a);
  run_evolve(part, b);
  // damage the newest snapshot: resume must fall back to the previous verified one
  std::ofstream(b / "snapshots/snap_00000007.kwv", std::ios::binary | std::ios::app) << "x";
  const RunOutcome r = run_evolve(full, b, true);
  EXPECT_EQ(r.messages.at(1), "resumed from tau = 14");
  EXPECT_EQ(slurp(a / "probes.csv"), slurp(b / "probes.csv"));
  EXPECT_EQ(slurp(a / "snapshots/snap_00000014.kwv"), slurp(b / "snapshots/snap_00000014.kwv"));
  Manifest m(b);
  m.load();
  for (const auto& [rel, e] : m.entries()) EXPECT_TRUE(m.verify(rel)) << rel;
}

TEST(Workflow, DeterministicProbesWithProvenance) {
  const RunConfig c = parse_config(kSmall);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_evolve(c, a);
  run_evolve(c, b);
  const std::string text = slurp(a / "probes.csv");
  EXPECT_EQ(text, slurp(b / "probes.csv"));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "tau,R,abs,re,im,l,M,a,s,m,n_r,lmax,chart_constant");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",1,0.10000000000000001,-2,0,40,4,1"), std::string::npos);
  }
  EXPECT_EQ(rows, 2 * 15);
}

TEST(Workflow, VerifyWritesIdentityReport) {
  RunConfig c = parse_config("[verify]\nsamples = 100\n");
  const fs::path d = scratch("verify");
  const RunOutcome r = run_verify(c, d);
  EXPECT_TRUE(r.gates_passed);
  const std::string csv = slurp(d / "identities.csv");
  EXPECT_EQ(csv.rfind("identity,M,a,samples,seed", 0), 0u);
  EXPECT_NE(csv.find("edth_commutator"), std::string::npos);
  EXPECT_NE(slurp(d / "verify_summary.txt").find("PASS overall"), std::string::npos);
}

TEST(Workflow, TailsConsumesProbeCsv) {
  const fs::path d = scratch("tails");
  {
    std::ofstream out(d / "probes.csv");
    out.precision(17);
    out << "tau,R,abs,re,im,l," << provenance_header() << "\n";
    for (int i = 0; i <= 400; ++i) {
      const double tau = 100.0 + i;
      const double v = std::pow(tau, -3.0), w = 2.0 * std::pow(tau, -4.0);
      out << tau << ",0.1," << v << "," << v << ",0,0,1,0,0,0,64,4,1\n";
      out << tau << ",0," << w << "," << w << ",0,0,1,0,0,0,64,4,1\n";
    }
  }
  RunConfig c = parse_config("[tails]\nwindow_start = 200\nwindow_end = 500\nmin_index = 3.5\n");
  const RunOutcome r = run_tails(c, d);
  EXPECT_FALSE(r.gates_passed);  // the R = 0.1 series decays as tau^-3 only
  const std::string csv = slurp(d / "tails.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("R,r,l,tau_a,tau_b,p,drift", 0), 0u);
  std::vector<double> p;
  while (std::getline(in, line)) {
    std::vector<std::string> v;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) v.push_back(cell);
    p.push_back(std::stod(v[5]));
  }
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 4.0, 1e-9);  // R = 0 sorts first
  EXPECT_NEAR(p[1], 3.0, 1e-9);
  c.tails.min_index = 2.9;
  EXPECT_TRUE(run_tails(c, d).gates_passed);
}

TEST(Workflow, PlotdataTwoColumnFiles) {
  const fs::path d = scratch("plot");
  run_evolve(parse_config(kSmall), d);
  const RunOutcome r = run_plotdata(d);
  EXPECT_TRUE(r.gates_passed);
  const std::string f = slurp(d / "plot/probe_r8_l2.dat");
  std::istringstream in(f);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# tau abs(psi)");
  std::getline(in, line);
  EXPECT_EQ(line, "10 0");
  EXPECT_FALSE(run_plotdata(scratch("empty")).gates_passed);
}

TEST(Workflow, OutputRootFromEnvironment) {
  setenv("KWAVE_OUTPUT_ROOT", "/tmp/kwave_root_probe", 1);
  EXPECT_EQ(output_root(), fs::path("/tmp/kwave_root_probe"));
  unsetenv("KWAVE_OUTPUT_ROOT");
  EXPECT_EQ(output_root(), fs::current_path());
}
