#include "config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace kwave::runner {

ConfigError::ConfigError(int line, int column, const std::string& message)
    : std::runtime_error(fmt::format("line {}, column {}: {}", line, column, message)),
      line_(line),
      column_(column) {}

const char* workflow_name(Workflow w) {
  switch (w) {
    case Workflow::Verify: return "verify";
    case Workflow::Evolve: return "evolve";
    case Workflow::Reconstruct: return "reconstruct";
    case Workflow::Norms: return "norms";
    case Workflow::Tails: return "tails";
  }
  return "?";
}

namespace {

struct Value {
  std::string_view text;
  int line;
  int column;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line, column, what); }

  double as_double() const {
    if (text == "inf") return INFINITY;
    double x = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || p != text.data() + text.size()) fail(fmt::format("expected a number, got '{}'", text));
    return x;
  }
  long long as_integer() const {
    long long x = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || p != text.data() + text.size()) fail(fmt::format("expected an integer, got '{}'", text));
    return x;
  }
  int as_int() const {
    const long long x = as_integer();
    if (x < -1000000000LL || x > 1000000000LL) fail("integer out of range");
    return static_cast<int>(x);
  }
  bool as_bool() const {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail(fmt::format("expected a boolean, got '{}'", text));
  }
  std::vector<double> as_list() const {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find(',', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view item = text.substr(pos, end - pos);
      const std::size_t lead = item.find_first_not_of(" \t");
      const std::size_t trail = item.find_last_not_of(" \t");
      if (lead == std::string_view::npos) {
        throw ConfigError(line, column + static_cast<int>(pos), "empty list item");
      }
      item = item.substr(lead, trail - lead + 1);
      out.push_back(Value{item, line, column + static_cast<int>(pos + lead)}.as_double());
      pos = end + 1;
    }
    return out;
  }
};

using Setter = std::function<void(RunConfig&, const Value&)>;

const std::map<std::string, std::map<std::string, Setter>, std::less<>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>, std::less<>> s = {
      {"background",
       {{"M", [](RunConfig& c, const Value& v) { c.background.M = v.as_double(); }},
        {"a", [](RunConfig& c, const Value& v) { c.background.a = v.as_double(); }}}},
      {"problem",
       {{"s", [](RunConfig& c, const Value& v) { c.problem.s = v.as_int(); }},
        {"m", [](RunConfig& c, const Value& v) { c.problem.m = v.as_int(); }},
        {"l", [](RunConfig& c, const Value& v) { c.problem.l = v.as_int(); }},
        {"center", [](RunConfig& c, const Value& v) { c.problem.center = v.as_double(); }},
        {"width", [](RunConfig& c, const Value& v) { c.problem.width = v.as_double(); }},
        {"amplitude", [](RunConfig& c, const Value& v) { c.problem.amplitude = v.as_double(); }}}},
      {"grid",
       {{"n_r", [](RunConfig& c, const Value& v) { c.grid.n_r = v.as_int(); }},
        {"lmax", [](RunConfig& c, const Value& v) { c.grid.lmax = v.as_int(); }},
        {"cfl", [](RunConfig& c, const Value& v) { c.grid.cfl = v.as_double(); }},
        {"dissipation", [](RunConfig& c, const Value& v) { c.grid.dissipation = v.as_double(); }},
        {"chart_constant", [](RunConfig& c, const Value& v) { c.grid.chart_constant = v.as_double(); }}}},
      {"schedule",
       {{"workflow",
         [](RunConfig& c, const Value& v) {
           for (Workflow w : {Workflow::Verify, Workflow::Evolve, Workflow::Reconstruct, Workflow::Norms,
                              Workflow::Tails}) {
             if (v.text == workflow_name(w)) {
               c.schedule.workflow = w;
               return;
             }
           }
           v.fail(fmt::format("unknown workflow '{}'", v.text));
         }},
        {"tau_end", [](RunConfig& c, const Value& v) { c.schedule.tau_end = v.as_double(); }},
        {"output_every", [](RunConfig& c, const Value& v) { c.schedule.output_every = v.as_double(); }},
        {"snapshot_every", [](RunConfig& c, const Value& v) { c.schedule.snapshot_every = v.as_double(); }},
        {"probe_r", [](RunConfig& c, const Value& v) { c.schedule.probe_r = v.as_list(); }},
        {"probe_l", [](RunConfig& c, const Value& v) { c.schedule.probe_l = v.as_int(); }}}},
      {"reconstruct",
       {{"r_max", [](RunConfig& c, const Value& v) { c.reconstruct.r_max = v.as_double(); }},
        {"n_r", [](RunConfig& c, const Value& v) { c.reconstruct.n_r = v.as_int(); }},
        {"lmax", [](RunConfig& c, const Value& v) { c.reconstruct.lmax = v.as_int(); }},
        {"stride", [](RunConfig& c, const Value& v) { c.reconstruct.stride = v.as_int(); }},
        {"chart_constant", [](RunConfig& c, const Value& v) { c.reconstruct.chart_constant = v.as_double(); }}}},
      {"verify",
       {{"samples", [](RunConfig& c, const Value& v) { c.verify.samples = v.as_int(); }},
        {"seed",
         [](RunConfig& c, const Value& v) {
           const long long x = v.as_integer();
           if (x < 0 || x > 0xffffffffLL) v.fail("seed must fit in 32 unsigned bits");
           c.verify.seed = static_cast<unsigned>(x);
         }}}},
      {"norms",
       {{"kmax", [](RunConfig& c, const Value& v) { c.norms.kmax = v.as_int(); }},
        {"every", [](RunConfig& c, const Value& v) { c.norms.every = v.as_int(); }},
        {"beam_transient_end", [](RunConfig& c, const Value& v) { c.norms.beam_transient_end = v.as_double(); }},
        {"max_beam_ratio", [](RunConfig& c, const Value& v) { c.norms.max_beam_ratio = v.as_double(); }}}},
      {"tails",
       {{"window_start", [](RunConfig& c, const Value& v) { c.tails.window_start = v.as_double(); }},
        {"window_end", [](RunConfig& c, const Value& v) { c.tails.window_end = v.as_double(); }},
        {"envelope", [](RunConfig& c, const Value& v) { c.tails.envelope = v.as_bool(); }},
        {"min_index", [](RunConfig& c, const Value& v) { c.tails.min_index = v.as_double(); }}}},
  };
  return s;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  const auto& sch = schema();
  const std::map<std::string, Setter>* section = nullptr;
  std::string section_name;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    // strip comments
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || is_space(line[i - 1]))) {
        line = line.substr(0, i);
        break;
      }
    }
    std::size_t b = 0;
    while (b < line.size() && is_space(line[b])) ++b;
    std::size_t e = line.size();
    while (e > b && is_space(line[e - 1])) --e;
    if (b == e) continue;
    const int col = static_cast<int>(b) + 1;
    const std::string_view body = line.substr(b, e - b);
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(line_no, col, "unterminated section header");
      const std::string name(body.substr(1, body.size() - 2));
      const auto it = sch.find(name);
      if (it == sch.end()) throw ConfigError(line_no, col + 1, fmt::format("unknown section [{}]", name));
      section = &it->second;
      section_name = name;
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, col, "expected 'key = value'");
    std::string_view key = body.substr(0, eq);
    while (!key.empty() && is_space(key.back())) key.remove_suffix(1);
    if (key.empty()) throw ConfigError(line_no, col, "missing key before '='");
    if (section == nullptr) {
      throw ConfigError(line_no, col, fmt::format("key '{}' outside of any section", key));
    }
    const auto kit = section->find(std::string(key));
    if (kit == section->end()) {
      throw ConfigError(line_no, col, fmt::format("unknown key '{}' in section [{}]", key, section_name));
    }
    if (!seen.insert(section_name + "." + std::string(key)).second) {
      throw ConfigError(line_no, col, fmt::format("duplicate key '{}' in section [{}]", key, section_name));
    }
    std::size_t vb = eq + 1;
    while (vb < body.size() && is_space(body[vb])) ++vb;
    if (vb == body.size()) throw ConfigError(line_no, col + static_cast<int>(eq) + 1, "missing value");
    kit->second(cfg, Value{body.substr(vb), line_no, col + static_cast<int>(vb)});
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  const double M = c.background.M, a = c.background.a;
  require(std::isfinite(M) && M > 0.0, fmt::format("M > 0 violated: M = {}", M));
  require(std::isfinite(a) && std::abs(a) < M, fmt::format("|a| < M violated: a = {}, M = {}", a, M));
  const int s = c.problem.s, m = c.problem.m;
  require(std::abs(s) <= 2, fmt::format("|s| <= 2 violated: s = {}", s));
  const int lmin = std::max(std::abs(s), std::abs(m));
  require(c.grid.lmax >= lmin,
          fmt::format("lmax >= max(|s|, |m|) violated: lmax = {}, s = {}, m = {}", c.grid.lmax, s, m));
  require(c.grid.lmax <= 64, fmt::format("lmax <= 64 violated: lmax = {}", c.grid.lmax));
  require(c.problem.l >= lmin && c.problem.l <= c.grid.lmax,
          fmt::format("max(|s|, |m|) <= l <= lmax violated: l = {}", c.problem.l));
  require(c.probe_l() >= lmin && c.probe_l() <= c.grid.lmax,
          fmt::format("max(|s|, |m|) <= probe_l <= lmax violated: probe_l = {}", c.probe_l()));
  require(c.problem.width > 0.0, "width > 0 violated");
  require(c.grid.n_r >= 32, fmt::format("n_r >= 32 violated: n_r = {}", c.grid.n_r));
  require(c.grid.cfl > 0.0 && c.grid.cfl <= 1.0, fmt::format("0 < cfl <= 1 violated: cfl = {}", c.grid.cfl));
  require(c.grid.dissipation >= 0.0, "dissipation >= 0 violated");
  require(c.grid.chart_constant >= 1.0, fmt::format("chart_constant >= 1 violated: {}", c.grid.chart_constant));
  const double tau0 = 10.0 * M;
  require(c.schedule.output_every > 0.0, "output_every > 0 violated");
  require(c.schedule.tau_end > tau0, fmt::format("tau_end > tau0 = 10M violated: tau_end = {}", c.schedule.tau_end));
  const double ratio = c.schedule.snapshot_every / c.schedule.output_every;
  require(ratio >= 1.0 && std::abs(ratio - std::round(ratio)) < 1e-9,
          "snapshot_every must be a positive multiple of output_every");
  const double r_plus = M + std::sqrt(M * M - a * a);
  require(!c.schedule.probe_r.empty(), "at least one probe radius is required");
  for (double r : c.schedule.probe_r) {
    require(r > r_plus, fmt::format("probe radius r > r_plus violated: r = {}", r));
  }
  require(c.reconstruct.r_max > r_plus, "reconstruct.r_max > r_plus violated");
  require(c.reconstruct.n_r >= 8, "reconstruct.n_r >= 8 violated");
  require(c.reconstruct.lmax >= 2 + std::abs(m), "reconstruct.lmax >= 2 + |m| violated");
  require(c.reconstruct.stride >= 1, "reconstruct.stride >= 1 violated");
  require(c.reconstruct.chart_constant >= 1.0, "reconstruct.chart_constant >= 1 violated");
  require(c.verify.samples >= 100, fmt::format("verify.samples >= 100 violated: {}", c.verify.samples));
  require(c.norms.kmax >= 1 && c.norms.kmax <= 3, "1 <= norms.kmax <= 3 violated");
  require(c.norms.every >= 1, "norms.every >= 1 violated");
  require(c.tails.window_end > c.tails.window_start && c.tails.window_start > 0.0,
          "0 < tails.window_start < tails.window_end violated");
}

}  // namespace kwave::runner
