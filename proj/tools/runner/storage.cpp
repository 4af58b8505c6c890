#include "storage.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace kwave::runner {

namespace {

constexpr char kMagic[4] = {'K', 'W', 'V', '1'};

template <class U>
void put_le(std::string& out, U x) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double x) { put_le(out, std::bit_cast<std::uint64_t>(x)); }
void put_i32(std::string& out, int x) { put_le(out, static_cast<std::uint32_t>(x)); }

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  template <class U>
  U get_le() {
    if (pos_ + sizeof(U) > data_.size()) throw SnapshotError("truncated snapshot");
    U x = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      x |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return x;
  }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  int i32() { return static_cast<int>(get_le<std::uint32_t>()); }
  bool at_end() const { return pos_ == data_.size(); }
  const std::string& data() const { return data_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

void write_snapshot(const fs::path& path, const TeukolskyOperator& op, const EvolutionState& st) {
  std::string out(kMagic, 4);
  put_f64(out, op.background().M());
  put_f64(out, op.background().a());
  put_i32(out, op.s());
  put_i32(out, op.m());
  put_i32(out, op.grid().lmax);
  put_i32(out, op.n_r());
  put_f64(out, st.tau);
  for (const SpinField* f : {&st.psi, &st.Pi}) {
    for (int l = 0; l < f->c.rows(); ++l)
      for (int k = 0; k < f->c.cols(); ++k) {
        put_f64(out, f->c(l, k).real());
        put_f64(out, f->c(l, k).imag());
      }
  }
  write_atomic(path, out);
}

Snapshot read_snapshot(const fs::path& path) {
  Reader in(slurp(path));
  if (in.data().size() < 4 || std::memcmp(in.data().data(), "KWV", 3) != 0) {
    throw SnapshotError(path.string() + ": not a snapshot (bad magic)");
  }
  if (in.data()[3] != kMagic[3]) {
    throw SnapshotError(fmt::format("{}: unsupported snapshot version '{}'", path.string(), in.data()[3]));
  }
  in.skip(4);
  Snapshot s;
  auto& h = s.header;
  h.M = in.f64();
  h.a = in.f64();
  h.s = in.i32();
  h.m = in.i32();
  h.lmax = in.i32();
  h.n_r = in.i32();
  h.tau = in.f64();
  const int lmin = degree_min(h.s, h.m);
  if (h.lmax < lmin || h.lmax > 4096 || h.n_r < 1 || h.n_r > (1 << 24)) {
    throw SnapshotError(path.string() + ": inconsistent snapshot header");
  }
  s.state.tau = h.tau;
  s.state.psi = SpinField(h.s, h.m, h.lmax, h.n_r);
  s.state.Pi = SpinField(h.s, h.m, h.lmax, h.n_r);
  for (SpinField* f : {&s.state.psi, &s.state.Pi}) {
    for (int l = 0; l < f->c.rows(); ++l)
      for (int k = 0; k < f->c.cols(); ++k) {
        const double re = in.f64();
        const double im = in.f64();
        f->c(l, k) = cplx(re, im);
      }
  }
  if (!in.at_end()) throw SnapshotError(path.string() + ": trailing bytes after snapshot payload");
  return s;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

Manifest::Manifest(fs::path run_dir) : dir_(std::move(run_dir)) {}

void Manifest::load() {
  entries_.clear();
  if (!fs::exists(path())) return;
  std::istringstream in(slurp(path()));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw std::runtime_error(fmt::format("{}:{}: malformed manifest line", path().string(), n));
    entries_[line.substr(t2 + 1)] = {line.substr(0, t1), std::stoull(line.substr(t1 + 1, t2 - t1 - 1))};
  }
}

void Manifest::record(const std::string& relative) {
  const fs::path p = dir_ / relative;
  entries_[relative] = {sha256_file(p), fs::file_size(p)};
  save();
}

void Manifest::forget(const std::string& relative) {
  if (entries_.erase(relative) > 0) save();
}

bool Manifest::verify(const std::string& relative) const {
  const auto it = entries_.find(relative);
  const fs::path p = dir_ / relative;
  if (it == entries_.end() || !fs::exists(p)) return false;
  return fs::file_size(p) == it->second.bytes && sha256_file(p) == it->second.sha256;
}

void Manifest::save() const {
  std::string out;
  for (const auto& [rel, e] : entries_) out += fmt::format("{}\t{}\t{}\n", e.sha256, e.bytes, rel);
  write_atomic(path(), out);
}

}  // namespace kwave::runner
