#include "lgem/record_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "lgem/config_io.hpp"

namespace lgem {

static_assert(std::endian::native == std::endian::little, "binary records assume little-endian");

namespace {

using ojson = nlohmann::ordered_json;

constexpr char kMagic[8] = {'L', 'G', 'E', 'M', 'R', 'E', 'C', '\0'};
constexpr std::uint32_t kVersion = 1;

void hash_line(std::ostream& os, const std::string& hash) { os << "# config_hash=" << hash << '\n'; }

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    buf_.append(s);
  }
  void reals(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void cplxs(const std::vector<cplx>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(cplx));
  }
  void cplx2(const std::vector<std::vector<cplx>>& v) {
    u64(v.size());
    for (const auto& x : v) cplxs(x);
  }
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    auto n = count(1);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> reals() {
    std::vector<double> v(count(sizeof(double)));
    copy(v.data(), v.size() * sizeof(double));
    return v;
  }
  std::vector<cplx> cplxs() {
    std::vector<cplx> v(count(sizeof(cplx)));
    copy(v.data(), v.size() * sizeof(cplx));
    return v;
  }
  std::vector<std::vector<cplx>> cplx2() {
    std::vector<std::vector<cplx>> v(count(sizeof(std::uint64_t)));
    for (auto& x : v) x = cplxs();
    return v;
  }
  void copy(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, b_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  template <class T>
  T pod() {
    T v;
    copy(&v, sizeof v);
    return v;
  }
  // Element count, checked against the bytes left so a corrupt length fails cleanly.
  std::size_t count(std::size_t elem) {
    auto n = u64();
    if (n > (b_.size() - pos_) / elem) throw Error(ErrorCode::Parse, "record truncated or corrupt");
    return static_cast<std::size_t>(n);
  }
  void need(std::size_t n) {
    if (b_.size() - pos_ < n) throw Error(ErrorCode::Parse, "record truncated");
  }
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_boundary_csv(std::ostream& os, const SimulationRecord& rec) {
  hash_line(os, config_hash_hex(rec.config));
  const std::size_t nch = rec.boundary_in.size();
  os << 't';
  for (std::size_t j = 0; j < nch; ++j)
    os << ",in_re" << j << ",in_im" << j << ",out_re" << j << ",out_im" << j;
  os << '\n';
  for (std::size_t n = 0; n < rec.times.size(); ++n) {
    os << format_double(rec.times[n]);
    for (std::size_t j = 0; j < nch; ++j) {
      const cplx a = rec.boundary_in[j][n], b = rec.boundary_out[j][n];
      os << ',' << format_double(a.real()) << ',' << format_double(a.imag()) << ','
         << format_double(b.real()) << ',' << format_double(b.imag());
    }
    os << '\n';
  }
}

void write_snapshots_csv(std::ostream& os, const SimulationRecord& rec) {
  hash_line(os, config_hash_hex(rec.config));
  const std::size_t nch = rec.boundary_in.size();
  os << "t,z,re_E,im_E,re_sigma,im_sigma";
  for (std::size_t j = 1; j < nch; ++j) os << ",re_E" << j << ",im_E" << j;
  os << '\n';
  for (const auto& s : rec.snapshots) {
    const std::size_t nz = s.coherence.sigma.size();
    const double dz = rec.config.ensemble.L / static_cast<double>(nz);
    for (std::size_t m = 0; m < nz; ++m) {
      const cplx e = nch > 0 ? s.field.E[0][m] : cplx{0.0, 0.0};
      const cplx sg = s.coherence.sigma[m];
      os << format_double(s.field.t) << ',' << format_double((m + 0.5) * dz) << ','
         << format_double(e.real()) << ',' << format_double(e.imag()) << ','
         << format_double(sg.real()) << ',' << format_double(sg.imag());
      for (std::size_t j = 1; j < nch; ++j)
        os << ',' << format_double(s.field.E[j][m].real()) << ','
           << format_double(s.field.E[j][m].imag());
      os << '\n';
    }
  }
}

void write_kspectra_csv(std::ostream& os, const SimulationRecord& rec) {
  hash_line(os, config_hash_hex(rec.config));
  os << "t,k,abs_psi\n";
  for (const auto& ks : rec.k_spectra)
    for (std::size_t i = 0; i < ks.abs_psi.size(); ++i)
      os << format_double(ks.t) << ',' << format_double(rec.k_grid[i]) << ','
         << format_double(ks.abs_psi[i]) << '\n';
}

std::string window_energies_json(const SimulationRecord& rec) {
  ojson j;
  j["config_hash"] = config_hash_hex(rec.config);
  j["scenario"] = rec.config.name;
  j["time_unit"] = rec.config.time_unit;
  const double in = rec.flux_in.empty() ? 0.0 : rec.flux_in.back();
  const double out = rec.flux_out.empty() ? 0.0 : rec.flux_out.back();
  const double stored = rec.stored_norm.empty() ? 0.0 : rec.stored_norm.back();
  j["input_energy"] = in;
  j["output_energy"] = out;
  j["stored_final"] = stored;
  j["ledger_residual"] = stored + out - in;
  j["windows"] = ojson::array();
  for (const auto& w : rec.config.windows) {
    auto it = rec.window_energies.find(w.name);
    j["windows"].push_back({{"name", w.name},
                            {"t_start", w.t_start},
                            {"t_end", w.t_end},
                            {"energy", it == rec.window_energies.end() ? 0.0 : it->second}});
  }
  j["energies"] = ojson::object();
  for (const auto& w : rec.config.windows) j["energies"][w.name] = rec.window_energies.at(w.name);
  return j.dump(2) + "\n";
}

void export_record(const std::string& dir, const SimulationRecord& rec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  auto emit = [&](const char* name, auto&& writer) {
    std::ostringstream os;
    writer(os);
    write_text_file((base / name).string(), os.str());
  };
  emit("boundary.csv", [&](std::ostream& os) { write_boundary_csv(os, rec); });
  emit("snapshots.csv", [&](std::ostream& os) { write_snapshots_csv(os, rec); });
  emit("kspectra.csv", [&](std::ostream& os) { write_kspectra_csv(os, rec); });
  write_text_file((base / "energies.json").string(), window_energies_json(rec));
  write_text_file((base / "config.json").string(), config_to_json(rec.config, true));
}

std::string record_to_bytes(const SimulationRecord& rec) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.str(config_to_json(rec.config, true));
  w.reals(rec.times);
  w.cplx2(rec.boundary_in);
  w.cplx2(rec.boundary_out);
  w.reals(rec.stored_norm);
  w.reals(rec.flux_in);
  w.reals(rec.flux_out);
  w.u32(static_cast<std::uint32_t>(rec.snapshot_stride));
  w.u32(static_cast<std::uint32_t>(rec.kspectrum_stride));
  w.u64(rec.snapshots.size());
  for (const auto& s : rec.snapshots) {
    w.f64(s.field.t);
    w.cplx2(s.field.E);
    w.f64(s.coherence.t);
    w.cplxs(s.coherence.sigma);
    w.cplxs(s.rabi);
    w.cplxs(s.boundary);
  }
  w.reals(rec.k_grid);
  w.u64(rec.k_spectra.size());
  for (const auto& k : rec.k_spectra) {
    w.f64(k.t);
    w.reals(k.abs_psi);
  }
  w.u32(rec.arms ? 1u : 0u);
  if (rec.arms) {
    w.cplx2(rec.arms->probe);
    w.cplx2(rec.arms->steering);
  }
  w.u64(rec.window_energies.size());
  for (const auto& [name, e] : rec.window_energies) {
    w.str(name);
    w.f64(e);
  }
  return w.take();
}

SimulationRecord record_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.copy(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(ErrorCode::Parse, "not a simulation record (bad magic)");
  if (auto v = r.u32(); v != kVersion)
    throw Error(ErrorCode::Parse, "unsupported record version " + std::to_string(v));
  SimulationRecord rec;
  rec.config = config_from_json(r.str());
  rec.times = r.reals();
  rec.boundary_in = r.cplx2();
  rec.boundary_out = r.cplx2();
  rec.stored_norm = r.reals();
  rec.flux_in = r.reals();
  rec.flux_out = r.reals();
  rec.snapshot_stride = static_cast<int>(r.u32());
  rec.kspectrum_stride = static_cast<int>(r.u32());
  auto ns = r.u64();
  if (ns > bytes.size()) throw Error(ErrorCode::Parse, "record corrupt");
  rec.snapshots.resize(ns);
  for (auto& s : rec.snapshots) {
    s.field.t = r.f64();
    s.field.E = r.cplx2();
    s.coherence.t = r.f64();
    s.coherence.sigma = r.cplxs();
    s.rabi = r.cplxs();
    s.boundary = r.cplxs();
  }
  rec.k_grid = r.reals();
  auto nk = r.u64();
  if (nk > bytes.size()) throw Error(ErrorCode::Parse, "record corrupt");
  rec.k_spectra.resize(nk);
  for (auto& k : rec.k_spectra) {
    k.t = r.f64();
    k.abs_psi = r.reals();
  }
  if (r.u32() != 0u) {
    ArmTraces a;
    a.probe = r.cplx2();
    a.steering = r.cplx2();
    rec.arms = std::move(a);
  }
  auto nw = r.u64();
  if (nw > bytes.size()) throw Error(ErrorCode::Parse, "record corrupt");
  for (std::uint64_t i = 0; i < nw; ++i) {
    std::string name = r.str();
    rec.window_energies[name] = r.f64();
  }
  if (!r.done()) throw Error(ErrorCode::Parse, "trailing bytes after record");
  return rec;
}

void save_record(const std::string& path, const SimulationRecord& rec) {
  write_text_file(path, record_to_bytes(rec));
}

SimulationRecord load_record(const std::string& path) { return record_from_bytes(read_text_file(path)); }

void write_fringe_csv(std::ostream& os, const FringePair& f, const std::string& config_hash) {
  hash_line(os, config_hash);
  os << "phase,E1,E2,fit_E1,fit_E2\n";
  for (std::size_t i = 0; i < f.e1.samples.size(); ++i) {
    const double ph = f.e1.samples[i].first;
    os << format_double(ph) << ',' << format_double(f.e1.samples[i].second) << ','
       << format_double(f.e2.samples[i].second) << ',' << format_double(f.e1.fit(ph)) << ','
       << format_double(f.e2.fit(ph)) << '\n';
  }
}

namespace {

ojson fit_json(const FringeDataset& d) {
  return {{"offset", d.fit.offset},
          {"amplitude", d.fit.amplitude},
          {"phase", d.fit.phase},
          {"rms_residual", d.fit.rms_residual},
          {"visibility", d.visibility}};
}

}  // namespace

std::string fringe_summary_json(const FringePair& f, const std::string& config_hash,
                                const std::string& knob) {
  ojson j;
  j["config_hash"] = config_hash;
  j["sweep"] = "phase";
  j["phase_knob"] = knob;
  j["ports"] = {{"E1", fit_json(f.e1)}, {"E2", fit_json(f.e2)}};
  j["visibility"] = {{"E1", f.e1.visibility}, {"E2", f.e2.visibility}};
  double d = std::remainder(f.e1.fit.phase - f.e2.fit.phase, 2.0 * std::numbers::pi);
  j["phase_difference"] = std::abs(d);
  return j.dump(2) + "\n";
}

void write_curve_csv(std::ostream& os, const std::vector<VisibilityPoint>& pts,
                     const std::string& x_name, const std::string& config_hash) {
  hash_line(os, config_hash);
  os << x_name << ",visibility_E1,visibility_E2\n";
  for (const auto& p : pts)
    os << format_double(p.x) << ',' << format_double(p.visibility_e1) << ','
       << format_double(p.visibility_e2) << '\n';
}

std::string curve_summary_json(const std::vector<VisibilityPoint>& pts, const std::string& x_name,
                               const std::string& config_hash, double x_reference) {
  ojson j;
  j["config_hash"] = config_hash;
  j["sweep"] = x_name;
  j["x_reference"] = x_reference;
  j["points"] = ojson::array();
  for (const auto& p : pts)
    j["points"].push_back({{x_name, p.x}, {"visibility_E1", p.visibility_e1},
                           {"visibility_E2", p.visibility_e2}});
  return j.dump(2) + "\n";
}

}  // namespace lgem
