#include "lgem/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lgem {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Parse, where + ": " + what);
}

ojson cplx_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

// Accepts [re, im] or a bare real number.
cplx json_cplx(const ojson& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  parse_fail(where, "expected a number or [re, im]");
}

void check_keys(const ojson& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) parse_fail(where, "unknown key '" + k + "'");
}

double num(const ojson& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number()) parse_fail(where + "." + key, "expected a number");
  return v.get<double>();
}

int integer(const ojson& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_integer()) parse_fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

bool boolean(const ojson& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_boolean()) parse_fail(where + "." + key, "expected true or false");
  return v.get<bool>();
}

std::string str(const ojson& obj, const char* key, const std::string& where, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_string()) parse_fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

const ojson& arr(const ojson& obj, const char* key, const std::string& where) {
  static const ojson empty = ojson::array();
  if (!obj.contains(key)) return empty;
  const auto& v = obj[key];
  if (!v.is_array()) parse_fail(where + "." + key, "expected an array");
  return v;
}

ojson to_ojson(const ScenarioConfig& c) {
  ojson j;
  j["name"] = c.name;
  j["units"] = {{"time", c.time_unit},
                {"length", "L"},
                {"rate", "rad/" + c.time_unit},
                {"field", "sqrt(energy/" + c.time_unit + ")"}};
  const auto& e = c.ensemble;
  j["ensemble"] = {{"g", e.g},           {"N", e.N},
                   {"Delta", e.Delta},   {"gamma0", e.gamma0},
                   {"gamma_e", e.gamma_e}, {"L", e.L}};
  j["gradient"] = ojson::array();
  for (const auto& s : c.gradient.segments)
    j["gradient"].push_back({{"t_start", s.t_start}, {"eta", s.eta}, {"hold", s.hold}});
  j["coupling"] = ojson::array();
  for (const auto& ch : c.coupling.channels) {
    ojson cj;
    cj["raman_offset"] = ch.raman_offset;
    cj["tones"] = ojson::array();
    for (const auto& tone : ch.tones) {
      ojson tj;
      tj["freq_offset"] = tone.freq_offset;
      tj["segments"] = ojson::array();
      for (const auto& s : tone.segments)
        tj["segments"].push_back({{"t_start", s.t_start}, {"rabi", cplx_json(s.rabi)}, {"tag", s.tag}});
      cj["tones"].push_back(tj);
    }
    j["coupling"].push_back(cj);
  }
  j["pulses"] = ojson::array();
  for (const auto& p : c.pulses) {
    ojson pj;
    pj["label"] = pulse_label_name(p.label);
    pj["channel"] = p.channel;
    pj["amplitude"] = cplx_json(p.amplitude);
    pj["carrier"] = p.carrier;
    if (p.shape == PulseShape::Gaussian) {
      pj["shape"] = "gaussian";
      pj["center"] = p.center;
      pj["width"] = p.width;
      pj["t_on"] = p.t_on;
      pj["t_off"] = p.t_off;
    } else {
      pj["shape"] = "sampled";
      pj["sample_t0"] = p.sample_t0;
      pj["sample_dt"] = p.sample_dt;
      pj["samples"] = ojson::array();
      for (const auto& v : p.samples) pj["samples"].push_back(cplx_json(v));
    }
    j["pulses"].push_back(pj);
  }
  j["grid"] = {{"nz", c.grid.nz}, {"nt", c.grid.nt}, {"t_end", c.grid.t_end}};
  j["windows"] = ojson::array();
  for (const auto& w : c.windows)
    j["windows"].push_back({{"name", w.name},
                            {"t_start", w.t_start},
                            {"t_end", w.t_end},
                            {"mismatch_arm", mismatch_arm_name(w.mismatch_arm)}});
  j["mode_mismatch"] = c.mode_mismatch;
  j["stark_shift"] = c.stark_shift;
  j["metadata"] = ojson::object();
  for (const auto& [k, v] : c.metadata) j["metadata"][k] = v;
  return j;
}

ScenarioConfig from_ojson(const ojson& j) {
  check_keys(j, "config",
             {"name", "units", "ensemble", "gradient", "coupling", "pulses", "grid", "windows",
              "mode_mismatch", "stark_shift", "metadata", "config_hash"});
  ScenarioConfig c;
  c.name = str(j, "name", "config", c.name);

  if (j.contains("units")) {
    const auto& u = j["units"];
    check_keys(u, "units", {"time", "length", "rate", "field"});
    c.time_unit = str(u, "time", "units", c.time_unit);
    if (c.time_unit.empty()) parse_fail("units.time", "must not be empty");
    if (str(u, "length", "units", "L") != "L")
      parse_fail("units.length", "lengths are in units of the medium length, expected \"L\"");
    const std::string rate = str(u, "rate", "units", "rad/" + c.time_unit);
    if (rate != "rad/" + c.time_unit)
      parse_fail("units.rate", "expected \"rad/" + c.time_unit + "\", got \"" + rate + "\"");
  }

  if (j.contains("ensemble")) {
    const auto& e = j["ensemble"];
    check_keys(e, "ensemble", {"g", "N", "Delta", "gamma0", "gamma_e", "L"});
    c.ensemble.g = num(e, "g", "ensemble", c.ensemble.g);
    c.ensemble.N = num(e, "N", "ensemble", c.ensemble.N);
    c.ensemble.Delta = num(e, "Delta", "ensemble", c.ensemble.Delta);
    c.ensemble.gamma0 = num(e, "gamma0", "ensemble", c.ensemble.gamma0);
    c.ensemble.gamma_e = num(e, "gamma_e", "ensemble", c.ensemble.gamma_e);
    c.ensemble.L = num(e, "L", "ensemble", c.ensemble.L);
  }

  const auto& grad = arr(j, "gradient", "config");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const std::string w = "gradient[" + std::to_string(i) + "]";
    check_keys(grad[i], w, {"t_start", "eta", "hold"});
    c.gradient.segments.push_back(
        {num(grad[i], "t_start", w, 0.0), num(grad[i], "eta", w, 0.0), boolean(grad[i], "hold", w, false)});
  }

  const auto& coup = arr(j, "coupling", "config");
  for (std::size_t i = 0; i < coup.size(); ++i) {
    const std::string w = "coupling[" + std::to_string(i) + "]";
    check_keys(coup[i], w, {"raman_offset", "tones"});
    CouplingChannel ch;
    ch.raman_offset = num(coup[i], "raman_offset", w, 0.0);
    const auto& tones = arr(coup[i], "tones", w);
    for (std::size_t k = 0; k < tones.size(); ++k) {
      const std::string wt = w + ".tones[" + std::to_string(k) + "]";
      check_keys(tones[k], wt, {"freq_offset", "segments"});
      CouplingTone tone;
      tone.freq_offset = num(tones[k], "freq_offset", wt, 0.0);
      const auto& segs = arr(tones[k], "segments", wt);
      for (std::size_t s = 0; s < segs.size(); ++s) {
        const std::string ws = wt + ".segments[" + std::to_string(s) + "]";
        check_keys(segs[s], ws, {"t_start", "rabi", "tag"});
        CouplingSegment seg;
        seg.t_start = num(segs[s], "t_start", ws, 0.0);
        if (segs[s].contains("rabi")) seg.rabi = json_cplx(segs[s]["rabi"], ws + ".rabi");
        seg.tag = str(segs[s], "tag", ws, "");
        tone.segments.push_back(seg);
      }
      ch.tones.push_back(tone);
    }
    c.coupling.channels.push_back(ch);
  }

  const auto& pulses = arr(j, "pulses", "config");
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const std::string w = "pulses[" + std::to_string(i) + "]";
    const auto& pj = pulses[i];
    check_keys(pj, w,
               {"label", "channel", "amplitude", "carrier", "shape", "center", "width", "t_on",
                "t_off", "sample_t0", "sample_dt", "samples"});
    PulseEnvelope p;
    const std::string label = str(pj, "label", w, "probe");
    if (label == "probe") p.label = PulseLabel::Probe;
    else if (label == "steering") p.label = PulseLabel::Steering;
    else parse_fail(w + ".label", "expected \"probe\" or \"steering\"");
    p.channel = integer(pj, "channel", w, 0);
    if (pj.contains("amplitude")) p.amplitude = json_cplx(pj["amplitude"], w + ".amplitude");
    p.carrier = num(pj, "carrier", w, 0.0);
    const std::string shape = str(pj, "shape", w, "gaussian");
    if (shape == "gaussian") {
      p.shape = PulseShape::Gaussian;
      p.center = num(pj, "center", w, p.center);
      p.width = num(pj, "width", w, p.width);
      p.t_on = num(pj, "t_on", w, p.t_on);
      p.t_off = num(pj, "t_off", w, p.t_off);
    } else if (shape == "sampled") {
      p.shape = PulseShape::Sampled;
      p.sample_t0 = num(pj, "sample_t0", w, 0.0);
      p.sample_dt = num(pj, "sample_dt", w, 0.0);
      const auto& smp = arr(pj, "samples", w);
      for (std::size_t k = 0; k < smp.size(); ++k)
        p.samples.push_back(json_cplx(smp[k], w + ".samples[" + std::to_string(k) + "]"));
      if (!(p.sample_dt > 0.0) || p.samples.size() < 2)
        parse_fail(w, "sampled pulse needs sample_dt > 0 and at least two samples");
    } else {
      parse_fail(w + ".shape", "expected \"gaussian\" or \"sampled\"");
    }
    c.pulses.push_back(p);
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "grid", {"nz", "nt", "t_end"});
    c.grid.nz = integer(g, "nz", "grid", c.grid.nz);
    c.grid.nt = integer(g, "nt", "grid", c.grid.nt);
    c.grid.t_end = num(g, "t_end", "grid", c.grid.t_end);
  }

  const auto& wins = arr(j, "windows", "config");
  for (std::size_t i = 0; i < wins.size(); ++i) {
    const std::string w = "windows[" + std::to_string(i) + "]";
    check_keys(wins[i], w, {"name", "t_start", "t_end", "mismatch_arm"});
    DetectionWindow dw;
    dw.name = str(wins[i], "name", w, "");
    dw.t_start = num(wins[i], "t_start", w, 0.0);
    dw.t_end = num(wins[i], "t_end", w, 0.0);
    const std::string arm = str(wins[i], "mismatch_arm", w, "none");
    if (arm == "none") dw.mismatch_arm = MismatchArm::None;
    else if (arm == "probe") dw.mismatch_arm = MismatchArm::Probe;
    else if (arm == "steering") dw.mismatch_arm = MismatchArm::Steering;
    else parse_fail(w + ".mismatch_arm", "expected \"none\", \"probe\" or \"steering\"");
    c.windows.push_back(dw);
  }

  c.mode_mismatch = num(j, "mode_mismatch", "config", c.mode_mismatch);
  c.stark_shift = boolean(j, "stark_shift", "config", c.stark_shift);
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    if (!m.is_object()) parse_fail("metadata", "expected an object of strings");
    for (const auto& [k, v] : m.items()) {
      if (!v.is_string()) parse_fail("metadata." + k, "expected a string");
      c.metadata.emplace_back(k, v.get<std::string>());
    }
  }
  return c;
}

}  // namespace

std::string config_to_json(const ScenarioConfig& c, bool with_hash) {
  ojson j = to_ojson(c);
  if (with_hash) j["config_hash"] = config_hash_hex(c);
  return j.dump(2) + "\n";
}

ScenarioConfig config_from_json(const std::string& text, const ScenarioConfig* base) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "config: top level must be an object");
  if (base) {
    ojson merged = to_ojson(*base);
    merged.merge_patch(doc);
    return from_ojson(merged);
  }
  return from_ojson(doc);
}

ScenarioConfig load_config(const std::string& path, const ScenarioConfig* base) {
  return config_from_json(read_text_file(path), base);
}

void save_config(const std::string& path, const ScenarioConfig& c) {
  write_text_file(path, config_to_json(c));
}

std::uint64_t config_hash(const ScenarioConfig& c) {
  const nlohmann::json sorted = nlohmann::json::parse(to_ojson(c).dump());
  const std::string s = sorted.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const ScenarioConfig& c) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = config_hash(c);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace lgem
