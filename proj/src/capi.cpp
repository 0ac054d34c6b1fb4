#include "lgem/lgem.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lgem/analysis.hpp"
#include "lgem/beamsplitter.hpp"
#include "lgem/config_io.hpp"
#include "lgem/record_io.hpp"
#include "lgem/scenario.hpp"

struct lgem_config {
  lgem::ScenarioConfig c;
};

struct lgem_record {
  lgem::SimulationRecord r;
};

namespace {

using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

lgem_status to_status(lgem::ErrorCode c) {
  using lgem::ErrorCode;
  switch (c) {
    case ErrorCode::Ok: return LGEM_OK;
    case ErrorCode::InvalidArgument: return LGEM_ERR_INVALID_ARGUMENT;
    case ErrorCode::Validation: return LGEM_ERR_VALIDATION;
    case ErrorCode::NonFinite: return LGEM_ERR_NON_FINITE;
    case ErrorCode::StabilityBound: return LGEM_ERR_STABILITY_BOUND;
    case ErrorCode::ZeroGradient: return LGEM_ERR_ZERO_GRADIENT;
    case ErrorCode::NoRoot: return LGEM_ERR_NO_ROOT;
    case ErrorCode::EmptySpectrum: return LGEM_ERR_EMPTY_SPECTRUM;
    case ErrorCode::NoCrossing: return LGEM_ERR_NO_CROSSING;
    case ErrorCode::EmptyWindow: return LGEM_ERR_EMPTY_WINDOW;
    case ErrorCode::DegenerateFit: return LGEM_ERR_DEGENERATE_FIT;
    case ErrorCode::SeparationTooSmall: return LGEM_ERR_SEPARATION_TOO_SMALL;
    case ErrorCode::Io: return LGEM_ERR_IO;
    case ErrorCode::Parse: return LGEM_ERR_PARSE;
  }
  return LGEM_ERR_INTERNAL;
}

template <class F>
lgem_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return LGEM_OK;
  } catch (const lgem::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LGEM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LGEM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw lgem::Error(lgem::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<double> range_values(double start, double stop, int count) {
  if (count < 1) throw lgem::Error(lgem::ErrorCode::InvalidArgument, "range count must be >= 1");
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i)
    v[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
  return v;
}

constexpr int kInnerPhases = 12;

std::string run_sweep(const lgem::ScenarioConfig& cfg, const std::string& kind,
                      const std::vector<double>& xs, int workers, const char* out_dir) {
  using namespace lgem;
  const std::string hash = config_hash_hex(cfg);
  std::ostringstream csv;
  std::string summary;
  if (kind == "phase") {
    auto pair = fringe_scan_both([&](double ph) { return with_scan_phase(cfg, ph); }, xs, workers);
    write_fringe_csv(csv, pair, hash);
    summary = fringe_summary_json(
        pair, hash,
        phase_knob(cfg) == PhaseKnob::SteeringCoupling ? "steering-coupling" : "interference-coupling");
  } else if (kind == "coupling") {
    bool has_interfere = false;
    for (const auto& ch : cfg.coupling.channels)
      for (const auto& tone : ch.tones)
        for (const auto& seg : tone.segments) has_interfere |= seg.tag == "interfere";
    if (!has_interfere)
      throw Error(ErrorCode::InvalidArgument,
                  "coupling sweep needs a config with interference-era coupling segments");
    auto pts = coupling_sweep(
        [&](double x, double ph) { return with_scan_phase(with_interference_power(cfg, x), ph); },
        xs, linspace_phases(kInnerPhases), workers);
    write_curve_csv(csv, pts, "relative_power", hash);
    summary = curve_summary_json(pts, "relative_power", hash, 1.0);
  } else if (kind == "mismatch") {
    bool armed = false;
    for (const auto& w : cfg.windows) armed |= w.mismatch_arm != MismatchArm::None;
    if (!armed)
      throw Error(ErrorCode::InvalidArgument,
                  "mismatch sweep needs detection windows with a mismatch_arm");
    auto pts = mismatch_curve(
        [&](double mu, double ph) { return with_scan_phase(with_mismatch(cfg, mu), ph); }, xs,
        linspace_phases(kInnerPhases), workers);
    write_curve_csv(csv, pts, "mu", hash);
    summary = curve_summary_json(pts, "mu", hash, 1.0);
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown sweep kind '" + kind + "' (expected phase, coupling or mismatch)");
  }
  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, std::string("cannot create '") + out_dir + "': " + ec.message());
    const std::filesystem::path base(out_dir);
    write_text_file((base / "sweep.csv").string(), csv.str());
    write_text_file((base / "summary.json").string(), summary);
    write_text_file((base / "config.json").string(), config_to_json(cfg, true));
  }
  return summary;
}

[[noreturn]] void bad_events(const std::string& what) {
  throw lgem::Error(lgem::ErrorCode::Parse, "events: " + what);
}

lgem::cplx event_amp(const ojson& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  bad_events(where + " must be a number or [re, im]");
}

double event_num(const ojson& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) bad_events(where + "." + key + " must be a number");
  return j[key].get<double>();
}

std::string oracle_json(const std::string& text) {
  using namespace lgem;
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("events: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) bad_events("top level must be an object");
  for (const auto& [k, v] : doc.items())
    if (k != "gamma0" && k != "pulses" && k != "events" && k != "hold_times" && k != "balance")
      bad_events("unknown key '" + k + "'");
  const double gamma0 = event_num(doc, "gamma0", 0.0, "events");
  if (gamma0 < 0.0) bad_events("gamma0 must be >= 0");

  std::vector<cplx> pulses;
  if (doc.contains("pulses")) {
    if (!doc["pulses"].is_array()) bad_events("pulses must be an array");
    for (std::size_t i = 0; i < doc["pulses"].size(); ++i)
      pulses.push_back(event_amp(doc["pulses"][i], "pulses[" + std::to_string(i) + "]"));
  }
  std::vector<BsEvent> events;
  if (doc.contains("events")) {
    if (!doc["events"].is_array()) bad_events("events must be an array");
    for (std::size_t i = 0; i < doc["events"].size(); ++i) {
      const auto& e = doc["events"][i];
      const std::string w = "events[" + std::to_string(i) + "]";
      if (!e.is_object()) bad_events(w + " must be an object");
      for (const auto& [k, v] : e.items())
        if (k != "kind" && k != "beta" && k != "theta" && k != "mu")
          bad_events(w + ": unknown key '" + k + "'");
      BsEvent ev;
      if (!e.contains("kind") || !e["kind"].is_string()) bad_events(w + ".kind is required");
      const std::string kind = e["kind"].get<std::string>();
      if (kind == "write") ev.kind = BsKind::Write;
      else if (kind == "read") ev.kind = BsKind::Read;
      else if (kind == "interfere") ev.kind = BsKind::Interfere;
      else bad_events(w + ".kind must be write, read or interfere");
      if (!e.contains("beta")) bad_events(w + ".beta is required");
      ev.beta = event_num(e, "beta", 0.0, w);
      if (!(ev.beta >= 0.0)) bad_events(w + ".beta must be >= 0");
      ev.theta = event_num(e, "theta", 0.0, w);
      ev.mu = event_num(e, "mu", 1.0, w);
      if (!(ev.mu >= 0.0 && ev.mu <= 1.0)) bad_events(w + ".mu must lie in [0,1]");
      events.push_back(ev);
    }
  }
  std::vector<double> holds;
  if (doc.contains("hold_times")) {
    if (!doc["hold_times"].is_array()) bad_events("hold_times must be an array");
    for (const auto& h : doc["hold_times"]) {
      if (!h.is_number() || h.get<double>() < 0.0) bad_events("hold_times must be numbers >= 0");
      holds.push_back(h.get<double>());
    }
  }
  if (!events.empty() && holds.empty()) holds.assign(events.size() - 1, 0.0);

  ojson out;
  out["gamma0"] = gamma0;
  out["outputs"] = ojson::array();
  if (!events.empty()) {
    CascadeState st;
    try {
      st = predict_record(pulses, events, gamma0, holds);
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, std::string("events: ") + e.what());
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
      const cplx v = st.optical_out[i];
      out["outputs"].push_back({{"event", i},
                                {"kind", bs_kind_name(events[i].kind)},
                                {"beta", events[i].beta},
                                {"T", transmissivity(events[i].beta)},
                                {"R", reflectivity(events[i].beta)},
                                {"amplitude", ojson::array({v.real(), v.imag()})},
                                {"energy", std::norm(v)}});
    }
    out["stored"] = {{"amplitude", ojson::array({st.stored.real(), st.stored.imag()})},
                     {"energy", std::norm(st.stored)}};
  }
  if (doc.contains("balance")) {
    const auto& b = doc["balance"];
    if (!b.is_object()) bad_events("balance must be an object");
    for (const auto& [k, v] : b.items())
      if (k != "beta1" && k != "tau" && k != "probe" && k != "steering")
        bad_events("balance: unknown key '" + k + "'");
    const double beta1 = event_num(b, "beta1", 0.0, "balance");
    const double tau = event_num(b, "tau", 0.0, "balance");
    const double ep = std::abs(event_amp(b.value("probe", ojson(1.0)), "balance.probe"));
    const double es = std::abs(event_amp(b.value("steering", ojson(1.0)), "balance.steering"));
    ojson bj;
    bj["beta1"] = beta1;
    bj["tau"] = tau;
    try {
      const double beta2 = balance_coupling(reflectivity(beta1), gamma0, tau, ep, es);
      bj["solution"] = {{"beta2", beta2}, {"T2", transmissivity(beta2)}, {"R2", reflectivity(beta2)}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoRoot) throw;
      bj["solution"] = nullptr;
      bj["no_solution"] = e.what();
    }
    out["balance"] = bj;
  }
  return out.dump(2) + "\n";
}

}  // namespace

extern "C" {

const char* lgem_version(void) { return "1.0.0"; }

const char* lgem_status_name(lgem_status s) {
  switch (s) {
    case LGEM_OK: return "ok";
    case LGEM_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case LGEM_ERR_VALIDATION: return "validation";
    case LGEM_ERR_NON_FINITE: return "non-finite";
    case LGEM_ERR_STABILITY_BOUND: return "stability-bound";
    case LGEM_ERR_ZERO_GRADIENT: return "zero-gradient";
    case LGEM_ERR_NO_ROOT: return "no-root";
    case LGEM_ERR_EMPTY_SPECTRUM: return "empty-spectrum";
    case LGEM_ERR_NO_CROSSING: return "no-crossing";
    case LGEM_ERR_EMPTY_WINDOW: return "empty-window";
    case LGEM_ERR_DEGENERATE_FIT: return "degenerate-fit";
    case LGEM_ERR_SEPARATION_TOO_SMALL: return "separation-too-small";
    case LGEM_ERR_IO: return "io";
    case LGEM_ERR_PARSE: return "parse";
    case LGEM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lgem_last_error(void) { return g_last_error.c_str(); }

void lgem_string_free(char* s) { std::free(s); }

lgem_status lgem_preset_names(char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    *json_out = dup(ojson(lgem::preset_names()).dump());
  });
}

lgem_status lgem_config_from_preset(const char* name, lgem_config** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    *out = new lgem_config{lgem::build_preset(name)};
  });
}

lgem_status lgem_config_from_json(const char* json, const lgem_config* base, lgem_config** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new lgem_config{lgem::config_from_json(json, base ? &base->c : nullptr)};
  });
}

lgem_status lgem_config_load(const char* path, const lgem_config* base, lgem_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new lgem_config{lgem::load_config(path, base ? &base->c : nullptr)};
  });
}

lgem_status lgem_config_to_json(const lgem_config* cfg, char** json_out) {
  return guard([&] {
    need(cfg, "cfg");
    need(json_out, "json_out");
    *json_out = dup(lgem::config_to_json(cfg->c));
  });
}

lgem_status lgem_config_hash(const lgem_config* cfg, char** hex_out) {
  return guard([&] {
    need(cfg, "cfg");
    need(hex_out, "hex_out");
    *hex_out = dup(lgem::config_hash_hex(cfg->c));
  });
}

lgem_status lgem_config_validate(const lgem_config* cfg, char** report_out) {
  lgem::ValidationReport rep;
  lgem_status st = guard([&] {
    need(cfg, "cfg");
    rep = lgem::validate(cfg->c);
    if (report_out) {
      std::string text;
      for (const auto& f : rep.failures) text += f + "\n";
      *report_out = dup(text);
    }
  });
  if (st != LGEM_OK) return st;
  if (!rep.ok) {
    g_last_error = rep.summary();
    return LGEM_ERR_VALIDATION;
  }
  return LGEM_OK;
}

void lgem_config_free(lgem_config* cfg) { delete cfg; }

void lgem_run_options_default(lgem_run_options* opts) {
  if (!opts) return;
  lgem::SolverSettings s;
  opts->snapshot_stride = s.snapshot_stride;
  opts->kspectrum_stride = s.kspectrum_stride;
  opts->keep_snapshots = s.keep_snapshots ? 1 : 0;
}

lgem_status lgem_run(const lgem_config* cfg, const lgem_run_options* opts, lgem_record** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    lgem::SolverSettings s;
    if (opts) {
      if (opts->snapshot_stride < 1 || opts->kspectrum_stride < 1)
        throw lgem::Error(lgem::ErrorCode::InvalidArgument, "strides must be >= 1");
      s.snapshot_stride = opts->snapshot_stride;
      s.kspectrum_stride = opts->kspectrum_stride;
      s.keep_snapshots = opts->keep_snapshots != 0;
    }
    *out = new lgem_record{lgem::run_scenario(cfg->c, s)};
  });
}

lgem_status lgem_record_window_energy(const lgem_record* rec, const char* window, double* energy_out) {
  return guard([&] {
    need(rec, "rec");
    need(window, "window");
    need(energy_out, "energy_out");
    auto it = rec->r.window_energies.find(window);
    if (it == rec->r.window_energies.end())
      throw lgem::Error(lgem::ErrorCode::InvalidArgument, std::string("no window named '") + window + "'");
    *energy_out = it->second;
  });
}

lgem_status lgem_record_sample_count(const lgem_record* rec, size_t* count_out) {
  return guard([&] {
    need(rec, "rec");
    need(count_out, "count_out");
    *count_out = rec->r.times.size();
  });
}

lgem_status lgem_record_output_sample(const lgem_record* rec, int channel, size_t i, double* t,
                                      double* re, double* im) {
  return guard([&] {
    need(rec, "rec");
    if (channel < 0 || static_cast<std::size_t>(channel) >= rec->r.boundary_out.size() ||
        i >= rec->r.times.size())
      throw lgem::Error(lgem::ErrorCode::InvalidArgument, "channel or sample index out of range");
    const auto v = rec->r.boundary_out[channel][i];
    if (t) *t = rec->r.times[i];
    if (re) *re = v.real();
    if (im) *im = v.imag();
  });
}

lgem_status lgem_record_energies_json(const lgem_record* rec, char** json_out) {
  return guard([&] {
    need(rec, "rec");
    need(json_out, "json_out");
    *json_out = dup(lgem::window_energies_json(rec->r));
  });
}

lgem_status lgem_record_export(const lgem_record* rec, const char* dir) {
  return guard([&] {
    need(rec, "rec");
    need(dir, "dir");
    lgem::export_record(dir, rec->r);
  });
}

lgem_status lgem_record_save(const lgem_record* rec, const char* path) {
  return guard([&] {
    need(rec, "rec");
    need(path, "path");
    lgem::save_record(path, rec->r);
  });
}

lgem_status lgem_record_load(const char* path, lgem_record** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new lgem_record{lgem::load_record(path)};
  });
}

void lgem_record_free(lgem_record* rec) { delete rec; }

lgem_status lgem_sweep(const lgem_config* cfg, const char* kind, double start, double stop,
                       int count, int workers, const char* out_dir, char** summary_out) {
  return guard([&] {
    need(cfg, "cfg");
    need(kind, "kind");
    auto rep = lgem::validate(cfg->c);
    if (!rep.ok) throw lgem::Error(lgem::ErrorCode::Validation, rep.summary());
    std::string summary = run_sweep(cfg->c, kind, range_values(start, stop, count), workers, out_dir);
    if (summary_out) *summary_out = dup(summary);
  });
}

lgem_status lgem_oracle(const char* events_json, char** result_out) {
  return guard([&] {
    need(events_json, "events_json");
    need(result_out, "result_out");
    *result_out = dup(oracle_json(events_json));
  });
}

}  // extern "C"
