// lgem: command-line front end over the C API.
//
//   lgem simulate [--preset NAME | --config FILE] [--out DIR] [--dry-run] [--snapshot-stride N]
//   lgem sweep --sweep phase|coupling|mismatch --range START:STOP:COUNT [--preset|--config] [--out DIR] [--workers N]
//   lgem oracle EVENTS.json
//
// Exit codes: 0 success, 2 invalid input (validation, parse, bad flags), 3 solver or output error.
// Diagnostics go to stderr only.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lgem/lgem.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct Failure {
  int code;
};

void report(const char* what, lgem_status st) {
  std::cerr << "lgem: " << what << ": [" << lgem_status_name(st) << "] " << lgem_last_error() << '\n';
}

bool input_error(lgem_status st) {
  return st == LGEM_ERR_VALIDATION || st == LGEM_ERR_PARSE || st == LGEM_ERR_INVALID_ARGUMENT ||
         st == LGEM_ERR_SEPARATION_TOO_SMALL;
}

void check(lgem_status st, const char* what, int code) {
  if (st == LGEM_OK) return;
  report(what, st);
  throw Failure{code};
}

void check_run(lgem_status st, const char* what) {
  check(st, what, input_error(st) ? kExitInput : kExitSolver);
}

struct Config {
  lgem_config* p = nullptr;
  ~Config() { lgem_config_free(p); }
};

struct Record {
  lgem_record* p = nullptr;
  ~Record() { lgem_record_free(p); }
};

struct Str {
  char* p = nullptr;
  ~Str() { lgem_string_free(p); }
};

std::string default_out_dir(const std::string& sub) {
  const char* env = std::getenv("LGEM_OUT_DIR");
  std::string base = env && *env ? env : "lgem_out";
  return base + "/" + sub;
}

// Preset alone, config alone, or config keys merged over the preset.
void load(Config& cfg, const std::string& preset, const std::string& config_path) {
  if (!preset.empty()) check(lgem_config_from_preset(preset.c_str(), &cfg.p), "preset", kExitInput);
  if (!config_path.empty()) {
    lgem_config* merged = nullptr;
    check(lgem_config_load(config_path.c_str(), cfg.p, &merged), "config", kExitInput);
    lgem_config_free(cfg.p);
    cfg.p = merged;
  }
  if (!cfg.p) {
    std::cerr << "lgem: one of --preset or --config is required\n";
    throw Failure{kExitInput};
  }
  Str report_text;
  lgem_status st = lgem_config_validate(cfg.p, &report_text.p);
  if (st == LGEM_ERR_VALIDATION) {
    std::cerr << "lgem: config is invalid:\n" << (report_text.p ? report_text.p : "");
    throw Failure{kExitInput};
  }
  check(st, "validate", kExitInput);
}

// Number with an optional pi factor: "6.28", "2pi", "pi", "0.5pi".
double parse_number(std::string s) {
  double scale = 1.0;
  for (const std::string suffix : {"pi", "π"}) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.resize(s.size() - suffix.size());
      scale = std::numbers::pi;
      if (s.empty()) return scale;
      break;
    }
  }
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  double v;
  if (!(is >> v) || !is.eof()) throw std::invalid_argument("bad number");
  return v * scale;
}

struct Range {
  double start, stop;
  int count;
};

Range parse_range(const std::string& text) {
  auto a = text.find(':');
  auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos) throw std::invalid_argument("expected START:STOP:COUNT");
  Range r;
  r.start = parse_number(text.substr(0, a));
  r.stop = parse_number(text.substr(a + 1, b - a - 1));
  const std::string c = text.substr(b + 1);
  std::size_t used = 0;
  r.count = std::stoi(c, &used);
  if (used != c.size() || r.count < 1) throw std::invalid_argument("COUNT must be an integer >= 1");
  return r;
}

int cmd_simulate(const std::string& preset, const std::string& config_path, std::string out,
                 bool dry_run, int stride) {
  Config cfg;
  load(cfg, preset, config_path);
  if (dry_run) {
    Str hash;
    check(lgem_config_hash(cfg.p, &hash.p), "hash", kExitInput);
    std::cerr << "lgem: config valid (hash " << hash.p << ")\n";
    return kExitOk;
  }
  lgem_run_options opts;
  lgem_run_options_default(&opts);
  if (stride > 0) opts.snapshot_stride = stride;
  Record rec;
  check_run(lgem_run(cfg.p, &opts, &rec.p), "simulate");
  if (out.empty()) out = default_out_dir("simulate");
  check(lgem_record_export(rec.p, out.c_str()), "export", kExitSolver);
  check(lgem_record_save(rec.p, (out + "/record.bin").c_str()), "save", kExitSolver);
  return kExitOk;
}

int cmd_sweep(const std::string& preset, const std::string& config_path, std::string out,
              const std::string& kind, const std::string& range_text, int workers) {
  Range r;
  try {
    r = parse_range(range_text);
  } catch (const std::exception& e) {
    std::cerr << "lgem: --range '" << range_text << "': " << e.what() << '\n';
    return kExitInput;
  }
  Config cfg;
  load(cfg, preset, config_path);
  if (out.empty()) out = default_out_dir("sweep-" + kind);
  check_run(lgem_sweep(cfg.p, kind.c_str(), r.start, r.stop, r.count, workers, out.c_str(), nullptr),
            "sweep");
  return kExitOk;
}

int cmd_oracle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "lgem: cannot read '" << path << "'\n";
    return kExitInput;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  Str result;
  check(lgem_oracle(ss.str().c_str(), &result.p), "oracle", kExitInput);
  std::fputs(result.p, stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lambda gradient echo memory simulator"};
  app.require_subcommand(1);

  std::string preset, config_path, out, sweep_kind = "phase", range_text, events;
  bool dry_run = false;
  int stride = 0, workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", preset, "named preset (fig2, time-domain, freq-domain)");
    sub->add_option("--config", config_path, "JSON config; merged over --preset when both given");
    sub->add_option("--out", out, "output directory (default $LGEM_OUT_DIR/<command>)");
  };

  auto* sim = app.add_subcommand("simulate", "run one scenario and export the record");
  add_common(sim);
  sim->add_flag("--dry-run", dry_run, "validate only, write nothing");
  sim->add_option("--snapshot-stride", stride, "keep every n-th step as a snapshot")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "phase, coupling or mismatch sweep");
  add_common(sweep);
  sweep->add_option("--sweep", sweep_kind, "phase | coupling | mismatch")
      ->check(CLI::IsMember({"phase", "coupling", "mismatch"}));
  sweep->add_option("--range", range_text, "START:STOP:COUNT (pi suffix allowed)")->required();
  sweep->add_option("--workers", workers, "parallel runs (default: processors)")
      ->check(CLI::NonNegativeNumber);

  auto* oracle = app.add_subcommand("oracle", "beamsplitter-cascade prediction for an event list");
  oracle->add_option("events", events, "event-list JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lgem: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*sim) return cmd_simulate(preset, config_path, out, dry_run, stride);
    if (*sweep) return cmd_sweep(preset, config_path, out, sweep_kind, range_text, workers);
    if (*oracle) return cmd_oracle(events);
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitInput;
}
