#include "lgem/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lgem/analysis.hpp"
#include "lgem/beamsplitter.hpp"

namespace lgem {

namespace {

constexpr const char* kProtocolKey = "protocol";
constexpr const char* kBeatKey = "beat_note";

std::string meta(const ScenarioConfig& c, const std::string& key) {
  for (const auto& [k, v] : c.metadata)
    if (k == key) return v;
  return {};
}

void set_meta(ScenarioConfig& c, const std::string& key, std::string value) {
  for (auto& [k, v] : c.metadata)
    if (k == key) {
      v = std::move(value);
      return;
    }
  c.metadata.emplace_back(key, std::move(value));
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

GridSpec make_grid(const MediumParams& m, double t_end) {
  GridSpec g;
  g.nz = m.nz;
  g.t_end = t_end;
  g.nt = static_cast<int>(std::ceil(t_end * m.steps_per_time));
  return g;
}

PulseEnvelope gaussian_pulse(PulseLabel label, int channel, cplx amplitude, double t0,
                             double duration) {
  PulseEnvelope p;
  p.label = label;
  p.channel = channel;
  p.shape = PulseShape::Gaussian;
  p.amplitude = amplitude;
  p.t_on = t0;
  p.t_off = t0 + duration;
  p.center = t0 + 0.5 * duration;
  p.width = duration / 6.0;
  return p;
}

struct Timeline {
  double t_probe, t_e1, t_e2;
  double write_end, int_start, int_end, read_start, read_end;
};

Timeline time_domain_timeline(const TimeDomainParams& p) {
  Timeline t;
  const double d = p.probe_duration;
  const double m = p.coupling_margin;
  t.t_probe = 0.5 * d;
  t.t_e1 = t.t_probe + p.tau1;
  t.t_e2 = t.t_e1 + p.tau2;
  t.write_end = d + 0.5 * m;
  t.int_start = t.t_e1 - 0.5 * d - m;
  t.int_end = t.t_e1 + 0.5 * d + m;
  t.read_start = t.t_e2 - 0.5 * d - m;
  t.read_end = t.t_e2 + 0.5 * d + m;
  const double flip1 = t.t_probe + 0.5 * p.tau1;
  const double flip2 = t.t_e1 + 0.5 * p.tau2;
  if (!(t.write_end < flip1 && flip1 < t.int_start && t.int_end < flip2 && flip2 < t.read_start))
    throw Error(ErrorCode::InvalidArgument,
                "storage times too short for the probe duration and coupling margins");
  return t;
}

ScenarioConfig time_domain_skeleton(const TimeDomainParams& p, double interference_factor) {
  const auto& m = p.medium;
  const Timeline tl = time_domain_timeline(p);
  ScenarioConfig c;
  c.name = "time-domain";
  c.ensemble = m.ensemble();
  c.stark_shift = m.stark_shift;
  const double flip1 = tl.t_probe + 0.5 * p.tau1;
  const double flip2 = tl.t_e1 + 0.5 * p.tau2;
  c.gradient.segments = {{0.0, m.eta, false}, {flip1, -m.eta, false}, {flip2, m.eta, false}};

  const double w = m.write_rabi();
  CouplingTone tone;
  tone.segments = {{0.0, w, "write"},
                   {tl.write_end, 0.0, "hold"},
                   {tl.int_start, w * interference_factor, "interfere"},
                   {tl.int_end, 0.0, "hold"},
                   {tl.read_start, w * p.read_factor, "read"}};
  CouplingChannel ch;
  ch.tones = {tone};
  c.coupling.channels = {ch};

  c.pulses = {gaussian_pulse(PulseLabel::Probe, 0, 1.0, 0.0, p.probe_duration)};
  c.grid = make_grid(m, tl.read_end);
  c.windows = {{"leak", 0.0, tl.write_end, MismatchArm::None},
               {"E1", tl.int_start, tl.int_end, MismatchArm::Probe},
               {"E2", tl.read_start, tl.read_end, MismatchArm::Steering}};
  c.mode_mismatch = 1.0;
  set_meta(c, kProtocolKey, "time-domain");
  set_meta(c, "coupling_power_mW", "330");
  return c;
}

SolverSettings quiet_settings(const ScenarioConfig& c) {
  SolverSettings s;
  s.keep_snapshots = false;
  s.kspectrum_stride = c.grid.nt + 1;
  return s;
}

// Complex amplitude of a trace at time t by linear interpolation.
cplx sample_at(const std::vector<double>& t, const std::vector<cplx>& v, double x) {
  if (x <= t.front()) return x < t.front() ? cplx{0.0, 0.0} : v.front();
  if (x >= t.back()) return x > t.back() ? cplx{0.0, 0.0} : v.back();
  const double dt = t[1] - t[0];
  auto i = static_cast<std::size_t>((x - t.front()) / dt);
  i = std::min(i, t.size() - 2);
  double f = (x - t[i]) / (t[i + 1] - t[i]);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

struct Match {
  double overlap;
  cplx inner;  // <S_shift, A>
  double norm_s;
};

Match match_shifted(const std::vector<double>& t, const std::vector<cplx>& A,
                    const std::vector<cplx>& S, std::size_t i0, std::size_t i1, double shift) {
  cplx inner{0.0, 0.0};
  double na = 0.0, ns = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) {
    cplx s = sample_at(t, S, t[i] - shift);
    inner += std::conj(s) * A[i];
    na += std::norm(A[i]);
    ns += std::norm(s);
  }
  double ov = (na > 0.0 && ns > 0.0) ? std::abs(inner) / std::sqrt(na * ns) : 0.0;
  return {ov, inner, ns};
}

ScenarioConfig calibrate_steering(const TimeDomainParams& p, double interference_factor,
                                  SteeringCalibration* cal) {
  ScenarioConfig bare = time_domain_skeleton(p, interference_factor);
  if (p.steering_amplitude == 0.0) {
    if (cal) *cal = {0.0, 0.0, {0.0, 0.0}, interference_factor};
    return bare;
  }
  const auto* e1 = bare.find_window("E1");

  // Dry run: bare echo A(t) in the E1 window.
  auto dry = run(bare, quiet_settings(bare));
  const auto& t = dry.times;
  const auto& A = dry.boundary_out[0];
  std::size_t i0 = 0, i1 = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= e1->t_start) i0 = i;
    if (t[i] <= e1->t_end) i1 = i;
  }

  PulseEnvelope steer;
  steer.label = PulseLabel::Steering;
  steer.channel = 0;
  if (p.steering_shape == SteeringShape::ProbeCopy) {
    std::size_t peak = i0;
    for (std::size_t i = i0; i <= i1; ++i)
      if (std::abs(A[i]) > std::abs(A[peak])) peak = i;
    steer = gaussian_pulse(PulseLabel::Steering, 0, 1.0, t[peak] - 0.5 * p.probe_duration,
                           p.probe_duration);
  } else {
    steer.shape = PulseShape::Sampled;
    steer.samples.assign(A.begin() + static_cast<std::ptrdiff_t>(i0),
                         A.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
    if (p.steering_shape == SteeringShape::EchoReversed)
      std::reverse(steer.samples.begin(), steer.samples.end());
    double e = 0.0;
    for (const auto& s : steer.samples) e += std::norm(s);
    const double norm = std::sqrt(e * (t[1] - t[0]));
    for (auto& s : steer.samples) s /= norm;
    steer.sample_t0 = t[i0];
    steer.sample_dt = t[1] - t[0];
    steer.amplitude = 1.0;
  }

  // Steering alone through the memory: transmitted S(t).
  ScenarioConfig alone = bare;
  alone.pulses = {steer};
  auto srec = run(alone, quiet_settings(alone));
  const auto& S = srec.boundary_out[0];

  // Shift search: coarse grid then golden section, on the shifted output.
  double best = 0.0, best_ov = -1.0;
  for (double sh = -1.0; sh <= 1.0 + 1e-12; sh += 0.02) {
    double ov = match_shifted(t, A, S, i0, i1, sh).overlap;
    if (ov > best_ov) {
      best_ov = ov;
      best = sh;
    }
  }
  double lo = best - 0.02, hi = best + 0.02;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = match_shifted(t, A, S, i0, i1, x1).overlap;
  double f2 = match_shifted(t, A, S, i0, i1, x2).overlap;
  for (int it = 0; it < 40; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = match_shifted(t, A, S, i0, i1, x1).overlap;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = match_shifted(t, A, S, i0, i1, x2).overlap;
    }
  }
  const double shift = 0.5 * (lo + hi);
  const Match mt = match_shifted(t, A, S, i0, i1, shift);

  // Least-squares scale so that the transmitted steering equals the echo.
  cplx scale = mt.inner / mt.norm_s;
  if (p.steering_mode == SteeringMode::FixedRatio) {
    double probe_energy = 0.0;
    for (const auto& v : dry.boundary_in[0]) probe_energy += std::norm(v);
    probe_energy *= t[1] - t[0];
    // the sampled steering has unit energy; match |Es|^2 = ratio^2 |Ep|^2
    double mag = p.steering_amplitude * std::sqrt(probe_energy);
    if (p.steering_shape == SteeringShape::ProbeCopy) mag = p.steering_amplitude;
    scale = std::polar(mag, std::arg(scale));
  } else {
    scale *= p.steering_amplitude;
  }

  if (steer.shape == PulseShape::Sampled) {
    steer.sample_t0 += shift;
  } else {
    steer.center += shift;
    steer.t_on += shift;
    steer.t_off += shift;
  }
  steer.amplitude = scale;

  ScenarioConfig out = bare;
  out.pulses.push_back(steer);
  // keep the steering inside the grid
  out.grid.t_end = std::max(out.grid.t_end, steer.support_end());
  if (cal) *cal = {mt.overlap, shift, scale, interference_factor};
  set_meta(out, "steering_overlap", num(mt.overlap));
  set_meta(out, "steering_shift", num(shift));
  set_meta(out, "steering_shape", steering_shape_name(p.steering_shape));
  return out;
}

double residual_e1_at_pi(const TimeDomainParams& p, double factor) {
  auto c = calibrate_steering(p, factor, nullptr);
  c = with_interference_phase(std::move(c), std::numbers::pi);
  auto rec = run(c, quiet_settings(c));
  return rec.window_energies.at("E1");
}

}  // namespace

EnsembleParams MediumParams::ensemble() const {
  EnsembleParams e;
  e.g = 1.0;
  e.L = L;
  e.Delta = Delta;
  e.gamma0 = gamma0;
  e.gamma_e = std::abs(eta) * L / bandwidth_over_gamma;
  e.N = od * e.gamma_e / (e.g * L);
  return e;
}

const char* steering_shape_name(SteeringShape s) {
  switch (s) {
    case SteeringShape::EchoCopy: return "echo";
    case SteeringShape::EchoReversed: return "echo-reversed";
    case SteeringShape::ProbeCopy: return "probe";
  }
  return "echo";
}

SteeringShape parse_steering_shape(const std::string& s) {
  if (s == "echo") return SteeringShape::EchoCopy;
  if (s == "echo-reversed") return SteeringShape::EchoReversed;
  if (s == "probe") return SteeringShape::ProbeCopy;
  throw Error(ErrorCode::InvalidArgument, "unknown steering shape '" + s + "'");
}

ScenarioConfig build_time_domain(const TimeDomainParams& params, SteeringCalibration* cal) {
  double factor = params.interference_factor;
  if (params.steering_mode == SteeringMode::FixedRatio && params.balance_coupling &&
      params.steering_amplitude > 0.0) {
    // Oracle first guess, then a 1-D search on the solver's E1 at theta = pi.
    const auto ens = params.medium.ensemble();
    const double beta1 = effective_beta(ens, params.medium.eta, params.medium.write_rabi());
    const double beta2 = balance_coupling(reflectivity(beta1), ens.gamma0, params.tau1, 1.0,
                                          params.steering_amplitude);
    const double guess = std::sqrt(beta2 / beta1);
    double lo = 0.8 * guess, hi = 1.25 * guess;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = residual_e1_at_pi(params, x1), f2 = residual_e1_at_pi(params, x2);
    for (int it = 0; it < 12; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = residual_e1_at_pi(params, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = residual_e1_at_pi(params, x2);
      }
    }
    factor = 0.5 * (lo + hi);
  }
  ScenarioConfig c = calibrate_steering(params, factor, cal);
  c = with_interference_phase(std::move(c), params.theta);
  c = with_mismatch(std::move(c), params.mu);
  set_meta(c, "interference_factor", num(factor));
  return c;
}

double memory_bandwidth(const MediumParams& m) { return std::abs(m.eta) * m.L; }

ScenarioConfig build_frequency_domain(const FrequencyDomainParams& p) {
  const auto& m = p.medium;
  const double bw = memory_bandwidth(m);
  const double sep = p.separation_over_bandwidth * bw;
  if (!(sep > bw)) {
    std::ostringstream os;
    os << "channel separation " << sep / (2.0 * std::numbers::pi)
       << " does not exceed the memory bandwidth " << bw / (2.0 * std::numbers::pi);
    throw Error(ErrorCode::SeparationTooSmall, os.str());
  }
  const double d = p.probe_duration;
  const double t_probe = 0.5 * d;
  const double t_echo = t_probe + p.tau;
  const double flip = t_probe + 0.5 * p.tau;
  if (!(d + 0.5 < flip && flip < t_echo - 0.5 * d - 1.0))
    throw Error(ErrorCode::InvalidArgument, "storage time too short for the pulse duration");

  ScenarioConfig c;
  c.name = "freq-domain";
  c.ensemble = m.ensemble();
  c.stark_shift = m.stark_shift;
  c.gradient.segments = {{0.0, m.eta, false}, {flip, -m.eta, false}};

  const double w = m.write_rabi();
  const bool steering_on = p.steering_amplitude != 0.0;
  const cplx ws = steering_on ? std::polar(w * p.steering_coupling, p.phi) : cplx{0.0, 0.0};

  if (p.beat_note) {
    // One optical channel carrying both carriers; the coupling is the sum of
    // two tones, each Raman resonant with its own pulse.
    CouplingTone t0, t1;
    t0.segments = {{0.0, w, "write"}};
    t1.freq_offset = -sep;
    t1.segments = {{0.0, ws, "write"}};
    CouplingChannel ch;
    ch.tones = {t0, t1};
    c.coupling.channels = {ch};
    c.pulses = {gaussian_pulse(PulseLabel::Probe, 0, p.probe_amplitude, 0.0, d)};
    if (steering_on) {
      auto s = gaussian_pulse(PulseLabel::Steering, 0, p.steering_amplitude, 0.0, d);
      s.carrier = sep;
      c.pulses.push_back(s);
    }
  } else {
    CouplingTone t0, t1;
    t0.segments = {{0.0, w, "write"}};
    t1.segments = {{0.0, ws, "write"}};
    CouplingChannel c0, c1;
    c0.tones = {t0};
    c1.raman_offset = sep;
    c1.tones = {t1};
    c.coupling.channels = {c0, c1};
    c.pulses = {gaussian_pulse(PulseLabel::Probe, 0, p.probe_amplitude, 0.0, d)};
    if (steering_on)
      c.pulses.push_back(gaussian_pulse(PulseLabel::Steering, 1, p.steering_amplitude, 0.0, d));
  }

  const double t_end = t_echo + 0.5 * d + 1.0;
  c.grid = make_grid(m, t_end);
  if (p.beat_note) {
    int need = static_cast<int>(std::ceil(t_end / (0.1 / sep)));
    c.grid.nt = std::max(c.grid.nt, need);
  }
  c.windows = {{"E1", 0.0, d + 0.5, MismatchArm::None},
               {"E2", t_echo - 0.5 * d - 1.0, t_end, MismatchArm::None}};
  c.mode_mismatch = p.mu;
  set_meta(c, kProtocolKey, "frequency-domain");
  set_meta(c, kBeatKey, p.beat_note ? "true" : "false");
  set_meta(c, "coupling_power_mW", "160 each");
  set_meta(c, "separation_over_bandwidth", num(p.separation_over_bandwidth));
  return c;
}

SimulationRecord run_scenario(const ScenarioConfig& config, const SolverSettings& settings) {
  return run(config, settings);
}

ScenarioConfig with_interference_phase(ScenarioConfig c, double theta) {
  for (auto& ch : c.coupling.channels)
    for (auto& tone : ch.tones)
      for (auto& seg : tone.segments)
        if (seg.tag == "interfere") seg.rabi = std::polar(std::abs(seg.rabi), theta);
  return c;
}

ScenarioConfig with_interference_power(ScenarioConfig c, double relative_power) {
  const double s = std::sqrt(relative_power);
  for (auto& ch : c.coupling.channels)
    for (auto& tone : ch.tones)
      for (auto& seg : tone.segments)
        if (seg.tag == "interfere") seg.rabi *= s;
  // a stronger coupling may need a finer time step
  const double stable = max_stable_dt(c);
  if (!(c.grid.dt() < stable)) c.grid.nt = static_cast<int>(std::ceil(c.grid.t_end / (0.8 * stable)));
  return c;
}

ScenarioConfig with_channel_phase(ScenarioConfig c, int channel, double phi) {
  if (meta(c, kBeatKey) == "true") {
    auto& tones = c.coupling.channels.at(0).tones;
    for (auto& seg : tones.at(1).segments) seg.rabi = std::polar(std::abs(seg.rabi), phi);
    return c;
  }
  for (auto& tone : c.coupling.channels.at(channel).tones)
    for (auto& seg : tone.segments) seg.rabi = std::polar(std::abs(seg.rabi), phi);
  return c;
}

ScenarioConfig with_mismatch(ScenarioConfig c, double mu) {
  c.mode_mismatch = mu;
  return c;
}

std::vector<std::string> preset_names() { return {"fig2", "time-domain", "freq-domain"}; }

ScenarioConfig build_preset(const std::string& name) {
  if (name == "fig2") {
    TimeDomainParams p;
    p.theta = std::numbers::pi;
    auto c = build_time_domain(p);
    c.name = "fig2";
    return c;
  }
  if (name == "time-domain") return build_time_domain(TimeDomainParams{});
  if (name == "freq-domain") return build_frequency_domain(FrequencyDomainParams{});
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

PhaseKnob phase_knob(const ScenarioConfig& c) {
  return meta(c, kProtocolKey) == "frequency-domain" ? PhaseKnob::SteeringCoupling
                                                     : PhaseKnob::InterferenceCoupling;
}

ScenarioConfig with_scan_phase(const ScenarioConfig& c, double phase) {
  if (phase_knob(c) == PhaseKnob::SteeringCoupling) return with_channel_phase(c, 1, phase);
  return with_interference_phase(c, phase);
}

}  // namespace lgem
