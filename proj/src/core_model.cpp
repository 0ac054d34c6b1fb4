#include "lgem/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lgem {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::StabilityBound: return "StabilityBound";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::EmptySpectrum: return "EmptySpectrum";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::SeparationTooSmall: return "SeparationTooSmall";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

double dimensionless_od(const EnsembleParams& p) {
  return p.g * p.N * p.L / p.gamma_e;
}

double GradientProfile::eta_at(double t) const {
  double eta = 0.0;
  for (const auto& s : segments) {
    if (s.t_start <= t) eta = s.eta;
    else break;
  }
  return eta;
}

std::vector<double> GradientProfile::switches_between(double t0, double t1) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    double ts = segments[i].t_start;
    if (ts > t0 && ts < t1) out.push_back(ts);
  }
  return out;
}

double GradientProfile::max_abs_eta() const {
  double m = 0.0;
  for (const auto& s : segments) m = std::max(m, std::abs(s.eta));
  return m;
}

cplx CouplingTone::value_at(double t, double t_seg) const {
  cplx v{0.0, 0.0};
  for (const auto& s : segments) {
    if (s.t_start <= t_seg) v = s.rabi;
    else break;
  }
  if (freq_offset != 0.0) v *= std::polar(1.0, -freq_offset * t);
  return v;
}

double CouplingTone::max_abs() const {
  double m = 0.0;
  for (const auto& s : segments) m = std::max(m, std::abs(s.rabi));
  return m;
}

cplx CouplingChannel::rabi_at(double t, double t_seg) const {
  cplx v{0.0, 0.0};
  for (const auto& tone : tones) v += tone.value_at(t, t_seg);
  return v;
}

double CouplingChannel::max_abs() const {
  double m = 0.0;
  for (const auto& tone : tones) m += tone.max_abs();
  return m;
}

std::vector<double> CouplingChannel::switch_times() const {
  std::vector<double> out;
  for (const auto& tone : tones)
    for (std::size_t i = 1; i < tone.segments.size(); ++i)
      out.push_back(tone.segments[i].t_start);
  return out;
}

const char* pulse_label_name(PulseLabel l) {
  return l == PulseLabel::Probe ? "probe" : "steering";
}

const char* mismatch_arm_name(MismatchArm a) {
  switch (a) {
    case MismatchArm::None: return "none";
    case MismatchArm::Probe: return "probe";
    case MismatchArm::Steering: return "steering";
  }
  return "none";
}

cplx PulseEnvelope::value_at(double t) const {
  cplx v{0.0, 0.0};
  if (shape == PulseShape::Gaussian) {
    if (t < t_on || t > t_off) return v;
    double x = (t - center) / width;
    v = amplitude * std::exp(-0.5 * x * x);
  } else {
    if (samples.empty() || sample_dt <= 0.0) return v;
    double u = (t - sample_t0) / sample_dt;
    if (u < 0.0 || u > static_cast<double>(samples.size() - 1)) return v;
    auto i = static_cast<std::size_t>(u);
    if (i + 1 >= samples.size()) {
      v = samples.back();
    } else {
      double f = u - static_cast<double>(i);
      v = samples[i] * (1.0 - f) + samples[i + 1] * f;
    }
    v *= amplitude;
  }
  if (carrier != 0.0) v *= std::polar(1.0, -carrier * t);
  return v;
}

cplx PulseEnvelope::value_at(double t, double t_seg) const {
  double b = support_begin(), e = support_end();
  if (t_seg < b || t_seg > e) return {0.0, 0.0};
  return value_at(std::clamp(t, b, e));
}

double PulseEnvelope::support_begin() const {
  return shape == PulseShape::Gaussian ? t_on : sample_t0;
}

double PulseEnvelope::support_end() const {
  if (shape == PulseShape::Gaussian) return t_off;
  if (samples.empty()) return sample_t0;
  return sample_t0 + sample_dt * static_cast<double>(samples.size() - 1);
}

int ScenarioConfig::optical_channels() const {
  return static_cast<int>(coupling.channels.size());
}

const DetectionWindow* ScenarioConfig::find_window(const std::string& n) const {
  for (const auto& w : windows)
    if (w.name == n) return &w;
  return nullptr;
}

std::string ValidationReport::summary() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (i) os << "; ";
    os << failures[i];
  }
  return os.str();
}

namespace {

bool finite(double x) { return std::isfinite(x); }
bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Fastest coupling-driven rate the explicit integrator must resolve: field
// feedback g N L |Omega|^2 / Delta^2 and the light shift sum |Omega|^2 / Delta.
double coupling_rate(const ScenarioConfig& c) {
  const auto& p = c.ensemble;
  double sum_sq = 0.0;
  for (const auto& ch : c.coupling.channels) sum_sq += ch.max_abs() * ch.max_abs();
  double feedback = p.g * p.N * p.L * sum_sq / (p.Delta * p.Delta);
  double stark = c.stark_shift ? sum_sq / std::abs(p.Delta) : 0.0;
  return std::max(feedback, stark);
}

}  // namespace

double max_stable_dt(const ScenarioConfig& c) {
  const auto& p = c.ensemble;
  double bound = 0.1 / (c.gradient.max_abs_eta() * p.L);
  double omega_max = 0.0;
  for (const auto& ch : c.coupling.channels) omega_max = std::max(omega_max, ch.max_abs());
  if (omega_max > 0.0 && p.g * p.N > 0.0)
    bound = std::min(bound, 0.1 * std::abs(p.Delta) / (p.g * p.N * omega_max));
  double rate = coupling_rate(c);
  if (rate > 0.0) bound = std::min(bound, 0.5 / rate);
  for (const auto& ch : c.coupling.channels)
    for (const auto& tone : ch.tones)
      if (tone.freq_offset != 0.0) bound = std::min(bound, 0.2 / std::abs(tone.freq_offset));
  for (const auto& pl : c.pulses)
    if (pl.carrier != 0.0) bound = std::min(bound, 0.2 / std::abs(pl.carrier));
  return bound;
}

ValidationReport validate(const ScenarioConfig& c) {
  ValidationReport r;
  const auto& p = c.ensemble;

  if (!(p.Delta != 0.0) || !finite(p.Delta)) r.fail("Delta must be nonzero");
  if (!(p.gamma0 >= 0.0)) r.fail("gamma0 must be >= 0");
  if (!(p.gamma_e > 0.0)) r.fail("gamma_e must be > 0");
  if (!(p.L > 0.0)) r.fail("L must be > 0");
  if (!(p.g >= 0.0)) r.fail("g must be >= 0");
  if (!(p.N >= 0.0)) r.fail("N must be >= 0");
  if (p.gamma_e > 0.0 && !finite(dimensionless_od(p))) r.fail("gNL/gamma_e must be finite");

  const auto& segs = c.gradient.segments;
  if (segs.empty()) {
    r.fail("gradient must have at least one segment");
  } else {
    if (segs.front().t_start != 0.0) r.fail("first gradient segment must start at t=0");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (i > 0 && !(segs[i].t_start > segs[i - 1].t_start))
        r.fail("gradient segment start times must be strictly increasing");
      if (!finite(segs[i].eta)) r.fail("gradient eta must be finite");
      if (segs[i].eta == 0.0 && !segs[i].hold)
        r.fail("gradient segment " + std::to_string(i) + " has eta=0 but is not flagged as hold");
      if (segs[i].eta != 0.0 && segs[i].hold)
        r.fail("gradient hold segment " + std::to_string(i) + " must have eta=0");
    }
    if (!(c.gradient.max_abs_eta() > 0.0)) r.fail("gradient must be nonzero in at least one segment");
  }

  if (c.coupling.channels.empty()) r.fail("coupling schedule needs at least one channel");
  for (std::size_t ci = 0; ci < c.coupling.channels.size(); ++ci) {
    const auto& ch = c.coupling.channels[ci];
    if (ch.tones.empty()) r.fail("coupling channel " + std::to_string(ci) + " has no tones");
    for (const auto& tone : ch.tones) {
      if (tone.segments.empty() || tone.segments.front().t_start != 0.0)
        r.fail("coupling channel " + std::to_string(ci) + " tone must start at t=0");
      for (std::size_t i = 0; i < tone.segments.size(); ++i) {
        if (!finite(tone.segments[i].rabi)) r.fail("coupling Rabi frequency must be finite");
        if (i > 0 && !(tone.segments[i].t_start > tone.segments[i - 1].t_start))
          r.fail("coupling segment start times must be strictly increasing");
      }
    }
  }

  for (std::size_t i = 0; i < c.pulses.size(); ++i) {
    const auto& pl = c.pulses[i];
    std::string tag = "pulse " + std::to_string(i);
    if (pl.channel < 0 || pl.channel >= c.optical_channels())
      r.fail(tag + " refers to a missing channel");
    if (!finite(pl.amplitude)) r.fail(tag + " amplitude must be finite");
    if (pl.shape == PulseShape::Gaussian) {
      if (!(pl.width > 0.0)) r.fail(tag + " width must be > 0");
      if (!(pl.t_off > pl.t_on)) r.fail(tag + " support must be non-empty");
    } else {
      if (!(pl.sample_dt > 0.0)) r.fail(tag + " sample_dt must be > 0");
      if (pl.samples.size() < 2) r.fail(tag + " needs at least two samples");
      for (const auto& s : pl.samples)
        if (!finite(s)) {
          r.fail(tag + " samples must be finite");
          break;
        }
    }
  }

  int nz = c.grid.nz;
  if (nz < 16 || (nz & (nz - 1)) != 0) r.fail("nz must be a power of two >= 16");
  if (c.grid.nt < 1) r.fail("nt must be >= 1");
  if (!(c.grid.t_end > 0.0)) r.fail("t_end must be > 0");

  if (c.grid.nt >= 1 && c.grid.t_end > 0.0 && r.ok) {
    double dt = c.grid.dt();
    double eta_bound = 0.1 / (c.gradient.max_abs_eta() * p.L);
    if (!(dt < eta_bound))
      r.fail("dt=" + std::to_string(dt) + " violates gradient bound dt < 0.1/(max|eta| L)=" +
             std::to_string(eta_bound));
    double stable = max_stable_dt(c);
    if (!(dt < stable) && dt < eta_bound)
      r.fail("dt=" + std::to_string(dt) + " violates coupling bound dt < " + std::to_string(stable));
  }

  std::vector<const DetectionWindow*> ws;
  for (const auto& w : c.windows) {
    if (w.name.empty()) r.fail("detection window needs a name");
    if (!(w.t_end > w.t_start)) r.fail("window " + w.name + " is empty");
    if (w.t_start < 0.0 || w.t_end > c.grid.t_end)
      r.fail("window " + w.name + " lies outside [0, t_end]");
    ws.push_back(&w);
  }
  std::sort(ws.begin(), ws.end(),
            [](auto* a, auto* b) { return a->t_start < b->t_start; });
  for (std::size_t i = 1; i < ws.size(); ++i) {
    if (ws[i]->t_start < ws[i - 1]->t_end)
      r.fail("windows " + ws[i - 1]->name + " and " + ws[i]->name + " overlap");
  }
  for (std::size_t i = 0; i < c.windows.size(); ++i)
    for (std::size_t j = i + 1; j < c.windows.size(); ++j)
      if (c.windows[i].name == c.windows[j].name)
        r.fail("duplicate window name " + c.windows[i].name);

  if (!(c.mode_mismatch >= 0.0 && c.mode_mismatch <= 1.0)) r.fail("mode_mismatch must lie in [0,1]");
  return r;
}

}  // namespace lgem
