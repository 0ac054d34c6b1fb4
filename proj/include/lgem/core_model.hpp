// Domain types for the Lambda gradient echo memory simulator.
//
// Units are scaled: the medium spans z in [0, L], the optical group velocity
// is folded into a moving frame, and every rate is an angular rate per
// time unit (rad/us by default). Only dimensionless groups such as gNL/gamma_e
// and Omega_c/Delta carry physical meaning.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lgem {

using cplx = std::complex<double>;

enum class ErrorCode {
  Ok = 0,
  InvalidArgument,
  Validation,
  NonFinite,
  StabilityBound,
  ZeroGradient,
  NoRoot,
  EmptySpectrum,
  NoCrossing,
  EmptyWindow,
  DegenerateFit,
  SeparationTooSmall,
  Io,
  Parse,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct EnsembleParams {
  double g = 1.0;        // atom-light coupling
  double N = 1.0;        // linear atomic density
  double Delta = 1.0;    // one-photon Raman detuning, rad/time
  double gamma0 = 0.0;   // spin coherence decay, 1/time
  double gamma_e = 1.0;  // excited-state linewidth, normalization only
  double L = 1.0;        // medium length
};

// gNL / gamma_e
double dimensionless_od(const EnsembleParams& p);

// Piecewise-constant detuning gradient eta(t). A segment with eta == 0 must be
// flagged as a hold.
struct GradientSegment {
  double t_start = 0.0;
  double eta = 0.0;  // rad/time per unit length
  bool hold = false;
};

struct GradientProfile {
  std::vector<GradientSegment> segments;

  double eta_at(double t) const;
  // Switch instants strictly inside (t0, t1).
  std::vector<double> switches_between(double t0, double t1) const;
  double max_abs_eta() const;
};

// One tone of a coupling channel: piecewise-constant complex Rabi frequency
// multiplied by exp(-i * freq_offset * t).
struct CouplingSegment {
  double t_start = 0.0;
  cplx rabi{0.0, 0.0};
  std::string tag;  // "write", "interfere", "read", "hold", ...
};

struct CouplingTone {
  double freq_offset = 0.0;
  std::vector<CouplingSegment> segments;

  cplx value_at(double t) const { return value_at(t, t); }
  // Segment chosen at t_seg, phase evaluated at t. Used by the integrator so
  // a substep ending on a switch still sees the segment it started in.
  cplx value_at(double t, double t_seg) const;
  double max_abs() const;
};

struct CouplingChannel {
  double raman_offset = 0.0;  // carrier offset of this Raman pair, rad/time
  std::vector<CouplingTone> tones;

  cplx rabi_at(double t) const { return rabi_at(t, t); }
  cplx rabi_at(double t, double t_seg) const;
  double max_abs() const;
  std::vector<double> switch_times() const;
};

struct CouplingSchedule {
  std::vector<CouplingChannel> channels;
};

enum class PulseLabel { Probe, Steering };
const char* pulse_label_name(PulseLabel l);

enum class PulseShape { Gaussian, Sampled };

// Complex boundary envelope injected at z = 0 on optical channel `channel`.
// Gaussian: amplitude * exp(-(t - center)^2 / (2 width^2)) on [t_on, t_off].
// Sampled: linear interpolation of samples starting at t0 with step dt,
// scaled by amplitude. Both are multiplied by exp(-i carrier * t).
struct PulseEnvelope {
  PulseLabel label = PulseLabel::Probe;
  int channel = 0;
  PulseShape shape = PulseShape::Gaussian;
  cplx amplitude{1.0, 0.0};
  double center = 0.0;
  double width = 1.0;
  double t_on = 0.0;
  double t_off = 0.0;
  double carrier = 0.0;
  double sample_t0 = 0.0;
  double sample_dt = 0.0;
  std::vector<cplx> samples;

  cplx value_at(double t) const;
  // Zero when t_seg lies outside the support, otherwise the envelope at t
  // clamped into the support.
  cplx value_at(double t, double t_seg) const;
  double support_begin() const;
  double support_end() const;
};

struct TimeWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct GridSpec {
  int nz = 512;
  int nt = 4096;
  double t_end = 1.0;

  double dt() const { return t_end / nt; }
};

// Which pulse arm a detection window weights by the mode overlap mu.
enum class MismatchArm { None, Probe, Steering };
const char* mismatch_arm_name(MismatchArm a);

struct DetectionWindow {
  std::string name;
  double t_start = 0.0;
  double t_end = 0.0;
  MismatchArm mismatch_arm = MismatchArm::None;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::string time_unit = "us";  // label only; all rates are per this unit
  EnsembleParams ensemble;
  GradientProfile gradient;
  CouplingSchedule coupling;
  std::vector<PulseEnvelope> pulses;
  GridSpec grid;
  std::vector<DetectionWindow> windows;
  double mode_mismatch = 1.0;  // mu
  bool stark_shift = true;
  // Descriptive metadata only (laser powers, etc.).
  std::vector<std::pair<std::string, std::string>> metadata;

  int optical_channels() const;
  const DetectionWindow* find_window(const std::string& name) const;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;

  void fail(std::string msg) {
    ok = false;
    failures.push_back(std::move(msg));
  }
  std::string summary() const;
};

ValidationReport validate(const ScenarioConfig& config);

// Largest stable step for the config's gradient and coupling.
double max_stable_dt(const ScenarioConfig& config);

}  // namespace lgem
