// Builders for the two interference protocols and the named CLI presets.
//
// Time axis: the probe occupies [0, probe_duration]; storage times are
// measured centre to centre, so E1 is centred at t_p + tau1 and E2 at
// t_p + tau1 + tau2 with t_p = probe_duration / 2.

#pragma once

#include <string>
#include <vector>

#include "lgem/core_model.hpp"
#include "lgem/gem_solver.hpp"

namespace lgem {

// Shared medium parameters in scaled units. g and the gradient are fixed, N
// follows from the requested gNL/gamma_e, and gamma_e from the gradient
// bandwidth |eta| L / gamma_e.
struct MediumParams {
  double od = 40.0;                   // gNL / gamma_e
  double omega_over_delta = 0.75;     // write coupling
  double bandwidth_over_gamma = 100.0;  // |eta| L / gamma_e
  double eta = 8.0;                   // rad/time per unit length
  double Delta = 0.5;
  double gamma0 = 0.0;
  double L = 1.0;
  bool stark_shift = true;
  int nz = 512;
  double steps_per_time = 160.0;

  EnsembleParams ensemble() const;
  double write_rabi() const { return omega_over_delta * Delta; }
};

enum class SteeringShape { EchoCopy, EchoReversed, ProbeCopy };
const char* steering_shape_name(SteeringShape s);
SteeringShape parse_steering_shape(const std::string& s);

enum class SteeringMode {
  Calibrated,  // amplitude and phase matched to the bare echo at the output
  FixedRatio,  // |Es| / |Ep| given; phase still referenced to the bare echo
};

struct TimeDomainParams {
  MediumParams medium;
  double probe_duration = 4.0;
  double tau1 = 10.0;
  double tau2 = 10.0;
  double interference_factor = 0.7;  // |Omega| at the interference event / write
  double read_factor = 1.0;
  double theta = 0.0;                // phase of the interference-era coupling
  SteeringMode steering_mode = SteeringMode::Calibrated;
  SteeringShape steering_shape = SteeringShape::EchoCopy;
  double steering_amplitude = 1.0;   // multiplier (Calibrated) or |Es|/|Ep| (FixedRatio)
  bool balance_coupling = false;     // FixedRatio only: solve interference_factor
  double mu = 1.0;
  double coupling_margin = 1.0;      // coupling on this long either side of a recall
};

struct SteeringCalibration {
  double overlap = 0.0;  // |<A, S>| / (|A| |S|) at the chosen shift
  double shift = 0.0;
  cplx scale{0.0, 0.0};
  double interference_factor = 0.0;
};

ScenarioConfig build_time_domain(const TimeDomainParams& params,
                                 SteeringCalibration* calibration = nullptr);

struct FrequencyDomainParams {
  MediumParams medium;
  double probe_duration = 4.0;
  double tau = 10.0;
  double phi = 0.0;                 // relative phase of the steering coupling
  double probe_amplitude = 1.0;
  double steering_amplitude = 1.0;
  double steering_coupling = 1.0;   // |Omega_s| / |Omega_p|
  // Channel separation over the gradient bandwidth |eta| L (1 MHz / 300 kHz).
  double separation_over_bandwidth = 10.0 / 3.0;
  bool beat_note = false;           // single optical channel with two tones
  double mu = 1.0;
};

double memory_bandwidth(const MediumParams& m);  // |eta| L, angular

ScenarioConfig build_frequency_domain(const FrequencyDomainParams& params);

SimulationRecord run_scenario(const ScenarioConfig& config, const SolverSettings& settings = {});

// Config transforms used by sweep families.
ScenarioConfig with_interference_phase(ScenarioConfig c, double theta);
ScenarioConfig with_interference_power(ScenarioConfig c, double relative_power);
ScenarioConfig with_channel_phase(ScenarioConfig c, int channel, double phi);
ScenarioConfig with_mismatch(ScenarioConfig c, double mu);

std::vector<std::string> preset_names();
// "fig2", "time-domain", "freq-domain"
ScenarioConfig build_preset(const std::string& name);

// Which phase a preset's phase sweep varies.
enum class PhaseKnob { InterferenceCoupling, SteeringCoupling };
PhaseKnob phase_knob(const ScenarioConfig& c);
ScenarioConfig with_scan_phase(const ScenarioConfig& c, double phase);

}  // namespace lgem
