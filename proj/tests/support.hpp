// Small hand-built configs shared by the test binaries. They do not go through
// the scenario builders so solver tests stay independent of that module.

#pragma once

#include <cmath>
#include <numbers>

#include "lgem/core_model.hpp"

namespace lgem::test {

inline constexpr double kEta = 8.0;
inline constexpr double kDelta = 0.5;
inline constexpr double kRatio = 0.75;  // Omega / Delta

// N giving effective beta at the reference eta, Delta and coupling (g = 1).
inline double density_for_beta(double beta) { return beta * kEta / (kRatio * kRatio); }

// Gaussian probe on [t0, t0 + 4].
inline PulseEnvelope probe(double t0 = 0.0, cplx amp = 1.0) {
  PulseEnvelope p;
  p.amplitude = amp;
  p.t_on = t0;
  p.t_off = t0 + 4.0;
  p.center = t0 + 2.0;
  p.width = 2.0 / 3.0;
  return p;
}

// Write with constant coupling, flip the gradient at t = 7, read out until 16.
inline ScenarioConfig write_read(double beta, int nz = 512, int nt = 2048) {
  ScenarioConfig c;
  c.name = "write-read";
  c.ensemble.g = 1.0;
  c.ensemble.N = density_for_beta(beta);
  c.ensemble.Delta = kDelta;
  c.ensemble.gamma_e = 1.0;
  c.gradient.segments = {{0.0, kEta, false}, {7.0, -kEta, false}};
  CouplingTone tone;
  tone.segments = {{0.0, cplx(kRatio * kDelta, 0.0), "write"}};
  CouplingChannel ch;
  ch.tones = {tone};
  c.coupling.channels = {ch};
  c.pulses = {probe()};
  c.grid = {nz, nt, 16.0};
  c.windows = {{"leak", 0.0, 6.0, MismatchArm::None}, {"E1", 8.0, 16.0, MismatchArm::None}};
  return c;
}

// Write, then switch the coupling off for a storage hold of length `hold`
// starting at t = 5, then read.
inline ScenarioConfig write_hold_read(double beta, double gamma0, double hold, int nz = 256) {
  ScenarioConfig c = write_read(beta, nz);
  c.ensemble.gamma0 = gamma0;
  const double flip = 5.0 + 0.5 * hold;
  c.gradient.segments = {{0.0, kEta, false}, {flip, -kEta, false}};
  auto& segs = c.coupling.channels[0].tones[0].segments;
  segs = {{0.0, cplx(kRatio * kDelta, 0.0), "write"},
          {5.0, 0.0, "hold"},
          {5.0 + hold, cplx(kRatio * kDelta, 0.0), "read"}};
  c.grid.t_end = 2.0 * flip + 2.0;
  c.grid.nt = static_cast<int>(std::ceil(c.grid.t_end * 128.0));
  c.windows = {{"leak", 0.0, 5.0, MismatchArm::None}, {"E1", 5.0 + hold, c.grid.t_end, MismatchArm::None}};
  return c;
}

inline double T_of(double beta) { return std::exp(-2.0 * std::numbers::pi * beta); }
inline double R_of(double beta) { return 1.0 - T_of(beta); }

}  // namespace lgem::test
