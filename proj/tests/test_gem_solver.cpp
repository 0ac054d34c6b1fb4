#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lgem/analysis.hpp"
#include "lgem/gem_solver.hpp"
#include "support.hpp"

using namespace lgem;
using std::numbers::pi;

namespace {

double input_energy(const SimulationRecord& r) {
  return pulse_energy(r.times, r.boundary_in[0], {0.0, r.times.back()});
}

SolverSettings no_snapshots() {
  SolverSettings s;
  s.keep_snapshots = false;
  s.kspectrum_stride = 1 << 30;
  return s;
}

// Least-squares slope of k(t) over [t0, t1].
double centroid_slope(const std::vector<CentroidPoint>& track, double t0, double t1) {
  double n = 0, st = 0, sk = 0, stt = 0, stk = 0;
  for (const auto& p : track) {
    if (p.t < t0 || p.t > t1) continue;
    n += 1;
    st += p.t;
    sk += p.k;
    stt += p.t * p.t;
    stk += p.t * p.k;
  }
  REQUIRE(n > 5);
  return (n * stk - st * sk) / (n * stt - st * st);
}

}  // namespace

TEST_CASE("free propagation without coupling") {
  auto c = test::write_read(0.25);
  c.coupling.channels[0].tones[0].segments[0].rabi = 0.0;
  auto r = run(c, no_snapshots());
  for (std::size_t i = 0; i < r.times.size(); ++i)
    CHECK(std::abs(r.boundary_out[0][i] - r.boundary_in[0][i]) < 1e-12);
  const double in = input_energy(r);
  const double out = pulse_energy(r.times, r.boundary_out[0], {0.0, r.times.back()});
  CHECK(std::abs(out - in) / in < 1e-6);
  CHECK(r.stored_norm.back() == 0.0);
}

TEST_CASE("write-then-read efficiency follows R^2") {
  const double beta = 0.25;
  auto r = run(test::write_read(beta), no_snapshots());
  const double in = input_energy(r);
  CHECK(r.window_energies.at("E1") / in ==
        doctest::Approx(test::R_of(beta) * test::R_of(beta)).epsilon(0.05));
  CHECK(r.window_energies.at("leak") / in == doctest::Approx(test::T_of(beta)).epsilon(0.05));
  // echo centred at the mirror time 2 t_flip - t_probe
  std::size_t peak = 0;
  for (std::size_t i = 0; i < r.times.size(); ++i)
    if (r.times[i] > 8.0 && std::abs(r.boundary_out[0][i]) > std::abs(r.boundary_out[0][peak])) peak = i;
  CHECK(r.times[peak] == doctest::Approx(12.0).epsilon(0.05));
}

TEST_CASE("energy ledger closes with gamma0 = 0") {
  for (double beta : {0.1, 0.5}) {
    auto r = run(test::write_read(beta), no_snapshots());
    const double in = r.flux_in.back();
    CHECK(in == doctest::Approx(input_energy(r)).epsilon(1e-6));
    for (std::size_t n = 0; n < r.times.size(); n += 97) {
      const double resid = r.stored_norm[n] + r.flux_out[n] - r.flux_in[n];
      CHECK(std::abs(resid) / in < 1e-4);
    }
  }
}

TEST_CASE("stored norm decays as exp(-2 gamma0 t) with the coupling off") {
  const double g0 = 0.05, hold = 6.0;
  auto r = run(test::write_hold_read(0.3, g0, hold), no_snapshots());
  auto at = [&](double t) {
    auto it = std::lower_bound(r.times.begin(), r.times.end(), t);
    return static_cast<std::size_t>(it - r.times.begin());
  };
  const std::size_t a = at(5.5), b = at(10.5);
  const double ratio = r.stored_norm[b] / r.stored_norm[a];
  CHECK(ratio == doctest::Approx(std::exp(-2.0 * g0 * (r.times[b] - r.times[a]))).epsilon(0.01));
}

TEST_CASE("linearity in the input envelope") {
  auto c = test::write_read(0.3, 128, 2048);
  auto base = run(c, no_snapshots());
  const cplx a = std::polar(0.7, 0.3);
  c.pulses[0].amplitude *= a;
  auto scaled = run(c, no_snapshots());
  for (std::size_t i = 0; i < base.times.size(); i += 13)
    CHECK(std::abs(scaled.boundary_out[0][i] - a * base.boundary_out[0][i]) < 1e-12);
  for (const auto& [name, e] : base.window_energies)
    CHECK(scaled.window_energies.at(name) == doctest::Approx(std::norm(a) * e).epsilon(1e-10));
}

TEST_CASE("global phase of pulses and couplings leaves energies unchanged") {
  auto c = test::write_read(0.3, 128, 2048);
  auto base = run(c, no_snapshots());
  const cplx ph = std::polar(1.0, 1.1);
  c.pulses[0].amplitude *= ph;
  for (auto& s : c.coupling.channels[0].tones[0].segments) s.rabi *= ph;
  auto rot = run(c, no_snapshots());
  for (const auto& [name, e] : base.window_energies)
    CHECK(rot.window_energies.at(name) == doctest::Approx(e).epsilon(1e-10));
}

TEST_CASE("grid convergence: halving dt and dz moves energies < 1%") {
  auto coarse = run(test::write_read(0.25, 256, 2048), no_snapshots());
  auto fine = run(test::write_read(0.25, 512, 4096), no_snapshots());
  for (const auto& [name, e] : fine.window_energies)
    CHECK(coarse.window_energies.at(name) == doctest::Approx(e).epsilon(0.01));
}

TEST_CASE("window energies are recomputable from the boundary trace") {
  auto r = run(test::write_read(0.25, 128), no_snapshots());
  for (const auto& w : r.config.windows) {
    CHECK(recompute_window_energy(r, w) == r.window_energies.at(w.name));
    CHECK(pulse_energy(r.times, r.boundary_out[0], {w.t_start, w.t_end}) == r.window_energies.at(w.name));
  }
}

TEST_CASE("solver errors") {
  auto c = test::write_read(0.25);
  c.grid.nt = 200;
  try {
    run(c);
    FAIL("expected StabilityBound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StabilityBound);
  }
  c = test::write_read(0.25);
  c.ensemble.Delta = 0.0;
  try {
    run(c);
    FAIL("expected Validation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Validation);
  }
  c = test::write_read(0.25, 64);
  c.pulses[0].amplitude = 1e306;
  try {
    run(c, no_snapshots());
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  SolverSettings bad;
  bad.snapshot_stride = 0;
  CHECK_THROWS_AS(run(test::write_read(0.25, 64), bad), Error);
}

TEST_CASE("k grid and spatial transform") {
  auto k = k_grid(16, 2.0);
  CHECK(k.size() == 16);
  CHECK(k[8] == 0.0);
  CHECK(k[9] == doctest::Approx(pi));
  CHECK(std::is_sorted(k.begin(), k.end()));

  const int nz = 64;
  const double L = 1.0, dz = L / nz;
  for (int mode : {-5, 0, 3}) {
    const double k0 = 2 * pi * mode / L;
    std::vector<cplx> s(nz);
    for (int m = 0; m < nz; ++m) s[m] = std::polar(1.0, k0 * (m + 0.5) * dz);
    auto sk = spatial_transform(s, L);
    for (int i = 0; i < nz; ++i) {
      if (i - nz / 2 == mode) CHECK(std::abs(sk[i] - 1.0) < 1e-12);
      else CHECK(std::abs(sk[i]) < 1e-12);
    }
  }
}

TEST_CASE("polariton spectrum examples") {
  EnsembleParams p;
  p.N = 3.0;
  p.Delta = 0.5;
  const int nz = 64;
  FieldState f;
  f.E.assign(1, std::vector<cplx>(nz, 0.0));
  CoherenceState s;
  s.sigma.assign(nz, 0.0);
  const cplx om(0.3, 0.2);
  for (auto v : polariton_spectrum(f, s, p, om)) CHECK(v == cplx(0.0, 0.0));

  const double k0 = 2 * pi * 3;
  for (int m = 0; m < nz; ++m) s.sigma[m] = std::polar(1.0, k0 * (m + 0.5) / nz);
  auto psi = polariton_spectrum(f, s, p, om);
  auto k = k_grid(nz, 1.0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (std::abs(psi[i]) > std::abs(psi[best])) best = i;
  CHECK(k[best] == doctest::Approx(k0));
  CHECK(std::abs(psi[best]) == doctest::Approx(p.N * std::abs(om) / p.Delta));
}

TEST_CASE("Maxwell relation k E = (N Omega*/Delta) sigma at recall") {
  SolverSettings s;
  s.snapshot_stride = 16;
  s.kspectrum_stride = 16;
  auto r = run(test::write_read(0.25), s);
  const Snapshot* snap = nullptr;
  for (const auto& sn : r.snapshots)
    if (!snap || std::abs(sn.field.t - 12.0) < std::abs(snap->field.t - 12.0)) snap = &sn;
  REQUIRE(snap);
  auto parts = polariton_parts(*snap, r.config.ensemble);
  const cplx om = snap->rabi[0];
  double mx = 0.0;
  for (const auto& v : parts.coherence_k) mx = std::max(mx, std::abs(v));
  int checked = 0;
  for (std::size_t i = 0; i < parts.k.size(); ++i) {
    if (parts.k[i] == 0.0 || std::abs(parts.coherence_k[i]) < 0.1 * mx) continue;
    const cplx lhs = parts.k[i] * parts.field_k[i];
    const cplx rhs = r.config.ensemble.N * std::conj(om) / r.config.ensemble.Delta * parts.coherence_k[i];
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 0.05);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("centroid moves at -eta during holds and flips at the switch") {
  SolverSettings s;
  s.keep_snapshots = false;
  s.kspectrum_stride = 4;
  const double hold = 8.0;
  auto r = run(test::write_hold_read(0.3, 0.0, hold), s);
  auto track = k_centroid_track(r);
  const double flip = 5.0 + 0.5 * hold;
  const double v1 = centroid_slope(track, 5.5, flip - 0.5);
  const double v2 = centroid_slope(track, flip + 0.5, 5.0 + hold - 0.5);
  CHECK(v1 == doctest::Approx(-test::kEta).epsilon(0.02));
  CHECK(v2 == doctest::Approx(test::kEta).epsilon(0.02));
}

TEST_CASE("empty spectrum") {
  auto c = test::write_read(0.25, 64);
  c.pulses[0].amplitude = 0.0;
  auto r = run(c);
  CHECK_THROWS_AS(k_centroid_track(r), Error);
  SolverSettings none = no_snapshots();
  auto r2 = run(test::write_read(0.25, 64), none);
  try {
    k_centroid_track(r2);
    FAIL("expected EmptySpectrum");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySpectrum);
  }
}

TEST_CASE("pi phase jump at the k = 0 crossing") {
  SolverSettings s;
  s.snapshot_stride = 4;
  s.kspectrum_stride = 4;
  auto r = run(test::write_read(0.25), s);
  auto times = crossing_times(r, {8.0, 16.0});
  REQUIRE(times.size() == 1);
  CHECK(times[0] == doctest::Approx(12.0).epsilon(0.05));
  CHECK(crossing_phase(r, {8.0, 16.0}) == doctest::Approx(pi).epsilon(0.1 / pi));
}

TEST_CASE("no gradient flip means no crossing") {
  auto c = test::write_read(0.25, 128);
  c.gradient.segments = {{0.0, test::kEta, false}};
  SolverSettings s;
  s.snapshot_stride = 8;
  s.kspectrum_stride = 8;
  auto r = run(c, s);
  try {
    crossing_phase(r, {8.0, 16.0});
    FAIL("expected NoCrossing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCrossing);
  }
}

TEST_CASE("detrended field removes the boundary ramp") {
  const int nz = 32;
  std::vector<cplx> e(nz);
  const cplx e0(1.0, 2.0), e1(-0.5, 0.25);
  for (int m = 0; m < nz; ++m) {
    const double z = (m + 0.5) / nz;
    e[m] = e0 + (e1 - e0) * z;
  }
  for (auto v : detrended_field(e, e0, e1, 1.0)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("snapshot strides are recorded") {
  SolverSettings s;
  s.snapshot_stride = 64;
  s.kspectrum_stride = 32;
  auto r = run(test::write_read(0.25, 64), s);
  CHECK(r.snapshot_stride == 64);
  CHECK(r.kspectrum_stride == 32);
  CHECK(r.snapshots.size() == 2048 / 64 + 1);
  CHECK(r.k_spectra.size() == 2048 / 32 + 1);
  for (const auto& sn : r.snapshots) {
    CHECK(sn.coherence.sigma.size() == 64);
    CHECK(sn.field.E[0].size() == 64);
  }
}
