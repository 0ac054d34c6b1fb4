// Integrator for the adiabatically eliminated Lambda-GEM equations on the
// (t, z) grid, plus the spatial-frequency (polariton) view of its state.
//
// Working equations, one optical channel E_j per coupling channel Omega_j:
//
//   dE_j/dz      = i (N conj(Omega_j) / Delta) sigma
//   dsigma/dt    = -[gamma0 + i eta(t) (z - L/2) + i S(t)] sigma
//                  + i (g / Delta) sum_j Omega_j E_j
//   S(t)         = sum_j |Omega_j|^2 / Delta       (light shift, toggleable)
//
// The gradient is centred on the cell so the Raman line spans
// [-|eta| L/2, |eta| L/2]. sigma lives at cell centres z_m = (m + 1/2) dz, the
// field on cell faces; the midpoint rule in z makes the semi-discrete system
// conserve (N/g) int |sigma|^2 dz + int |E_out|^2 dt - int |E_in|^2 dt
// exactly when gamma0 = 0. Time stepping is classical RK4, with steps split
// at every gradient, coupling or pulse-support discontinuity.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgem/core_model.hpp"

namespace lgem {

struct SolverSettings {
  int snapshot_stride = 8;
  int kspectrum_stride = 4;
  bool keep_snapshots = true;
};

struct FieldState {
  double t = 0.0;
  std::vector<std::vector<cplx>> E;  // [channel][cell]
};

struct CoherenceState {
  double t = 0.0;
  std::vector<cplx> sigma;
};

struct Snapshot {
  FieldState field;
  CoherenceState coherence;
  std::vector<cplx> rabi;       // Omega_j at this instant
  std::vector<cplx> boundary;   // E_j(z=0) and E_j(z=L) interleaved per channel
};

struct KSpectrum {
  double t = 0.0;
  std::vector<double> abs_psi;  // on SimulationRecord::k_grid
};

// Boundary traces split by pulse arm; only filled when the config uses mode
// mismatch (mu < 1) on some window.
struct ArmTraces {
  std::vector<std::vector<cplx>> probe;
  std::vector<std::vector<cplx>> steering;
};

struct SimulationRecord {
  ScenarioConfig config;
  std::vector<double> times;                      // nt + 1 grid instants
  std::vector<std::vector<cplx>> boundary_in;     // [channel][time], z = 0
  std::vector<std::vector<cplx>> boundary_out;    // [channel][time], z = L
  std::vector<double> stored_norm;                // (N/g) int |sigma|^2 dz
  std::vector<double> flux_in;                    // cumulative int |E(0)|^2 dt
  std::vector<double> flux_out;                   // cumulative int |E(L)|^2 dt
  int snapshot_stride = 1;
  int kspectrum_stride = 1;
  std::vector<Snapshot> snapshots;
  std::vector<double> k_grid;                     // ascending
  std::vector<KSpectrum> k_spectra;
  std::optional<ArmTraces> arms;
  std::map<std::string, double> window_energies;
};

SimulationRecord run(const ScenarioConfig& config, const SolverSettings& settings = {});

// Window energy recomputed from the record's boundary traces (and arm traces
// when the window is mismatch-weighted).
double recompute_window_energy(const SimulationRecord& rec, const DetectionWindow& w);

// Spatial wavenumbers of an nz-point grid over length L, ascending, DC included.
std::vector<double> k_grid(int nz, double L);

// Discrete spatial transform on the cell-centred grid, normalised so that
// sigma(z) = exp(i k0 z) on a grid wavenumber k0 gives exactly 1 at k0.
// Output ordered as k_grid.
std::vector<cplx> spatial_transform(const std::vector<cplx>& values, double L);

// Field with the boundary ramp E(0) + (E(L) - E(0)) z / L removed, so the
// Maxwell relation k E(k) = (N conj(Omega)/Delta) sigma(k) holds on every
// nonzero k bin without boundary flux terms.
std::vector<cplx> detrended_field(const std::vector<cplx>& E_cells, cplx E_in, cplx E_out,
                                  double L);

struct PolaritonParts {
  std::vector<double> k;
  std::vector<cplx> field_k;      // E(t, k) of the detrended field
  std::vector<cplx> coherence_k;  // sigma(t, k)
  std::vector<cplx> psi;          // k E + (N conj(Omega)/Delta) sigma
};

// psi(k) = k E(t,k) + (N conj(Omega_c) / Delta) sigma(t,k). The field passed
// here is used as-is (callers detrend it first if they want boundary-free
// spectra).
std::vector<cplx> polariton_spectrum(const FieldState& field, const CoherenceState& coh,
                                     const EnsembleParams& p, cplx omega_c, int channel = 0);

PolaritonParts polariton_parts(const Snapshot& snap, const EnsembleParams& p, int channel = 0,
                               std::optional<cplx> omega_ref = std::nullopt);

struct CentroidPoint {
  double t;
  double k;
};

// Centroid of |psi(k)|^2 over bins with |psi| >= kCentroidFloor * max |psi|.
inline constexpr double kCentroidFloor = 1e-3;
std::vector<CentroidPoint> k_centroid_track(const SimulationRecord& rec);

// Jump in arg[E(t,kbar) conj(sigma(t,kbar))] across the k = 0 crossing that
// falls inside the window. Returned as a magnitude in [0, pi].
double crossing_phase(const SimulationRecord& rec, TimeWindow window, int channel = 0);

// Instants inside the window at which the centroid changes sign.
std::vector<double> crossing_times(const SimulationRecord& rec, TimeWindow window);

}  // namespace lgem
