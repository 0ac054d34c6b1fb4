// Measured quantities from simulation records: window energies, sinusoid
// fits to phase scans, visibilities and sweep curves.

#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lgem/core_model.hpp"
#include "lgem/gem_solver.hpp"

namespace lgem {

// Trapezoidal int |v(t)|^2 dt over the window; samples are linearly
// interpolated at window edges that fall between grid points.
double pulse_energy(std::span<const double> t, std::span<const cplx> v, TimeWindow w);

// I(phi) = offset + amplitude cos(phi - phase), amplitude >= 0.
struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double rms_residual = 0.0;

  double visibility() const { return amplitude / offset; }
  double operator()(double phi) const;
};

SinusoidFit fit_sinusoid(std::span<const double> phases, std::span<const double> values);

enum class Port { E1, E2 };
const char* port_name(Port p);

struct FringeDataset {
  Port port = Port::E1;
  std::vector<std::pair<double, double>> samples;  // (phase, energy)
  SinusoidFit fit;
  double visibility = 0.0;
};

FringeDataset make_fringe(Port port, std::vector<std::pair<double, double>> samples);

// Builds the config for one value of the swept variable.
using ScenarioFamily = std::function<ScenarioConfig(double)>;

// Runs `fn(i)` for i in [0, n) on up to `workers` threads; results keep index
// order. workers <= 0 means hardware concurrency.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct FringePair {
  FringeDataset e1;
  FringeDataset e2;
};

// One run per phase; E1 and E2 are read from windows named "E1" and "E2".
FringePair fringe_scan_both(const ScenarioFamily& family, const std::vector<double>& phases,
                            int workers = 0, const SolverSettings& settings = {});

FringeDataset fringe_scan(const ScenarioFamily& family, const std::vector<double>& phases,
                          Port port, int workers = 0, const SolverSettings& settings = {});

// family(x, phase)
using ScenarioFamily2 = std::function<ScenarioConfig(double, double)>;

struct VisibilityPoint {
  double x = 0.0;
  double visibility_e1 = 0.0;
  double visibility_e2 = 0.0;
};

std::vector<VisibilityPoint> coupling_sweep(const ScenarioFamily2& family,
                                            const std::vector<double>& relative_powers,
                                            const std::vector<double>& phases, int workers = 0,
                                            const SolverSettings& settings = {});

std::vector<VisibilityPoint> mismatch_curve(const ScenarioFamily2& family,
                                            const std::vector<double>& mus,
                                            const std::vector<double>& phases, int workers = 0,
                                            const SolverSettings& settings = {});

std::vector<double> linspace_phases(int count);

}  // namespace lgem
