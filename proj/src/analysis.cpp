#include "lgem/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <mutex>
#include <thread>

namespace lgem {

namespace {

double interp_norm(std::span<const double> t, std::span<const cplx> v, std::size_t i, double x) {
  // |v|^2 at x in [t[i], t[i+1]], amplitude interpolated linearly
  double f = (x - t[i]) / (t[i + 1] - t[i]);
  return std::norm(v[i] * (1.0 - f) + v[i + 1] * f);
}

}  // namespace

double pulse_energy(std::span<const double> t, std::span<const cplx> v, TimeWindow w) {
  if (t.size() != v.size() || t.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "trace needs matching time and value arrays");
  if (!(w.t_end > w.t_start)) throw Error(ErrorCode::EmptyWindow, "window has zero length");
  const double a = std::max(w.t_start, t.front());
  const double b = std::min(w.t_end, t.back());
  if (!(b > a)) throw Error(ErrorCode::EmptyWindow, "window lies outside the trace");

  double e = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    double lo = std::max(a, t[i]);
    double hi = std::min(b, t[i + 1]);
    if (!(hi > lo)) continue;
    double fa = (lo == t[i]) ? std::norm(v[i]) : interp_norm(t, v, i, lo);
    double fb = (hi == t[i + 1]) ? std::norm(v[i + 1]) : interp_norm(t, v, i, hi);
    e += 0.5 * (fa + fb) * (hi - lo);
  }
  return e;
}

double SinusoidFit::operator()(double phi) const {
  return offset + amplitude * std::cos(phi - phase);
}

SinusoidFit fit_sinusoid(std::span<const double> phases, std::span<const double> values) {
  if (phases.size() != values.size() || phases.size() < 3)
    throw Error(ErrorCode::DegenerateFit, "sinusoid fit needs at least three samples");

  // Normal equations for regressors (1, cos phi, sin phi).
  double m[3][3] = {};
  double r[3] = {};
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double x[3] = {1.0, std::cos(phases[i]), std::sin(phases[i])};
    for (int a = 0; a < 3; ++a) {
      r[a] += x[a] * values[i];
      for (int b = 0; b < 3; ++b) m[a][b] += x[a] * x[b];
    }
  }
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  const double scale = m[0][0] * m[0][0] * m[0][0];
  if (!(std::abs(det) > 1e-12 * scale))
    throw Error(ErrorCode::DegenerateFit, "phase samples do not determine a sinusoid");

  auto solve_col = [&](int col) {
    double mm[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) mm[a][b] = (b == col) ? r[a] : m[a][b];
    return (mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
            mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
            mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0])) /
           det;
  };
  const double c0 = solve_col(0), c1 = solve_col(1), c2 = solve_col(2);

  SinusoidFit fit;
  fit.offset = c0;
  fit.amplitude = std::hypot(c1, c2);
  fit.phase = fit.amplitude > 0.0 ? std::atan2(c2, c1) : 0.0;
  if (!(fit.offset > 0.0)) throw Error(ErrorCode::DegenerateFit, "fitted offset is not positive");

  double ss = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    double d = values[i] - fit(phases[i]);
    ss += d * d;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(phases.size()));
  return fit;
}

const char* port_name(Port p) { return p == Port::E1 ? "E1" : "E2"; }

FringeDataset make_fringe(Port port, std::vector<std::pair<double, double>> samples) {
  FringeDataset ds;
  ds.port = port;
  ds.samples = std::move(samples);
  std::vector<double> ph, en;
  for (const auto& [p, e] : ds.samples) {
    ph.push_back(p);
    en.push_back(e);
  }
  ds.fit = fit_sinusoid(ph, en);
  ds.visibility = std::clamp(ds.fit.visibility(), 0.0, 1.0);
  return ds;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  w = std::min(w, n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<double> linspace_phases(int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = 2.0 * std::numbers::pi * i / count;
  return out;
}

namespace {

void require_distinct_phases(const std::vector<double>& phases) {
  std::vector<double> wrapped;
  for (double p : phases) {
    double w = std::fmod(p, 2.0 * std::numbers::pi);
    if (w < 0) w += 2.0 * std::numbers::pi;
    wrapped.push_back(w);
  }
  std::sort(wrapped.begin(), wrapped.end());
  auto last = std::unique(wrapped.begin(), wrapped.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; });
  if (std::distance(wrapped.begin(), last) < 5)
    throw Error(ErrorCode::InvalidArgument, "fringe scan needs at least five distinct phases");
}

}  // namespace

FringePair fringe_scan_both(const ScenarioFamily& family, const std::vector<double>& phases,
                            int workers, const SolverSettings& settings) {
  require_distinct_phases(phases);
  std::vector<double> e1(phases.size()), e2(phases.size());
  SolverSettings light = settings;
  light.keep_snapshots = false;
  parallel_for(phases.size(), workers, [&](std::size_t i) {
    auto cfg = family(phases[i]);
    SolverSettings s = light;
    s.kspectrum_stride = cfg.grid.nt + 1;
    auto rec = run(cfg, s);
    e1[i] = rec.window_energies.at("E1");
    e2[i] = rec.window_energies.at("E2");
  });
  std::vector<std::pair<double, double>> s1, s2;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    s1.emplace_back(phases[i], e1[i]);
    s2.emplace_back(phases[i], e2[i]);
  }
  return {make_fringe(Port::E1, std::move(s1)), make_fringe(Port::E2, std::move(s2))};
}

FringeDataset fringe_scan(const ScenarioFamily& family, const std::vector<double>& phases,
                          Port port, int workers, const SolverSettings& settings) {
  auto both = fringe_scan_both(family, phases, workers, settings);
  return port == Port::E1 ? both.e1 : both.e2;
}

namespace {

// Visibility of a fringe whose fit may be degenerate because one arm carries
// no energy at all: report zero rather than failing the whole sweep.
double safe_visibility(const std::vector<std::pair<double, double>>& samples, Port port) {
  double mx = 0.0;
  for (const auto& s : samples) mx = std::max(mx, s.second);
  if (!(mx > 0.0)) return 0.0;
  return make_fringe(port, samples).visibility;
}

std::vector<VisibilityPoint> sweep2(const ScenarioFamily2& family, const std::vector<double>& xs,
                                    const std::vector<double>& phases, int workers,
                                    const SolverSettings& settings) {
  require_distinct_phases(phases);
  const std::size_t np = phases.size();
  std::vector<double> e1(xs.size() * np), e2(xs.size() * np);
  SolverSettings light = settings;
  light.keep_snapshots = false;
  parallel_for(xs.size() * np, workers, [&](std::size_t idx) {
    auto cfg = family(xs[idx / np], phases[idx % np]);
    SolverSettings s = light;
    s.kspectrum_stride = cfg.grid.nt + 1;
    auto rec = run(cfg, s);
    e1[idx] = rec.window_energies.at("E1");
    e2[idx] = rec.window_energies.at("E2");
  });
  std::vector<VisibilityPoint> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<std::pair<double, double>> s1, s2;
    for (std::size_t k = 0; k < np; ++k) {
      s1.emplace_back(phases[k], e1[i * np + k]);
      s2.emplace_back(phases[k], e2[i * np + k]);
    }
    out.push_back({xs[i], safe_visibility(s1, Port::E1), safe_visibility(s2, Port::E2)});
  }
  return out;
}

}  // namespace

std::vector<VisibilityPoint> coupling_sweep(const ScenarioFamily2& family,
                                            const std::vector<double>& relative_powers,
                                            const std::vector<double>& phases, int workers,
                                            const SolverSettings& settings) {
  for (double p : relative_powers)
    if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "relative coupling powers must be > 0");
  return sweep2(family, relative_powers, phases, workers, settings);
}

std::vector<VisibilityPoint> mismatch_curve(const ScenarioFamily2& family,
                                            const std::vector<double>& mus,
                                            const std::vector<double>& phases, int workers,
                                            const SolverSettings& settings) {
  for (double m : mus)
    if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mu must lie in [0,1]");
  return sweep2(family, mus, phases, workers, settings);
}

}  // namespace lgem
