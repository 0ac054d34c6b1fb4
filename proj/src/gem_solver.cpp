#include "lgem/gem_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "fft.hpp"
#include "lgem/analysis.hpp"

namespace lgem {

namespace {

constexpr cplx I{0.0, 1.0};

class Integrator {
 public:
  explicit Integrator(const ScenarioConfig& c)
      : c_(c),
        p_(c.ensemble),
        nz_(c.grid.nz),
        nch_(c.optical_channels()),
        dz_(p_.L / nz_),
        offset_(nz_),
        cum_(nz_),
        omega_(nch_),
        in_(nch_) {
    for (int m = 0; m < nz_; ++m) offset_[m] = (m + 0.5) * dz_ - 0.5 * p_.L;
  }

  // Evaluates d sigma/dt at time t with piecewise quantities taken at t_seg.
  // Also returns the boundary powers (sum |E_in|^2, sum |E_out|^2).
  std::pair<double, double> rhs(double t, double t_seg, const std::vector<cplx>& s, std::vector<cplx>& ds) {
    load_drive(t, t_seg);
    double eta = c_.gradient.eta_at(t_seg);
    double sum_sq = 0.0;
    cplx drive{0.0, 0.0};
    for (int j = 0; j < nch_; ++j) {
      sum_sq += std::norm(omega_[j]);
      drive += omega_[j] * in_[j];
    }
    const double stark = c_.stark_shift ? sum_sq / p_.Delta : 0.0;
    const double gd = p_.g / p_.Delta;
    const double nd = p_.N / p_.Delta;
    // sum_j Omega_j E_j(m) = drive + i (N/Delta) sum |Omega|^2 C_m with
    // C_m = dz (sum_{l<m} sigma_l + sigma_m / 2)
    const cplx feedback = I * nd * sum_sq;
    cplx acc{0.0, 0.0};
    for (int m = 0; m < nz_; ++m) {
      cplx cm = dz_ * (acc + 0.5 * s[m]);
      acc += s[m];
      cplx field_term = drive + feedback * cm;
      ds[m] = -(p_.gamma0 + I * (eta * offset_[m] + stark)) * s[m] + I * gd * field_term;
    }
    total_ = dz_ * acc;
    double fin = 0.0, fout = 0.0;
    for (int j = 0; j < nch_; ++j) {
      cplx out = in_[j] + I * nd * std::conj(omega_[j]) * total_;
      fin += std::norm(in_[j]);
      fout += std::norm(out);
    }
    return {fin, fout};
  }

  void load_drive(double t, double t_seg) {
    for (int j = 0; j < nch_; ++j) {
      omega_[j] = c_.coupling.channels[j].rabi_at(t, t_seg);
      in_[j] = {0.0, 0.0};
    }
    for (const auto& pl : c_.pulses) in_[pl.channel] += pl.value_at(t, t_seg);
  }

  // Boundary values and cell-centred fields for the state s at time t.
  void fields(double t, const std::vector<cplx>& s, std::vector<cplx>& e_in,
              std::vector<cplx>& e_out, std::vector<std::vector<cplx>>* cells) {
    load_drive(t, t);
    const double nd = p_.N / p_.Delta;
    cplx acc{0.0, 0.0};
    for (int m = 0; m < nz_; ++m) {
      cum_[m] = dz_ * (acc + 0.5 * s[m]);
      acc += s[m];
    }
    e_in.assign(in_.begin(), in_.end());
    e_out.resize(nch_);
    for (int j = 0; j < nch_; ++j) {
      cplx a = I * nd * std::conj(omega_[j]);
      e_out[j] = in_[j] + a * dz_ * acc;
      if (cells) {
        auto& row = (*cells)[j];
        row.resize(nz_);
        for (int m = 0; m < nz_; ++m) row[m] = in_[j] + a * cum_[m];
      }
    }
  }

  double stored_norm(const std::vector<cplx>& s) const {
    double sum = 0.0;
    for (const auto& v : s) sum += std::norm(v);
    double scale = p_.g > 0.0 ? p_.N / p_.g : p_.N;
    return scale * dz_ * sum;
  }

  const std::vector<cplx>& omega() const { return omega_; }

 private:
  const ScenarioConfig& c_;
  const EnsembleParams& p_;
  int nz_, nch_;
  double dz_;
  std::vector<double> offset_;
  std::vector<cplx> cum_;
  std::vector<cplx> omega_, in_;
  cplx total_{0.0, 0.0};
};

std::vector<double> breakpoints(const ScenarioConfig& c) {
  std::vector<double> b;
  for (std::size_t i = 1; i < c.gradient.segments.size(); ++i)
    b.push_back(c.gradient.segments[i].t_start);
  for (const auto& ch : c.coupling.channels)
    for (double t : ch.switch_times()) b.push_back(t);
  for (const auto& pl : c.pulses) {
    b.push_back(pl.support_begin());
    b.push_back(pl.support_end());
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

bool needs_arms(const ScenarioConfig& c) {
  if (c.mode_mismatch >= 1.0) return false;
  for (const auto& w : c.windows)
    if (w.mismatch_arm != MismatchArm::None) return true;
  return false;
}

double reference_rabi_magnitude(const CouplingChannel& ch) { return ch.max_abs(); }

std::string describe_blowup(int step, double t, double maxabs) {
  std::ostringstream os;
  os << "solution became non-finite at step " << step << " (t=" << t
     << "), max |sigma| before failure " << maxabs;
  return os.str();
}

SimulationRecord integrate(const ScenarioConfig& c, const SolverSettings& settings) {
  if (settings.snapshot_stride < 1 || settings.kspectrum_stride < 1)
    throw Error(ErrorCode::InvalidArgument, "solver strides must be >= 1");
  const double dt = c.grid.dt();
  const double stable = max_stable_dt(c);
  if (!(dt < stable)) {
    std::ostringstream os;
    os << "dt=" << dt << " exceeds stability bound " << stable;
    throw Error(ErrorCode::StabilityBound, os.str());
  }

  const int nz = c.grid.nz;
  const int nt = c.grid.nt;
  const int nch = c.optical_channels();
  Integrator integ(c);

  SimulationRecord rec;
  rec.config = c;
  rec.snapshot_stride = settings.snapshot_stride;
  rec.kspectrum_stride = settings.kspectrum_stride;
  rec.times.resize(nt + 1);
  rec.boundary_in.assign(nch, std::vector<cplx>(nt + 1));
  rec.boundary_out.assign(nch, std::vector<cplx>(nt + 1));
  rec.stored_norm.resize(nt + 1);
  rec.flux_in.resize(nt + 1);
  rec.flux_out.resize(nt + 1);
  rec.k_grid = k_grid(nz, c.ensemble.L);

  std::vector<cplx> s(nz, cplx{0.0, 0.0}), k1(nz), k2(nz), k3(nz), k4(nz), tmp(nz);
  std::vector<cplx> e_in, e_out;
  std::vector<std::vector<cplx>> cells(nch);
  const auto bps = breakpoints(c);

  // Last nonzero coupling on channel 0, used to weight the coherence part of
  // psi while the coupling is off.
  cplx omega_ref{0.0, 0.0};
  if (nch > 0) {
    const auto& ch0 = c.coupling.channels[0];
    for (const auto& tone : ch0.tones)
      for (const auto& seg : tone.segments)
        if (std::abs(seg.rabi) > 0.0 && omega_ref == cplx{0.0, 0.0}) omega_ref = seg.rabi;
    if (omega_ref == cplx{0.0, 0.0}) omega_ref = reference_rabi_magnitude(ch0);
  }

  double cum_in = 0.0, cum_out = 0.0;
  auto sample = [&](int n, double t) {
    bool want_cells = (settings.keep_snapshots && n % settings.snapshot_stride == 0) ||
                      n % settings.kspectrum_stride == 0;
    integ.fields(t, s, e_in, e_out, want_cells ? &cells : nullptr);
    rec.times[n] = t;
    for (int j = 0; j < nch; ++j) {
      rec.boundary_in[j][n] = e_in[j];
      rec.boundary_out[j][n] = e_out[j];
    }
    rec.stored_norm[n] = integ.stored_norm(s);
    rec.flux_in[n] = cum_in;
    rec.flux_out[n] = cum_out;
    if (!want_cells) return;
    Snapshot snap;
    snap.field.t = t;
    snap.field.E = cells;
    snap.coherence.t = t;
    snap.coherence.sigma = s;
    snap.rabi = integ.omega();
    for (int j = 0; j < nch; ++j) {
      snap.boundary.push_back(e_in[j]);
      snap.boundary.push_back(e_out[j]);
    }
    if (nch > 0 && std::abs(snap.rabi[0]) > 0.0) omega_ref = snap.rabi[0];
    if (n % settings.kspectrum_stride == 0) {
      auto parts = polariton_parts(snap, c.ensemble, 0, omega_ref);
      KSpectrum ks;
      ks.t = t;
      ks.abs_psi.resize(parts.psi.size());
      for (std::size_t i = 0; i < parts.psi.size(); ++i) ks.abs_psi[i] = std::abs(parts.psi[i]);
      rec.k_spectra.push_back(std::move(ks));
    }
    if (settings.keep_snapshots && n % settings.snapshot_stride == 0)
      rec.snapshots.push_back(std::move(snap));
  };

  // Per-channel |E|^2 fluxes are integrated with the same RK4 weights as
  // sigma so the energy ledger closes to integrator accuracy.
  auto step = [&](double a, double b) {
    const double h = b - a;
    const double tm = 0.5 * (a + b);
    auto flux = [&](double t, const std::vector<cplx>& st, std::vector<cplx>& out) {
      return integ.rhs(t, tm, st, out);
    };
    auto [i1, o1] = flux(a, s, k1);
    for (int m = 0; m < nz; ++m) tmp[m] = s[m] + 0.5 * h * k1[m];
    auto [i2, o2] = flux(tm, tmp, k2);
    for (int m = 0; m < nz; ++m) tmp[m] = s[m] + 0.5 * h * k2[m];
    auto [i3, o3] = flux(tm, tmp, k3);
    for (int m = 0; m < nz; ++m) tmp[m] = s[m] + h * k3[m];
    auto [i4, o4] = flux(b, tmp, k4);
    for (int m = 0; m < nz; ++m) s[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
    cum_in += h / 6.0 * (i1 + 2.0 * i2 + 2.0 * i3 + i4);
    cum_out += h / 6.0 * (o1 + 2.0 * o2 + 2.0 * o3 + o4);
  };

  sample(0, 0.0);
  double last_max = 0.0;
  for (int n = 0; n < nt; ++n) {
    const double t0 = n * dt;
    const double t1 = (n + 1) * dt;
    double a = t0;
    auto it = std::upper_bound(bps.begin(), bps.end(), t0);
    for (; it != bps.end() && *it < t1; ++it) {
      if (*it - a > 1e-12 * dt) {
        step(a, *it);
        a = *it;
      }
    }
    step(a, t1);
    double mx = 0.0;
    bool ok = true;
    for (const auto& v : s) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        ok = false;
        break;
      }
      mx = std::max(mx, std::abs(v));
    }
    if (!ok) throw Error(ErrorCode::NonFinite, describe_blowup(n + 1, t1, last_max));
    sample(n + 1, t1);
    ok = std::isfinite(rec.stored_norm[n + 1]) && std::isfinite(cum_in) && std::isfinite(cum_out);
    for (int j = 0; j < nch && ok; ++j)
      ok = std::isfinite(std::norm(rec.boundary_out[j][n + 1]));
    if (!ok) throw Error(ErrorCode::NonFinite, describe_blowup(n + 1, t1, last_max));
    last_max = mx;
  }

  for (const auto& w : c.windows) rec.window_energies[w.name] = recompute_window_energy(rec, w);
  return rec;
}

ScenarioConfig arm_config(const ScenarioConfig& c, PulseLabel keep) {
  ScenarioConfig out = c;
  out.mode_mismatch = 1.0;
  out.pulses.clear();
  for (const auto& pl : c.pulses)
    if (pl.label == keep) out.pulses.push_back(pl);
  return out;
}

}  // namespace

std::vector<double> k_grid(int nz, double L) {
  std::vector<double> k(nz);
  for (int i = 0; i < nz; ++i) k[i] = 2.0 * std::numbers::pi * (i - nz / 2) / L;
  return k;
}

std::vector<cplx> spatial_transform(const std::vector<cplx>& values, double /*L*/) {
  const int n = static_cast<int>(values.size());
  thread_local std::unordered_map<int, std::unique_ptr<detail::ForwardFft>> plans;
  auto& plan = plans[n];
  if (!plan) plan = std::make_unique<detail::ForwardFft>(n);
  const auto& raw = (*plan)(values);
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) {
    int s = i - n / 2;  // signed bin
    int src = s < 0 ? s + n : s;
    // cell-centred grid: z_m = (m + 1/2) dz
    cplx shift = std::polar(1.0 / n, -std::numbers::pi * s / n);
    out[i] = raw[src] * shift;
  }
  return out;
}

std::vector<cplx> detrended_field(const std::vector<cplx>& E_cells, cplx E_in, cplx E_out,
                                  double L) {
  const std::size_t n = E_cells.size();
  const double dz = L / static_cast<double>(n);
  std::vector<cplx> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    double z = (static_cast<double>(m) + 0.5) * dz;
    out[m] = E_cells[m] - (E_in + (E_out - E_in) * (z / L));
  }
  return out;
}

std::vector<cplx> polariton_spectrum(const FieldState& field, const CoherenceState& coh,
                                     const EnsembleParams& p, cplx omega_c, int channel) {
  const auto k = k_grid(static_cast<int>(coh.sigma.size()), p.L);
  std::vector<cplx> ek(k.size(), cplx{0.0, 0.0});
  if (channel < static_cast<int>(field.E.size()) && !field.E[channel].empty())
    ek = spatial_transform(field.E[channel], p.L);
  const auto sk = spatial_transform(coh.sigma, p.L);
  const cplx weight = p.N * std::conj(omega_c) / p.Delta;
  std::vector<cplx> psi(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) psi[i] = k[i] * ek[i] + weight * sk[i];
  return psi;
}

PolaritonParts polariton_parts(const Snapshot& snap, const EnsembleParams& p, int channel,
                               std::optional<cplx> omega_ref) {
  PolaritonParts parts;
  const int nz = static_cast<int>(snap.coherence.sigma.size());
  parts.k = k_grid(nz, p.L);
  const cplx omega = snap.rabi.empty() ? cplx{0.0, 0.0} : snap.rabi[channel];
  FieldState detr;
  detr.t = snap.field.t;
  detr.E.resize(snap.field.E.size());
  detr.E[channel] = detrended_field(snap.field.E[channel], snap.boundary[2 * channel],
                                    snap.boundary[2 * channel + 1], p.L);
  parts.field_k = spatial_transform(detr.E[channel], p.L);
  parts.coherence_k = spatial_transform(snap.coherence.sigma, p.L);
  const cplx w_omega = std::abs(omega) > 0.0 ? omega : omega_ref.value_or(omega);
  const cplx weight = p.N * std::conj(w_omega) / p.Delta;
  parts.psi.resize(nz);
  for (int i = 0; i < nz; ++i)
    parts.psi[i] = parts.k[i] * parts.field_k[i] + weight * parts.coherence_k[i];
  return parts;
}

double recompute_window_energy(const SimulationRecord& rec, const DetectionWindow& w) {
  const TimeWindow tw{w.t_start, w.t_end};
  const double mu = rec.config.mode_mismatch;
  double e = 0.0;
  for (std::size_t j = 0; j < rec.boundary_out.size(); ++j) {
    if (w.mismatch_arm == MismatchArm::None || !rec.arms || mu >= 1.0) {
      e += pulse_energy(rec.times, rec.boundary_out[j], tw);
      continue;
    }
    const auto& pr = rec.arms->probe[j];
    const auto& st = rec.arms->steering[j];
    std::vector<cplx> mix(pr.size());
    const double wp = w.mismatch_arm == MismatchArm::Probe ? mu : 1.0;
    const double ws = w.mismatch_arm == MismatchArm::Steering ? mu : 1.0;
    for (std::size_t n = 0; n < pr.size(); ++n) mix[n] = wp * pr[n] + ws * st[n];
    e += pulse_energy(rec.times, mix, tw);
  }
  return e;
}

SimulationRecord run(const ScenarioConfig& config, const SolverSettings& settings) {
  auto report = validate(config);
  if (!report.ok) {
    // a config whose only defect is its time step is a stability problem
    bool only_dt = true;
    for (const auto& f : report.failures) only_dt = only_dt && f.rfind("dt=", 0) == 0;
    throw Error(only_dt ? ErrorCode::StabilityBound : ErrorCode::Validation, report.summary());
  }
  SimulationRecord rec = integrate(config, settings);
  if (needs_arms(config)) {
    SolverSettings light = settings;
    light.keep_snapshots = false;
    light.kspectrum_stride = config.grid.nt + 1;
    ArmTraces arms;
    arms.probe = integrate(arm_config(config, PulseLabel::Probe), light).boundary_out;
    arms.steering = integrate(arm_config(config, PulseLabel::Steering), light).boundary_out;
    rec.arms = std::move(arms);
    for (const auto& w : config.windows) rec.window_energies[w.name] = recompute_window_energy(rec, w);
  }
  return rec;
}

std::vector<CentroidPoint> k_centroid_track(const SimulationRecord& rec) {
  if (rec.k_spectra.empty()) throw Error(ErrorCode::EmptySpectrum, "record has no k-spectra");
  std::vector<CentroidPoint> out;
  for (const auto& ks : rec.k_spectra) {
    double mx = 0.0;
    for (double v : ks.abs_psi) mx = std::max(mx, v);
    if (!(mx > 0.0)) continue;
    double floor = kCentroidFloor * mx;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ks.abs_psi.size(); ++i) {
      double a = ks.abs_psi[i];
      if (a < floor) continue;
      num += rec.k_grid[i] * a * a;
      den += a * a;
    }
    out.push_back({ks.t, num / den});
  }
  if (out.empty()) throw Error(ErrorCode::EmptySpectrum, "polariton spectrum is identically zero");
  return out;
}

std::vector<double> crossing_times(const SimulationRecord& rec, TimeWindow window) {
  std::vector<double> out;
  auto track = k_centroid_track(rec);
  for (std::size_t i = 1; i < track.size(); ++i) {
    const auto& a = track[i - 1];
    const auto& b = track[i];
    if (a.t < window.t_start || b.t > window.t_end) continue;
    if ((a.k > 0.0 && b.k <= 0.0) || (a.k < 0.0 && b.k >= 0.0)) {
      double f = a.k / (a.k - b.k);
      out.push_back(a.t + f * (b.t - a.t));
    }
  }
  return out;
}

double crossing_phase(const SimulationRecord& rec, TimeWindow window, int channel) {
  auto crossings = crossing_times(rec, window);
  if (crossings.empty())
    throw Error(ErrorCode::NoCrossing, "polariton does not cross k=0 inside the window");
  const double t_cross = crossings.front();
  const auto& p = rec.config.ensemble;
  const double dk = 2.0 * std::numbers::pi / p.L;

  struct Sample {
    double t;
    double phase;
  };
  std::optional<Sample> before, after;
  for (const auto& snap : rec.snapshots) {
    const double t = snap.field.t;
    if (t < window.t_start || t > window.t_end) continue;
    if (snap.rabi.empty() || std::abs(snap.rabi[channel]) == 0.0) continue;
    auto parts = polariton_parts(snap, p, channel);
    double mx = 0.0;
    for (const auto& v : parts.psi) mx = std::max(mx, std::abs(v));
    if (!(mx > 0.0)) continue;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < parts.psi.size(); ++i) {
      double a = std::abs(parts.psi[i]);
      if (a < kCentroidFloor * mx) continue;
      num += parts.k[i] * a * a;
      den += a * a;
    }
    const double kbar = num / den;
    if (std::abs(kbar) < 1.5 * dk) continue;
    // nearest nonzero bin to kbar
    std::size_t best = 0;
    double bestd = 1e300;
    for (std::size_t i = 0; i < parts.k.size(); ++i) {
      if (parts.k[i] == 0.0) continue;
      double d = std::abs(parts.k[i] - kbar);
      if (d < bestd) {
        bestd = d;
        best = i;
      }
    }
    const double ph = std::arg(parts.field_k[best] * std::conj(parts.coherence_k[best]));
    if (t < t_cross) before = Sample{t, ph};
    else if (!after) after = Sample{t, ph};
  }
  if (!before || !after)
    throw Error(ErrorCode::NoCrossing, "no resolvable field/coherence phase on both sides of k=0");
  double d = after->phase - before->phase;
  d = std::remainder(d, 2.0 * std::numbers::pi);
  return std::abs(d);
}

}  // namespace lgem
