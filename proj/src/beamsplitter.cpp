#include "lgem/beamsplitter.hpp"

#include <cmath>
#include <numbers>

namespace lgem {

double effective_beta(const EnsembleParams& p, double eta, double omega_c) {
  if (eta == 0.0) throw Error(ErrorCode::ZeroGradient, "effective beta needs a nonzero gradient");
  if (p.Delta == 0.0) throw Error(ErrorCode::InvalidArgument, "Delta must be nonzero");
  const double ratio = std::abs(omega_c) / std::abs(p.Delta);
  return p.g * p.N / std::abs(eta) * ratio * ratio;
}

double coupling_for_beta(const EnsembleParams& p, double eta, double beta) {
  if (eta == 0.0) throw Error(ErrorCode::ZeroGradient, "coupling needs a nonzero gradient");
  if (!(p.g * p.N > 0.0)) throw Error(ErrorCode::InvalidArgument, "g N must be > 0");
  return std::abs(p.Delta) * std::sqrt(beta * std::abs(eta) / (p.g * p.N));
}

double transmissivity(double beta) { return std::exp(-2.0 * std::numbers::pi * beta); }

double reflectivity(double beta) { return -std::expm1(-2.0 * std::numbers::pi * beta); }

double beta_for_transmissivity(double T) {
  if (!(T > 0.0 && T <= 1.0)) throw Error(ErrorCode::InvalidArgument, "T must lie in (0,1]");
  return -std::log(T) / (2.0 * std::numbers::pi);
}

BsOutput interfere(cplx a, cplx b, double beta, double theta, double mu) {
  const double t = std::sqrt(transmissivity(beta));
  const double r = std::sqrt(reflectivity(beta));
  const cplx ph = std::polar(1.0, theta);
  return {r * mu * a + ph * t * b, t * a - ph * r * mu * b};
}

const char* bs_kind_name(BsKind k) {
  switch (k) {
    case BsKind::Write: return "write";
    case BsKind::Read: return "read";
    case BsKind::Interfere: return "interfere";
  }
  return "read";
}

CascadeState predict_record(const std::vector<cplx>& pulses, const std::vector<BsEvent>& events,
                            double gamma0, const std::vector<double>& hold_times) {
  if (!events.empty() && hold_times.size() + 1 != events.size())
    throw Error(ErrorCode::InvalidArgument, "need exactly one hold time between consecutive events");
  CascadeState st;
  std::size_t next_pulse = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    cplx b{0.0, 0.0};
    if (ev.kind != BsKind::Read) {
      if (next_pulse >= pulses.size())
        throw Error(ErrorCode::InvalidArgument, "more write/interfere events than pulses");
      b = pulses[next_pulse++];
    }
    const double theta = ev.kind == BsKind::Write ? std::numbers::pi : ev.theta;
    auto out = interfere(st.stored, b, ev.beta, theta, ev.mu);
    st.optical_out.push_back(out.e_out);
    st.stored = out.stored;
    if (i < hold_times.size()) st.stored *= std::exp(-gamma0 * hold_times[i]);
  }
  return st;
}

double balance_coupling(double R1, double gamma0, double tau, double ep, double es) {
  const double stored = R1 * std::exp(-2.0 * gamma0 * tau) * ep * ep;
  const double steer = es * es;
  if (!(steer > 0.0)) throw Error(ErrorCode::NoRoot, "steering pulse is empty; nothing to balance");
  if (!(stored > 0.0)) throw Error(ErrorCode::NoRoot, "stored arm is empty; no coupling balances it");

  // residual(beta) = R1 R2 e^{-2 gamma0 tau} |Ep|^2 - T2 |Es|^2, increasing in beta
  auto residual = [&](double beta) {
    return stored * reflectivity(beta) - steer * transmissivity(beta);
  };
  double lo = 0.0, hi = 1.0;
  while (residual(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorCode::NoRoot, "no balancing coupling below beta=1e6");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double oracle_visibility_e1(double a, double b, double beta, double mu) {
  const double T = transmissivity(beta), R = reflectivity(beta);
  const double den = R * mu * mu * a * a + T * b * b;
  if (!(den > 0.0)) return 0.0;
  return 2.0 * std::sqrt(T * R) * mu * std::abs(a) * std::abs(b) / den;
}

double oracle_visibility_e2(double a, double b, double beta, double mu) {
  const double T = transmissivity(beta), R = reflectivity(beta);
  const double den = T * a * a + R * mu * mu * b * b;
  if (!(den > 0.0)) return 0.0;
  return 2.0 * std::sqrt(T * R) * mu * std::abs(a) * std::abs(b) / den;
}

}  // namespace lgem
