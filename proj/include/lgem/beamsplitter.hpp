// Lumped model of memory read/write events as a tunable beamsplitter between
// one optical mode and the stored spin coherence. Independent of the PDE
// solver; used to predict window energies and to solve balance conditions.

#pragma once

#include <string>
#include <vector>

#include "lgem/core_model.hpp"

namespace lgem {

// beta = (g N / |eta|) (|Omega_c| / |Delta|)^2
double effective_beta(const EnsembleParams& p, double eta, double omega_c);

// Coupling magnitude giving the requested beta.
double coupling_for_beta(const EnsembleParams& p, double eta, double beta);

double transmissivity(double beta);  // exp(-2 pi beta)
double reflectivity(double beta);    // 1 - exp(-2 pi beta)

// Inverse of transmissivity.
double beta_for_transmissivity(double T);

struct BsOutput {
  cplx e_out;
  cplx stored;
};

// e_out   = sqrt(R) mu a + exp(i theta) sqrt(T) b
// stored' = sqrt(T) a - exp(i theta) sqrt(R) mu b
// Unitary for mu = 1; the pi phase sits on the stored port.
BsOutput interfere(cplx a_stored, cplx b_in, double beta, double theta, double mu = 1.0);

enum class BsKind { Write, Read, Interfere };
const char* bs_kind_name(BsKind k);

// A write is an interfere event with theta fixed at pi, so the stored
// amplitude picks up +sqrt(R) of the pulse and a later read followed by an
// interfere event reproduces E1 = sqrt(R1 R2) e^{-gamma0 tau} Ep
// + e^{i theta} sqrt(T2) Es verbatim. A read has no optical input.
struct BsEvent {
  BsKind kind = BsKind::Read;
  double beta = 0.0;
  double theta = 0.0;
  double mu = 1.0;
};

struct CascadeState {
  std::vector<cplx> optical_out;  // one per event
  cplx stored{0.0, 0.0};
};

// Folds the events in order. Write and interfere events consume the next
// pulse amplitude; hold_times[i] is the storage time between event i and
// i + 1, during which the stored amplitude decays by exp(-gamma0 tau).
CascadeState predict_record(const std::vector<cplx>& pulses, const std::vector<BsEvent>& events,
                            double gamma0, const std::vector<double>& hold_times);

// beta2 solving sqrt(R1 R2) e^{-gamma0 tau} |Ep| = sqrt(T2) |Es| by bisection.
double balance_coupling(double R1, double gamma0, double tau, double probe_amplitude,
                        double steering_amplitude);

// Fringe visibility of |e_out|^2 and of the stored port |stored'|^2 as the
// relative phase is swept.
double oracle_visibility_e1(double a, double b, double beta, double mu = 1.0);
double oracle_visibility_e2(double a, double b, double beta, double mu = 1.0);

}  // namespace lgem
