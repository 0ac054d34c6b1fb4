#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "lgem/beamsplitter.hpp"

using namespace lgem;
using std::numbers::pi;

TEST_CASE("effective beta") {
  EnsembleParams p;
  p.g = 1.0;
  p.N = 2.0;
  p.Delta = 0.5;
  CHECK(effective_beta(p, 2.0, 0.0) == 0.0);
  CHECK(effective_beta(p, 2.0, 0.375) == doctest::Approx(0.5625));
  CHECK(effective_beta(p, -2.0, 0.375) == doctest::Approx(0.5625));
  CHECK(effective_beta(p, 2.0, 0.75) == doctest::Approx(4.0 * effective_beta(p, 2.0, 0.375)));
  CHECK_THROWS_AS(effective_beta(p, 0.0, 0.375), Error);
  try {
    effective_beta(p, 0.0, 0.375);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroGradient);
  }
  CHECK(coupling_for_beta(p, 2.0, 0.5625) == doctest::Approx(0.375));
}

TEST_CASE("transmissivity and reflectivity") {
  CHECK(transmissivity(0.0) == 1.0);
  CHECK(reflectivity(0.0) == 0.0);
  CHECK(transmissivity(0.25) == doctest::Approx(std::exp(-pi / 2)));
  CHECK(transmissivity(0.25) == doctest::Approx(0.2079).epsilon(1e-4));
  CHECK(reflectivity(0.25) == doctest::Approx(0.7921).epsilon(1e-4));
  // R2 = 0.37 back-solves to beta ~ 0.0735
  CHECK(beta_for_transmissivity(0.63) == doctest::Approx(std::log(1.0 / 0.63) / (2 * pi)));
  CHECK(beta_for_transmissivity(0.63) == doctest::Approx(0.0735).epsilon(1e-3));
  CHECK_THROWS_AS(beta_for_transmissivity(0.0), Error);
}

TEST_CASE("T + R = 1 and T strictly decreasing") {
  double prev = 2.0;
  for (int i = 0; i <= 400; ++i) {
    const double b = 0.01 * i;
    CHECK(transmissivity(b) + reflectivity(b) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(transmissivity(b) < prev);
    prev = transmissivity(b);
  }
}

TEST_CASE("interfere examples") {
  const double beta1 = 0.3, beta2 = 0.12, g0 = 0.01, tau = 10.0;
  const double R1 = reflectivity(beta1), R2 = reflectivity(beta2), T2 = transmissivity(beta2);
  const cplx Ep = 1.0;
  // balance sqrt(R1 R2) e^{-g0 tau} Ep = sqrt(T2) Es
  const cplx Es = std::sqrt(R1 * R2) * std::exp(-g0 * tau) * Ep / std::sqrt(T2);
  const cplx a = std::sqrt(R1) * std::exp(-g0 * tau) * Ep;
  auto out = interfere(a, Es, beta2, pi);
  CHECK(std::abs(out.e_out) < 1e-14);

  auto read = interfere(cplx(0.3, -0.4), 0.0, 0.2, 1.0);
  CHECK(std::abs(read.e_out - std::sqrt(reflectivity(0.2)) * cplx(0.3, -0.4)) < 1e-15);
  CHECK(std::abs(read.stored - std::sqrt(transmissivity(0.2)) * cplx(0.3, -0.4)) < 1e-15);

  const double half = std::log(2.0) / (2 * pi);
  auto u = interfere(std::sqrt(0.5), 1.0, half, 0.0);
  CHECK(std::norm(u.e_out) + std::norm(u.stored) == doctest::Approx(1.5));
}

TEST_CASE("interfere is unitary for mu = 1") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), b(0.0, 3.0), th(0.0, 2 * pi);
  for (int i = 0; i < 500; ++i) {
    const cplx a(u(rng), u(rng)), x(u(rng), u(rng));
    auto out = interfere(a, x, b(rng), th(rng));
    const double in = std::norm(a) + std::norm(x);
    CHECK(std::norm(out.e_out) + std::norm(out.stored) == doctest::Approx(in).epsilon(1e-13));
  }
}

TEST_CASE("mu < 1 loses energy, never gains") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0), b(0.0, 3.0), th(0.0, 2 * pi), m(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const cplx a(u(rng), u(rng)), x(u(rng), u(rng));
    auto out = interfere(a, x, b(rng), th(rng), m(rng));
    CHECK(std::norm(out.e_out) + std::norm(out.stored) <= std::norm(a) + std::norm(x) + 1e-12);
  }
}

TEST_CASE("write then read gives R1 R2 e^{-2 g0 tau}") {
  for (double g0 : {0.0, 0.02, 0.1}) {
    const double b1 = 0.25, b2 = 0.4, tau = 7.0;
    auto st = predict_record({1.0}, {{BsKind::Write, b1}, {BsKind::Read, b2}}, g0, {tau});
    REQUIRE(st.optical_out.size() == 2);
    CHECK(std::norm(st.optical_out[0]) == doctest::Approx(transmissivity(b1)));
    CHECK(std::norm(st.optical_out[1]) ==
          doctest::Approx(reflectivity(b1) * reflectivity(b2) * std::exp(-2 * g0 * tau)));
  }
  auto eq = predict_record({1.0}, {{BsKind::Write, 0.25}, {BsKind::Read, 0.25}}, 0.0, {10.0});
  CHECK(std::norm(eq.optical_out[1]) == doctest::Approx(std::pow(1 - std::exp(-pi / 2), 2)));
  CHECK(std::norm(eq.optical_out[1]) == doctest::Approx(0.6274).epsilon(1e-4));
}

TEST_CASE("balanced interference sequence") {
  const double b1 = 0.5, b3 = 0.6, g0 = 0.01, t1 = 10.0, t2 = 10.0;
  const double R1 = reflectivity(b1);
  const double es = 0.8;
  const double b2 = balance_coupling(R1, g0, t1, 1.0, es);
  const double R2 = reflectivity(b2), T2 = transmissivity(b2), R3 = reflectivity(b3);
  auto st = predict_record({1.0, es},
                           {{BsKind::Write, b1}, {BsKind::Interfere, b2, pi}, {BsKind::Read, b3}},
                           g0, {t1, t2});
  CHECK(std::abs(st.optical_out[1]) < 1e-9);
  // both arms land in the memory in phase
  const double e2 = R3 * std::exp(-2 * g0 * t2) *
                    std::pow(std::sqrt(T2 * R1) * std::exp(-g0 * t1) + std::sqrt(R2) * es, 2);
  CHECK(std::norm(st.optical_out[2]) == doctest::Approx(e2).epsilon(1e-12));
  CHECK(std::norm(st.optical_out[2]) ==
        doctest::Approx(R3 * std::exp(-2 * g0 * t2) *
                        (T2 * R1 * std::exp(-2 * g0 * t1) + R2 * es * es +
                         2 * std::sqrt(T2 * R1 * R2) * std::exp(-g0 * t1) * es)));
}

TEST_CASE("full decay leaves only the transmitted steering") {
  const double b2 = 0.2, theta = 1.3;
  const cplx es(0.3, 0.4);
  auto st = predict_record({1.0, es}, {{BsKind::Write, 0.5}, {BsKind::Interfere, b2, theta}}, 50.0,
                           {10.0});
  CHECK(std::abs(st.optical_out[1] - std::polar(1.0, theta) * std::sqrt(transmissivity(b2)) * es) <
        1e-12);
}

TEST_CASE("cascade conserves energy for gamma0 = 0 and mu = 1") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> b(0.0, 2.0), th(0.0, 2 * pi), u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<cplx> pulses = {cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
    auto st = predict_record(pulses,
                             {{BsKind::Write, b(rng)}, {BsKind::Interfere, b(rng), th(rng)},
                              {BsKind::Read, b(rng)}},
                             0.0, {1.0, 1.0});
    double out = std::norm(st.stored);
    for (auto v : st.optical_out) out += std::norm(v);
    CHECK(out == doctest::Approx(std::norm(pulses[0]) + std::norm(pulses[1])).epsilon(1e-12));
  }
}

TEST_CASE("predict_record argument checks") {
  CHECK_THROWS_AS(predict_record({1.0}, {{BsKind::Write, 0.1}, {BsKind::Read, 0.1}}, 0.0, {}),
                  Error);
  CHECK_THROWS_AS(predict_record({}, {{BsKind::Write, 0.1}}, 0.0, {}), Error);
}

TEST_CASE("balance coupling") {
  CHECK(balance_coupling(1.0, 0.0, 0.0, 1.0, 1.0) == doctest::Approx(std::log(2.0) / (2 * pi)));
  CHECK(balance_coupling(1.0, 0.0, 0.0, 1.0, 1.0) == doctest::Approx(0.1103).epsilon(1e-3));

  const double R1 = 0.8, decay = 0.9;
  const double g0 = -std::log(decay) / 2.0, tau = 1.0;
  const double b2 = balance_coupling(R1, g0, tau, 1.0, 1.0);
  const double resid = R1 * decay * reflectivity(b2) - transmissivity(b2);
  CHECK(std::abs(resid) < 1e-9);
  // closed form: T = R1' / (R1' + Es^2)
  CHECK(transmissivity(b2) == doctest::Approx(R1 * decay / (R1 * decay + 1.0)).epsilon(1e-9));

  try {
    balance_coupling(0.5, 0.0, 1.0, 1.0, 0.0);
    FAIL("expected NoRoot");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRoot);
  }
  CHECK_THROWS_AS(balance_coupling(0.0, 0.0, 1.0, 1.0, 1.0), Error);
}

namespace {

// Max/min of |e_out(theta)|^2 over a dense theta grid.
double sampled_visibility(double a, double b, double beta, double mu, bool stored_port) {
  double mx = 0.0, mn = 1e300;
  for (int i = 0; i < 3600; ++i) {
    auto o = interfere(a, b, beta, 2 * pi * i / 3600, mu);
    const double v = std::norm(stored_port ? o.stored : o.e_out);
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  return (mx - mn) / (mx + mn);
}

}  // namespace

TEST_CASE("visibility formula matches a sampled fringe") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.1, 2.0), b(0.01, 1.0), m(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double a = u(rng), x = u(rng), beta = b(rng), mu = m(rng);
    CHECK(oracle_visibility_e1(a, x, beta, mu) ==
          doctest::Approx(sampled_visibility(a, x, beta, mu, false)).epsilon(1e-5));
    CHECK(oracle_visibility_e2(a, x, beta, mu) ==
          doctest::Approx(sampled_visibility(a, x, beta, mu, true)).epsilon(1e-5));
  }
}

TEST_CASE("visibility is 1 at balance and falls off either side") {
  const double beta = std::log(2.0) / (2 * pi);  // T = R
  CHECK(oracle_visibility_e1(1.0, 1.0, beta) == doctest::Approx(1.0));
  double prev = 1.0;
  for (double r = 1.1; r < 5.0; r += 0.2) {
    const double v = oracle_visibility_e1(1.0, r, beta);
    CHECK(v < prev);
    prev = v;
  }
  prev = 1.0;
  for (double r = 0.9; r > 0.05; r -= 0.1) {
    const double v = oracle_visibility_e1(1.0, r, beta);
    CHECK(v < prev);
    prev = v;
  }
  prev = 0.0;
  for (double mu = 0.05; mu <= 1.0; mu += 0.05) {
    const double v = oracle_visibility_e1(1.0, 1.0, beta, mu);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("E1 and downstream E2 fringes are in anti-phase") {
  const double b1 = 0.4, b2 = 0.15, b3 = 0.5;
  double e1_max_theta = 0, e1_max = -1, e2_min_theta = 0, e2_min = 1e300;
  for (int i = 0; i < 720; ++i) {
    const double th = 2 * pi * i / 720;
    auto st = predict_record({1.0, 0.7},
                             {{BsKind::Write, b1}, {BsKind::Interfere, b2, th}, {BsKind::Read, b3}},
                             0.0, {10.0, 10.0});
    if (std::norm(st.optical_out[1]) > e1_max) {
      e1_max = std::norm(st.optical_out[1]);
      e1_max_theta = th;
    }
    if (std::norm(st.optical_out[2]) < e2_min) {
      e2_min = std::norm(st.optical_out[2]);
      e2_min_theta = th;
    }
  }
  CHECK(std::abs(e1_max_theta - e2_min_theta) < 2 * pi / 720 + 1e-12);
}

TEST_CASE("event kind names") {
  CHECK(std::string(bs_kind_name(BsKind::Write)) == "write");
  CHECK(std::string(bs_kind_name(BsKind::Interfere)) == "interfere");
}
