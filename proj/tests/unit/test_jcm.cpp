#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"
#include "rabiflux/jcm.hpp"

using namespace rabiflux;
using namespace rabiflux::jcm;
using doctest::Approx;
using cd = std::complex<double>;

namespace {

std::vector<double> grid(double end, double dt) {
  std::vector<double> t;
  for (int i = 0; i * dt <= end + 1e-12; ++i) t.push_back(i * dt);
  return t;
}

// Brute-force Schroedinger evolution in the truncated product basis, H = D/2 sz + g (a s+ + a^dag s-).
// State layout: [g,0..M) then [e,0..M).
std::vector<double> brute_force_inversion(double nbar, double phase, cd c1, cd c2, double g, double detuning,
                                          const std::vector<double>& t) {
  const int M = 60;
  std::vector<cd> psi(2 * M);
  for (int n = 0; n < M; ++n) {
    const double p = std::exp(-nbar + n * std::log(std::max(nbar, 1e-300)) - std::lgamma(n + 1.0));
    const cd cn = std::polar(std::sqrt(nbar == 0.0 ? (n == 0 ? 1.0 : 0.0) : p), n * phase);
    psi[n] = c1 * cn;
    psi[M + n] = c2 * cn;
  }
  auto rhs = [&](const std::vector<cd>& s) {
    std::vector<cd> d(2 * M);
    const cd mi(0, -1);
    for (int n = 0; n < M; ++n) {
      cd hg = -0.5 * detuning * s[n];
      if (n >= 1) hg += g * std::sqrt(double(n)) * s[M + n - 1];  // a^dag s- |e,n-1>
      cd he = 0.5 * detuning * s[M + n];
      if (n + 1 < M) he += g * std::sqrt(n + 1.0) * s[n + 1];  // a s+ |g,n+1>
      d[n] = mi * hg;
      d[M + n] = mi * he;
    }
    return d;
  };
  std::vector<double> out;
  const double h = 1e-3;
  double now = 0.0;
  for (double target : t) {
    while (now < target - 1e-12) {
      const double step = std::min(h, target - now);
      auto k1 = rhs(psi);
      std::vector<cd> tmp(psi.size());
      for (std::size_t i = 0; i < psi.size(); ++i) tmp[i] = psi[i] + 0.5 * step * k1[i];
      auto k2 = rhs(tmp);
      for (std::size_t i = 0; i < psi.size(); ++i) tmp[i] = psi[i] + 0.5 * step * k2[i];
      auto k3 = rhs(tmp);
      for (std::size_t i = 0; i < psi.size(); ++i) tmp[i] = psi[i] + step * k3[i];
      auto k4 = rhs(tmp);
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += step / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      now += step;
    }
    double pe = 0, pg = 0;
    for (int n = 0; n < M; ++n) {
      pg += std::norm(psi[n]);
      pe += std::norm(psi[M + n]);
    }
    out.push_back(pe - pg);
  }
  return out;
}

}  // namespace

TEST_CASE("photon distribution") {
  CHECK(photon_distribution(0, 0) == 1.0);
  CHECK(photon_distribution(0, 3) == 0.0);
  CHECK(photon_distribution(50, 50) == Approx(std::exp(-50 + 50 * std::log(50.0) - std::lgamma(51.0))));
  CHECK(photon_distribution(50, 50) == Approx(0.0563).epsilon(1e-3));
  CHECK(photon_distribution(50, 50) == Approx(1 / std::sqrt(2 * kPi * 50)).epsilon(0.01));
  CHECK(window_mass(CoherentFieldState::coherent(50)) == Approx(1.0).epsilon(1e-10));
  const auto f = CoherentFieldState::coherent(50);
  double s = 0;
  for (int n = f.n_min; n <= f.n_max; ++n) s += photon_distribution(50, n);
  CHECK(std::abs(s - 1) < 1e-10);
}

TEST_CASE("field state validation") {
  CoherentFieldState f{10.0, 0.0, 5, 4};
  CHECK_THROWS_AS(f.validate(), input_error);
  f = CoherentFieldState{10.0, 0.0, 8, 12};  // covers far too little Poisson mass
  CHECK_THROWS_AS(f.validate(), input_error);
  QubitInit q{{0.8, 0.0}, {0.8, 0.0}};
  CHECK_THROWS_AS(q.validate(), input_error);
  CHECK_THROWS_AS((CouplingParams{0.0, 0.0}.validate()), input_error);
}

TEST_CASE("inversion trace") {
  const auto t = grid(20, 0.01);
  SUBCASE("starts at -1") {
    for (double nbar : {0.5, 7.0, 50.0}) CHECK(inversion_trace(CoherentFieldState::coherent(nbar), {1.3, 0}, t)[0] == Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("vacuum is stationary") {
    for (double w : inversion_trace(CoherentFieldState::coherent(0), {1, 0}, t)) CHECK(w == Approx(-1.0).epsilon(1e-14));
  }
  SUBCASE("collapse by t = 3/g") {
    const auto tc = grid(3, 0.001);
    const auto w = inversion_trace(CoherentFieldState::coherent(50), {1, 0}, tc);
    double worst = 0;
    for (std::size_t i = 0; i < tc.size(); ++i)
      worst = std::max(worst, std::abs(w[i] + collapse_envelope(1, tc[i]) * std::cos(2 * std::sqrt(50.0) * tc[i])));
    CHECK(worst < 0.05);
    double tail = 0;
    for (std::size_t i = 0; i < tc.size(); ++i)
      if (tc[i] > 2.9) tail = std::max(tail, std::abs(w[i]));
    CHECK(tail < 0.05);
  }
  SUBCASE("printed lower limit drops the vacuum term") {
    const auto f = CoherentFieldState::coherent(2);
    const auto a = inversion_trace(f, {1, 0}, t, FockSumStart::kZero);
    const auto b = inversion_trace(f, {1, 0}, t, FockSumStart::kOne);
    for (std::size_t i = 0; i < t.size(); i += 97) CHECK(b[i] - a[i] == Approx(photon_distribution(2, 0)).epsilon(1e-12));
  }
}

TEST_CASE("inversion against brute-force evolution") {
  const auto t = grid(12, 0.25);
  SUBCASE("resonant ground") {
    const auto w = inversion_trace(CoherentFieldState::coherent(6, 0.4), {0.8, 0.0}, t);
    const auto o = brute_force_inversion(6, 0.4, 1, 0, 0.8, 0.0, t);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(w[i] == Approx(o[i]).epsilon(1e-7));
  }
  SUBCASE("detuned ground") {
    const auto w = inversion_trace(CoherentFieldState::coherent(4), {1.0, 1.7}, t);
    const auto o = brute_force_inversion(4, 0, 1, 0, 1.0, 1.7, t);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(w[i] == Approx(o[i]).epsilon(1e-7));
  }
  SUBCASE("superposed qubit with field phase") {
    QubitInit q{std::polar(std::sqrt(0.3), 0.2), std::polar(std::sqrt(0.7), -1.1)};
    const auto w = inversion_trace(CoherentFieldState::coherent(5, 0.9), q, {0.6, 0.5}, t);
    const auto o = brute_force_inversion(5, 0.9, q.c1, q.c2, 0.6, 0.5, t);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(w[i] == Approx(o[i]).epsilon(1e-7));
  }
}

TEST_CASE("ground-state probability") {
  const auto t = grid(30, 0.05);
  const auto f = CoherentFieldState::coherent(50);
  const auto p = ground_state_probability(f, QubitInit::ground(), {1, 0}, t);
  const auto w = inversion_trace(f, {1, 0}, t);
  CHECK(p[0] == Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(2 * p[i] - 1 + w[i]) < 1e-9);
  CHECK(first_revival_center(f, {1, 0}) == Approx(44.4).epsilon(0.05));
}

TEST_CASE("collapse envelope and time scales") {
  CHECK(collapse_envelope(2.0, 0.0) == 1.0);
  CHECK(collapse_envelope(1.0, std::sqrt(2 * std::log(2.0))) == Approx(0.5));
  CHECK(collapse_envelope(3.0, 0.4) == Approx(collapse_envelope(1.0, 1.2)));
  CHECK(collapse_time(1) == Approx(std::sqrt(2.0)));
  CHECK(collapse_time(4e3) == Approx(3.54e-4).epsilon(1e-3));
  CHECK(collapse_time(2.6) == Approx(0.5 * collapse_time(1.3)));
  CHECK(revival_time(1, 50) == Approx(2 * kPi * std::sqrt(50.0)));
  CHECK(revival_time(1, 50) == Approx(44.429).epsilon(1e-4));
  CHECK(revival_time(1, 200) / revival_time(1, 50) == Approx(2.0));
  CHECK(revival_time(0.7, 0, 1.4) == Approx(2 * kPi / 0.7));
  CHECK(relaxation_time_from_linewidth(0.17619e6) == Approx(1.25e-6).epsilon(2e-3));
  CHECK(relaxation_time_from_linewidth(std::log(2.0) / kPi) == Approx(1.0));
  CHECK(relaxation_time_from_linewidth(0.5e6) == Approx(2 * relaxation_time_from_linewidth(1e6)));
  CHECK_THROWS_AS(relaxation_time_from_linewidth(0), domain_error);
  CHECK_THROWS_AS(collapse_time(0), input_error);
}

TEST_CASE("collapse envelope is independent of nbar") {
  const auto t = grid(2.5, 0.001);
  for (double nbar : {30.0, 50.0, 100.0}) {
    const auto w = inversion_trace(CoherentFieldState::coherent(nbar), {1, 0}, t);
    double ss = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double d = w[i] + collapse_envelope(1, t[i]) * std::cos(2 * std::sqrt(nbar) * t[i]);
      ss += d * d;
    }
    CHECK(std::sqrt(ss / t.size()) < 0.05);
  }
}
