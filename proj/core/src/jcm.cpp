#include "rabiflux/jcm.hpp"

#include <algorithm>
#include <cmath>

#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"

namespace rabiflux::jcm {

using cd = std::complex<double>;

CoherentFieldState CoherentFieldState::coherent(double nbar, double phase) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw domain_error("nbar must be >= 0");
  const double w = 8.0 * std::sqrt(nbar);
  CoherentFieldState s;
  s.nbar = nbar;
  s.phase = phase;
  s.n_min = static_cast<int>(std::max(0.0, std::floor(nbar - w)));
  s.n_max = static_cast<int>(std::ceil(nbar + w)) + 10;
  return s;
}

void CoherentFieldState::validate() const {
  if (!(nbar >= 0.0)) throw domain_error("nbar must be >= 0");
  if (n_min < 0 || n_max < n_min) throw domain_error("invalid Fock window");
  double mass = 0.0;
  for (int n = n_min; n <= n_max; ++n) mass += photon_distribution(nbar, n);
  if (mass < 1.0 - 1e-10) throw domain_error("Fock window misses more than 1e-10 of the Poisson mass");
}

void QubitInit::validate() const {
  const double norm = std::norm(c1) + std::norm(c2);
  if (std::abs(norm - 1.0) > 1e-12) throw domain_error("qubit amplitudes must be normalized");
}

void CouplingParams::validate() const {
  if (!(g > 0.0)) throw domain_error("coupling g must be > 0");
}

double photon_distribution(double nbar, int n) {
  if (!(nbar >= 0.0) || n < 0) throw domain_error("photon_distribution needs nbar >= 0, n >= 0");
  if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
  if (n <= 30) {
    double p = std::exp(-nbar);
    for (int k = 1; k <= n; ++k) p *= nbar / k;
    return p;
  }
  return std::exp(-nbar + n * std::log(nbar) - std::lgamma(n + 1.0));
}

namespace {

int first_index(const CoherentFieldState& f, FockSumStart start) {
  return start == FockSumStart::kOne ? std::max(1, f.n_min) : f.n_min;
}

}  // namespace

double window_mass(const CoherentFieldState& field, FockSumStart start) {
  field.validate();
  double s = 0.0;
  for (int n = first_index(field, start); n <= field.n_max; ++n) s += photon_distribution(field.nbar, n);
  return s;
}

std::vector<double> inversion_trace(const CoherentFieldState& field, const CouplingParams& coupling,
                                    std::span<const double> t, FockSumStart start) {
  field.validate();
  coupling.validate();
  const double g = coupling.g;
  const double d2 = coupling.detuning * coupling.detuning;
  std::vector<double> out(t.size(), 0.0);
  for (int n = first_index(field, start); n <= field.n_max; ++n) {
    const double p = photon_distribution(field.nbar, n);
    if (p == 0.0) continue;
    const double w2 = d2 + 4.0 * g * g * n;
    if (w2 == 0.0) {
      for (auto& v : out) v -= p;
      continue;
    }
    const double w = std::sqrt(w2);
    const double a = d2 / w2;
    const double b = 4.0 * g * g * n / w2;
    for (std::size_t i = 0; i < t.size(); ++i) out[i] -= p * (a + b * std::cos(w * t[i]));
  }
  return out;
}

std::vector<double> ground_state_probability(const CoherentFieldState& field, const QubitInit& qubit,
                                             const CouplingParams& coupling,
                                             std::span<const double> t, FockSumStart start) {
  field.validate();
  qubit.validate();
  coupling.validate();
  const int n0 = first_index(field, start);
  auto amp = [&](int n) -> cd {
    if (n < n0 || n > field.n_max) return {0.0, 0.0};
    return std::sqrt(photon_distribution(field.nbar, n)) * std::polar(1.0, n * field.phase);
  };
  const double d = coupling.detuning;
  std::vector<double> out(t.size(), 0.0);
  // |g,0> does not couple.
  const double p_g0 = std::norm(qubit.c1 * amp(0));
  for (auto& v : out) v += p_g0;
  // Manifold {|e,m>, |g,m+1>}.
  for (int m = std::max(0, n0 - 1); m <= field.n_max; ++m) {
    const cd ae0 = qubit.c2 * amp(m);
    const cd ag0 = qubit.c1 * amp(m + 1);
    if (ae0 == cd{} && ag0 == cd{}) continue;
    const double G = coupling.g * std::sqrt(m + 1.0);
    const double w = std::sqrt(d * d + 4.0 * G * G);
    const cd i{0.0, 1.0};
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double c = std::cos(0.5 * w * t[k]);
      const double s = std::sin(0.5 * w * t[k]);
      const cd ag = -i * (2.0 * G / w) * s * ae0 + (c + i * (d / w) * s) * ag0;
      out[k] += std::norm(ag);
    }
  }
  return out;
}

std::vector<double> inversion_trace(const CoherentFieldState& field, const QubitInit& qubit,
                                    const CouplingParams& coupling, std::span<const double> t,
                                    FockSumStart start) {
  auto pg = ground_state_probability(field, qubit, coupling, t, start);
  // Total weight is below 1 when the vacuum term is dropped.
  const double total = window_mass(field, start);
  for (auto& v : pg) v = total - 2.0 * v;
  return pg;
}

double collapse_envelope(double g, double t) {
  const double x = g * t;
  return std::exp(-0.5 * x * x);
}

double collapse_time(double g) {
  if (!(g > 0.0)) throw domain_error("g must be > 0");
  return std::sqrt(2.0) / g;
}

double revival_time(double g, double nbar, double detuning) {
  if (!(g > 0.0)) throw domain_error("g must be > 0");
  if (!(nbar >= 0.0)) throw domain_error("nbar must be >= 0");
  return kPi / (g * g) * std::sqrt(detuning * detuning + 4.0 * g * g * nbar);
}

double relaxation_time_from_linewidth(double delta_nu) {
  if (!(delta_nu > 0.0)) throw domain_error("linewidth must be > 0");
  return std::log(2.0) / (kPi * delta_nu);
}

std::vector<double> extrema_envelope(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw domain_error("extrema_envelope: length mismatch");
  const std::size_t n = y.size();
  std::vector<double> env(n, 0.0);
  if (n < 3) {
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(y[i]);
    return env;
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  std::vector<std::size_t> ext;
  ext.push_back(0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = y[i] - y[i - 1];
    const double b = y[i + 1] - y[i];
    if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) ext.push_back(i);
  }
  ext.push_back(n - 1);
  for (std::size_t e = 0; e + 1 < ext.size(); ++e) {
    const std::size_t i0 = ext[e], i1 = ext[e + 1];
    const double v0 = std::abs(y[i0] - mean), v1 = std::abs(y[i1] - mean);
    const double span = t[i1] - t[i0];
    for (std::size_t i = i0; i <= i1; ++i) {
      const double f = span > 0.0 ? (t[i] - t[i0]) / span : 0.0;
      env[i] = v0 + f * (v1 - v0);
    }
  }
  return env;
}

double first_revival_center(const CoherentFieldState& field, const CouplingParams& coupling,
                            double dt) {
  const double tr = revival_time(coupling.g, field.nbar, coupling.detuning);
  const double t0 = 0.5 * tr, t1 = 1.5 * tr;
  const auto count = static_cast<std::size_t>(std::ceil((t1 - t0) / dt)) + 1;
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = t0 + dt * static_cast<double>(i);
  const auto y = inversion_trace(field, coupling, t);
  const auto env = extrema_envelope(t, y);
  std::size_t best = count / 2;
  for (std::size_t i = 1; i + 1 < count; ++i)
    if (env[i] > env[best]) best = i;
  return t[best];
}

}  // namespace rabiflux::jcm
