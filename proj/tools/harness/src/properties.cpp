#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "rabiflux/chain.hpp"
#include "rabiflux/constants.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/field_quantization.hpp"
#include "rabiflux/fluxon.hpp"
#include "rabiflux/harness/acceptance.hpp"
#include "rabiflux/harness/io.hpp"
#include "rabiflux/harness/run.hpp"
#include "rabiflux/jcm.hpp"
#include "rabiflux/spectro_analysis.hpp"

namespace rabiflux::harness {
namespace {

// Seeded per property so every run draws the same cases.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 rng_;
};

struct Check {
  bool pass = true;
  std::ostringstream note;
  void expect(bool ok, const std::string& what) {
    if (!ok && pass) note << what;
    pass = pass && ok;
  }
  PropertyOutcome done(const std::string& summary) {
    return {pass, pass ? summary : note.str()};
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// ---- field quantization

PropertyOutcome mode_spacing_linear() {
  Gen gen(101);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double alpha = gen.uniform(1, 50), L = gen.uniform(0.5, 5);
    const double a1 = gen.uniform(-1, 1), a2 = gen.uniform(-1, 1);
    const double l1 = gen.uniform(-0.1, 0.1), l2 = gen.uniform(-0.1, 0.1);
    const double s = gen.uniform(-3, 3), t = gen.uniform(-3, 3);
    const double lhs = fq::mode_spacing_delta(alpha, L, s * a1 + t * a2, s * l1 + t * l2);
    const double rhs = s * fq::mode_spacing_delta(alpha, L, a1, l1) + t * fq::mode_spacing_delta(alpha, L, a2, l2);
    const double scale = std::abs(s * fq::mode_spacing_delta(alpha, L, a1, l1)) +
                         std::abs(t * fq::mode_spacing_delta(alpha, L, a2, l2)) + 1e-300;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
    const double up = fq::mode_spacing_delta(alpha, L, 0.0, l1);
    const double down = fq::mode_spacing_delta(alpha, L, 0.0, -l1);
    c.expect(up == -down, "dL sign is not antisymmetric");
    c.expect(l1 <= 0 || up < 0, "positive dL must lower the wavenumber");
  }
  c.expect(worst < 1e-12, "nonlinear residual " + fmt(worst));
  return c.done("200 cases, worst linearity residual " + fmt(worst));
}

PropertyOutcome scattering_delta_limit() {
  Check c;
  double worst = 0.0;
  for (bool emission : {true, false})
    for (double eta_frac : {1e-4, 1e-3, 1e-2, 5e-2}) {
      fq::ScatteringInput in;
      in.energy_initial = 2.0;
      in.phonon_energy = 0.3;
      in.phonon_occupation = 1.7;
      in.matrix_element_sq = 0.8;
      in.broadening_eta = eta_frac * in.phonon_energy;
      const double centre = in.energy_initial + (emission ? -1.0 : 1.0) * in.phonon_energy;
      // Trapezoid over +/- 12 eta around the resonance.
      const int m = 4000;
      const double h = 24.0 * in.broadening_eta / m;
      double sum = 0.0;
      for (int k = 0; k <= m; ++k) {
        in.energy_final = centre - 12.0 * in.broadening_eta + k * h;
        sum += (k == 0 || k == m ? 0.5 : 1.0) * fq::scattering_rate(in, emission);
      }
      const double expect = 2.0 * kPi * in.matrix_element_sq * (in.phonon_occupation + (emission ? 1.0 : 0.0));
      worst = std::max(worst, rel(sum * h, expect));
    }
  c.expect(worst < 1e-6, "integrated rate misses the delta limit by " + fmt(worst));
  return c.done("8 widths, worst relative error " + fmt(worst));
}

PropertyOutcome quasimomentum_reciprocal_shift() {
  Gen gen(103);
  Check c;
  int allowed = 0;
  for (int i = 0; i < 400; ++i) {
    const auto lat = fq::KLattice::uniform(gen.uniform(0.1, 2.0), static_cast<std::size_t>(gen.integer(6, 40)));
    const auto& k = lat.wavenumbers();
    const double kl = k[static_cast<std::size_t>(gen.integer(0, int(k.size()) - 1))];
    const double km = k[static_cast<std::size_t>(gen.integer(0, int(k.size()) - 1))];
    const bool emission = gen.coin();
    const double sign = emission ? 1.0 : -1.0;
    double q = gen.uniform(-3, 3);
    if (gen.coin()) q = sign * (kl - km - gen.integer(-2, 2) * lat.reciprocal_period());
    const auto base = fq::quasimomentum_allowed(kl, km, q, lat, emission);
    const double shifted = kl + gen.integer(-3, 3) * lat.reciprocal_period();
    const auto moved = fq::quasimomentum_allowed(shifted, km, q, lat, emission);
    c.expect((base == fq::Quasimomentum::kForbidden) == (moved == fq::Quasimomentum::kForbidden),
             "verdict changed from " + std::string(to_string(base)) + " to " + to_string(moved));
    allowed += base != fq::Quasimomentum::kForbidden;
  }
  c.expect(allowed > 50, "generator produced too few allowed cases");
  return c.done("400 cases (" + std::to_string(allowed) + " allowed), forbidden status preserved");
}

PropertyOutcome pairing_kernel_even() {
  Gen gen(104);
  Check c;
  for (int i = 0; i < 500; ++i) {
    const double ek = gen.uniform(-2, 2), ekq = gen.uniform(-2, 2), hw = gen.uniform(0.05, 1);
    if (std::abs(std::abs(ek - ekq) - hw) < 1e-3) continue;
    const double m2 = gen.uniform(0.1, 2);
    c.expect(fq::pairing_kernel(ek, ekq, hw, m2) == fq::pairing_kernel(ekq, ek, hw, m2), "kernel not even");
  }
  return c.done("500 cases, kernel(d) == kernel(-d)");
}

// ---- jcm

std::vector<double> time_grid(double end, double dt) {
  std::vector<double> t;
  for (int i = 0; i * dt <= end + 1e-12; ++i) t.push_back(i * dt);
  return t;
}

PropertyOutcome inversion_bounds() {
  Gen gen(201);
  Check c;
  for (int i = 0; i < 30; ++i) {
    const auto field = jcm::CoherentFieldState::coherent(gen.uniform(0.1, 120), gen.uniform(0, 6));
    const jcm::CouplingParams cp{gen.uniform(0.2, 3), gen.uniform(-5, 5)};
    jcm::QubitInit q;
    const double th = gen.uniform(0, kPi), ph = gen.uniform(0, 2 * kPi);
    q.c1 = std::cos(th / 2);
    q.c2 = std::polar(std::sin(th / 2), ph);
    const auto t = time_grid(40, 0.05);
    const auto w = jcm::inversion_trace(field, cp, t);
    const auto wq = jcm::inversion_trace(field, q, cp, t);
    c.expect(std::abs(w[0] + 1.0) < 1e-12, "ground init does not start at -1");
    for (std::size_t k = 0; k < t.size(); ++k) {
      c.expect(std::abs(w[k]) <= 1.0 + 1e-12, "ground trace leaves [-1, 1]");
      c.expect(std::abs(wq[k]) <= 1.0 + 1e-12, "general trace leaves [-1, 1]");
    }
  }
  return c.done("30 random fields and qubit states, trace within [-1, 1]");
}

PropertyOutcome truncation_insensitive() {
  Gen gen(202);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    auto field = jcm::CoherentFieldState::coherent(gen.uniform(1, 150));
    const jcm::CouplingParams cp{gen.uniform(0.3, 2), gen.uniform(-2, 2)};
    const auto t = time_grid(60, 0.1);
    const auto a = jcm::inversion_trace(field, cp, t);
    field.n_min = std::max(0, field.n_min - 25);
    field.n_max += 40;
    const auto b = jcm::inversion_trace(field, cp, t);
    for (std::size_t k = 0; k < t.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  c.expect(worst < 1e-8, "window widening changed the trace by " + fmt(worst));
  return c.done("10 cases, worst change " + fmt(worst));
}

PropertyOutcome cummings_short_time() {
  Gen gen(203);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double nbar = i == 0 ? 30.0 : gen.uniform(30, 200), g = gen.uniform(0.3, 3);
    const auto field = jcm::CoherentFieldState::coherent(nbar);
    const auto t = time_grid(3.0 / g, 0.002 / g);
    const auto w = jcm::inversion_trace(field, {g, 0.0}, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double model = -std::exp(-0.5 * g * g * t[k] * t[k]) * std::cos(2 * g * std::sqrt(nbar) * t[k]);
      worst = std::max(worst, std::abs(w[k] - model));
    }
  }
  c.expect(worst < 0.05, "deviation " + fmt(worst));
  return c.done("12 cases with nbar >= 30, worst deviation " + fmt(worst));
}

PropertyOutcome revival_center() {
  Gen gen(204);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double nbar = gen.uniform(30, 100), g = gen.uniform(0.5, 2);
    const auto field = jcm::CoherentFieldState::coherent(nbar);
    const double tr = jcm::revival_time(g, nbar);
    worst = std::max(worst, rel(jcm::first_revival_center(field, {g, 0.0}), tr));
  }
  c.expect(worst < 0.05, "revival center off by " + fmt(worst));
  return c.done("6 cases, worst relative offset " + fmt(worst));
}

// ---- chain

chain::ChainParams ring(double xi1, double xi2, double g) {
  chain::ChainParams p;
  p.site_count = 64;
  p.k = 2 * kPi / 64;
  p.xi1 = xi1;
  p.xi2 = xi2;
  p.g = g;
  p.omega0 = 1.0;
  p.omega = 1.0;
  return p;
}

PropertyOutcome chain_norm() {
  Gen gen(301);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    auto p = ring(gen.uniform(-2, -0.2), gen.uniform(0.2, 2), gen.uniform(1, 10));
    p.n_max = gen.integer(0, 3);
    const auto w = chain::coherent_weights(1.5, p.n_min, p.n_max);
    const chain::GaussianBeam beams[] = {{1.0, gen.uniform(0, 64), gen.uniform(4, 10), chain::Level::kExcited},
                                         {gen.uniform(0, 1), gen.uniform(0, 64), gen.uniform(4, 10), chain::Level::kGround}};
    const auto f = chain::init_gaussian_beam(p, beams, w);
    const double wmax = p.g * std::sqrt(p.n_max + 1.0) + 4.0 * (std::abs(p.xi1) + std::abs(p.xi2)) + p.omega0;
    const double h = 0.006 / wmax;
    const auto tr = chain::integrate(f, p, 1e4 * h, h);
    c.expect(tr.steps == 10000, "expected 10^4 steps, took " + std::to_string(tr.steps));
    worst = std::max(worst, tr.norm_drift);
  }
  c.expect(worst < 1e-9, "norm drift " + fmt(worst));
  return c.done("3 random rings, 10^4 steps each, worst drift " + fmt(worst));
}

PropertyOutcome chain_analytic_agreement() {
  Gen gen(302);
  Check c;
  auto p = ring(-1, 1, 10);
  p.omega = p.omega0 - (chain::theta1(p, -p.k / 2) - chain::theta2(p, -p.k / 2));
  const double d = gen.uniform(0, 64);
  const chain::GaussianBeam beams[] = {{1.0, d, 8.0, chain::Level::kExcited},
                                       {gen.uniform(0.2, 1), std::fmod(d + 24.0, 64.0), 8.0, chain::Level::kGround}};
  const double w[] = {1.0};
  const auto f = chain::init_gaussian_beam(p, beams, w);
  const auto sp = chain::subpacket_params(p, 0);
  const double vmax = std::max({std::abs(sp.family1.v_plus), std::abs(sp.family1.v_minus),
                                std::abs(sp.family2.v_plus), std::abs(sp.family2.v_minus)});
  double worst = 0.0;
  chain::integrate(f, p, 32.0 / vmax, 4e-4, 1000, [&](const chain::AmplitudeField& cur) {
    const auto a = chain::analytic_packet(f, p, cur.coordinate);
    for (int s = 0; s < 64; ++s) {
      worst = std::max(worst, std::abs(std::abs(cur.A(s, 0)) - std::abs(a.A(s, 0))));
      worst = std::max(worst, std::abs(std::abs(cur.B(s, 0)) - std::abs(a.B(s, 0))));
    }
  });
  c.expect(worst < 1e-2, "sup-norm discrepancy " + fmt(worst));
  return c.done("beam at site " + fmt(d) + ", sup-norm discrepancy " + fmt(worst));
}

PropertyOutcome subpacket_count() {
  Gen gen(303);
  Check c;
  auto distinct = [](std::vector<double> v, double tol) {
    std::sort(v.begin(), v.end());
    int n = 1;
    for (std::size_t i = 1; i < v.size(); ++i) n += v[i] - v[i - 1] > tol;
    return n;
  };
  for (int i = 0; i < 50; ++i) {
    auto p = ring(gen.uniform(-2, -0.2), gen.uniform(0.2, 2), gen.uniform(0.5, 5));
    if (std::abs(std::abs(p.xi1) - std::abs(p.xi2)) < 0.05) continue;
    p.omega = p.omega0 - gen.uniform(-3, 3);
    const int n = gen.integer(0, 4);
    auto s = chain::subpacket_params(p, n);
    const std::vector<double> v = {s.family1.v_plus, s.family1.v_minus, s.family2.v_plus, s.family2.v_minus};
    c.expect(distinct(v, 1e-9) == 4, "generic parameters gave fewer than four velocities");
    p.omega = p.omega0 - chain::check_synchronism(p, 0.0).suggested_detuning2;
    s = chain::subpacket_params(p, n);
    c.expect(std::abs(s.family2.v_plus - s.family2.v_minus) < 1e-12, "synchronous family did not merge");
    const std::vector<double> vs = {s.family1.v_plus, s.family1.v_minus, s.family2.v_plus, s.family2.v_minus};
    c.expect(distinct(vs, 1e-9) == 3, "synchronism should leave three subpackets");
  }
  return c.done("four velocities generically, three under synchronism");
}

PropertyOutcome frozen_family() {
  Gen gen(304);
  Check c;
  for (int i = 0; i < 50; ++i) {
    const double eps = std::pow(10.0, -gen.uniform(8, 14));
    auto p = ring(eps, gen.uniform(0.2, 2), gen.uniform(0.5, 5));
    p.omega = p.omega0 - gen.uniform(-3, 3);
    auto s = chain::subpacket_params(p, gen.integer(0, 3));
    c.expect(std::abs(s.family1.v_plus) < 2.1 * eps && std::abs(s.family1.v_minus) < 2.1 * eps, "v1 did not vanish");
    p.xi1 = gen.uniform(-2, -0.2);
    p.xi2 = eps;
    s = chain::subpacket_params(p, gen.integer(0, 3));
    c.expect(std::abs(s.family2.v_plus) < 2.1 * eps && std::abs(s.family2.v_minus) < 2.1 * eps, "v2 did not vanish");
  }
  return c.done("velocities scale to zero with their hopping");
}

PropertyOutcome time_lattice_equivalence() {
  Gen gen(305);
  Check c;
  chain::ChainParams tl = ring(-0.8, 1.3, 3.0);
  tl.variant = chain::Variant::kTimeLattice;
  tl.omega = gen.uniform(-0.3, -0.05);
  tl.k = gen.uniform(0.5, 2.0);
  tl.omega0 = tl.k + gen.uniform(-0.5, 0.5);
  tl.time_lattice_t1 = gen.uniform(0.5, 2);
  tl.light_speed = gen.uniform(0.5, 2);

  chain::ChainParams sc = tl;
  sc.variant = chain::Variant::kSpaceChain;
  sc.k = -tl.omega * tl.time_lattice_t1 / (tl.light_speed * tl.lattice_spacing);
  sc.omega = -tl.k;

  const chain::GaussianBeam beams[] = {{1.0, 20.0, 6.0, chain::Level::kExcited}};
  const double w[] = {1.0};
  const auto a = chain::integrate(chain::init_gaussian_beam(tl, beams, w), tl, 5.0, 1e-3);
  const auto b = chain::integrate(chain::init_gaussian_beam(sc, beams, w), sc, 5.0, 1e-3);
  const auto& fa = a.snapshots.back();
  const auto& fb = b.snapshots.back();
  double diff = 0.0;
  for (std::size_t i = 0; i < fa.a_data().size(); ++i) {
    diff = std::max(diff, std::abs(fa.a_data()[i] - fb.a_data()[i]));
    diff = std::max(diff, std::abs(fa.b_data()[i] - fb.b_data()[i]));
  }
  double moved = 0.0;
  for (std::size_t i = 0; i < fa.b_data().size(); ++i) moved = std::max(moved, std::abs(fa.b_data()[i]));
  c.expect(moved > 1e-3, "trajectory is trivial");
  c.expect(diff < 1e-12, "relabeled trajectories differ by " + fmt(diff));
  return c.done("relabeled trajectories differ by " + fmt(diff));
}

// ---- esr synthesis

PropertyOutcome dyson_monotone() {
  Check c;
  double prev = 0.0;
  const int m = 120;
  for (int i = 0; i <= m; ++i) {
    const double r = analysis::dyson_ratio(analysis::DysonFamily::kStandard, 0.5 * kPi * i / m);
    if (i == 0) c.expect(std::abs(r - 1.0) < 1e-3, "A/B at psi = 0 is " + fmt(r));
    if (i > 0) {
      c.expect(r > prev, "A/B not increasing near step " + std::to_string(i));
      c.expect(r - prev < 0.5, "A/B jumps near step " + std::to_string(i));
    }
    prev = r;
  }
  c.expect(std::abs(prev - 8.0) < 0.01, "A/B at pi/2 is " + fmt(prev));
  return c.done("121 angles, strictly increasing from 1 to " + fmt(prev));
}

PropertyOutcome modulation_linear() {
  Gen gen(402);
  Check c;
  double worst = 0.0;
  for (int pathway = 0; pathway < 2; ++pathway) {
    esr::SweepConfig sw;
    sw.field_start = 3300;
    sw.field_end = 3301;
    sw.samples = 4001;
    sw.direction = gen.coin() ? SweepDirection::kUp : SweepDirection::kDown;
    if (pathway == 0) {
      sw.sweep_rate = 0.01;
      sw.modulation_amplitude = gen.uniform(0.001, 0.02);
      sw.time_constant = gen.uniform(0.0, 0.5);
    } else {
      sw.sweep_rate = 500.0;
      sw.modulation_freq = 1e4;
      sw.time_constant = gen.uniform(0.0, 1e-4);
    }
    const auto h = sw.field_grid();
    std::vector<double> x(h.size()), y(h.size()), z(h.size());
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    for (std::size_t i = 0; i < h.size(); ++i) {
      x[i] = std::sin(40 * h[i]) + gen.uniform(-0.1, 0.1);
      y[i] = std::exp(-std::pow((h[i] - 3300.5) / 0.1, 2)) + gen.uniform(-0.1, 0.1);
      z[i] = a * x[i] + b * y[i];
    }
    const auto dx = esr::modulation_detect(h, x, sw), dy = esr::modulation_detect(h, y, sw);
    const auto dz = esr::modulation_detect(h, z, sw);
    double scale = 1e-300;
    for (std::size_t i = 0; i < h.size(); ++i) scale = std::max(scale, std::abs(a * dx[i]) + std::abs(b * dy[i]));
    for (std::size_t i = 0; i < h.size(); ++i) worst = std::max(worst, std::abs(dz[i] - a * dx[i] - b * dy[i]) / scale);
  }
  c.expect(worst < 1e-12, "superposition residual " + fmt(worst));
  return c.done("both pathways, superposition residual " + fmt(worst));
}

PropertyOutcome packet_parity() {
  Gen gen(403);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    esr::OscillationPacketSpec spec;
    spec.nbar = gen.uniform(1, 300);
    std::vector<double> x, mx;
    for (int k = 0; k < 400; ++k) {
      const double v = gen.uniform(0, 6);
      x.push_back(v);
      mx.push_back(-v);
    }
    const auto p = esr::packet_waveform_terms(spec, x), q = esr::packet_waveform_terms(spec, mx);
    const auto full = esr::packet_waveform(spec, x);
    for (std::size_t k = 0; k < x.size(); ++k) {
      worst = std::max(worst, std::abs(p.envelope_branch[k] - q.envelope_branch[k]));
      worst = std::max(worst, std::abs(p.harmonic_branch[k] - q.harmonic_branch[k]));
      worst = std::max(worst, std::abs(full[k] - p.envelope_branch[k] - p.harmonic_branch[k]));
    }
  }
  c.expect(worst < 1e-10, "parity residual " + fmt(worst));
  return c.done("both product-rule branches even, worst residual " + fmt(worst));
}

PropertyOutcome hysteresis_translation() {
  Gen gen(404);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double hyst = gen.uniform(0.05, 1.5);
    esr::ComposeInput up;
    up.sweep.field_start = 3322.0;
    up.sweep.field_end = 3324.0;
    up.sweep.samples = 8001;
    up.sweep.sweep_rate = 2.0 / 480;
    up.sweep.modulation_amplitude = gen.coin() ? 0.0 : gen.uniform(0.001, 0.005);
    esr::OscillationPacketSpec pk;
    pk.coupling_g = 0.08;
    pk.nbar = gen.uniform(50, 250);
    pk.center_field = 3322.8 + gen.uniform(-0.2, 0.2);
    pk.hysteresis_offset = hyst;
    up.packets = {pk};
    esr::DysonLineSpec line;
    line.center = 3323.4;
    line.width_pp = 0.05;
    line.mixing_angle = gen.uniform(0, 1.5);
    line.amplitude = 0.3;
    line.hysteresis_offset = hyst;
    up.lines = {line};

    auto down = up;
    down.sweep.direction = SweepDirection::kDown;
    down.sweep.field_start -= hyst;
    down.sweep.field_end -= hyst;
    const auto su = esr::compose_spectrum(up).spectrum;
    const auto sd = esr::compose_spectrum(down).spectrum;
    double scale = 0.0;
    for (double v : su.amplitude) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < su.size(); ++k) {
      const std::size_t j = sd.size() - 1 - k;
      worst = std::max(worst, std::abs(su.amplitude[k] - sd.amplitude[j]) / scale);
    }
  }
  c.expect(worst < 1e-7, "down sweep is not a translated up sweep, residual " + fmt(worst));
  return c.done("5 cases, translation residual " + fmt(worst));
}

// ---- analysis

esr::ComposeResult mg_spectrum(double spacing, double n_osc, double shift = 0.0) {
  const double nbar = std::pow(n_osc * kPi / std::sqrt(2 * std::log(2.0)), 2);
  const double rate = 2.0 / 480;
  const double hc = 9314.2 / (kMHzPerGauss * 2.00278) + shift;
  esr::ComposeInput in;
  in.sweep.field_start = hc - 0.5;
  in.sweep.field_end = hc + 1.0;
  in.sweep.sweep_rate = rate;
  in.sweep.samples = 15001;
  for (auto [off, amp] : {std::pair{0.0, 1.0}, {0.40, 0.4}, {0.70, 0.25}}) {
    esr::OscillationPacketSpec p;
    p.coupling_g = kPi * rate / (std::sqrt(nbar) * spacing);
    p.nbar = nbar;
    p.center_field = hc + off;
    p.amplitude = amp;
    in.packets.push_back(p);
  }
  return esr::compose_spectrum(in);
}

PropertyOutcome peaks_translation() {
  Gen gen(501);
  Check c;
  const auto s = mg_spectrum(0.012, 5.225).spectrum;
  const double thr = analysis::prominence_threshold(s, 0.03);
  const auto base = analysis::detect_peaks(s, thr);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double shift = gen.uniform(-50, 50);
    auto moved = s;
    for (double& h : moved.field) h += shift;
    const auto p = analysis::detect_peaks(moved, thr);
    c.expect(p.size() == base.size(), "peak count changed under translation");
    for (std::size_t k = 0; k < std::min(p.size(), base.size()); ++k)
      worst = std::max(worst, std::abs(p.positions[k] - base.positions[k] - shift));
  }
  c.expect(worst < 1e-7, "positions moved by " + fmt(worst) + " G beyond the shift");
  return c.done(std::to_string(base.size()) + " peaks, worst residual " + fmt(worst) + " G");
}

PropertyOutcome telescoping() {
  Gen gen(502);
  Check c;
  for (int i = 0; i < 100; ++i) {
    analysis::PeakList pl;
    double x = gen.uniform(-5, 5);
    const int n = gen.integer(2, 40);
    for (int k = 0; k < n; ++k) {
      pl.positions.push_back(x);
      pl.amplitudes.push_back(gen.uniform(0.1, 1));
      pl.widths_pp.push_back(0.01);
      pl.prominences.push_back(0.1);
      x += gen.uniform(0.001, 0.1);
    }
    const auto st = analysis::splitting_stats(pl, 2);
    const double span = pl.positions.back() - pl.positions.front();
    c.expect(std::abs(st.mean * (n - 1) - span) <= 1e-12 * std::max(1.0, span), "mean x (n - 1) != span");
  }
  return c.done("100 random peak lists");
}

PropertyOutcome asymmetry_scaling() {
  Gen gen(503);
  Check c;
  for (int i = 0; i < 50; ++i) {
    esr::DysonLineSpec spec;
    spec.center = 0.0;
    spec.width_pp = 0.1;
    spec.mixing_angle = gen.uniform(0, 1.5);
    std::vector<double> h;
    for (int k = 0; k <= 4000; ++k) h.push_back(-2.0 + 0.001 * k);
    auto y = esr::dyson_line(spec, h);
    const double r = analysis::asymmetry_ratio(y);
    const double s = std::pow(10.0, gen.uniform(-6, 6));
    for (double& v : y) v *= s;
    c.expect(rel(analysis::asymmetry_ratio(y), r) < 1e-12, "ratio changed under scaling");
  }
  return c.done("50 lines, ratio unchanged under positive scaling");
}

PropertyOutcome round_trip() {
  Gen gen(504);
  Check c;
  std::ostringstream seen;
  for (int i = 0; i < 3; ++i) {
    const double spacing = gen.uniform(0.010, 0.014), n_osc = gen.uniform(4.6, 5.8);
    const auto s = mg_spectrum(spacing, n_osc).spectrum;
    analysis::PipelineOptions opt;
    opt.prominence_fraction = 0.03;
    opt.microwave_freq_mhz = 9314.2;
    const auto rep = analysis::analyze_spectrum(s, opt);
    const double omega = kMHzPerGauss * 2.00278 * n_osc * n_osc * spacing;
    c.expect(rel(rep.splitting.mean, spacing) < 0.02, "splitting " + fmt(rep.splitting.mean) + " vs " + fmt(spacing));
    c.expect(rel(rep.rabi_frequency_mhz, omega) < 0.02, "Rabi frequency " + fmt(rep.rabi_frequency_mhz) + " vs " + fmt(omega));
    c.expect(std::abs(rep.g_factor - 2.00278) < 1e-4, "g " + fmt(rep.g_factor));
    seen << (i ? ", " : "") << fmt(rep.rabi_frequency_mhz / omega);
  }
  for (int i = 0; i < 3; ++i) {
    const double psi = gen.uniform(0.1, 1.5);
    esr::DysonLineSpec spec;
    spec.center = 3322.8;
    spec.width_pp = 0.05;
    spec.mixing_angle = psi;
    std::vector<double> h;
    for (int k = 0; k <= 40000; ++k) h.push_back(3322.8 - 2.0 + 1e-4 * k);
    const double ab = analysis::asymmetry_ratio(esr::dyson_line(spec, h));
    const auto cal = analysis::calibrate_dyson(ab, analysis::DysonFamily::kStandard);
    c.expect(cal.reached && std::abs(cal.angle - psi) < 0.02, "A/B inversion gave " + fmt(cal.angle) + " for " + fmt(psi));
  }
  return c.done("recovered/true Rabi frequency: " + seen.str());
}

PropertyOutcome g_factor_inverse() {
  Gen gen(505);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g = gen.uniform(1.5, 2.5), nu = gen.uniform(1e3, 1e5);
    worst = std::max(worst, rel(analysis::g_factor(nu, nu / (kMHzPerGauss * g)), g));
  }
  c.expect(worst < 1e-9, "identity broken by " + fmt(worst));
  return c.done("1000 cases, worst relative error " + fmt(worst));
}

// ---- fluxon

PropertyOutcome winding_conserved() {
  Gen gen(601);
  Check c;
  for (int i = 0; i < 3; ++i) {
    fluxon::JunctionParams p;
    p.alpha = gen.uniform(0, 0.1);
    p.gamma = gen.uniform(0, 0.3);
    const int n = gen.integer(1, 3);
    std::vector<double> centres;
    for (int k = 0; k < n; ++k) centres.push_back(p.length * (k + gen.uniform(0.2, 0.8)) / n);
    auto s = fluxon::init_kinks(p, centres, gen.uniform(-0.6, 0.6));
    c.expect(fluxon::winding_number(s) == n, "initial winding is not the kink count");
    for (int b = 0; b < 20; ++b) {
      s = fluxon::step_pde(std::move(s), p, 500);
      c.expect(fluxon::winding_number(s) == n, "winding changed during evolution");
    }
  }
  return c.done("3 runs of 10^4 steps, winding constant");
}

PropertyOutcome energy_conserved() {
  Gen gen(602);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    fluxon::JunctionParams p;
    auto s = fluxon::init_kink(p, gen.uniform(0, 40), gen.uniform(-0.8, 0.8));
    const double e0 = fluxon::energy(s, p);
    for (int b = 0; b < 100; ++b) {
      s = fluxon::step_pde(std::move(s), p, 1000);
      worst = std::max(worst, std::abs(fluxon::energy(s, p) - e0) / e0);
    }
  }
  c.expect(worst < 1e-4, "energy drift " + fmt(worst));
  return c.done("2 runs of 1000 time units, worst drift " + fmt(worst));
}

PropertyOutcome steady_velocity() {
  Gen gen(603);
  Check c;
  std::ostringstream seen;
  std::vector<std::pair<double, double>> cases = {{0.1, 0.05}, {0.02, 0.3}};
  for (int i = 0; i < 3; ++i) cases.emplace_back(gen.uniform(0.02, 0.1), gen.uniform(0.05, 0.3));
  for (const auto& [alpha, gamma] : cases) {
    fluxon::JunctionParams p;
    p.alpha = alpha;
    p.gamma = gamma;
    const auto st = fluxon::run_to_steady_state(fluxon::init_kink(p, 20, 0), p);
    const double target = fluxon::power_balance_velocity(alpha, gamma).u;
    const double err = rel(std::abs(st.velocity), target);
    c.expect(st.converged, "no steady state at (" + fmt(alpha) + ", " + fmt(gamma) + ")");
    c.expect(err < 0.05, "u = " + fmt(std::abs(st.velocity)) + " vs " + fmt(target) + " at (" + fmt(alpha) + ", " + fmt(gamma) + ")");
    seen << (seen.tellp() ? "; " : "") << "(" << fmt(alpha) << ", " << fmt(gamma) << ") err " << fmt(err);
  }
  return c.done(seen.str());
}

PropertyOutcome zfs_linearity() {
  Gen gen(604);
  Check c;
  fluxon::JunctionParams p;
  p.alpha = 0.05;
  const double grid[] = {gen.uniform(0.1, 0.3)};
  std::vector<double> v;
  for (int n = 1; n <= 3; ++n) {
    std::vector<double> centres;
    for (int k = 0; k < n; ++k) centres.push_back(p.length * (k + 0.5) / n);
    const auto iv = fluxon::sweep_iv(p, grid, fluxon::init_kinks(p, centres, 0));
    c.expect(iv[0].converged && iv[0].fluxon_count == n, "sweep point not converged for n = " + std::to_string(n));
    v.push_back(iv[0].mean_voltage);
  }
  for (int n = 2; n <= 3; ++n)
    c.expect(rel(v[n - 1] / v[0], n) < 0.02, "V" + std::to_string(n) + "/V1 = " + fmt(v[n - 1] / v[0]));
  return c.done("gamma " + fmt(grid[0]) + ": V2/V1 = " + fmt(v[1] / v[0]) + ", V3/V1 = " + fmt(v[2] / v[0]));
}

PropertyOutcome lorentz_contraction() {
  Check c;
  std::vector<double> r;
  for (double u : {0.0, 0.4, 0.8}) {
    fluxon::JunctionParams p;
    auto s = fluxon::step_pde(fluxon::init_kink(p, 20, u), p, 500);
    r.push_back(fluxon::kink_width(s, p) / std::sqrt(1 - u * u));
  }
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  c.expect(*hi / *lo - 1.0 < 0.02, "width / sqrt(1 - u^2) varies by " + fmt(*hi / *lo - 1.0));
  return c.done("width / sqrt(1 - u^2): " + fmt(r[0]) + ", " + fmt(r[1]) + ", " + fmt(r[2]));
}

// ---- cli

PropertyOutcome deterministic_outputs() {
  Check c;
  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path root = fs::temp_directory_path() / ("rabiflux-det-" + std::to_string(rd()));
  std::ostringstream log;
  auto run_in = [&](Command cmd, const std::string& text, const fs::path& dir) {
    auto cfg = parse_config(text, cmd);
    cfg.output_dir = dir;
    return run(cfg, log);
  };
  const std::pair<Command, std::string> jobs[] = {
      {Command::kSynthEsr, "samples = 3001\nnoise = 0.01\nseed = 7\nmodulation_amplitude = 0.002\n"},
      {Command::kSimulateJcm, "nbar = 20\nt_end = 10\n"},
      {Command::kSimulateFluxon, "t_end = 5\nsnapshots = 10\n"},
  };
  std::size_t files = 0;
  for (const auto& [cmd, text] : jobs) {
    const fs::path a = root / "a" / to_string(cmd), b = root / "b" / to_string(cmd);
    c.expect(run_in(cmd, text, a) == kExitOk && run_in(cmd, text, b) == kExitOk, "run failed: " + log.str());
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      c.expect(read_text(e.path()) == read_text(b / e.path().filename()),
               e.path().filename().string() + " differs between runs");
    }
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  c.expect(files >= 4, "too few CSV files compared");
  return c.done(std::to_string(files) + " CSV files byte-identical across runs");
}

PropertyOutcome reproduce_rows() {
  Check c;
  std::ostringstream log;
  auto cfg = parse_config("criteria = 3\n", Command::kReproduce);
  const auto dir = std::filesystem::temp_directory_path() / ("rabiflux-rep-" + std::to_string(std::random_device{}()));
  cfg.output_dir = dir;
  c.expect(run(cfg, log) == kExitOk, "reproduce failed: " + log.str());
  const std::string table = read_text(dir / "acceptance.txt");
  c.expect(table.find("PASS") != std::string::npos, "no PASS row in the table");
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return c.done("reproduce emits the acceptance table");
}

}  // namespace

const std::vector<Property>& property_suite() {
  static const std::vector<Property> suite = {
      {"field-quantization", "mode spacing linear, antisymmetric in dL", mode_spacing_linear},
      {"field-quantization", "scattering rate delta limit", scattering_delta_limit},
      {"field-quantization", "quasimomentum invariant under reciprocal shift", quasimomentum_reciprocal_shift},
      {"field-quantization", "pairing kernel even", pairing_kernel_even},
      {"jcm-dynamics", "inversion bounded, starts at -1", inversion_bounds},
      {"jcm-dynamics", "Fock truncation insensitive", truncation_insensitive},
      {"jcm-dynamics", "short-time Gaussian collapse", cummings_short_time},
      {"jcm-dynamics", "revival center", revival_center},
      {"rabi-wave-chain", "norm conservation", chain_norm},
      {"rabi-wave-chain", "analytic and numeric packets agree", chain_analytic_agreement},
      {"rabi-wave-chain", "subpacket count", subpacket_count},
      {"rabi-wave-chain", "zero hopping freezes a family", frozen_family},
      {"rabi-wave-chain", "time lattice equals relabeled space chain", time_lattice_equivalence},
      {"esr-signal-synth", "Dyson A/B monotone from 1 to 8", dyson_monotone},
      {"esr-signal-synth", "modulation detection linear", modulation_linear},
      {"esr-signal-synth", "packet branches have definite parity", packet_parity},
      {"esr-signal-synth", "down sweep is the translated up sweep", hysteresis_translation},
      {"spectro-analysis", "peak detection translation equivariant", peaks_translation},
      {"spectro-analysis", "splitting telescoping identity", telescoping},
      {"spectro-analysis", "asymmetry scale invariant", asymmetry_scaling},
      {"spectro-analysis", "synthesis round trip", round_trip},
      {"spectro-analysis", "g factor inverse identity", g_factor_inverse},
      {"fluxon-sim", "winding conserved", winding_conserved},
      {"fluxon-sim", "conservative energy drift", energy_conserved},
      {"fluxon-sim", "steady velocity matches power balance", steady_velocity},
      {"fluxon-sim", "zero-field step linearity", zfs_linearity},
      {"fluxon-sim", "Lorentz contraction", lorentz_contraction},
      {"cli-harness", "byte-identical outputs", deterministic_outputs},
      {"cli-harness", "reproduce emits the table", reproduce_rows},
  };
  return suite;
}

}  // namespace rabiflux::harness
