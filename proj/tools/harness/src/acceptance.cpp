#include "rabiflux/harness/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "rabiflux/chain.hpp"
#include "rabiflux/constants.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/fluxon.hpp"
#include "rabiflux/harness/io.hpp"
#include "rabiflux/jcm.hpp"
#include "rabiflux/spectro_analysis.hpp"

namespace rabiflux::harness {
namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok) { pass = pass && ok; }
  template <class T>
  Verdict& operator<<(const T& v) {
    detail << v;
    return *this;
  }
};

using Clock = std::chrono::steady_clock;

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  void (*body)(Verdict&);
};

std::vector<double> grid(double end, double dt) {
  std::vector<double> t;
  for (int i = 0; i * dt <= end + 1e-12; ++i) t.push_back(i * dt);
  return t;
}

const char* mark(bool ok) { return ok ? "ok" : "FAIL"; }

void jcm_collapse(Verdict& v) {
  const auto t = grid(3.0, 0.001);
  bool first = true;
  for (double nbar : {50.0, 30.0, 100.0}) {
    const auto w = jcm::inversion_trace(jcm::CoherentFieldState::coherent(nbar), {1.0, 0.0}, t);
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double model = -std::exp(-0.5 * t[i] * t[i]) * std::cos(2.0 * std::sqrt(nbar) * t[i]);
      ss += (w[i] - model) * (w[i] - model);
    }
    const double rms = std::sqrt(ss / static_cast<double>(t.size()));
    v.require(rms < 0.05);
    v << (first ? "" : ", ") << "rms(nbar=" << fmt(nbar) << ")=" << fmt(rms) << " " << mark(rms < 0.05);
    first = false;
  }
  v << " [limit 0.05]";
}

void jcm_revival(Verdict& v) {
  const double tr = jcm::revival_time(1.0, 50.0);
  const double c = jcm::first_revival_center(jcm::CoherentFieldState::coherent(50.0), {1.0, 0.0});
  const double err = std::abs(c - tr) / tr;
  v.require(err < 0.05);
  v << "center " << fmt(c) << " vs t_r " << fmt(tr) << ", offset " << fmt(100 * err) << "% [limit 5%]";
}

void reference_arithmetic(Verdict& v) {
  const double omega = analysis::extract_rabi_frequency(0.06285, 2.00278, 5.225);
  const double t2 = analysis::relaxation_time(0.17619e6) * 1e6;
  const double ts = analysis::lifetime_from_inflection(0.274, 2.00278) * 1e6;
  const double ratio = 4.6 / 0.3;
  const bool a = std::abs(omega - 0.9206) <= 1e-4, b = std::abs(t2 - 1.25) <= 0.01,
             c = std::abs(ts - 1.30) <= 0.01, d = std::abs(ratio - 15.3) < 0.05;
  v.require(a && b && c && d);
  v << "Omega " << fmt(omega) << " MHz " << mark(a) << ", T2 " << fmt(t2) << " us " << mark(b) << ", Ts "
    << fmt(ts) << " us " << mark(c) << ", spacing ratio " << fmt(ratio) << " " << mark(d);
}

chain::ChainParams acceptance_ring() {
  chain::ChainParams p;
  p.site_count = 64;
  p.k = 2 * kPi / 64;
  p.xi1 = -1.0;
  p.xi2 = 1.0;
  p.g = 10.0;
  p.omega0 = 1.0;
  p.omega = p.omega0 - (chain::theta1(p, -p.k / 2) - chain::theta2(p, -p.k / 2));
  return p;
}

void chain_equivalence(Verdict& v) {
  const auto p = acceptance_ring();
  const chain::GaussianBeam beams[] = {{1.0, 20.0, 8.0, chain::Level::kExcited},
                                       {0.7, 44.0, 8.0, chain::Level::kGround}};
  const double w[] = {1.0};
  const auto f = chain::init_gaussian_beam(p, beams, w);
  const auto sp = chain::subpacket_params(p, 0);
  const double vmax = std::max({std::abs(sp.family1.v_plus), std::abs(sp.family1.v_minus),
                                std::abs(sp.family2.v_plus), std::abs(sp.family2.v_minus)});
  const double span = 32.0 / vmax;  // fastest subpacket crosses half the ring
  double worst = 0.0;
  const auto tr = chain::integrate(f, p, span, 4e-4, 500, [&](const chain::AmplitudeField& cur) {
    const auto a = chain::analytic_packet(f, p, cur.coordinate);
    for (int s = 0; s < p.site_count; ++s) {
      worst = std::max(worst, std::abs(std::abs(cur.A(s, 0)) - std::abs(a.A(s, 0))));
      worst = std::max(worst, std::abs(std::abs(cur.B(s, 0)) - std::abs(a.B(s, 0))));
    }
  });
  v.require(worst < 1e-2 && tr.norm_drift < 1e-9);
  v << "sup-norm " << fmt(worst) << " [limit 0.01], norm drift " << fmt(tr.norm_drift) << " [limit 1e-9] over t="
    << fmt(span) << " (" << tr.steps << " steps)";
}

void synchronism(Verdict& v) {
  auto p = acceptance_ring();
  p.n_min = 0;
  p.n_max = 14;
  p.omega = p.omega0 - chain::check_synchronism(p, 0.0).suggested_detuning2;
  const auto weights = chain::coherent_weights(4.0, p.n_min, p.n_max);
  const chain::GaussianBeam beams[] = {{1.0, 32.0, 8.0, chain::Level::kExcited}};
  const auto f = chain::init_gaussian_beam(p, beams, weights);
  const auto rep = chain::check_synchronism(p, 1e-9);
  double worst = 0.0;
  const auto tr = chain::integrate(f, p, 4.0, 2e-4, 25, [&](const chain::AmplitudeField& cur) {
    const double num = chain::integral_inversion(cur);
    const double closed = chain::integral_inversion_closed(f, p, cur.coordinate);
    worst = std::max(worst, std::abs(num - closed));
  });
  v.require(rep.family2_synchronous && worst < 1e-3);
  v << "detuning_eff(-k/2)=" << fmt(rep.detuning_eff2) << ", sup-norm " << fmt(worst) << " [limit 1e-3] over "
    << tr.steps << " steps, 15 photon columns";
}

void esr_round_trip(Verdict& v) {
  const double nbar = std::pow(5.225 * kPi / std::sqrt(2 * std::log(2.0)), 2);
  const double spacing = 0.012, rate = 2.0 / 480, nu = 9314.2;
  const double hc = nu / (kMHzPerGauss * 2.00278);
  esr::ComposeInput in;
  in.sweep.field_start = hc - 0.5;
  in.sweep.field_end = hc + 1.0;
  in.sweep.sweep_rate = rate;
  in.sweep.samples = 15001;
  for (auto [off, amp] : {std::pair{0.0, 1.0}, {0.40, 0.4}, {0.70, 0.25}}) {
    esr::OscillationPacketSpec pk;
    pk.coupling_g = kPi * rate / (std::sqrt(nbar) * spacing);
    pk.nbar = nbar;
    pk.center_field = hc + off;
    pk.amplitude = amp;
    in.packets.push_back(pk);
  }
  const auto spec = esr::compose_spectrum(in).spectrum;
  analysis::PipelineOptions opt;
  opt.prominence_fraction = 0.03;
  opt.microwave_freq_mhz = nu;
  const auto rep = analysis::analyze_spectrum(spec, opt);
  const bool n_ok = rep.main_group.size() == 23;
  const bool s_ok = std::abs(rep.splitting.mean / 0.012 - 1) <= 0.02;
  const bool o_ok = std::abs(rep.rabi_frequency_mhz / 0.9206 - 1) <= 0.02;
  const bool g_ok = std::abs(rep.g_factor - 2.00278) <= 1e-4;
  v.require(n_ok && s_ok && o_ok && g_ok);
  v << rep.main_group.size() << " main-group peaks " << mark(n_ok) << ", splitting " << fmt(rep.splitting.mean)
    << " G " << mark(s_ok) << ", Omega " << fmt(rep.rabi_frequency_mhz) << " MHz " << mark(o_ok) << ", g "
    << fmt(rep.g_factor) << " " << mark(g_ok);
}

void dyson(Verdict& v) {
  using analysis::DysonFamily;
  const double r0 = analysis::dyson_ratio(DysonFamily::kStandard, 0.0);
  const double r1 = analysis::dyson_ratio(DysonFamily::kStandard, kPi / 4);
  const double r2 = analysis::dyson_ratio(DysonFamily::kStandard, kPi / 2);
  const bool a = std::abs(r0 - 1.0) <= 0.01, b = std::abs(r1 / 2.55 - 1) <= 0.03, c = std::abs(r2 / 8 - 1) <= 0.03;
  const auto std_cal = analysis::calibrate_dyson(23.4, DysonFamily::kStandard);
  const auto sharp = analysis::calibrate_dyson(23.4, DysonFamily::kSharpened);
  const bool d = (sharp.reached && std::abs(sharp.ratio - 23.4) <= 0.5) || (!sharp.reached && sharp.ceiling > 0);
  v.require(a && b && c && d);
  v << "A/B " << fmt(r0) << " " << mark(a) << ", " << fmt(r1) << " " << mark(b) << ", " << fmt(r2) << " " << mark(c)
    << "; standard family ceiling " << fmt(std_cal.ceiling) << (std_cal.reached ? " (reached)" : " (23.4 unreachable)");
  if (sharp.reached)
    v << "; sharpened family chi " << fmt(sharp.angle) << " rad gives " << fmt(sharp.ratio) << " " << mark(d);
  else
    v << "; sharpened family ceiling " << fmt(sharp.ceiling);
}

void fluxon_balance(Verdict& v) {
  fluxon::JunctionParams p;
  p.alpha = 0.05;
  p.gamma = 0.2;
  const auto st = fluxon::run_to_steady_state(fluxon::init_kink(p, 20.0, 0.0), p);
  std::vector<fluxon::Snapshot> tr;
  auto s = st.state;
  for (int k = 0; k < 20; ++k) {
    s = fluxon::step_pde(std::move(s), p, 100);
    tr.push_back(fluxon::snapshot(s, p));
  }
  const double u = std::abs(fluxon::measure_velocity(tr, p.length));
  const double target = fluxon::power_balance_velocity(p.alpha, p.gamma).u;
  const bool a = st.converged && std::abs(u / target - 1) <= 0.05;

  fluxon::JunctionParams q;
  auto k = fluxon::init_kink(q, 20.0, 0.5);
  const double e0 = fluxon::energy(k, q);
  double drift = 0.0;
  for (int b = 0; b < 100; ++b) {
    k = fluxon::step_pde(std::move(k), q, 1000);
    drift = std::max(drift, std::abs(fluxon::energy(k, q) - e0) / e0);
  }
  const bool b = drift < 1e-4;
  v.require(a && b);
  v << "steady u " << fmt(u) << " vs " << fmt(target) << " " << mark(a) << ", conservative energy drift "
    << fmt(drift) << " over 1000 time units " << mark(b);
}

void zfs(Verdict& v) {
  fluxon::JunctionParams p;
  p.alpha = 0.05;
  const std::vector<double> gammas = {0.1, 0.2, 0.3};
  const double one[] = {20.0}, two[] = {10.0, 30.0};
  const auto iv1 = fluxon::sweep_iv(p, gammas, fluxon::init_kinks(p, one, 0.0));
  const auto iv2 = fluxon::sweep_iv(p, gammas, fluxon::init_kinks(p, two, 0.0));
  bool lin = true;
  v << "V2/V1";
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double r = iv2[i].mean_voltage / iv1[i].mean_voltage;
    lin = lin && iv1[i].converged && iv2[i].converged && std::abs(r / 2 - 1) <= 0.02;
    v << (i ? ", " : " ") << fmt(r);
  }
  v << " " << mark(lin);

  // Negative controls on the steady kink and on a free kink, plus an injected ripple.
  p.gamma = 0.2;
  const auto driven = fluxon::run_to_steady_state(fluxon::init_kink(p, 20.0, 0.0), p).state;
  const auto w_driven = fluxon::wake_probe(driven, p);
  fluxon::JunctionParams q;
  const auto free_kink = fluxon::step_pde(fluxon::init_kink(q, 20.0, 0.5), q, 2000);
  const auto w_free = fluxon::wake_probe(free_kink, q);
  auto rippled = fluxon::init_kink(q, 20.0, 0.0);
  const double lambda = 2.0;
  for (std::size_t i = 0; i < rippled.phi.size(); ++i) {
    const double d = 20.0 - static_cast<double>(i) * q.dx();  // distance behind the static kink
    if (d > 8.0 && d < 19.0) rippled.phi[i] += 0.01 * std::sin(2 * kPi * d / lambda);
  }
  rippled.phi_prev.clear();
  const auto w_ripple = fluxon::wake_probe(rippled, q);
  const bool ctrl = !w_driven.detected && !w_free.detected;
  const bool det = w_ripple.detected && std::abs(w_ripple.wavelength - lambda) <= q.dx();
  v.require(lin && ctrl && det);
  v << "; wake driven " << fmt(w_driven.relative_amplitude) << ", free " << fmt(w_free.relative_amplitude)
    << " (no wake) " << mark(ctrl) << "; injected ripple wavelength " << fmt(w_ripple.wavelength) << " vs "
    << fmt(lambda) << " " << mark(det);
}

void steps(Verdict& v) {
  // Linear growth with sudden drops at the reported positions.
  const double at[] = {0.18, 0.32, 0.45, 0.62, 0.86, 0.98};
  std::vector<double> x, y;
  for (int i = 0; i <= 900; ++i) {
    const double h = 0.1 + 0.001 * i;
    double s = 0.8 * h;
    for (double a : at) s -= 0.05 * 0.5 * (1 + std::tanh((h - a) / 0.002));
    x.push_back(h);
    y.push_back(s);
  }
  const auto rep = analysis::detect_steps(x, y);
  bool pos_ok = rep.positions.size() == std::size(at);
  for (std::size_t i = 0; pos_ok && i < rep.positions.size(); ++i) pos_ok = std::abs(rep.positions[i] - at[i]) <= 0.01;
  const bool eq_ok = rep.gap_equidistant.size() == 5 && rep.gap_equidistant[0] && rep.gap_equidistant[1] &&
                     rep.gap_equidistant[2] && !rep.gap_equidistant[3];
  const bool dev_ok = rep.gap_deviation.size() == 5 && std::abs(rep.gap_deviation[3] - 0.10) <= 0.01;
  v.require(pos_ok && eq_ok && dev_ok);
  v << "steps";
  for (double p : rep.positions) v << " " << fmt(p);
  v << " " << mark(pos_ok) << "; first three gaps equidistant " << mark(eq_ok) << "; fourth-gap deviation "
    << (rep.gap_deviation.size() > 3 ? fmt(rep.gap_deviation[3]) : std::string("n/a")) << " " << mark(dev_ok);
}

void property_suites(Verdict& v) {
  int failed = 0;
  for (const auto& p : property_suite()) {
    PropertyOutcome out;
    try {
      out = p.check();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    if (!out.pass) {
      v << (failed ? "; " : "failed: ") << p.module << "/" << p.name << " (" << out.detail << ")";
      ++failed;
    }
  }
  v.require(failed == 0);
  if (failed == 0) v << property_suite().size() << " properties passed";
}

const Criterion kCriteria[] = {
    {1, "JCM collapse", 1.0, jcm_collapse},
    {2, "JCM revival", 5.0, jcm_revival},
    {3, "Reference arithmetic", 1.0, reference_arithmetic},
    {4, "Chain analytic/numeric equivalence", 30.0, chain_equivalence},
    {5, "Synchronism reduction", 10.0, synchronism},
    {6, "Synthesis/analysis round trip", 5.0, esr_round_trip},
    {7, "Dysonian calibration", 2.0, dyson},
    {8, "Fluxon power balance", 60.0, fluxon_balance},
    {9, "ZFS linearity", 120.0, zfs},
    {10, "Step detector", 1.0, steps},
    {11, "Property suites", 300.0, property_suites},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::vector<int>& which, std::ostream* progress) {
  std::vector<CriterionResult> out;
  for (const auto& c : kCriteria) {
    if (!which.empty() && std::find(which.begin(), which.end(), c.id) == which.end()) continue;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v << " threw: " << e.what();
    }
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.limit_seconds = c.limit_seconds;
    r.pass = v.pass && r.seconds < c.limit_seconds;
    r.detail = v.detail.str();
    if (progress) *progress << format_result(r) << std::endl;
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char time[64];
  std::snprintf(time, sizeof time, "%.2f s, limit %g s", r.seconds, r.limit_seconds);
  return std::string(r.pass ? "PASS" : "FAIL") + "  " + std::to_string(r.id) + ". " + r.name + ": " + r.detail +
         " (" + time + ")";
}

}  // namespace rabiflux::harness
