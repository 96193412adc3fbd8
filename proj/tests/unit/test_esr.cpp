#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/spectro_analysis.hpp"

using namespace rabiflux;
using namespace rabiflux::esr;
using doctest::Approx;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

SweepConfig two_gauss_sweep() {
  SweepConfig s;
  s.field_start = 3322.0;
  s.field_end = 3324.0;
  s.sweep_rate = 2.0 / 480.0;
  s.samples = 2001;
  return s;
}

// Distance between the extrema of a derivative-shaped trace.
double peak_to_peak(const std::vector<double>& h, const std::vector<double>& y) {
  const auto mx = std::max_element(y.begin(), y.end()) - y.begin();
  const auto mn = std::min_element(y.begin(), y.end()) - y.begin();
  return std::abs(h[static_cast<std::size_t>(mx)] - h[static_cast<std::size_t>(mn)]);
}

}  // namespace

TEST_CASE("packet waveform examples") {
  OscillationPacketSpec spec;
  spec.nbar = 25.0;
  const std::vector<double> zero{0.0};
  CHECK(packet_waveform(spec, zero)[0] == Approx(10.0).epsilon(1e-15));

  OscillationPacketSpec empty;
  empty.nbar = 0.0;
  for (double v : packet_waveform(empty, linspace(-5, 5, 101))) CHECK(v == 0.0);

  // Zero crossings of the carrier derivative are pi / (2 sqrt(nbar)) apart.
  const auto x = linspace(-1.0, 1.0, 200001);
  const auto terms = packet_waveform_terms(spec, x);
  std::vector<double> zc;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = terms.harmonic_branch[i - 1], b = terms.harmonic_branch[i];
    if (a * b < 0.0) zc.push_back(x[i - 1] - a * (x[i] - x[i - 1]) / (b - a));
  }
  REQUIRE(zc.size() >= 3);
  for (std::size_t i = 1; i < zc.size(); ++i) CHECK(zc[i] - zc[i - 1] == Approx(kPi / 10.0).epsilon(1e-6));

  OscillationPacketSpec bad;
  bad.nbar = -1.0;
  CHECK_THROWS_AS(packet_waveform(bad, zero), domain_error);
}

TEST_CASE("packet waveform terms add up to the full derivative") {
  OscillationPacketSpec spec;
  spec.nbar = 7.3;
  const auto x = linspace(-4, 4, 401);
  const auto y = packet_waveform(spec, x);
  const auto t = packet_waveform_terms(spec, x);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(y[i] == Approx(t.envelope_branch[i] + t.harmonic_branch[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("field to time mapping") {
  auto s = two_gauss_sweep();
  CHECK(field_time_map(s, s.field_start) == 0.0);
  CHECK(field_time_map(s, s.field_end) == Approx(480.0).epsilon(1e-12));
  CHECK(field_time_map(s, 3323.0) == Approx(240.0).epsilon(1e-12));
  CHECK_THROWS_AS(field_time_map(s, 3321.0), domain_error);
  s.direction = SweepDirection::kDown;
  CHECK(field_time_map(s, s.field_end) == 0.0);
  CHECK(field_time_map(s, s.field_start) == Approx(480.0).epsilon(1e-12));
  s.sweep_rate = 0.0;
  CHECK_THROWS_AS(field_time_map(s, 3323.0), domain_error);
}

TEST_CASE("sweep grid follows the acquisition order") {
  auto s = two_gauss_sweep();
  auto up = s.field_grid();
  CHECK(up.front() == s.field_start);
  CHECK(up.back() == s.field_end);
  s.direction = SweepDirection::kDown;
  const auto down = s.field_grid();
  std::reverse(up.begin(), up.end());
  CHECK(down == up);
}

TEST_CASE("modulation detection of a constant is zero") {
  auto s = two_gauss_sweep();
  s.samples = 501;
  const auto h = s.field_grid();
  const std::vector<double> c(h.size(), 3.5);
  s.modulation_amplitude = 0.02;
  for (double v : modulation_detect(h, c, s)) CHECK(std::abs(v) < 1e-12);
  // Self-modulation pathway needs a slow sweep to resolve 100 kHz.
  SweepConfig fast;
  fast.field_start = 0.0;
  fast.field_end = 1e-3;
  fast.sweep_rate = 1e3;
  fast.samples = 2001;
  const auto hf = fast.field_grid();
  const std::vector<double> cf(hf.size(), -2.0);
  for (double v : modulation_detect(hf, cf, fast)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("small modulation amplitude approaches the field derivative") {
  DysonLineSpec line;
  line.center = 3323.0;
  line.width_pp = 0.05;
  auto s = two_gauss_sweep();
  s.samples = 20001;
  s.modulation_amplitude = 1e-4;
  const auto h = s.field_grid();
  std::vector<double> absorption(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) absorption[i] = dyson_line_absorption(line, h[i]);
  const auto got = modulation_detect(h, absorption, s);
  const auto want = dyson_line(line, h);
  double sup = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sup = std::max(sup, std::abs(got[i] - want[i]));
    peak = std::max(peak, std::abs(want[i]));
  }
  CHECK(sup / peak < 0.01);
}

TEST_CASE("large modulation amplitude broadens a Gaussian line") {
  const double sigma = 0.02;
  auto s = two_gauss_sweep();
  s.samples = 20001;
  const auto h = s.field_grid();
  std::vector<double> line(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) line[i] = std::exp(-0.5 * std::pow((h[i] - 3323.0) / sigma, 2));
  s.modulation_amplitude = 1e-4;
  const double narrow = peak_to_peak(h, modulation_detect(h, line, s));
  s.modulation_amplitude = 2.0 * (2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma);
  const double broad = peak_to_peak(h, modulation_detect(h, line, s));
  CHECK(narrow == Approx(2.0 * sigma).epsilon(0.01));
  CHECK(broad > 1.5 * narrow);
}

TEST_CASE("self-modulation pathway rejects undersampled traces") {
  const auto s = two_gauss_sweep();
  const auto h = s.field_grid();
  const std::vector<double> y(h.size(), 1.0);
  CHECK_THROWS_AS(modulation_detect(h, y, s), sampling_error);
}

TEST_CASE("modulation detection is linear") {
  auto s = two_gauss_sweep();
  s.samples = 1001;
  s.modulation_amplitude = 0.03;
  s.time_constant = 2.0;
  const auto h = s.field_grid();
  std::vector<double> a(h.size()), b(h.size()), mix(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    a[i] = std::sin(40.0 * h[i]);
    b[i] = std::exp(-std::pow(h[i] - 3323.2, 2) / 0.01);
    mix[i] = 2.0 * a[i] - 0.7 * b[i];
  }
  const auto da = modulation_detect(h, a, s), db = modulation_detect(h, b, s), dm = modulation_detect(h, mix, s);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(dm[i] - (2.0 * da[i] - 0.7 * db[i])) < 1e-10);
}

TEST_CASE("Dyson line asymmetry") {
  DysonLineSpec line;
  line.center = 0.0;
  line.width_pp = 0.01;
  const auto h = linspace(-0.5, 0.5, 100001);
  line.mixing_angle = 0.0;
  CHECK(analysis::asymmetry_ratio(dyson_line(line, h)) == Approx(1.0).epsilon(0.01));
  line.mixing_angle = kPi / 4;
  CHECK(analysis::asymmetry_ratio(dyson_line(line, h)) == Approx(2.55).epsilon(0.03));
  line.mixing_angle = kPi / 2;
  CHECK(analysis::asymmetry_ratio(dyson_line(line, h)) == Approx(8.0).epsilon(0.03));
}

TEST_CASE("Dyson line has the stated peak-to-peak width") {
  DysonLineSpec line;
  line.center = 1.0;
  line.width_pp = 0.04;
  const auto h = linspace(0.5, 1.5, 200001);
  CHECK(peak_to_peak(h, dyson_line(line, h)) == Approx(0.04).epsilon(1e-4));
}

TEST_CASE("compose a single packet") {
  ComposeInput in;
  in.sweep = two_gauss_sweep();
  OscillationPacketSpec p;
  p.coupling_g = 0.05;
  p.nbar = 16.0;
  p.center_field = 3323.1;
  p.amplitude = 2.0;
  in.packets.push_back(p);
  const auto res = compose_spectrum(in);
  CHECK(res.warnings.empty());
  const auto& sp = res.spectrum;
  std::vector<double> x(sp.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = p.coupling_g * (sp.field[i] - p.center_field) / in.sweep.sweep_rate;
  const auto y = packet_waveform(p, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(sp.amplitude[i] == Approx(2.0 / 8.0 * y[i]).epsilon(1e-12).scale(1.0));
  REQUIRE(sp.meta("direction") != nullptr);
  CHECK(*sp.meta("direction") == "up");
}

TEST_CASE("down sweep shifts every component by the hysteresis offset") {
  ComposeInput up;
  up.sweep = two_gauss_sweep();
  OscillationPacketSpec p;
  p.coupling_g = 0.05;
  p.nbar = 9.0;
  p.center_field = 3323.3;
  p.hysteresis_offset = 0.25;
  DysonLineSpec l;
  l.center = 3322.6;
  l.width_pp = 0.02;
  l.hysteresis_offset = 0.25;
  up.packets.push_back(p);
  up.lines.push_back(l);
  ComposeInput down = up;
  down.sweep.direction = SweepDirection::kDown;
  up.packets[0].center_field -= 0.25;
  up.lines[0].center -= 0.25;
  const auto a = compose_spectrum(up).spectrum;
  auto b = compose_spectrum(down).spectrum;
  CHECK(b.direction == SweepDirection::kDown);
  std::reverse(b.field.begin(), b.field.end());
  std::reverse(b.amplitude.begin(), b.amplitude.end());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.field[i] == b.field[i]);
    CHECK(a.amplitude[i] == Approx(b.amplitude[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("compose warns about out-of-window components") {
  ComposeInput in;
  in.sweep = two_gauss_sweep();
  DysonLineSpec l;
  l.center = 3330.0;
  in.lines.push_back(l);
  CHECK(compose_spectrum(in).warnings.size() == 1);
}

TEST_CASE("compose noise is reproducible from the seed") {
  ComposeInput in;
  in.sweep = two_gauss_sweep();
  in.noise_amplitude = 0.01;
  in.seed = 42;
  const auto a = compose_spectrum(in).spectrum.amplitude;
  const auto b = compose_spectrum(in).spectrum.amplitude;
  in.seed = 43;
  const auto c = compose_spectrum(in).spectrum.amplitude;
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("main group and two revival groups give 23 main-group lines") {
  const double nbar = std::pow(5.225 * kPi / std::sqrt(2 * std::log(2.0)), 2);
  const double rate = 2.0 / 480, hc = 3322.8;
  ComposeInput in;
  in.sweep.field_start = hc - 0.5;
  in.sweep.field_end = hc + 1.0;
  in.sweep.sweep_rate = rate;
  in.sweep.samples = 15001;
  for (auto [off, amp] : {std::pair{0.0, 1.0}, {0.40, 0.4}, {0.70, 0.25}}) {
    OscillationPacketSpec pk;
    pk.coupling_g = kPi * rate / (std::sqrt(nbar) * 0.012);
    pk.nbar = nbar;
    pk.center_field = hc + off;
    pk.amplitude = amp;
    in.packets.push_back(pk);
  }
  analysis::PipelineOptions opt;
  opt.prominence_fraction = 0.03;
  const auto rep = analysis::analyze_spectrum(compose_spectrum(in).spectrum, opt);
  CHECK(rep.group_count == 3);
  CHECK(rep.main_group.size() == 23);
  CHECK(rep.splitting.mean == Approx(0.012).epsilon(0.02));
}
