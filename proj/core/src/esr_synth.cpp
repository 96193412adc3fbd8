#include "rabiflux/esr_synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "format_util.hpp"
#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"

namespace rabiflux::esr {

void SweepConfig::validate() const {
  if (!(sweep_rate > 0.0)) throw domain_error("sweep rate must be > 0");
  if (!(time_constant >= 0.0)) throw domain_error("time constant must be >= 0");
  if (!(modulation_amplitude >= 0.0)) throw domain_error("modulation amplitude must be >= 0");
  if (!(modulation_freq > 0.0)) throw domain_error("modulation frequency must be > 0");
  if (!(field_end > field_start)) throw domain_error("field_end must exceed field_start");
  if (samples < 2) throw domain_error("sweep needs at least 2 samples");
}

double SweepConfig::origin() const {
  return direction == SweepDirection::kUp ? field_start : field_end;
}

std::vector<double> SweepConfig::field_grid() const {
  validate();
  std::vector<double> h(samples);
  const double step = (field_end - field_start) / static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) h[i] = field_start + step * static_cast<double>(i);
  h.back() = field_end;
  if (direction == SweepDirection::kDown) std::reverse(h.begin(), h.end());
  return h;
}

std::vector<double> packet_waveform(const OscillationPacketSpec& spec, std::span<const double> x) {
  if (!(spec.nbar >= 0.0)) throw domain_error("nbar must be >= 0");
  const double w = 2.0 * std::sqrt(spec.nbar);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::exp(-0.5 * x[i] * x[i]);
    y[i] = e * (w * std::cos(w * x[i]) - x[i] * std::sin(w * x[i]));
  }
  return y;
}

PacketTerms packet_waveform_terms(const OscillationPacketSpec& spec, std::span<const double> x) {
  if (!(spec.nbar >= 0.0)) throw domain_error("nbar must be >= 0");
  const double w = 2.0 * std::sqrt(spec.nbar);
  PacketTerms t;
  t.envelope_branch.resize(x.size());
  t.harmonic_branch.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::exp(-0.5 * x[i] * x[i]);
    t.envelope_branch[i] = -x[i] * e * std::sin(w * x[i]);
    t.harmonic_branch[i] = e * w * std::cos(w * x[i]);
  }
  return t;
}

double packet_argument(const OscillationPacketSpec& spec, const SweepConfig& sweep, double field) {
  double hc = spec.center_field;
  if (sweep.direction == SweepDirection::kDown) hc -= spec.hysteresis_offset;
  const double x = spec.coupling_g * (field - hc) / sweep.sweep_rate;
  return x + spec.chirp * x * x;
}

double field_time_map(const SweepConfig& sweep, double field) {
  sweep.validate();
  const double tol = 1e-12 * std::max(1.0, std::abs(sweep.field_end));
  if (!(field >= sweep.field_start - tol && field <= sweep.field_end + tol))
    throw domain_error("field outside the sweep range");
  return std::abs(field - sweep.origin()) / sweep.sweep_rate;
}

namespace {

void check_trace(std::span<const double> field, std::span<const double> y) {
  if (field.size() != y.size()) throw domain_error("field and signal lengths differ");
  if (field.size() < 2) throw domain_error("trace needs at least 2 samples");
  const bool up = field[1] > field[0];
  for (std::size_t i = 1; i < field.size(); ++i) {
    const double d = field[i] - field[i - 1];
    if (up ? !(d > 0.0) : !(d < 0.0)) throw domain_error("field axis must be strictly monotone");
  }
}

// Cubic Hermite interpolant with centered-difference slopes on an ascending grid.
class Hermite {
 public:
  Hermite(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    m_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
      m_[i] = (y_[hi] - y_[lo]) / (x_[hi] - x_[lo]);
    }
  }
  double operator()(double v) const {
    if (v <= x_.front()) return y_.front();
    if (v >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (v - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
  }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace

std::vector<double> low_pass(std::span<const double> field, std::span<const double> y,
                             const SweepConfig& sweep) {
  check_trace(field, y);
  std::vector<double> out(y.begin(), y.end());
  if (sweep.time_constant <= 0.0) return out;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double dt = std::abs(field[i] - field[i - 1]) / sweep.sweep_rate;
    const double k = -std::expm1(-dt / sweep.time_constant);
    out[i] = out[i - 1] + k * (y[i] - out[i - 1]);
  }
  return out;
}

std::vector<double> modulation_detect(std::span<const double> field, std::span<const double> raw,
                                      const SweepConfig& sweep) {
  check_trace(field, raw);
  if (!(sweep.sweep_rate > 0.0)) throw domain_error("sweep rate must be > 0");
  const std::size_t n = raw.size();
  std::vector<double> out(n);
  const double hm = sweep.modulation_amplitude;
  if (hm > 0.0) {
    std::vector<double> xs(field.begin(), field.end()), ys(raw.begin(), raw.end());
    if (xs.front() > xs.back()) {
      std::reverse(xs.begin(), xs.end());
      std::reverse(ys.begin(), ys.end());
    }
    const Hermite s(std::move(xs), std::move(ys));
    for (std::size_t i = 0; i < n; ++i) out[i] = (s(field[i] + 0.5 * hm) - s(field[i] - 0.5 * hm)) / hm;
  } else {
    const double mean_step = std::abs(field.back() - field.front()) / static_cast<double>(n - 1);
    const double fs = sweep.sweep_rate / mean_step;
    if (fs < 10.0 * sweep.modulation_freq)
      throw sampling_error("signal sampled below 10x the modulation frequency");
    // Band-pass biquad, 0 dB peak gain at the modulation frequency.
    const double w0 = 2.0 * kPi * sweep.modulation_freq / fs;
    const double q = 2.0;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    const double b0 = alpha / a0, b2 = -alpha / a0;
    const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
    // Start from the DC steady state of the first sample.
    double x1 = raw[0], x2 = raw[0], y1 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = b0 * raw[i] + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = raw[i];
      y2 = y1;
      y1 = y;
      out[i] = y;
    }
  }
  return low_pass(field, out, sweep);
}

double lorentz_absorption(double x) { return 1.0 / (1.0 + x * x); }
double lorentz_dispersion(double x) { return x / (1.0 + x * x); }

double lorentz_absorption_derivative(double x) {
  const double d = 1.0 + x * x;
  return -2.0 * x / (d * d);
}

double lorentz_dispersion_derivative(double x) {
  const double d = 1.0 + x * x;
  return (1.0 - x * x) / (d * d);
}

double lorentz_gamma_from_pp(double width_pp) {
  if (!(width_pp > 0.0)) throw domain_error("peak-to-peak width must be > 0");
  return 0.5 * std::sqrt(3.0) * width_pp;
}

std::vector<double> dyson_line(const DysonLineSpec& spec, std::span<const double> field) {
  const double gamma = lorentz_gamma_from_pp(spec.width_pp);
  const double c = std::cos(spec.mixing_angle), s = std::sin(spec.mixing_angle);
  std::vector<double> y(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double x = (field[i] - spec.center) / gamma;
    y[i] = spec.amplitude * (c * lorentz_absorption_derivative(x) + s * lorentz_dispersion_derivative(x));
  }
  return y;
}

double dyson_line_absorption(const DysonLineSpec& spec, double field, double hysteresis_shift) {
  const double gamma = lorentz_gamma_from_pp(spec.width_pp);
  const double x = (field - spec.center + hysteresis_shift) / gamma;
  return spec.amplitude * gamma *
         (std::cos(spec.mixing_angle) * lorentz_absorption(x) +
          std::sin(spec.mixing_angle) * lorentz_dispersion(x));
}

std::vector<double> sharpened_dyson_line(const DysonLineSpec& spec, std::span<const double> field) {
  const double gamma = lorentz_gamma_from_pp(spec.width_pp);
  const double c = std::cos(spec.mixing_angle), s = std::sin(spec.mixing_angle);
  std::vector<double> y(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double x = (field[i] - spec.center) / gamma;
    y[i] = spec.amplitude * (c * lorentz_dispersion_derivative(x) + s * lorentz_absorption(x));
  }
  return y;
}

ComposeResult compose_spectrum(const ComposeInput& input) {
  const SweepConfig& sw = input.sweep;
  sw.validate();
  if (!(input.noise_amplitude >= 0.0)) throw domain_error("noise amplitude must be >= 0");
  ComposeResult res;
  const bool down = sw.direction == SweepDirection::kDown;
  auto in_window = [&](double c) { return c >= sw.field_start && c <= sw.field_end; };
  for (const auto& p : input.packets) {
    if (!(p.coupling_g > 0.0)) throw domain_error("packet coupling must be > 0");
    if (!(p.nbar >= 0.0)) throw domain_error("packet nbar must be >= 0");
    const double c = p.center_field - (down ? p.hysteresis_offset : 0.0);
    if (!in_window(c)) res.warnings.push_back("packet centered at " + util::fmt9(c) + " G lies outside the sweep window; clipped");
  }
  for (const auto& l : input.lines) {
    const double c = l.center - (down ? l.hysteresis_offset : 0.0);
    if (!in_window(c)) res.warnings.push_back("line centered at " + util::fmt9(c) + " G lies outside the sweep window; clipped");
  }

  Spectrum& sp = res.spectrum;
  sp.field = sw.field_grid();
  sp.direction = sw.direction;
  sp.amplitude.assign(sp.field.size(), 0.0);
  const double hm = sw.modulation_amplitude;

  for (const auto& p : input.packets) {
    if (p.nbar == 0.0) continue;
    const double norm = p.amplitude / (2.0 * std::sqrt(p.nbar));
    std::vector<double> x(sp.field.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = packet_argument(p, sw, sp.field[i]);
    const auto y = packet_waveform(p, x);
    for (std::size_t i = 0; i < x.size(); ++i) sp.amplitude[i] += norm * y[i];
  }
  for (const auto& l : input.lines) {
    const double shift = down ? l.hysteresis_offset : 0.0;
    if (hm > 0.0) {
      for (std::size_t i = 0; i < sp.field.size(); ++i) {
        const double h = sp.field[i];
        sp.amplitude[i] += (dyson_line_absorption(l, h + 0.5 * hm, shift) -
                            dyson_line_absorption(l, h - 0.5 * hm, shift)) / hm;
      }
    } else {
      DysonLineSpec moved = l;
      moved.center -= shift;
      const auto y = dyson_line(moved, sp.field);
      for (std::size_t i = 0; i < y.size(); ++i) sp.amplitude[i] += y[i];
    }
  }
  sp.amplitude = low_pass(sp.field, sp.amplitude, sw);
  if (input.noise_amplitude > 0.0) {
    std::mt19937_64 rng(input.seed);
    std::normal_distribution<double> nd(0.0, input.noise_amplitude);
    for (auto& v : sp.amplitude) v += nd(rng);
  }
  sp.metadata = {{"direction", to_string(sw.direction)},
                 {"sweep_rate", util::fmt9(sw.sweep_rate)},
                 {"H_m", util::fmt9(sw.modulation_amplitude)},
                 {"tau", util::fmt9(sw.time_constant)},
                 {"modulation_freq", util::fmt9(sw.modulation_freq)}};
  return res;
}

}  // namespace rabiflux::esr
