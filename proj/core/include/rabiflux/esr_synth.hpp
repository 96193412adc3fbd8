#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rabiflux/spectrum.hpp"

namespace rabiflux::esr {

struct SweepConfig {
  double field_start = 0.0;  // gauss
  double field_end = 1.0;    // gauss
  double sweep_rate = 1.0;   // gauss / s
  SweepDirection direction = SweepDirection::kUp;
  double modulation_freq = 1e5;       // Hz
  double modulation_amplitude = 0.0;  // gauss, H_m
  double time_constant = 0.0;         // s
  std::size_t samples = 4001;

  void validate() const;
  // Field at t = 0: field_start for an up sweep, field_end for a down sweep.
  double origin() const;
  // Sample fields in acquisition order.
  std::vector<double> field_grid() const;
};

struct OscillationPacketSpec {
  double coupling_g = 1.0;  // rad/s
  double nbar = 0.0;
  double center_field = 0.0;  // gauss
  double g_factor = 2.00278;
  double hysteresis_offset = 0.0;  // gauss, applied on down sweeps
  double amplitude = 1.0;
  double chirp = 0.0;  // x -> x + chirp x^2
};

struct DysonLineSpec {
  double center = 0.0;
  double width_pp = 0.01;
  double mixing_angle = 0.0;  // psi
  double amplitude = 1.0;
  double hysteresis_offset = 0.0;
};

// d/dx [exp(-x^2/2) sin(2 sqrt(nbar) x)]
std::vector<double> packet_waveform(const OscillationPacketSpec& spec, std::span<const double> x);

// Product-rule parts: envelope' * carrier and envelope * carrier'.
struct PacketTerms {
  std::vector<double> envelope_branch;
  std::vector<double> harmonic_branch;
};
PacketTerms packet_waveform_terms(const OscillationPacketSpec& spec, std::span<const double> x);

// Packet argument x = g (H - H_c) / sweep_rate, H_c shifted by -hysteresis on a down sweep.
double packet_argument(const OscillationPacketSpec& spec, const SweepConfig& sweep, double field);

// Seconds since the start of the sweep.
double field_time_map(const SweepConfig& sweep, double field);

// Lock-in model over a trace given in acquisition order.
// H_m > 0: [S(H + H_m/2) - S(H - H_m/2)] / H_m, then a first-order low-pass (tau).
// H_m = 0: unity-peak band-pass at the modulation frequency, then the low-pass.
std::vector<double> modulation_detect(std::span<const double> field, std::span<const double> raw,
                                      const SweepConfig& sweep);

// First-order low-pass in acquisition order.
std::vector<double> low_pass(std::span<const double> field, std::span<const double> y,
                             const SweepConfig& sweep);

// Lorentzian shapes in reduced units x = (H - H0) / Gamma.
double lorentz_absorption(double x);
double lorentz_dispersion(double x);
double lorentz_absorption_derivative(double x);
double lorentz_dispersion_derivative(double x);

// Half width Gamma of a Lorentzian whose absorption derivative has this peak-to-peak width.
double lorentz_gamma_from_pp(double width_pp);

// amplitude * [cos(psi) A'(x) + sin(psi) D'(x)]
std::vector<double> dyson_line(const DysonLineSpec& spec, std::span<const double> field);
// Underlying line (integral of dyson_line over H).
double dyson_line_absorption(const DysonLineSpec& spec, double field, double hysteresis_shift = 0.0);

// amplitude * [cos(chi) D'(x) + sin(chi) A(x)]: reaches any A/B >= 8.
std::vector<double> sharpened_dyson_line(const DysonLineSpec& spec, std::span<const double> field);

struct ComposeInput {
  std::vector<OscillationPacketSpec> packets;
  std::vector<DysonLineSpec> lines;
  SweepConfig sweep;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct ComposeResult {
  Spectrum spectrum;
  std::vector<std::string> warnings;
};

ComposeResult compose_spectrum(const ComposeInput& input);

}  // namespace rabiflux::esr
