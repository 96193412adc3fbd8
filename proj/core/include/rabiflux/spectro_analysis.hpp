#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rabiflux/spectrum.hpp"

namespace rabiflux::analysis {

struct PeakList {
  std::vector<double> positions;  // ascending
  std::vector<double> amplitudes;
  std::vector<double> widths_pp;  // full width at half prominence
  std::vector<double> prominences;
  std::size_t size() const noexcept { return positions.size(); }
};

// fraction * (max - min) of the trace.
double prominence_threshold(const Spectrum& s, double fraction = 0.05);

PeakList detect_peaks(const Spectrum& s, double min_prominence);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

struct SplittingStats {
  std::vector<double> splittings;
  double mean = 0.0;
  double mean_square_deviation = 0.0;  // RMS deviation from the mean
  LinearFit linear_fit;                // splitting vs index
  std::vector<double> polynomial_fit;  // ascending coefficients
  std::vector<std::pair<std::size_t, std::size_t>> subgroups;  // peak index ranges [begin, end)
};

SplittingStats splitting_stats(const PeakList& peaks, int polynomial_degree = 2);

// Splits a peak list wherever a gap exceeds gap_factor times the median spacing.
std::vector<PeakList> partition_groups(const PeakList& peaks, double gap_factor = 3.0);

struct EnvelopeFit {
  double center = 0.0;
  double sigma = 0.0;         // Gaussian s
  double width_deltaH = 0.0;  // half width at half maximum = n_oscillations * mean_splitting
  double amplitude = 0.0;
  double residual_rms = 0.0;
  double mean_splitting = 0.0;
  double n_oscillations = 0.0;
};

EnvelopeFit fit_envelope(const PeakList& peaks);

double envelope_width_product(double n_oscillations, double mean_splitting);

// MHz: 1.39961 * dH * g * n
double extract_rabi_frequency(double delta_H, double g_factor, double n_oscillations);
double extract_rabi_frequency(const EnvelopeFit& env, double g_factor);

// nu [MHz] / (1.39961 H [G])
double g_factor(double microwave_freq_mhz, double resonance_field);

// max / |min| of a derivative-shaped trace.
double asymmetry_ratio(const Spectrum& s);
double asymmetry_ratio(std::span<const double> amplitude);

struct TanhFit {
  double y0 = 0.0;  // plateau at low x
  double y1 = 0.0;  // plateau at high x
  double inflection = 0.0;
  double width = 0.0;
  double residual_rms = 0.0;
};

// y = y1 + (y0 - y1)/2 (1 - tanh((x - x_i)/w))
TanhFit tanh_inflection_fit(std::span<const double> x, std::span<const double> y);

// 1 / (1.39961e6 Hz/G * g * H_i)
double lifetime_from_inflection(double H_i, double g_factor);

struct StepReport {
  std::vector<double> positions;
  std::vector<double> gaps;
  double reference_gap = 0.0;  // first gap
  double tolerance = 0.0;
  std::vector<double> gap_deviation;  // |gap - reference|
  std::vector<bool> gap_equidistant;
  bool equidistant = false;
};

StepReport detect_steps(std::span<const double> x, std::span<const double> y,
                        double sensitivity = 8.0, double tolerance_fraction = 0.25);

double relaxation_time(double delta_nu);

enum class DysonFamily { kStandard, kSharpened };

// A/B of the chosen mixing family at one angle, from a dense sampled trace.
double dyson_ratio(DysonFamily family, double angle);

struct DysonCalibration {
  DysonFamily family = DysonFamily::kStandard;
  bool reached = false;
  double angle = 0.0;
  double ratio = 0.0;
  double ceiling = 0.0;  // supremum of A/B over the family's angle range
};

DysonCalibration calibrate_dyson(double target_ratio, DysonFamily family);

struct PipelineOptions {
  double prominence_fraction = 0.05;
  double gap_factor = 3.0;
  double microwave_freq_mhz = 0.0;  // 0 skips the g-factor
  double assumed_g_factor = 2.00278;  // used for the Rabi frequency when no frequency is given
};

struct PipelineReport {
  std::size_t total_peaks = 0;
  std::size_t group_count = 0;
  PeakList main_group;
  SplittingStats splitting;
  EnvelopeFit envelope;
  double rabi_frequency_mhz = 0.0;
  double g_factor = 0.0;
  std::vector<std::pair<std::string, std::string>> lines() const;
};

// Peaks -> groups -> main group (largest amplitude) -> splittings, envelope, Rabi frequency, g.
PipelineReport analyze_spectrum(const Spectrum& s, const PipelineOptions& options);

}  // namespace rabiflux::analysis
