#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rabiflux::jcm {

struct CoherentFieldState {
  double nbar = 0.0;
  double phase = 0.0;
  int n_min = 0;
  int n_max = 0;

  // Window [max(0, floor(nbar - 8 sqrt(nbar))), ceil(nbar + 8 sqrt(nbar)) + 10].
  static CoherentFieldState coherent(double nbar, double phase = 0.0);
  void validate() const;
};

struct QubitInit {
  std::complex<double> c1{1.0, 0.0};  // ground
  std::complex<double> c2{0.0, 0.0};  // excited

  static QubitInit ground() { return {}; }
  static QubitInit excited() { return {{0.0, 0.0}, {1.0, 0.0}}; }
  void validate() const;
};

struct CouplingParams {
  double g = 1.0;
  double detuning = 0.0;
  void validate() const;
};

// Lower limit of the Fock sum. kOne drops the vacuum term, as the sums are printed.
enum class FockSumStart { kZero, kOne };

double photon_distribution(double nbar, int n);

// Poisson mass inside the window.
double window_mass(const CoherentFieldState& field, FockSumStart start = FockSumStart::kZero);

// <sigma_z>(t) for a ground-state qubit:
// -sum P(n) [D^2 + 4 g^2 n cos(W_n t)] / W_n^2 with W_n = sqrt(D^2 + 4 g^2 n).
// At D = 0 this is -sum P(n) cos(2 g sqrt(n) t).
std::vector<double> inversion_trace(const CoherentFieldState& field, const CouplingParams& coupling,
                                    std::span<const double> t,
                                    FockSumStart start = FockSumStart::kZero);

// <sigma_z>(t) = 1 - 2 P_ground for an arbitrary qubit state.
std::vector<double> inversion_trace(const CoherentFieldState& field, const QubitInit& qubit,
                                    const CouplingParams& coupling, std::span<const double> t,
                                    FockSumStart start = FockSumStart::kZero);

std::vector<double> ground_state_probability(const CoherentFieldState& field, const QubitInit& qubit,
                                             const CouplingParams& coupling,
                                             std::span<const double> t,
                                             FockSumStart start = FockSumStart::kZero);

double collapse_envelope(double g, double t);
double collapse_time(double g);
double revival_time(double g, double nbar, double detuning = 0.0);
double relaxation_time_from_linewidth(double delta_nu);

// Envelope of an oscillating trace: |y - mean| at local extrema, linearly interpolated.
std::vector<double> extrema_envelope(std::span<const double> t, std::span<const double> y);

// argmax of the extrema envelope of the inversion on [0.5 t_r, 1.5 t_r].
double first_revival_center(const CoherentFieldState& field, const CouplingParams& coupling,
                            double dt = 0.005);

}  // namespace rabiflux::jcm
