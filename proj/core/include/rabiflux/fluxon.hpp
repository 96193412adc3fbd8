#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rabiflux/constants.hpp"

namespace rabiflux::fluxon {

struct JunctionParams {
  double alpha = 0.0;  // quasiparticle damping
  double beta = 0.0;   // surface damping
  double gamma = 0.0;  // bias current
  double length = 40.0;
  int grid_points = 2000;
  double dt = 0.01;

  double dx() const { return length / grid_points; }
  // Type invariants only; CFL is checked when stepping.
  void validate() const;
};

struct JunctionState {
  std::vector<double> phi;
  std::vector<double> phi_t;
  std::vector<double> phi_prev;  // phi one step back; rebuilt from phi_t when empty
  double time = 0.0;
};

// phi = 4 arctan(exp((x - x0)/sqrt(1 - u^2))) on the ring, phi_t = -u phi_x.
JunctionState init_kink(const JunctionParams& params, double x0, double u);
JunctionState init_kinks(const JunctionParams& params, std::span<const double> centers, double u);

// Sum of wrapped neighbour differences / 2 pi.
int winding_number(const JunctionState& state);

// Leapfrog for phi_xx - phi_tt - sin(phi) = alpha phi_t - beta phi_xxt - gamma, periodic.
JunctionState step_pde(JunctionState state, const JunctionParams& params, std::size_t n_steps);

// sum dx [phi_t^2/2 + phi_x^2/2 + 1 - cos(phi)]
double energy(const JunctionState& state, const JunctionParams& params);

// Positions of the phi = pi (mod 2 pi) crossings, ascending.
std::vector<double> kink_centers(const JunctionState& state, const JunctionParams& params);

// Distance between the pi/2 and 3pi/2 crossings around the first kink, in units of
// the static kink length (so 1 at rest, sqrt(1 - u^2) in motion).
double kink_width(const JunctionState& state, const JunctionParams& params);

struct Snapshot {
  double time = 0.0;
  double center = 0.0;
};

Snapshot snapshot(const JunctionState& state, const JunctionParams& params);

// Slope of the unwrapped kink center against time.
double measure_velocity(std::span<const Snapshot> trajectory, double ring_length);

struct BalanceVelocity {
  double u = 0.0;
  bool ballistic = false;  // alpha = 0 with gamma > 0
};

// 1 / sqrt(1 + (4 alpha / (pi gamma))^2)
BalanceVelocity power_balance_velocity(double alpha, double gamma);

struct DcVoltage {
  double volts = 0.0;
  double normalized = 0.0;  // n u / L
};

DcVoltage dc_voltage(int n_fluxons, double u, double length, double swihart_c,
                     double flux_quantum = kFluxQuantum);

struct SteadyOptions {
  double window = 50.0;      // averaging window in normalized time
  double tolerance = 1e-4;   // velocity change between windows
  double max_time = 3000.0;
};

struct SteadyState {
  JunctionState state;
  double mean_voltage = 0.0;  // time average of the spatial mean of phi_t over the last window
  double velocity = 0.0;      // mean_voltage L / (2 pi n), signed by the kink direction
  bool converged = false;
  double elapsed = 0.0;
};

SteadyState run_to_steady_state(JunctionState state, const JunctionParams& params,
                                const SteadyOptions& options = {});

struct IVPoint {
  double bias_gamma = 0.0;
  double mean_voltage = 0.0;
  int fluxon_count = 0;
  double velocity = 0.0;
  bool converged = false;
};

// Continuation in gamma: each point starts from the previous steady state.
std::vector<IVPoint> sweep_iv(const JunctionParams& params, std::span<const double> gamma_grid,
                              JunctionState initial, const SteadyOptions& options = {});

struct WakeReport {
  double amplitude = 0.0;           // of detrended phi_x in the trailing window
  double relative_amplitude = 0.0;  // amplitude / kink peak phi_x
  double wavelength = 0.0;          // 0 when fewer than three zero crossings
  double window_start = 0.0;        // distance behind the kink center
  double window_end = 0.0;
  bool detected = false;
};

WakeReport wake_probe(const JunctionState& state, const JunctionParams& params,
                      double threshold = 1e-3);

}  // namespace rabiflux::fluxon
