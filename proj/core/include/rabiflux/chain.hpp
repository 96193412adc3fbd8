#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rabiflux::chain {

using cd = std::complex<double>;

enum class Variant { kSpaceChain, kTimeLattice };

struct ChainParams {
  int site_count = 64;
  double lattice_spacing = 1.0;
  double omega0 = 0.0;
  double omega = 0.0;
  double k = 0.0;
  double xi1 = 0.0;  // excited-level hopping
  double xi2 = 0.0;  // ground-level hopping
  double g = 0.0;
  double depolarization_shift = 0.0;
  int n_min = 0;
  int n_max = 0;
  double relaxation_lambda = 0.0;
  Variant variant = Variant::kSpaceChain;
  double time_lattice_t1 = 1.0;  // t1 = t1' c
  double light_speed = 1.0;

  int photon_count() const { return n_max - n_min + 1; }
  double detuning() const { return omega0 - omega; }
  void validate() const;
};

// A(p, n) and B(p, n+1) for n in [n_min, n_max]; column j = n - n_min.
class AmplitudeField {
 public:
  AmplitudeField() = default;
  AmplitudeField(int site_count, int n_min, int n_max);
  static AmplitudeField like(const ChainParams& p) { return {p.site_count, p.n_min, p.n_max}; }

  int sites() const noexcept { return sites_; }
  int n_min() const noexcept { return n_min_; }
  int n_max() const noexcept { return n_max_; }
  int columns() const noexcept { return n_max_ - n_min_ + 1; }

  cd& A(int p, int n) { return a_[index(p, n)]; }
  cd A(int p, int n) const { return a_[index(p, n)]; }
  // Amplitude of |b_p, n+1>.
  cd& B(int p, int n) { return b_[index(p, n)]; }
  cd B(int p, int n) const { return b_[index(p, n)]; }

  std::vector<cd>& a_data() noexcept { return a_; }
  const std::vector<cd>& a_data() const noexcept { return a_; }
  std::vector<cd>& b_data() noexcept { return b_; }
  const std::vector<cd>& b_data() const noexcept { return b_; }

  double norm_squared() const;
  // Evolution coordinate: t for the space chain, x for the time lattice.
  double coordinate = 0.0;

 private:
  std::size_t index(int p, int n) const {
    return static_cast<std::size_t>(p) * static_cast<std::size_t>(columns()) +
           static_cast<std::size_t>(n - n_min_);
  }
  int sites_ = 0;
  int n_min_ = 0;
  int n_max_ = -1;
  std::vector<cd> a_;
  std::vector<cd> b_;
};

enum class Level { kExcited, kGround };

struct GaussianBeam {
  double normalization = 1.0;
  double center = 0.0;
  double width_sigma = 1.0;
  Level target = Level::kExcited;
};

// Poisson weights over [n_min, n_max], renormalized to sum to 1.
std::vector<double> coherent_weights(double nbar, int n_min, int n_max);

// Periodic Gaussian profile on the ring (minimal image plus a few images).
double ring_gaussian(double x, double center, double sigma, double ring_length);

AmplitudeField init_gaussian_beam(const ChainParams& params, std::span<const GaussianBeam> beams,
                                  std::span<const double> photon_weights);

// Set when any beam is narrower than 4 lattice spacings.
std::optional<std::string> dispersionless_warning(const ChainParams& params,
                                                  std::span<const GaussianBeam> beams);

// Right-hand sides of the amplitude equations at field.coordinate, periodic ring.
// A nonzero relaxation_lambda adds -lambda A, -lambda B.
AmplitudeField derivative(const AmplitudeField& field, const ChainParams& params);

struct Trajectory {
  std::vector<AmplitudeField> snapshots;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double norm_drift = 0.0;  // max |norm - initial| over all steps
  std::size_t steps = 0;
};

using StepObserver = std::function<void(const AmplitudeField&)>;

// Fixed-step RK4 over [coordinate, coordinate + span]. Samples every sample_every steps
// (0: final state only). Throws stability_error when the norm drifts above 1e-6 in a
// norm-conserving configuration.
Trajectory integrate(const AmplitudeField& field, const ChainParams& params, double span,
                     double step, std::size_t sample_every = 0);

// Same stepping, calling observe on the initial state and every sample_every steps.
Trajectory integrate(const AmplitudeField& field, const ChainParams& params, double span,
                     double step, std::size_t sample_every, const StepObserver& observe);

struct FamilyParams {
  double h0 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double detuning_eff = 0.0;
  double rabi_freq = 0.0;
  double zeta_plus = 0.5;
  double zeta_minus = 0.5;
  double eta = 0.5;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double nu_plus = 0.0;   // -1/2 [theta1 + theta2 - Omega]
  double nu_minus = 0.0;  // -1/2 [theta1 + theta2 + Omega]
};

// Family 1 carries the initially-ground subpackets (velocities in xi1), family 2 the
// initially-excited ones (velocities in xi2).
struct SubpacketParams {
  FamilyParams family1;
  FamilyParams family2;
  int n = 0;
};

// theta_{1,2}(h) = xi_{1,2} [2 - a^2 (h +/- k/2)^2]
double theta1(const ChainParams& p, double h);
double theta2(const ChainParams& p, double h);
double detuning_eff(const ChainParams& p, double h);

// Space-chain parameters equivalent to a time-lattice run (k a -> -omega t1/c, omega -> -k).
ChainParams space_chain_equivalent(const ChainParams& params);

SubpacketParams subpacket_params(const ChainParams& params, int n);

// Four-subpacket superposition for every photon column.
AmplitudeField analytic_packet(const AmplitudeField& initial, const ChainParams& params, double t);
// Only column n is filled.
AmplitudeField analytic_packet(const AmplitudeField& initial, const ChainParams& params, int n,
                               double t);

// Translate a sampled ring profile by s (f(x + s)) with trigonometric interpolation.
std::vector<cd> ring_translate(std::span<const cd> samples, double shift_in_sites);

struct SynchronismReport {
  double detuning_eff1 = 0.0;
  double detuning_eff2 = 0.0;
  bool family1_synchronous = false;
  bool family2_synchronous = false;
  // Detuning omega0 - omega that zeroes detuning_eff of each family.
  double suggested_detuning1 = 0.0;
  double suggested_detuning2 = 0.0;
};

SynchronismReport check_synchronism(const ChainParams& params, double tol);

// Numeric inversion per site: sum_n |A_pn|^2 - |B_p,n+1|^2.
std::vector<double> inversion_density(const AmplitudeField& field);

// Single-subpacket closed form (B = 0 initially, family 2 synchronous):
// sum_n |A_n(x + xi2 a^2 k t, 0)|^2 [1 - 2 sin^2(g sqrt(n+1) t)] per site.
std::vector<double> inversion_density_closed(const AmplitudeField& initial,
                                             const ChainParams& params, double t);

// Site sum of the density, i.e. (1/a) * integral of w dx.
double integral_inversion(std::span<const double> density);
double integral_inversion(const AmplitudeField& field);

// Closed form of the integral inversion: sum_n P_n cos(2 g sqrt(n+1) t), P_n the column weights.
double integral_inversion_closed(const AmplitudeField& initial, const ChainParams& params, double t);

}  // namespace rabiflux::chain
