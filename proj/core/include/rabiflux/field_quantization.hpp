#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace rabiflux::fq {

struct CavityGeometry {
  double length_L = 1.0;
  double initial_length_L0 = 1.0;
};

// k_alpha = alpha * pi / L
double mode_wavenumber(double alpha, double L);

// Printed form: (alpha*pi/L)*d_alpha - (alpha*pi/L^2)*d_L. The first coefficient
// is kept as written even though d/d_alpha of alpha*pi/L is pi/L.
double mode_spacing_delta(double alpha, double L, double delta_alpha, double delta_L);

// alpha*pi*[ln(L)*d_alpha + 1/L] + C, C = -alpha*pi*ln(L0)*d_alpha
double finite_length_wavenumber(double alpha, double delta_alpha, double L, double L0);
double finite_length_wavenumber(double alpha, double delta_alpha, const CavityGeometry& g);

struct ScatteringInput {
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double phonon_energy = 1.0;
  double phonon_occupation = 0.0;
  double matrix_element_sq = 1.0;
  double broadening_eta = 1e-3;
};

// Width used when the caller has no better choice.
double default_broadening(double phonon_energy);

// Normalized Gaussian standing in for the delta function.
double gaussian_delta(double x, double eta);

// (2pi/hbar)|M|^2 delta_eta(e_i - e_f -/+ hw) (N + 1/2 +/- 1/2); upper sign = emission.
double scattering_rate(const ScatteringInput& in, bool emission, double hbar = 1.0);

class KLattice {
 public:
  // k_n = 2 pi n / N', n = 0..N'-1; reciprocal period 2 pi.
  static KLattice atomic(std::size_t site_count);
  // k_n = spacing * n, n = first..first+count-1; reciprocal period spacing*count.
  static KLattice uniform(double spacing, std::size_t count, long first = 1);

  const std::vector<double>& wavenumbers() const noexcept { return k_; }
  double reciprocal_period() const noexcept { return period_; }
  std::size_t size() const noexcept { return k_.size(); }

 private:
  KLattice(std::vector<double> k, double period);
  std::vector<double> k_;
  double period_;
};

enum class Quasimomentum { kForbidden, kNormal, kUmklapp };

const char* to_string(Quasimomentum q);

// Checks k_l - k_m -/+ q = b with b an integer multiple of the reciprocal period.
Quasimomentum quasimomentum_allowed(double k_l, double k_m, double q, const KLattice& lattice,
                                    bool emission, double rel_tol = 1e-9);

struct CommensurateResult {
  bool commensurate = false;
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (cavity index, atomic index)
};

CommensurateResult commensurate(const KLattice& cavity, const KLattice& atomic, double tol);

// hw |M|^2 / [(e_k - e_kq)^2 - (hw)^2]; negative inside the phonon shell.
double pairing_kernel(double eps_k, double eps_kq, double phonon_energy, double matrix_element_sq);

}  // namespace rabiflux::fq
