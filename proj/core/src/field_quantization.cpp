#include "rabiflux/field_quantization.hpp"

#include <cmath>
#include <string>

#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"

namespace rabiflux::fq {

namespace {

void require_positive_length(double L, const char* name) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw domain_error(std::string(name) + " must be positive and finite");
}

}  // namespace

double mode_wavenumber(double alpha, double L) {
  require_positive_length(L, "L");
  if (!(alpha >= 1.0)) throw domain_error("mode index must be >= 1");
  return alpha * kPi / L;
}

double mode_spacing_delta(double alpha, double L, double delta_alpha, double delta_L) {
  require_positive_length(L, "L");
  return (alpha * kPi / L) * delta_alpha - (alpha * kPi / (L * L)) * delta_L;
}

double finite_length_wavenumber(double alpha, double delta_alpha, double L, double L0) {
  require_positive_length(L, "L");
  require_positive_length(L0, "L0");
  const double c = -alpha * kPi * std::log(L0) * delta_alpha;
  return alpha * kPi * (std::log(L) * delta_alpha + 1.0 / L) + c;
}

double finite_length_wavenumber(double alpha, double delta_alpha, const CavityGeometry& g) {
  return finite_length_wavenumber(alpha, delta_alpha, g.length_L, g.initial_length_L0);
}

double default_broadening(double phonon_energy) { return 1e-3 * std::abs(phonon_energy); }

double gaussian_delta(double x, double eta) {
  const double z = x / eta;
  return std::exp(-0.5 * z * z) / (eta * std::sqrt(2.0 * kPi));
}

double scattering_rate(const ScatteringInput& in, bool emission, double hbar) {
  if (!(in.phonon_occupation >= 0.0)) throw domain_error("phonon occupation must be >= 0");
  if (!(in.broadening_eta > 0.0)) throw domain_error("broadening eta must be > 0");
  if (!(hbar > 0.0)) throw domain_error("hbar must be > 0");
  const double sign = emission ? -1.0 : 1.0;
  const double mismatch = in.energy_initial - in.energy_final + sign * in.phonon_energy;
  const double occupation = emission ? in.phonon_occupation + 1.0 : in.phonon_occupation;
  return (2.0 * kPi / hbar) * in.matrix_element_sq * gaussian_delta(mismatch, in.broadening_eta) *
         occupation;
}

KLattice::KLattice(std::vector<double> k, double period) : k_(std::move(k)), period_(period) {}

KLattice KLattice::atomic(std::size_t site_count) {
  if (site_count == 0) throw domain_error("lattice needs at least one site");
  std::vector<double> k(site_count);
  for (std::size_t n = 0; n < site_count; ++n)
    k[n] = 2.0 * kPi * static_cast<double>(n) / static_cast<double>(site_count);
  return KLattice(std::move(k), 2.0 * kPi);
}

KLattice KLattice::uniform(double spacing, std::size_t count, long first) {
  if (!(spacing > 0.0)) throw domain_error("lattice spacing must be > 0");
  if (count == 0) throw domain_error("lattice needs at least one mode");
  std::vector<double> k(count);
  for (std::size_t i = 0; i < count; ++i) k[i] = spacing * static_cast<double>(first + static_cast<long>(i));
  return KLattice(std::move(k), spacing * static_cast<double>(count));
}

const char* to_string(Quasimomentum q) {
  switch (q) {
    case Quasimomentum::kNormal: return "normal";
    case Quasimomentum::kUmklapp: return "umklapp";
    case Quasimomentum::kForbidden: break;
  }
  return "forbidden";
}

Quasimomentum quasimomentum_allowed(double k_l, double k_m, double q, const KLattice& lattice,
                                    bool emission, double rel_tol) {
  const double b = emission ? (k_l - k_m - q) : (k_l - k_m + q);
  const double r = b / lattice.reciprocal_period();
  const double m = std::round(r);
  if (!std::isfinite(r) || std::abs(r - m) > rel_tol) return Quasimomentum::kForbidden;
  return m == 0.0 ? Quasimomentum::kNormal : Quasimomentum::kUmklapp;
}

CommensurateResult commensurate(const KLattice& cavity, const KLattice& atomic, double tol) {
  if (cavity.size() == 0 || atomic.size() == 0) throw domain_error("lattices must be non-empty");
  CommensurateResult out;
  const auto& kc = cavity.wavenumbers();
  const auto& ka = atomic.wavenumbers();
  for (std::size_t i = 0; i < kc.size(); ++i)
    for (std::size_t j = 0; j < ka.size(); ++j)
      if (std::abs(kc[i] - ka[j]) <= tol) out.matches.emplace_back(i, j);
  out.commensurate = !out.matches.empty();
  return out;
}

double pairing_kernel(double eps_k, double eps_kq, double phonon_energy, double matrix_element_sq) {
  if (!(phonon_energy > 0.0)) throw domain_error("phonon energy must be > 0");
  const double de = eps_k - eps_kq;
  const double denom = de * de - phonon_energy * phonon_energy;
  if (std::abs(denom) <= 1e-14 * phonon_energy * phonon_energy)
    throw singularity_error("pairing kernel pole: |eps_k - eps_k+q| equals the phonon energy");
  return phonon_energy * matrix_element_sq / denom;
}

}  // namespace rabiflux::fq
