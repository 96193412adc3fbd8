#include <doctest.h>

#include <cmath>
#include <string>

#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"
#include "rabiflux/field_quantization.hpp"

using namespace rabiflux;
using namespace rabiflux::fq;
using doctest::Approx;

TEST_CASE("mode wavenumber") {
  CHECK(mode_wavenumber(1, kPi) == Approx(1.0).epsilon(1e-15));
  CHECK(mode_wavenumber(2, 4.6) == Approx(2 * kPi / 4.6));
  CHECK(mode_wavenumber(2, 4.6) == Approx(1.3659).epsilon(1e-4));
  CHECK(mode_wavenumber(1, 0.3) / mode_wavenumber(1, 4.6) == Approx(15.3333).epsilon(1e-4));
  CHECK_THROWS_AS(mode_wavenumber(1, 0.0), domain_error);
  CHECK_THROWS_AS(mode_wavenumber(1, -2.0), domain_error);
}

TEST_CASE("mode spacing increment as printed") {
  const double L = 2.7;
  CHECK(mode_spacing_delta(1, L, 1, 0) == Approx(kPi / L));
  CHECK(mode_spacing_delta(1, 1, 0, -0.1) == Approx(0.1 * kPi));
  CHECK(mode_spacing_delta(3, 4.6, 1, 0) == Approx(2.0489).epsilon(1e-4));
  CHECK_THROWS_AS(mode_spacing_delta(1, 0, 1, 0), domain_error);
}

TEST_CASE("finite-length wavenumber") {
  CHECK(finite_length_wavenumber(3, 0.4, 2.5, 2.5) == Approx(3 * kPi / 2.5));
  CHECK(finite_length_wavenumber(1, 1, std::exp(1.0), 1.0) == Approx(kPi * (1 + 1 / std::exp(1.0))));
  CHECK(finite_length_wavenumber(2, 0, 1.7, 0.4) == Approx(2 * kPi / 1.7));
  CHECK(finite_length_wavenumber(2, 0, CavityGeometry{1.7, 0.4}) == Approx(2 * kPi / 1.7));
  CHECK_THROWS_AS(finite_length_wavenumber(1, 1, 1, 0), domain_error);
  CHECK_THROWS_AS(finite_length_wavenumber(1, 1, -1, 1), domain_error);
}

TEST_CASE("scattering rate") {
  ScatteringInput in;
  in.energy_initial = 1.0;
  in.phonon_energy = 0.2;
  in.phonon_occupation = 3;
  in.broadening_eta = default_broadening(in.phonon_energy);
  CHECK(in.broadening_eta == Approx(2e-4));

  SUBCASE("support of the broadened delta") {
    in.energy_final = 0.8;  // on shell for emission
    const double on = scattering_rate(in, true);
    in.energy_final = 0.8 - 8 * in.broadening_eta;
    CHECK(scattering_rate(in, true) < 1e-9 * on);
  }
  SUBCASE("occupation factors") {
    in.phonon_occupation = 0;
    in.energy_final = 1.2;
    CHECK(scattering_rate(in, false) == 0.0);
    in.energy_final = 0.8;
    CHECK(scattering_rate(in, true) > 0.0);
    CHECK(scattering_rate(in, true) == Approx(2 * kPi * gaussian_delta(0, in.broadening_eta)));
  }
  SUBCASE("emission over absorption at N = 3") {
    in.energy_final = 0.8;
    const double em = scattering_rate(in, true);
    in.energy_final = 1.2;
    const double ab = scattering_rate(in, false);
    CHECK(em / ab == Approx(4.0 / 3.0));
  }
  SUBCASE("invalid input") {
    in.broadening_eta = 0;
    CHECK_THROWS_AS(scattering_rate(in, true), domain_error);
    in.broadening_eta = 1e-3;
    in.phonon_occupation = -1;
    CHECK_THROWS_AS(scattering_rate(in, true), domain_error);
  }
}

TEST_CASE("k lattices") {
  const auto a = KLattice::atomic(8);
  REQUIRE(a.size() == 8);
  CHECK(a.wavenumbers()[1] == Approx(2 * kPi / 8));
  CHECK(a.reciprocal_period() == Approx(2 * kPi));
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a.wavenumbers()[i] > a.wavenumbers()[i - 1]);
  CHECK_THROWS_AS(KLattice::atomic(0), domain_error);
  CHECK_THROWS_AS(KLattice::uniform(-1, 3), domain_error);
}

TEST_CASE("quasimomentum conservation") {
  const auto lat = KLattice::atomic(16);
  const double P = lat.reciprocal_period();
  const double km = 0.7, q = 1.1;
  CHECK(quasimomentum_allowed(km + q, km, q, lat, true) == Quasimomentum::kNormal);
  CHECK(quasimomentum_allowed(km + q + P, km, q, lat, true) == Quasimomentum::kUmklapp);
  CHECK(quasimomentum_allowed(km + q + 0.5 * P, km, q, lat, true) == Quasimomentum::kForbidden);
  CHECK(quasimomentum_allowed(km - q, km, q, lat, false) == Quasimomentum::kNormal);
  CHECK(std::string(to_string(Quasimomentum::kUmklapp)) == "umklapp");
}

TEST_CASE("commensurate lattices") {
  const auto a = KLattice::uniform(kPi, 20);
  const auto same = commensurate(a, a, 1e-9);
  CHECK(same.commensurate);
  CHECK(same.matches.size() == 20);
  CHECK_FALSE(commensurate(a, KLattice::uniform(kPi * std::sqrt(2.0), 20), 1e-6).commensurate);
  const auto half = commensurate(a, KLattice::uniform(2 * kPi, 20), 1e-9);
  CHECK(half.commensurate);
  CHECK(half.matches.size() == 10);
  for (auto [i, j] : half.matches) CHECK(i % 2 == 1);  // modes 2, 4, ... of the pi lattice
}

TEST_CASE("pairing kernel") {
  CHECK(pairing_kernel(0.3, 0.3, 1, 1) == Approx(-1.0));
  CHECK(pairing_kernel(2.0, 0.0, 1, 1) == Approx(1.0 / 3.0));
  CHECK(pairing_kernel(0.0, 2.0, 1, 1) > 0.0);
  CHECK(pairing_kernel(0.0, 0.999999, 1, 1) < -1e5);
  CHECK(pairing_kernel(0.0, 0.5, 1, 1) < 0.0);
  CHECK_THROWS_AS(pairing_kernel(0.0, 1.0, 1, 1), singularity_error);
  CHECK_THROWS_AS(pairing_kernel(0.0, 1.0, 0, 1), domain_error);
}
