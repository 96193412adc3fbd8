#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rabiflux/chain.hpp"
#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"
#include "rabiflux/jcm.hpp"

using namespace rabiflux;
using namespace rabiflux::chain;
using doctest::Approx;

namespace {

ChainParams small_chain(int sites = 32) {
  ChainParams p;
  p.site_count = sites;
  p.lattice_spacing = 1.0;
  p.omega0 = 1.0;
  p.omega = 1.0;
  p.k = 2.0 * kPi / sites;
  p.xi1 = -1.0;
  p.xi2 = 1.0;
  p.g = 2.0;
  return p;
}

// Tune omega so the excited family is synchronous.
ChainParams synchronized(ChainParams p) {
  p.omega = p.omega0 - check_synchronism(p, 1e-12).suggested_detuning2;
  return p;
}

AmplitudeField excited_beam(const ChainParams& p, double center, double sigma,
                            const std::vector<double>& weights) {
  const GaussianBeam beam{1.0, center, sigma, Level::kExcited};
  return init_gaussian_beam(p, std::span(&beam, 1), weights);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("single excited beam in vacuum is normalized with an empty ground level") {
  const auto p = small_chain();
  const auto f = excited_beam(p, 12.0, 4.0, {1.0});
  CHECK(f.norm_squared() == Approx(1.0).epsilon(1e-14));
  for (int s = 0; s < p.site_count; ++s) CHECK(f.B(s, 0) == cd{});
}

TEST_CASE("very wide beam is flat") {
  const auto p = small_chain();
  const auto f = excited_beam(p, 5.0, 1e6, {1.0});
  const double ref = std::abs(f.A(0, 0));
  for (int s = 1; s < p.site_count; ++s) CHECK(std::abs(f.A(s, 0)) == Approx(ref).epsilon(1e-9));
  CHECK(ref == Approx(1.0 / std::sqrt(p.site_count)).epsilon(1e-9));
}

TEST_CASE("mirror beams give a mirror-symmetric field") {
  const auto p = small_chain(40);
  const GaussianBeam beams[] = {{1.0, 7.0, 3.0, Level::kExcited}, {1.0, 33.0, 3.0, Level::kExcited}};
  const std::vector<double> w{1.0};
  const auto f = init_gaussian_beam(p, beams, w);
  for (int s = 0; s < p.site_count; ++s)
    CHECK(std::abs(f.A(s, 0)) == Approx(std::abs(f.A((p.site_count - s) % p.site_count, 0))).epsilon(1e-12));
}

TEST_CASE("beam initialisation rejects bad input") {
  const auto p = small_chain();
  const std::vector<double> w{1.0};
  const GaussianBeam zero{0.0, 4.0, 2.0, Level::kExcited};
  CHECK_THROWS_AS(init_gaussian_beam(p, std::span(&zero, 1), w), domain_error);
  const GaussianBeam ok{1.0, 4.0, 2.0, Level::kExcited};
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(init_gaussian_beam(p, std::span(&ok, 1), bad), domain_error);
  const GaussianBeam thin{1.0, 4.0, 0.0, Level::kExcited};
  CHECK_THROWS_AS(init_gaussian_beam(p, std::span(&thin, 1), w), input_error);
  ChainParams one = p;
  one.site_count = 1;
  CHECK_THROWS_AS(one.validate(), domain_error);
}

TEST_CASE("narrow beams trigger the dispersion warning") {
  const auto p = small_chain();
  const GaussianBeam narrow{1.0, 4.0, 3.0, Level::kExcited};
  const GaussianBeam wide{1.0, 4.0, 8.0, Level::kExcited};
  CHECK(dispersionless_warning(p, std::span(&narrow, 1)).has_value());
  CHECK_FALSE(dispersionless_warning(p, std::span(&wide, 1)).has_value());
}

TEST_CASE("coherent weights are a normalized Poisson window") {
  const auto w = coherent_weights(4.0, 0, 14);
  double s = 0.0;
  for (double v : w) s += v;
  CHECK(s == Approx(1.0).epsilon(1e-14));
  CHECK(w[4] / w[3] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("derivative reduces to free precession without coupling") {
  ChainParams p = small_chain(8);
  p.g = 0.0;
  p.xi1 = p.xi2 = 0.0;
  p.omega0 = 1.7;
  AmplitudeField f = AmplitudeField::like(p);
  for (int s = 0; s < p.site_count; ++s) {
    f.A(s, 0) = {0.1 * s, -0.2};
    f.B(s, 0) = {0.3, 0.05 * s};
  }
  const auto d = derivative(f, p);
  for (int s = 0; s < p.site_count; ++s) {
    CHECK(std::abs(d.A(s, 0) - cd{0.0, -0.85} * f.A(s, 0)) < 1e-15);
    CHECK(std::abs(d.B(s, 0) - cd{0.0, 0.85} * f.B(s, 0)) < 1e-15);
  }
}

TEST_CASE("derivative generator is anti-Hermitian") {
  ChainParams p = small_chain(12);
  p.n_min = 1;
  p.n_max = 4;
  p.omega = 0.7;
  AmplitudeField f = AmplitudeField::like(p);
  for (int s = 0; s < p.site_count; ++s)
    for (int n = 1; n <= 4; ++n) {
      f.A(s, n) = {std::sin(1.3 * s + n), std::cos(0.4 * s * n)};
      f.B(s, n) = {std::cos(s - 0.5 * n), std::sin(0.9 * s)};
    }
  f.coordinate = 0.37;
  const auto d = derivative(f, p);
  cd inner{};
  for (std::size_t i = 0; i < f.a_data().size(); ++i) {
    inner += std::conj(f.a_data()[i]) * d.a_data()[i];
    inner += std::conj(f.b_data()[i]) * d.b_data()[i];
  }
  CHECK(std::abs(inner.real()) < 1e-12);
}

TEST_CASE("zero Hamiltonian leaves the field unchanged") {
  ChainParams p = small_chain(16);
  p.omega0 = p.omega = p.k = 0.0;
  p.g = p.xi1 = p.xi2 = 0.0;
  const auto f = excited_beam(p, 6.0, 3.0, {1.0});
  const auto tr = integrate(f, p, 5.0, 0.01);
  REQUIRE(tr.snapshots.size() == 1);
  for (std::size_t i = 0; i < f.a_data().size(); ++i)
    CHECK(std::abs(tr.snapshots[0].a_data()[i] - f.a_data()[i]) < 1e-15);
}

TEST_CASE("norm is conserved over ten thousand steps") {
  auto p = small_chain(64);
  p.g = 1.0;
  const auto f = excited_beam(p, 20.0, 8.0, {1.0});
  const auto tr = integrate(f, p, 10.0, 1e-3);
  CHECK(tr.steps == 10000);
  CHECK(std::abs(tr.final_norm - 1.0) < 1e-9);
}

TEST_CASE("an oversized step is reported as a stability failure") {
  auto p = small_chain(16);
  p.g = 10.0;
  const auto f = excited_beam(p, 6.0, 3.0, {1.0});
  CHECK_THROWS_AS(integrate(f, p, 20.0, 0.5), numerical_error);
}

TEST_CASE("relaxation decays the norm as exp(-2 lambda t)") {
  auto p = small_chain(32);
  p.relaxation_lambda = 0.05;
  const auto f = excited_beam(p, 10.0, 6.0, {1.0});
  const auto tr = integrate(f, p, 4.0, 1e-3);
  CHECK(tr.final_norm == Approx(std::exp(-0.4)).epsilon(1e-9));
  CHECK(analytic_packet(f, p, 4.0).norm_squared() == Approx(std::exp(-0.4)).epsilon(1e-9));
}

TEST_CASE("decoupled sites reproduce single-atom Rabi oscillations") {
  ChainParams p = small_chain(4);
  p.xi1 = p.xi2 = 0.0;
  p.k = 0.0;
  p.omega0 = p.omega = 0.0;
  p.g = 1.0;
  const auto field = jcm::CoherentFieldState::coherent(5.0);
  p.n_min = field.n_min;
  p.n_max = field.n_max;
  const auto w = coherent_weights(5.0, p.n_min, p.n_max);
  const auto f = excited_beam(p, 1.0, 2.0, w);
  std::vector<double> t, ground;
  const auto tr = integrate(f, p, 6.0, 1e-3, 500, [&](const AmplitudeField& s) {
    t.push_back(s.coordinate);
    double pg = 0.0;
    for (const auto& v : s.b_data()) pg += std::norm(v);
    ground.push_back(pg);
  });
  const auto ref = jcm::ground_state_probability(field, jcm::QubitInit::excited(), {1.0, 0.0}, t);
  CHECK(max_abs_diff(ground, ref) < 1e-6);
  CHECK(tr.norm_drift < 1e-9);
}

TEST_CASE("subpacket weights and velocities") {
  auto p = small_chain(64);
  p.omega = 0.4;
  for (int n : {0, 3, 9}) {
    const auto sp = subpacket_params(p, n);
    for (const auto* f : {&sp.family1, &sp.family2}) {
      CHECK(f->zeta_plus + f->zeta_minus == Approx(1.0).epsilon(1e-14));
      CHECK(f->eta * f->eta == Approx(f->zeta_plus * f->zeta_minus).epsilon(1e-12));
    }
  }
  const auto s = synchronized(p);
  const auto f2 = subpacket_params(s, 2).family2;
  CHECK(f2.zeta_plus == Approx(0.5).epsilon(1e-12));
  CHECK(f2.eta == Approx(0.5).epsilon(1e-12));
  CHECK(f2.v_plus == Approx(f2.v_minus).epsilon(1e-12));
  auto still = p;
  still.k = 0.0;
  const auto sp0 = subpacket_params(still, 1);
  CHECK(sp0.family1.v_plus == 0.0);
  CHECK(sp0.family1.v_minus == 0.0);
  CHECK(sp0.family2.v_plus == 0.0);
  CHECK(sp0.family2.v_minus == 0.0);
}

TEST_CASE("synchronism detection") {
  auto p = small_chain(64);
  const auto s = synchronized(p);
  CHECK(check_synchronism(s, 1e-12).family2_synchronous);
  auto same = p;
  same.xi1 = same.xi2 = 0.8;
  same.k = 0.0;
  same.omega = 0.3;
  const auto r = check_synchronism(same, 1e-12);
  CHECK(r.detuning_eff1 == Approx(same.detuning()).epsilon(1e-14));
  CHECK(r.detuning_eff2 == Approx(same.detuning()).epsilon(1e-14));
  auto generic = p;
  generic.xi1 = -1.0;
  generic.xi2 = 0.3;
  generic.omega = 0.3;
  const auto g = check_synchronism(generic, 1e-12);
  CHECK_FALSE(g.family1_synchronous);
  CHECK_FALSE(g.family2_synchronous);
}

TEST_CASE("analytic packet at t = 0 is the initial field") {
  auto p = small_chain(48);
  p.omega = 0.6;
  p.n_max = 2;
  const GaussianBeam beams[] = {{1.0, 12.0, 6.0, Level::kExcited}, {0.5, 30.0, 6.0, Level::kGround}};
  const auto w = coherent_weights(1.0, 0, 2);
  const auto f = init_gaussian_beam(p, beams, w);
  const auto z = analytic_packet(f, p, 0.0);
  for (std::size_t i = 0; i < f.a_data().size(); ++i) {
    CHECK(std::abs(z.a_data()[i] - f.a_data()[i]) < 1e-12);
    CHECK(std::abs(z.b_data()[i] - f.b_data()[i]) < 1e-12);
  }
}

// Subpackets are A(x + v t, 0): a positive velocity carries the profile toward -x.
TEST_CASE("synchronous excited packet translates rigidly") {
  const auto p = synchronized(small_chain(64));
  const double sigma = 7.0, c0 = 20.0, t = 3.0;
  const auto f = excited_beam(p, c0, sigma, {1.0});
  const auto sp = subpacket_params(p, 0);
  const double v = sp.family2.v_plus;
  CHECK(v == Approx(p.xi2 * p.k).epsilon(1e-12));
  const auto out = analytic_packet(f, p, t);
  std::vector<double> dens, ref;
  double rs = 0.0;
  for (int s = 0; s < p.site_count; ++s) {
    dens.push_back(std::norm(out.A(s, 0)) + std::norm(out.B(s, 0)));
    const double gss = ring_gaussian(s, c0 - v * t, sigma, p.site_count);
    ref.push_back(gss * gss);
    rs += gss * gss;
  }
  for (auto& r : ref) r /= rs;
  CHECK(max_abs_diff(dens, ref) < 1e-9);
}

TEST_CASE("inversion density closed form") {
  const auto p = synchronized(small_chain(32));
  const auto f = excited_beam(p, 10.0, 5.0, {1.0});
  const auto w0 = inversion_density(f);
  const auto c0 = inversion_density_closed(f, p, 0.0);
  CHECK(max_abs_diff(w0, c0) < 1e-12);
  const double tq = kPi / (2.0 * p.g);
  const auto cq = inversion_density_closed(f, p, tq);
  const double shift = p.xi2 * p.k * tq;
  double norm = 0.0;
  for (int s = 0; s < p.site_count; ++s) norm += std::pow(ring_gaussian(s, 10.0, 5.0, p.site_count), 2);
  for (int s = 0; s < p.site_count; ++s) {
    const double gss = ring_gaussian(s, 10.0 - shift, 5.0, p.site_count);
    CHECK(cq[static_cast<std::size_t>(s)] == Approx(-gss * gss / norm).epsilon(1e-9));
  }
}

TEST_CASE("integral inversion under synchronism") {
  SUBCASE("vacuum field oscillates as cos 2gt") {
    const auto p = synchronized(small_chain(64));
    const auto f = excited_beam(p, 20.0, 8.0, {1.0});
    CHECK(integral_inversion(f) == Approx(1.0).epsilon(1e-14));
    CHECK(integral_inversion_closed(f, p, 0.7) == Approx(std::cos(1.4 * p.g)).epsilon(1e-12));
    std::vector<double> got, want;
    integrate(f, p, 3.0, 5e-4, 200, [&](const AmplitudeField& s) {
      got.push_back(integral_inversion(s));
      want.push_back(std::cos(2.0 * p.g * s.coordinate));
    });
    // The residual is lattice dispersion, which the closed form neglects.
    CHECK(max_abs_diff(got, want) < 1e-3);
  }
  SUBCASE("coherent field follows the single-atom inversion") {
    auto p = small_chain(32);
    const auto field = jcm::CoherentFieldState::coherent(4.0);
    p.n_max = field.n_max;
    p.g = 1.0;
    p = synchronized(p);
    const auto f = excited_beam(p, 12.0, 6.0, coherent_weights(4.0, 0, field.n_max));
    std::vector<double> t, got;
    integrate(f, p, 6.0, 1e-3, 100, [&](const AmplitudeField& s) {
      t.push_back(s.coordinate);
      got.push_back(integral_inversion(s));
    });
    const auto ref = jcm::inversion_trace(field, jcm::QubitInit::excited(), {1.0, 0.0}, t);
    CHECK(max_abs_diff(got, ref) < 1e-3);
  }
}

TEST_CASE("time lattice maps onto an equivalent space chain") {
  auto p = small_chain(16);
  p.variant = Variant::kTimeLattice;
  p.time_lattice_t1 = 2.0;
  p.light_speed = 4.0;
  p.k = 0.3;
  p.omega = 0.8;
  const auto eq = space_chain_equivalent(p);
  CHECK(eq.variant == Variant::kSpaceChain);
  CHECK(eq.k == Approx(-0.4));
  CHECK(eq.omega == Approx(-0.3));
}
