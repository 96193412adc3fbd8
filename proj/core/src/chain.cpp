#include "rabiflux/chain.hpp"

#include <algorithm>
#include <cmath>

#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"
#include "rabiflux/jcm.hpp"

namespace rabiflux::chain {

namespace {

constexpr cd kI{0.0, 1.0};

// Site and coordinate factors of exp(i theta_p): space chain k p a - omega t,
// time lattice k x - omega p t1 / c. Both separate into site(p) * scalar(coordinate).
struct PhaseTable {
  std::vector<cd> site;
  double coord_rate = 0.0;

  PhaseTable(const ChainParams& p) : site(static_cast<std::size_t>(p.site_count)) {
    for (int s = 0; s < p.site_count; ++s) {
      const double arg = p.variant == Variant::kSpaceChain
                             ? p.k * s * p.lattice_spacing
                             : -p.omega * s * p.time_lattice_t1 / p.light_speed;
      site[static_cast<std::size_t>(s)] = std::polar(1.0, arg);
    }
    coord_rate = p.variant == Variant::kSpaceChain ? -p.omega : p.k;
  }
  cd scalar(double coord) const { return std::polar(1.0, coord_rate * coord); }
};

void rhs(const ChainParams& prm, const PhaseTable& phase, const cd* a, const cd* b, double coord,
         cd* da, cd* db) {
  const int N = prm.site_count;
  const int cols = prm.photon_count();
  const cd scal = phase.scalar(coord);
  const cd free_a = -0.5 * kI * prm.omega0 - prm.relaxation_lambda;
  const cd free_b = 0.5 * kI * prm.omega0 - prm.relaxation_lambda;
  const double dw = prm.depolarization_shift;
  for (int p = 0; p < N; ++p) {
    const int pl = (p - 1 + N) % N;
    const int pr = (p + 1) % N;
    const cd e = phase.site[static_cast<std::size_t>(p)] * scal;
    const cd ec = std::conj(e);
    const cd* ap = a + static_cast<std::ptrdiff_t>(p) * cols;
    const cd* bp = b + static_cast<std::ptrdiff_t>(p) * cols;
    const cd* al = a + static_cast<std::ptrdiff_t>(pl) * cols;
    const cd* ar = a + static_cast<std::ptrdiff_t>(pr) * cols;
    const cd* bl = b + static_cast<std::ptrdiff_t>(pl) * cols;
    const cd* br = b + static_cast<std::ptrdiff_t>(pr) * cols;
    cd* dap = da + static_cast<std::ptrdiff_t>(p) * cols;
    cd* dbp = db + static_cast<std::ptrdiff_t>(p) * cols;
    // S_p = sum_m A_pm B*_pm, with B_pm stored one column to the left.
    cd S{};
    if (dw != 0.0)
      for (int j = 1; j < cols; ++j) S += ap[j] * std::conj(bp[j - 1]);
    for (int j = 0; j < cols; ++j) {
      const double G = prm.g * std::sqrt(prm.n_min + j + 1.0);
      cd va = free_a * ap[j] + kI * prm.xi1 * (al[j] + ar[j]) - kI * G * bp[j] * e;
      cd vb = free_b * bp[j] + kI * prm.xi2 * (bl[j] + br[j]) - kI * G * ap[j] * ec;
      if (dw != 0.0) {
        if (j >= 1) va -= kI * dw * bp[j - 1] * S;
        if (j + 1 < cols) vb -= kI * dw * ap[j + 1] * std::conj(S);
      }
      dap[j] = va;
      dbp[j] = vb;
    }
  }
}

double norm_of(const std::vector<cd>& a, const std::vector<cd>& b) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  for (const auto& v : b) s += std::norm(v);
  return s;
}

void check_shape(const AmplitudeField& f, const ChainParams& p) {
  if (f.sites() != p.site_count || f.n_min() != p.n_min || f.n_max() != p.n_max)
    throw domain_error("amplitude field does not match chain parameters");
}

}  // namespace

void ChainParams::validate() const {
  if (site_count < 2) throw domain_error("chain needs at least 2 sites");
  if (!(lattice_spacing > 0.0)) throw domain_error("lattice spacing must be > 0");
  if (n_min < 0 || n_max < n_min) throw domain_error("invalid photon window");
  if (!(relaxation_lambda >= 0.0)) throw domain_error("relaxation lambda must be >= 0");
  if (variant == Variant::kTimeLattice && !(time_lattice_t1 > 0.0 && light_speed > 0.0))
    throw domain_error("time lattice needs t1 > 0 and c > 0");
}

AmplitudeField::AmplitudeField(int site_count, int n_min, int n_max)
    : sites_(site_count), n_min_(n_min), n_max_(n_max) {
  if (site_count < 1 || n_min < 0 || n_max < n_min) throw domain_error("invalid field shape");
  const auto size = static_cast<std::size_t>(site_count) * static_cast<std::size_t>(columns());
  a_.assign(size, cd{});
  b_.assign(size, cd{});
}

double AmplitudeField::norm_squared() const { return norm_of(a_, b_); }

std::vector<double> coherent_weights(double nbar, int n_min, int n_max) {
  if (n_min < 0 || n_max < n_min) throw domain_error("invalid photon window");
  std::vector<double> w;
  double total = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    w.push_back(jcm::photon_distribution(nbar, n));
    total += w.back();
  }
  if (!(total > 0.0)) throw domain_error("photon window carries no Poisson weight");
  for (auto& v : w) v /= total;
  return w;
}

double ring_gaussian(double x, double center, double sigma, double ring_length) {
  const double d = x - center;
  const double delta = d - ring_length * std::floor(d / ring_length + 0.5);
  const int images = static_cast<int>(std::min(2.0, std::ceil(4.0 * sigma / ring_length)));
  double s = 0.0;
  for (int m = -images; m <= images; ++m) {
    const double z = (delta + m * ring_length) / sigma;
    s += std::exp(-0.5 * z * z);
  }
  return s;
}

AmplitudeField init_gaussian_beam(const ChainParams& params, std::span<const GaussianBeam> beams,
                                  std::span<const double> photon_weights) {
  params.validate();
  if (beams.empty()) throw domain_error("at least one beam is required");
  if (static_cast<int>(photon_weights.size()) != params.photon_count())
    throw domain_error("photon weights must cover the photon window");
  double wsum = 0.0;
  for (double w : photon_weights) {
    if (!(w >= 0.0)) throw domain_error("photon weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-6) throw domain_error("photon weights must sum to 1");
  AmplitudeField f = AmplitudeField::like(params);
  const double a = params.lattice_spacing;
  const double ring = a * params.site_count;
  for (const auto& beam : beams) {
    if (!(beam.width_sigma > 0.0)) throw domain_error("beam width must be > 0");
    for (int p = 0; p < params.site_count; ++p) {
      const double prof = beam.normalization * ring_gaussian(p * a, beam.center, beam.width_sigma, ring);
      for (int j = 0; j < params.photon_count(); ++j) {
        const int n = params.n_min + j;
        const double v = prof * std::sqrt(photon_weights[static_cast<std::size_t>(j)]);
        if (beam.target == Level::kExcited) f.A(p, n) += v;
        else f.B(p, n) += v;
      }
    }
  }
  const double nrm = f.norm_squared();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw domain_error("initial field is identically zero");
  const double s = 1.0 / std::sqrt(nrm);
  for (auto& v : f.a_data()) v *= s;
  for (auto& v : f.b_data()) v *= s;
  return f;
}

std::optional<std::string> dispersionless_warning(const ChainParams& params,
                                                  std::span<const GaussianBeam> beams) {
  for (const auto& b : beams)
    if (b.width_sigma < 4.0 * params.lattice_spacing)
      return "beam width below 4 lattice spacings: the dispersionless packet solution is unreliable";
  return std::nullopt;
}

AmplitudeField derivative(const AmplitudeField& field, const ChainParams& params) {
  params.validate();
  check_shape(field, params);
  const PhaseTable phase(params);
  AmplitudeField out = AmplitudeField::like(params);
  out.coordinate = field.coordinate;
  rhs(params, phase, field.a_data().data(), field.b_data().data(), field.coordinate,
      out.a_data().data(), out.b_data().data());
  return out;
}

Trajectory integrate(const AmplitudeField& field, const ChainParams& params, double span,
                     double step, std::size_t sample_every) {
  Trajectory tr;
  auto keep = [&tr](const AmplitudeField& f) { tr.snapshots.push_back(f); };
  Trajectory res = integrate(field, params, span, step, sample_every, keep);
  res.snapshots = std::move(tr.snapshots);
  if (sample_every == 0) res.snapshots.erase(res.snapshots.begin());
  return res;
}

Trajectory integrate(const AmplitudeField& field, const ChainParams& params, double span,
                     double step, std::size_t sample_every, const StepObserver& observe) {
  params.validate();
  check_shape(field, params);
  if (!(step > 0.0)) throw domain_error("integration step must be > 0");
  if (!std::isfinite(span) || span < 0.0) throw domain_error("integration span must be finite and >= 0");
  const PhaseTable phase(params);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / step - 1e-9)));
  const double h = span / static_cast<double>(steps);
  const bool conserving = params.depolarization_shift == 0.0 && params.relaxation_lambda == 0.0;

  AmplitudeField cur = field;
  const std::size_t size = cur.a_data().size();
  std::vector<cd> ka[4], kb[4];
  for (int s = 0; s < 4; ++s) {
    ka[s].resize(size);
    kb[s].resize(size);
  }
  std::vector<cd> ta(size), tb(size);

  Trajectory tr;
  tr.initial_norm = cur.norm_squared();
  tr.steps = steps;
  if (observe) observe(cur);
  const double t0 = cur.coordinate;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t0 + h * static_cast<double>(n);
    auto& a = cur.a_data();
    auto& b = cur.b_data();
    rhs(params, phase, a.data(), b.data(), t, ka[0].data(), kb[0].data());
    for (std::size_t i = 0; i < size; ++i) {
      ta[i] = a[i] + 0.5 * h * ka[0][i];
      tb[i] = b[i] + 0.5 * h * kb[0][i];
    }
    rhs(params, phase, ta.data(), tb.data(), t + 0.5 * h, ka[1].data(), kb[1].data());
    for (std::size_t i = 0; i < size; ++i) {
      ta[i] = a[i] + 0.5 * h * ka[1][i];
      tb[i] = b[i] + 0.5 * h * kb[1][i];
    }
    rhs(params, phase, ta.data(), tb.data(), t + 0.5 * h, ka[2].data(), kb[2].data());
    for (std::size_t i = 0; i < size; ++i) {
      ta[i] = a[i] + h * ka[2][i];
      tb[i] = b[i] + h * kb[2][i];
    }
    rhs(params, phase, ta.data(), tb.data(), t + h, ka[3].data(), kb[3].data());
    for (std::size_t i = 0; i < size; ++i) {
      a[i] += h / 6.0 * (ka[0][i] + 2.0 * ka[1][i] + 2.0 * ka[2][i] + ka[3][i]);
      b[i] += h / 6.0 * (kb[0][i] + 2.0 * kb[1][i] + 2.0 * kb[2][i] + kb[3][i]);
    }
    cur.coordinate = t0 + h * static_cast<double>(n + 1);
    const double nrm = norm_of(a, b);
    if (!std::isfinite(nrm)) throw stability_error("chain integration diverged");
    tr.norm_drift = std::max(tr.norm_drift, std::abs(nrm - tr.initial_norm));
    if (conserving && tr.norm_drift > 1e-6)
      throw stability_error("norm drift above 1e-6: reduce the integration step");
    const bool sampled = sample_every > 0 && (n + 1) % sample_every == 0;
    if (observe && (sampled || n + 1 == steps)) observe(cur);
  }
  tr.final_norm = cur.norm_squared();
  return tr;
}

double theta1(const ChainParams& p, double h) {
  const double q = p.lattice_spacing * (h + 0.5 * p.k);
  return p.xi1 * (2.0 - q * q);
}

double theta2(const ChainParams& p, double h) {
  const double q = p.lattice_spacing * (h - 0.5 * p.k);
  return p.xi2 * (2.0 - q * q);
}

double detuning_eff(const ChainParams& p, double h) {
  return p.detuning() - theta1(p, h) + theta2(p, h);
}

ChainParams space_chain_equivalent(const ChainParams& params) {
  if (params.variant == Variant::kSpaceChain) return params;
  ChainParams eq = params;
  eq.variant = Variant::kSpaceChain;
  eq.k = -params.omega * params.time_lattice_t1 / (params.light_speed * params.lattice_spacing);
  eq.omega = -params.k;
  return eq;
}

namespace {

FamilyParams family(const ChainParams& p, int n, double h0, bool first) {
  FamilyParams f;
  f.h0 = h0;
  f.theta1 = theta1(p, h0);
  f.theta2 = theta2(p, h0);
  f.detuning_eff = p.detuning() - f.theta1 + f.theta2;
  const double G = p.g * std::sqrt(n + 1.0);
  f.rabi_freq = std::sqrt(f.detuning_eff * f.detuning_eff + 4.0 * G * G);
  if (f.rabi_freq > 0.0) {
    f.zeta_plus = (f.rabi_freq + f.detuning_eff) / (2.0 * f.rabi_freq);
    f.zeta_minus = (f.rabi_freq - f.detuning_eff) / (2.0 * f.rabi_freq);
    f.eta = G / f.rabi_freq;
  } else {
    f.zeta_plus = f.zeta_minus = 0.5;
    f.eta = 0.0;
  }
  const double a2k = p.lattice_spacing * p.lattice_spacing * p.k;
  if (first) {
    f.v_plus = -2.0 * p.xi1 * a2k * f.zeta_minus;
    f.v_minus = -2.0 * p.xi1 * a2k * f.zeta_plus;
  } else {
    f.v_plus = 2.0 * p.xi2 * a2k * f.zeta_plus;
    f.v_minus = 2.0 * p.xi2 * a2k * f.zeta_minus;
  }
  f.nu_plus = -0.5 * (f.theta1 + f.theta2 - f.rabi_freq);
  f.nu_minus = -0.5 * (f.theta1 + f.theta2 + f.rabi_freq);
  return f;
}

}  // namespace

SubpacketParams subpacket_params(const ChainParams& params, int n) {
  const ChainParams p = space_chain_equivalent(params);
  SubpacketParams s;
  s.n = n;
  s.family1 = family(p, n, 0.5 * p.k, true);
  s.family2 = family(p, n, -0.5 * p.k, false);
  return s;
}

std::vector<cd> ring_translate(std::span<const cd> samples, double shift_in_sites) {
  const auto N = static_cast<int>(samples.size());
  std::vector<cd> out(samples.size());
  if (N == 0) return out;
  const int qlo = -(N / 2);
  const int qhi = (N - 1) / 2;
  const bool nyquist = N % 2 == 0;
  std::vector<cd> F(static_cast<std::size_t>(N));
  for (int q = qlo; q <= qhi; ++q) {
    cd acc{};
    for (int p = 0; p < N; ++p) acc += samples[static_cast<std::size_t>(p)] * std::polar(1.0, -2.0 * kPi * q * p / N);
    F[static_cast<std::size_t>(q - qlo)] = acc / static_cast<double>(N);
  }
  for (int p = 0; p < N; ++p) {
    const double x = p + shift_in_sites;
    cd acc{};
    for (int q = qlo; q <= qhi; ++q) {
      const cd c = F[static_cast<std::size_t>(q - qlo)];
      if (nyquist && q == qlo) acc += c * std::cos(kPi * x);
      else acc += c * std::polar(1.0, 2.0 * kPi * q * x / N);
    }
    out[static_cast<std::size_t>(p)] = acc;
  }
  return out;
}

namespace {

void analytic_column(const AmplitudeField& initial, const ChainParams& p, int n, double t,
                     AmplitudeField& out) {
  const int N = p.site_count;
  const double a = p.lattice_spacing;
  const SubpacketParams sp = subpacket_params(p, n);
  const FamilyParams& f1 = sp.family1;
  const FamilyParams& f2 = sp.family2;
  std::vector<cd> fa(static_cast<std::size_t>(N)), fb(static_cast<std::size_t>(N));
  for (int s = 0; s < N; ++s) {
    fa[static_cast<std::size_t>(s)] = initial.A(s, n);
    fb[static_cast<std::size_t>(s)] = initial.B(s, n);
  }
  auto shifted = [&](const std::vector<cd>& f, double v) { return ring_translate(f, v * t / a); };
  const auto a2p = shifted(fa, f2.v_plus), a2m = shifted(fa, f2.v_minus);
  const auto b1p = shifted(fb, f1.v_plus), b1m = shifted(fb, f1.v_minus);
  // The frequency paired with the "+" subpacket is the lower-sign root of the family.
  const cd e2p = std::polar(1.0, -f2.nu_minus * t), e2m = std::polar(1.0, -f2.nu_plus * t);
  const cd e1p = std::polar(1.0, -f1.nu_minus * t), e1m = std::polar(1.0, -f1.nu_plus * t);
  const double decay = std::exp(-p.relaxation_lambda * t);
  for (int s = 0; s < N; ++s) {
    const auto u = static_cast<std::size_t>(s);
    const double x = s * a;
    const cd carrier = std::polar(1.0, 0.5 * (p.k * x - p.omega * t));
    const cd half_m = std::polar(1.0, -0.5 * p.k * x);
    const cd half_p = std::polar(1.0, 0.5 * p.k * x);
    const cd excited = (a2p[u] * f2.zeta_minus * e2p + a2m[u] * f2.zeta_plus * e2m) * half_m;
    const cd ground = (b1m[u] * f1.eta * e1m - b1p[u] * f1.eta * e1p) * half_p;
    out.A(s, n) = carrier * decay * (excited + ground);
    const cd excited_b = (a2m[u] * f2.eta * e2m - a2p[u] * f2.eta * e2p) * half_m;
    const cd ground_b = (b1p[u] * f1.zeta_plus * e1p + b1m[u] * f1.zeta_minus * e1m) * half_p;
    out.B(s, n) = std::conj(carrier) * decay * (excited_b + ground_b);
  }
}

}  // namespace

AmplitudeField analytic_packet(const AmplitudeField& initial, const ChainParams& params, double t) {
  params.validate();
  check_shape(initial, params);
  const ChainParams p = space_chain_equivalent(params);
  AmplitudeField out = AmplitudeField::like(params);
  out.coordinate = t;
  for (int n = params.n_min; n <= params.n_max; ++n) analytic_column(initial, p, n, t, out);
  return out;
}

AmplitudeField analytic_packet(const AmplitudeField& initial, const ChainParams& params, int n,
                               double t) {
  params.validate();
  check_shape(initial, params);
  if (n < params.n_min || n > params.n_max) throw domain_error("photon number outside the window");
  const ChainParams p = space_chain_equivalent(params);
  AmplitudeField out = AmplitudeField::like(params);
  out.coordinate = t;
  analytic_column(initial, p, n, t, out);
  return out;
}

SynchronismReport check_synchronism(const ChainParams& params, double tol) {
  const ChainParams p = space_chain_equivalent(params);
  SynchronismReport r;
  const double h1 = 0.5 * p.k, h2 = -0.5 * p.k;
  r.detuning_eff1 = detuning_eff(p, h1);
  r.detuning_eff2 = detuning_eff(p, h2);
  r.family1_synchronous = std::abs(r.detuning_eff1) < tol;
  r.family2_synchronous = std::abs(r.detuning_eff2) < tol;
  r.suggested_detuning1 = theta1(p, h1) - theta2(p, h1);
  r.suggested_detuning2 = theta1(p, h2) - theta2(p, h2);
  return r;
}

std::vector<double> inversion_density(const AmplitudeField& field) {
  std::vector<double> w(static_cast<std::size_t>(field.sites()), 0.0);
  for (int p = 0; p < field.sites(); ++p)
    for (int n = field.n_min(); n <= field.n_max(); ++n)
      w[static_cast<std::size_t>(p)] += std::norm(field.A(p, n)) - std::norm(field.B(p, n));
  return w;
}

std::vector<double> inversion_density_closed(const AmplitudeField& initial,
                                             const ChainParams& params, double t) {
  params.validate();
  check_shape(initial, params);
  const ChainParams p = space_chain_equivalent(params);
  const double a = p.lattice_spacing;
  const double shift = p.xi2 * a * a * p.k * t / a;
  const double decay = std::exp(-2.0 * p.relaxation_lambda * t);
  std::vector<double> w(static_cast<std::size_t>(p.site_count), 0.0);
  std::vector<cd> col(static_cast<std::size_t>(p.site_count));
  for (int n = p.n_min; n <= p.n_max; ++n) {
    for (int s = 0; s < p.site_count; ++s) col[static_cast<std::size_t>(s)] = initial.A(s, n);
    const auto moved = ring_translate(col, shift);
    const double sn = std::sin(p.g * std::sqrt(n + 1.0) * t);
    const double bracket = 1.0 - 2.0 * sn * sn;
    for (int s = 0; s < p.site_count; ++s)
      w[static_cast<std::size_t>(s)] += std::norm(moved[static_cast<std::size_t>(s)]) * bracket * decay;
  }
  return w;
}

double integral_inversion(std::span<const double> density) {
  double s = 0.0;
  for (double v : density) s += v;
  return s;
}

double integral_inversion(const AmplitudeField& field) {
  const auto w = inversion_density(field);
  return integral_inversion(w);
}

double integral_inversion_closed(const AmplitudeField& initial, const ChainParams& params, double t) {
  params.validate();
  check_shape(initial, params);
  double s = 0.0;
  for (int n = params.n_min; n <= params.n_max; ++n) {
    double weight = 0.0;
    for (int p = 0; p < params.site_count; ++p) weight += std::norm(initial.A(p, n));
    const double sn = std::sin(params.g * std::sqrt(n + 1.0) * t);
    s += weight * (1.0 - 2.0 * sn * sn);
  }
  return s * std::exp(-2.0 * params.relaxation_lambda * t);
}

}  // namespace rabiflux::chain
