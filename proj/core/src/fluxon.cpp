#include "rabiflux/fluxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rabiflux/errors.hpp"

namespace rabiflux::fluxon {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap(double d) { return d - kTwoPi * std::round(d / kTwoPi); }

double wrap_length(double d, double L) { return d - L * std::round(d / L); }

void check_state(const JunctionState& s, const JunctionParams& p) {
  const auto n = static_cast<std::size_t>(p.grid_points);
  if (s.phi.size() != n || s.phi_t.size() != n || (!s.phi_prev.empty() && s.phi_prev.size() != n))
    throw domain_error("junction state does not match the grid");
}

void check_stability(const JunctionParams& p) {
  const double dx = p.dx();
  if (!(p.dt > 0.0)) throw domain_error("dt must be > 0");
  if (!(p.dt < dx)) throw stability_error("CFL violated: dt must be below dx");
  if (p.beta > 0.0 && p.beta * p.dt / (dx * dx) > 0.5)
    throw stability_error("surface damping too stiff for the explicit step: reduce dt");
}

// One leapfrog update; the alpha term is centered, the beta term uses a backward time difference.
struct Stepper {
  const JunctionParams& p;
  std::size_t n;
  double dx, dt;
  std::vector<double> next;

  explicit Stepper(const JunctionParams& prm)
      : p(prm), n(static_cast<std::size_t>(prm.grid_points)), dx(prm.dx()), dt(prm.dt), next(n) {}

  void advance(const std::vector<double>& cur, const std::vector<double>& prev) {
    const double inv_dx2 = 1.0 / (dx * dx);
    const double cp = 1.0 + 0.5 * p.alpha * dt;
    const double cm = 1.0 - 0.5 * p.alpha * dt;
    const double dt2 = dt * dt;
    const double bcoef = p.beta / dt;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t l = i == 0 ? n - 1 : i - 1;
      const std::size_t r = i + 1 == n ? 0 : i + 1;
      const double lap = (wrap(cur[r] - cur[i]) - wrap(cur[i] - cur[l])) * inv_dx2;
      double acc = lap - std::sin(cur[i]) + p.gamma;
      if (p.beta != 0.0) {
        const double dl = cur[l] - prev[l], di = cur[i] - prev[i], dr = cur[r] - prev[r];
        acc += bcoef * (dr - 2.0 * di + dl) * inv_dx2;
      }
      next[i] = (2.0 * cur[i] - cm * prev[i] + dt2 * acc) / cp;
    }
  }
};

void rebuild_prev(JunctionState& s, const JunctionParams& p) {
  // Second-order Taylor step back from (phi, phi_t).
  const std::size_t n = s.phi.size();
  const double dx = p.dx();
  s.phi_prev.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i == 0 ? n - 1 : i - 1;
    const std::size_t r = i + 1 == n ? 0 : i + 1;
    const double lap = (wrap(s.phi[r] - s.phi[i]) - wrap(s.phi[i] - s.phi[l])) / (dx * dx);
    const double lapt = (s.phi_t[r] - 2.0 * s.phi_t[i] + s.phi_t[l]) / (dx * dx);
    const double acc = lap - std::sin(s.phi[i]) + p.gamma - p.alpha * s.phi_t[i] + p.beta * lapt;
    s.phi_prev[i] = s.phi[i] - p.dt * s.phi_t[i] + 0.5 * p.dt * p.dt * acc;
  }
}

double kink_profile(double s, double w) { return 4.0 * std::atan(std::exp(s / w)); }

}  // namespace

void JunctionParams::validate() const {
  if (!(alpha >= 0.0)) throw domain_error("alpha must be >= 0");
  if (!(beta >= 0.0)) throw domain_error("beta must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw domain_error("gamma must lie in [0, 1)");
  if (!(length > 0.0)) throw domain_error("junction length must be > 0");
  if (grid_points < 8) throw domain_error("grid needs at least 8 points");
  if (!(dt > 0.0)) throw domain_error("dt must be > 0");
}

JunctionState init_kinks(const JunctionParams& params, std::span<const double> centers, double u) {
  params.validate();
  if (!(std::abs(u) < 1.0)) throw domain_error("kink velocity must satisfy |u| < 1");
  if (centers.empty()) throw domain_error("at least one kink center is required");
  const auto n = static_cast<std::size_t>(params.grid_points);
  const double dx = params.dx();
  const double L = params.length;
  const double w = std::sqrt(1.0 - u * u);
  JunctionState s;
  s.phi.assign(n, 0.0);
  s.phi_t.assign(n, 0.0);
  s.phi_prev.assign(n, 0.0);
  for (double c : centers) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = dx * static_cast<double>(i);
      const double sn = wrap_length(x - c, L);
      const double sp = sn + u * params.dt;  // same branch as sn, no 2 pi slip
      s.phi[i] += kink_profile(sn, w);
      s.phi_prev[i] += kink_profile(sp, w);
      s.phi_t[i] += -u * (2.0 / w) / std::cosh(sn / w);
    }
  }
  return s;
}

JunctionState init_kink(const JunctionParams& params, double x0, double u) {
  const double c[1] = {x0};
  return init_kinks(params, c, u);
}

int winding_number(const JunctionState& state) {
  const std::size_t n = state.phi.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += wrap(state.phi[(i + 1) % n] - state.phi[i]);
  return static_cast<int>(std::lround(s / kTwoPi));
}

JunctionState step_pde(JunctionState state, const JunctionParams& params, std::size_t n_steps) {
  params.validate();
  check_stability(params);
  check_state(state, params);
  if (state.phi_prev.empty()) rebuild_prev(state, params);
  Stepper st(params);
  std::vector<double> cur = std::move(state.phi);
  std::vector<double> prev = std::move(state.phi_prev);
  for (std::size_t k = 0; k < n_steps; ++k) {
    st.advance(cur, prev);
    prev.swap(cur);
    cur.swap(st.next);
  }
  // Centered velocity from a look-ahead step.
  st.advance(cur, prev);
  state.phi_t.resize(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) state.phi_t[i] = (st.next[i] - prev[i]) / (2.0 * params.dt);
  for (double v : state.phi_t)
    if (!std::isfinite(v)) throw stability_error("junction integration diverged");
  state.phi = std::move(cur);
  state.phi_prev = std::move(prev);
  state.time += params.dt * static_cast<double>(n_steps);
  return state;
}

double energy(const JunctionState& state, const JunctionParams& params) {
  check_state(state, params);
  const std::size_t n = state.phi.size();
  const double dx = params.dx();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double px = wrap(state.phi[(i + 1) % n] - state.phi[i]) / dx;
    e += 0.5 * state.phi_t[i] * state.phi_t[i] + 0.5 * px * px + (1.0 - std::cos(state.phi[i]));
  }
  return e * dx;
}

namespace {

// Unwrapped profile psi_0..psi_n with psi_n = psi_0 + 2 pi winding.
std::vector<double> unwrapped(const JunctionState& s) {
  const std::size_t n = s.phi.size();
  std::vector<double> psi(n + 1);
  psi[0] = s.phi[0];
  for (std::size_t i = 0; i < n; ++i) psi[i + 1] = psi[i] + wrap(s.phi[(i + 1) % n] - s.phi[i]);
  return psi;
}

std::vector<double> level_crossings(const std::vector<double>& psi, double dx, double offset) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < psi.size(); ++i) {
    const double a = psi[i], b = psi[i + 1];
    if (a == b) continue;
    const double lo = std::min(a, b), hi = std::max(a, b);
    // Levels offset + 2 pi m inside (lo, hi].
    const double m0 = std::ceil((lo - offset) / kTwoPi);
    for (double m = m0; offset + kTwoPi * m <= hi; m += 1.0) {
      const double level = offset + kTwoPi * m;
      if (level == lo && lo == a) continue;
      const double f = (level - a) / (b - a);
      out.push_back(dx * (static_cast<double>(i) + f));
    }
  }
  return out;
}

}  // namespace

std::vector<double> kink_centers(const JunctionState& state, const JunctionParams& params) {
  check_state(state, params);
  auto c = level_crossings(unwrapped(state), params.dx(), kPi);
  for (auto& v : c) v = std::fmod(v, params.length);
  std::sort(c.begin(), c.end());
  return c;
}

double kink_width(const JunctionState& state, const JunctionParams& params) {
  check_state(state, params);
  const auto psi = unwrapped(state);
  const double dx = params.dx();
  const auto centers = level_crossings(psi, dx, kPi);
  if (centers.empty()) throw no_kink_error("no kink in the junction");
  const double c = centers.front();
  const auto lower = level_crossings(psi, dx, 0.5 * kPi);
  const auto upper = level_crossings(psi, dx, 1.5 * kPi);
  auto nearest = [&](const std::vector<double>& v) {
    double best = v.front();
    for (double x : v)
      if (std::abs(wrap_length(x - c, params.length)) < std::abs(wrap_length(best - c, params.length))) best = x;
    return best;
  };
  if (lower.empty() || upper.empty()) throw no_kink_error("kink profile incomplete");
  const double d = std::abs(wrap_length(nearest(upper) - nearest(lower), params.length));
  return d / (2.0 * std::asinh(1.0));
}

Snapshot snapshot(const JunctionState& state, const JunctionParams& params) {
  const auto c = kink_centers(state, params);
  if (c.empty()) throw no_kink_error("no kink in the junction");
  return {state.time, c.front()};
}

double measure_velocity(std::span<const Snapshot> trajectory, double ring_length) {
  if (trajectory.size() < 2) throw insufficient_data_error("velocity needs at least 2 snapshots");
  std::vector<double> x(trajectory.size());
  x[0] = trajectory[0].center;
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    x[i] = x[i - 1] + wrap_length(trajectory[i].center - trajectory[i - 1].center, ring_length);
  double tm = 0.0, xm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    tm += trajectory[i].time;
    xm += x[i];
  }
  tm /= static_cast<double>(x.size());
  xm /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dt = trajectory[i].time - tm;
    sxy += dt * (x[i] - xm);
    sxx += dt * dt;
  }
  if (!(sxx > 0.0)) throw insufficient_data_error("snapshots need distinct times");
  return sxy / sxx;
}

BalanceVelocity power_balance_velocity(double alpha, double gamma) {
  if (!(alpha >= 0.0) || !(gamma >= 0.0)) throw domain_error("alpha and gamma must be >= 0");
  if (alpha == 0.0) return {gamma > 0.0 ? 1.0 : 0.0, gamma > 0.0};
  const double r = 4.0 * alpha / (kPi * gamma);
  return {1.0 / std::sqrt(1.0 + r * r), false};
}

DcVoltage dc_voltage(int n_fluxons, double u, double length, double swihart_c, double flux_quantum) {
  if (n_fluxons < 0 || !(length > 0.0) || !(swihart_c > 0.0) || !(flux_quantum > 0.0))
    throw domain_error("dc_voltage inputs must be positive");
  DcVoltage v;
  v.volts = n_fluxons * flux_quantum * swihart_c * u / length;
  v.normalized = n_fluxons * u / length;
  return v;
}

namespace {

double spatial_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SteadyState run_to_steady_state(JunctionState state, const JunctionParams& params,
                                const SteadyOptions& options) {
  params.validate();
  check_stability(params);
  check_state(state, params);
  if (!(options.window > 0.0)) throw domain_error("steady-state window must be > 0");
  const auto steps = static_cast<std::size_t>(std::llround(options.window / params.dt));
  const double span = params.dt * static_cast<double>(steps);
  const int n = winding_number(state);
  const double to_u = n != 0 ? -params.length / (kTwoPi * n) : 1.0;
  SteadyState out;
  double prev_u = NAN;
  double elapsed = 0.0;
  while (elapsed < options.max_time) {
    const double m0 = spatial_mean(state.phi);
    state = step_pde(std::move(state), params, steps);
    elapsed += span;
    const double v = (spatial_mean(state.phi) - m0) / span;
    const double u = v * to_u;
    out.mean_voltage = v;
    out.velocity = u;
    if (std::isfinite(prev_u) && std::abs(u - prev_u) < options.tolerance) {
      out.converged = true;
      break;
    }
    prev_u = u;
  }
  out.elapsed = elapsed;
  out.state = std::move(state);
  return out;
}

std::vector<IVPoint> sweep_iv(const JunctionParams& params, std::span<const double> gamma_grid,
                              JunctionState initial, const SteadyOptions& options) {
  std::vector<IVPoint> out;
  JunctionState s = std::move(initial);
  for (double g : gamma_grid) {
    if (!(g >= 0.0 && g < 1.0)) throw domain_error("bias grid must lie in [0, 1)");
    JunctionParams p = params;
    p.gamma = g;
    auto st = run_to_steady_state(std::move(s), p, options);
    IVPoint pt;
    pt.bias_gamma = g;
    pt.mean_voltage = st.mean_voltage;
    pt.fluxon_count = winding_number(st.state);
    pt.velocity = st.velocity;
    pt.converged = st.converged;
    out.push_back(pt);
    s = std::move(st.state);
  }
  return out;
}

WakeReport wake_probe(const JunctionState& state, const JunctionParams& params, double threshold) {
  check_state(state, params);
  const auto n = static_cast<std::size_t>(params.grid_points);
  const double dx = params.dx();
  const double L = params.length;
  const auto centers = kink_centers(state, params);
  if (centers.empty()) throw no_kink_error("no kink in the junction");
  const double c = centers.front();

  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) px[i] = wrap(state.phi[(i + 1) % n] - state.phi[i]) / dx;
  // phi_x at x_i + dx/2; sample the kink center.
  const auto ic = static_cast<std::size_t>(std::floor(c / dx)) % n;
  const double peak = *std::max_element(px.begin(), px.end());
  const double slope = px[ic];
  const double vt = state.phi_t[ic];
  const double u = slope != 0.0 ? std::min(0.999, std::abs(vt / slope)) : 0.0;
  const double dir = vt > 0.0 ? -1.0 : 1.0;  // phi_t = -u phi_x for a kink moving at u
  const double w = std::sqrt(1.0 - u * u);

  WakeReport rep;
  rep.window_start = 9.5 * w;
  rep.window_end = std::min(0.5 * L - dx, rep.window_start + std::max(20.0 * w, 5.0));
  if (!(rep.window_end > rep.window_start + 4.0 * dx)) return rep;

  std::vector<double> xs, ys;
  for (double d = rep.window_start; d <= rep.window_end; d += dx) {
    const double x = c - dir * d;
    double pos = std::fmod(x - 0.5 * dx, L);
    if (pos < 0.0) pos += L;
    const double fi = pos / dx;
    const auto i0 = static_cast<std::size_t>(std::floor(fi)) % n;
    const double f = fi - std::floor(fi);
    xs.push_back(d);
    ys.push_back((1.0 - f) * px[i0] + f * px[(i0 + 1) % n]);
  }
  // Remove a linear trend.
  const double m = static_cast<double>(xs.size());
  const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - xm) * (ys[i] - ym);
    sxx += (xs[i] - xm) * (xs[i] - xm);
  }
  const double b = sxx > 0.0 ? sxy / sxx : 0.0;
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    r[i] = ys[i] - ym - b * (xs[i] - xm);
    rep.amplitude = std::max(rep.amplitude, std::abs(r[i]));
  }
  rep.relative_amplitude = peak > 0.0 ? rep.amplitude / peak : 0.0;
  rep.detected = rep.relative_amplitude >= threshold;

  // Crossings count only once the signal swings past +/- a quarter of the peak,
  // so flat stretches with rounding-level wiggles add nothing.
  const double band = 0.25 * rep.amplitude;
  std::vector<double> zc;
  int side = 0;
  double last_cross = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0 && ((r[i - 1] < 0.0 && r[i] >= 0.0) || (r[i - 1] > 0.0 && r[i] <= 0.0)))
      last_cross = xs[i - 1] + (xs[i] - xs[i - 1]) * r[i - 1] / (r[i - 1] - r[i]);
    const int now = r[i] > band ? 1 : r[i] < -band ? -1 : 0;
    if (now == 0 || now == side) continue;
    if (side != 0) zc.push_back(last_cross);
    side = now;
  }
  if (zc.size() >= 3) {
    // Least-squares spacing of crossing positions against their index.
    const double k = static_cast<double>(zc.size());
    const double im = 0.5 * (k - 1.0);
    const double zm = std::accumulate(zc.begin(), zc.end(), 0.0) / k;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < zc.size(); ++i) {
      num += (static_cast<double>(i) - im) * (zc[i] - zm);
      den += (static_cast<double>(i) - im) * (static_cast<double>(i) - im);
    }
    rep.wavelength = 2.0 * num / den;
  }
  return rep;
}

}  // namespace rabiflux::fluxon
