#include "rabiflux/spectro_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "format_util.hpp"
#include "least_squares.hpp"
#include "rabiflux/constants.hpp"
#include "rabiflux/errors.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/jcm.hpp"

namespace rabiflux::analysis {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

LinearFit linear_fit(const std::vector<double>& y) {
  LinearFit f;
  const auto n = static_cast<double>(y.size());
  if (y.empty()) return f;
  if (y.size() == 1) {
    f.intercept = y[0];
    return f;
  }
  const double xm = 0.5 * (n - 1.0);
  const double ym = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i) - xm;
    sxy += dx * (y[i] - ym);
    sxx += dx * dx;
  }
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  return f;
}

PeakList subset(const PeakList& p, std::size_t b, std::size_t e) {
  PeakList out;
  for (std::size_t i = b; i < e; ++i) {
    out.positions.push_back(p.positions[i]);
    out.amplitudes.push_back(p.amplitudes[i]);
    out.widths_pp.push_back(p.widths_pp[i]);
    out.prominences.push_back(p.prominences[i]);
  }
  return out;
}

// Crossing of `level` between samples i and j, linear in field.
double crossing(const Spectrum& s, std::size_t i, std::size_t j, double level) {
  const double yi = s.amplitude[i], yj = s.amplitude[j];
  const double f = yj != yi ? (level - yi) / (yj - yi) : 0.5;
  return s.field[i] + f * (s.field[j] - s.field[i]);
}

}  // namespace

double prominence_threshold(const Spectrum& s, double fraction) {
  if (s.amplitude.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(s.amplitude.begin(), s.amplitude.end());
  return fraction * (*hi - *lo);
}

PeakList detect_peaks(const Spectrum& s, double min_prominence) {
  if (s.field.size() != s.amplitude.size()) throw input_error("field and amplitude lengths differ");
  if (s.size() < 3) throw insufficient_data_error("peak detection needs at least 3 samples");
  const auto& y = s.amplitude;
  const std::size_t n = y.size();
  struct Found {
    double pos, amp, width, prom;
  };
  std::vector<Found> found;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // Plateau: advance to its end and require a drop afterwards.
    std::size_t r = i;
    while (r + 1 < n && y[r + 1] == y[i]) ++r;
    if (r + 1 >= n) continue;
    double left_min = y[i];
    std::size_t l = i;
    while (l > 0 && y[l - 1] <= y[i]) {
      --l;
      left_min = std::min(left_min, y[l]);
    }
    double right_min = y[i];
    std::size_t q = r;
    while (q + 1 < n && y[q + 1] <= y[i]) {
      ++q;
      right_min = std::min(right_min, y[q]);
    }
    const double prom = y[i] - std::max(left_min, right_min);
    if (!(prom >= min_prominence) || prom <= 0.0) continue;

    double pos = s.field[i], amp = y[i];
    if (r == i) {
      const double x0 = s.field[i - 1], x1 = s.field[i], x2 = s.field[i + 1];
      const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
      const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
      const double c2 = (d12 - d01) / (x2 - x0);
      if (c2 < 0.0) {
        const double c1 = d01 - c2 * (x0 + x1);
        const double xv = -c1 / (2.0 * c2);
        if ((xv - x0) * (xv - x2) <= 0.0) {
          pos = xv;
          amp = y0 + d01 * (xv - x0) + c2 * (xv - x0) * (xv - x1);
        }
      }
    } else {
      pos = 0.5 * (s.field[i] + s.field[r]);
    }
    const double half = y[i] - 0.5 * prom;
    std::size_t a = i;
    while (a > 0 && y[a - 1] > half) --a;
    std::size_t b = r;
    while (b + 1 < n && y[b + 1] > half) ++b;
    const double xl = a > 0 ? crossing(s, a - 1, a, half) : s.field[0];
    const double xr = b + 1 < n ? crossing(s, b, b + 1, half) : s.field[n - 1];
    found.push_back({pos, amp, std::abs(xr - xl), prom});
    i = r;
  }
  std::sort(found.begin(), found.end(), [](const Found& u, const Found& v) { return u.pos < v.pos; });
  PeakList out;
  for (const auto& f : found) {
    out.positions.push_back(f.pos);
    out.amplitudes.push_back(f.amp);
    out.widths_pp.push_back(f.width);
    out.prominences.push_back(f.prom);
  }
  return out;
}

SplittingStats splitting_stats(const PeakList& peaks, int polynomial_degree) {
  if (peaks.size() < 2) throw insufficient_data_error("splitting statistics need at least 2 peaks");
  SplittingStats st;
  for (std::size_t i = 1; i < peaks.size(); ++i)
    st.splittings.push_back(peaks.positions[i] - peaks.positions[i - 1]);
  st.mean = mean_of(st.splittings);
  double ss = 0.0;
  for (double d : st.splittings) ss += (d - st.mean) * (d - st.mean);
  st.mean_square_deviation = std::sqrt(ss / static_cast<double>(st.splittings.size()));
  const std::size_t m = st.splittings.size();
  if (peaks.size() >= 3) {
    st.linear_fit = linear_fit(st.splittings);
    const int deg = std::clamp(polynomial_degree, 0, std::min(4, static_cast<int>(m) - 1));
    std::vector<double> idx(m);
    std::iota(idx.begin(), idx.end(), 0.0);
    st.polynomial_fit = detail::polyfit(idx, st.splittings, deg);
  }

  // Four-line subgroups: choose the phase that makes within-group splittings most uniform.
  const std::size_t np = peaks.size();
  double best_cost = -1.0;
  std::size_t best_offset = 0;
  if (np >= 8) {
    for (std::size_t off = 0; off < 4; ++off) {
      double cost = 0.0;
      std::size_t begin = 0;
      std::size_t end = off == 0 ? 4 : off;
      while (begin < np) {
        end = std::min(end, np);
        if (end - begin >= 3) {
          std::vector<double> d(st.splittings.begin() + static_cast<std::ptrdiff_t>(begin),
                                st.splittings.begin() + static_cast<std::ptrdiff_t>(end - 1));
          const double mu = mean_of(d);
          for (double v : d) cost += (v - mu) * (v - mu);
        }
        begin = end;
        end = begin + 4;
      }
      if (best_cost < 0.0 || cost < best_cost) {
        best_cost = cost;
        best_offset = off;
      }
    }
  }
  const double within_rms = best_cost >= 0.0 ? std::sqrt(best_cost / static_cast<double>(m)) : 0.0;
  if (best_cost >= 0.0 && within_rms < 0.5 * st.mean_square_deviation) {
    std::size_t begin = 0;
    std::size_t end = best_offset == 0 ? 4 : best_offset;
    while (begin < np) {
      end = std::min(end, np);
      st.subgroups.emplace_back(begin, end);
      begin = end;
      end = begin + 4;
    }
  } else {
    // Unconstrained change-points on the splitting sequence.
    std::vector<double> jumps;
    for (std::size_t i = 1; i < m; ++i) jumps.push_back(std::abs(st.splittings[i] - st.splittings[i - 1]));
    const double scale = 1.4826 * median(jumps);
    const double thr = std::max(4.0 * scale, 0.25 * std::abs(st.mean));
    std::size_t begin = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (std::abs(st.splittings[i] - st.splittings[i - 1]) > thr) {
        st.subgroups.emplace_back(begin, i + 1);
        begin = i + 1;
      }
    }
    st.subgroups.emplace_back(begin, np);
  }
  return st;
}

std::vector<PeakList> partition_groups(const PeakList& peaks, double gap_factor) {
  std::vector<PeakList> groups;
  if (peaks.size() == 0) return groups;
  if (peaks.size() < 3) {
    groups.push_back(peaks);
    return groups;
  }
  std::vector<double> gaps;
  for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks.positions[i] - peaks.positions[i - 1]);
  const double thr = gap_factor * median(gaps);
  std::size_t begin = 0;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (gaps[i - 1] > thr) {
      groups.push_back(subset(peaks, begin, i));
      begin = i;
    }
  }
  groups.push_back(subset(peaks, begin, peaks.size()));
  return groups;
}

EnvelopeFit fit_envelope(const PeakList& peaks) {
  if (peaks.size() < 5) throw insufficient_data_error("envelope fit needs at least 5 peaks");
  const auto& x = peaks.positions;
  const auto& y = peaks.amplitudes;
  const double amax = *std::max_element(y.begin(), y.end());
  if (!(amax > 0.0)) throw fit_error("envelope fit needs positive peak amplitudes");
  double w = 0.0, xm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = std::max(y[i], 0.0);
    w += wi;
    xm += wi * x[i];
  }
  xm /= w;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) var += std::max(y[i], 0.0) * (x[i] - xm) * (x[i] - xm);
  const double span = x.back() - x.front();
  double s0 = std::sqrt(var / w);
  if (!(s0 > 0.0)) s0 = 0.25 * span;

  const auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - p(1)) / p(2);
      r(static_cast<Eigen::Index>(i)) = p(0) * std::exp(-0.5 * z * z) - y[i];
    }
  };
  Eigen::VectorXd start(3);
  start << amax, xm, s0;
  const auto fit = detail::levenberg_marquardt(model, static_cast<int>(x.size()), start);
  if (!fit.converged) throw fit_error("envelope fit did not converge", fit.residuals);
  const double sigma = std::abs(fit.params(2));
  if (!(sigma <= 10.0 * span) || !std::isfinite(sigma))
    throw fit_error("envelope width unbounded: amplitudes show no Gaussian decay", fit.residuals);

  EnvelopeFit e;
  e.amplitude = fit.params(0);
  e.center = fit.params(1);
  e.sigma = sigma;
  e.residual_rms = fit.rms;
  e.width_deltaH = sigma * std::sqrt(2.0 * std::log(2.0));
  e.mean_splitting = span / static_cast<double>(x.size() - 1);
  e.n_oscillations = e.width_deltaH / e.mean_splitting;
  return e;
}

double envelope_width_product(double n_oscillations, double mean_splitting) {
  return n_oscillations * mean_splitting;
}

double extract_rabi_frequency(double delta_H, double g_factor_value, double n_oscillations) {
  if (!(delta_H > 0.0 && g_factor_value > 0.0 && n_oscillations > 0.0))
    throw domain_error("Rabi frequency inputs must be positive");
  return kMHzPerGauss * delta_H * g_factor_value * n_oscillations;
}

double extract_rabi_frequency(const EnvelopeFit& env, double g_factor_value) {
  return extract_rabi_frequency(env.width_deltaH, g_factor_value, env.n_oscillations);
}

double g_factor(double microwave_freq_mhz, double resonance_field) {
  if (!(microwave_freq_mhz > 0.0 && resonance_field > 0.0))
    throw domain_error("g-factor inputs must be positive");
  return microwave_freq_mhz / (kMHzPerGauss * resonance_field);
}

double asymmetry_ratio(std::span<const double> amplitude) {
  if (amplitude.empty()) throw shape_error("empty trace");
  const auto [lo, hi] = std::minmax_element(amplitude.begin(), amplitude.end());
  if (!(*hi > 0.0) || !(*lo < 0.0))
    throw shape_error("trace needs one positive and one negative extremum");
  return *hi / std::abs(*lo);
}

double asymmetry_ratio(const Spectrum& s) { return asymmetry_ratio(std::span<const double>(s.amplitude)); }

TanhFit tanh_inflection_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw input_error("x and y lengths differ");
  if (x.size() < 6) throw insufficient_data_error("tanh fit needs at least 6 points");
  const std::size_t n = x.size();
  const auto [xlo_it, xhi_it] = std::minmax_element(x.begin(), x.end());
  const double xlo = *xlo_it, xhi = *xhi_it;
  const double span = xhi - xlo;
  // Plateau guesses from the outer sixths, ordered by x.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const std::size_t k = std::max<std::size_t>(1, n / 6);
  double y0 = 0.0, y1 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    y0 += y[order[i]];
    y1 += y[order[n - 1 - i]];
  }
  y0 /= static_cast<double>(k);
  y1 /= static_cast<double>(k);
  const double mid = 0.5 * (y0 + y1);
  double xi = x[order[n / 2]];
  double best = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(y[i] - mid);
    if (d < best) {
      best = d;
      xi = x[i];
    }
  }
  const auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i)
      r(static_cast<Eigen::Index>(i)) =
          p(1) + 0.5 * (p(0) - p(1)) * (1.0 - std::tanh((x[i] - p(2)) / p(3))) - y[i];
  };
  Eigen::VectorXd start(4);
  start << y0, y1, xi, span / 20.0;
  const auto fit = detail::levenberg_marquardt(model, static_cast<int>(n), start);
  if (!fit.converged) throw fit_error("tanh fit did not converge", fit.residuals);
  TanhFit t;
  t.y0 = fit.params(0);
  t.y1 = fit.params(1);
  t.inflection = fit.params(2);
  t.width = std::abs(fit.params(3));
  t.residual_rms = fit.rms;
  if (!std::isfinite(t.width) || t.width > span || t.inflection < xlo || t.inflection > xhi)
    throw fit_error("no step: tanh width unbounded or inflection outside the data", fit.residuals);
  return t;
}

double lifetime_from_inflection(double H_i, double g_factor_value) {
  if (!(H_i > 0.0 && g_factor_value > 0.0)) throw domain_error("lifetime inputs must be positive");
  return 1.0 / (kHzPerGauss * g_factor_value * H_i);
}

StepReport detect_steps(std::span<const double> x, std::span<const double> y, double sensitivity,
                        double tolerance_fraction) {
  if (x.size() != y.size()) throw input_error("x and y lengths differ");
  if (x.size() < 10) throw insufficient_data_error("step detection needs at least 10 points");
  const std::size_t n = x.size();
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) throw input_error("step detection needs strictly increasing x");
  std::vector<double> slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    slope[i] = (y[hi] - y[lo]) / (x[hi] - x[lo]);
  }
  const double base = median(slope);
  std::vector<double> dev(n), absdev(n);
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = slope[i] - base;
    absdev[i] = std::abs(dev[i]);
  }
  const double mad = median(absdev);
  const double peak = *std::max_element(absdev.begin(), absdev.end());
  const double thr = sensitivity * std::max(1.4826 * mad, 1e-3 * peak);

  StepReport rep;
  std::size_t i = 0;
  while (i < n) {
    if (!(absdev[i] > thr) || peak == 0.0) {
      ++i;
      continue;
    }
    double wsum = 0.0, xsum = 0.0;
    while (i < n && absdev[i] > thr) {
      wsum += absdev[i];
      xsum += absdev[i] * x[i];
      ++i;
    }
    rep.positions.push_back(xsum / wsum);
  }
  for (std::size_t k = 1; k < rep.positions.size(); ++k) rep.gaps.push_back(rep.positions[k] - rep.positions[k - 1]);
  if (!rep.gaps.empty()) {
    rep.reference_gap = rep.gaps.front();
    rep.tolerance = tolerance_fraction * rep.reference_gap;
    rep.equidistant = true;
    for (double g : rep.gaps) {
      const double d = std::abs(g - rep.reference_gap);
      rep.gap_deviation.push_back(d);
      const bool ok = d <= rep.tolerance + 1e-12 * rep.reference_gap;
      rep.gap_equidistant.push_back(ok);
      rep.equidistant = rep.equidistant && ok;
    }
  }
  return rep;
}

double relaxation_time(double delta_nu) { return jcm::relaxation_time_from_linewidth(delta_nu); }

double dyson_ratio(DysonFamily family, double angle) {
  esr::DysonLineSpec spec;
  spec.width_pp = 2.0 / std::sqrt(3.0);  // Gamma = 1
  spec.mixing_angle = angle;
  constexpr std::size_t kSamples = 40001;
  std::vector<double> h(kSamples);
  for (std::size_t i = 0; i < kSamples; ++i) h[i] = -40.0 + 80.0 * static_cast<double>(i) / (kSamples - 1);
  const auto y = family == DysonFamily::kStandard ? esr::dyson_line(spec, h)
                                                   : esr::sharpened_dyson_line(spec, h);
  return asymmetry_ratio(std::span<const double>(y));
}

DysonCalibration calibrate_dyson(double target_ratio, DysonFamily family) {
  DysonCalibration c;
  c.family = family;
  double lo = 0.0;
  double hi = 0.0;
  if (family == DysonFamily::kStandard) {
    hi = 0.5 * kPi;
    c.ceiling = dyson_ratio(family, hi);
  } else {
    // A/B = 8 (1 + t)/(1 - t)^2 with t = tan(chi), unbounded as chi -> pi/4.
    hi = std::atan(0.95);
    c.ceiling = INFINITY;
  }
  const double r_lo = dyson_ratio(family, lo);
  const double r_hi = dyson_ratio(family, hi);
  if (target_ratio < r_lo || target_ratio > r_hi) {
    c.reached = false;
    c.angle = target_ratio < r_lo ? lo : hi;
    c.ratio = target_ratio < r_lo ? r_lo : r_hi;
    return c;
  }
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    const double m = 0.5 * (lo + hi);
    if (dyson_ratio(family, m) < target_ratio) lo = m;
    else hi = m;
  }
  c.reached = true;
  c.angle = 0.5 * (lo + hi);
  c.ratio = dyson_ratio(family, c.angle);
  return c;
}

std::vector<std::pair<std::string, std::string>> PipelineReport::lines() const {
  using util::fmt9;
  return {{"total_peaks", std::to_string(total_peaks)},
          {"group_count", std::to_string(group_count)},
          {"main_group_peaks", std::to_string(main_group.size())},
          {"mean_splitting_G", fmt9(splitting.mean)},
          {"splitting_rms_deviation_G", fmt9(splitting.mean_square_deviation)},
          {"splitting_linear_slope_G", fmt9(splitting.linear_fit.slope)},
          {"envelope_center_G", fmt9(envelope.center)},
          {"envelope_sigma_G", fmt9(envelope.sigma)},
          {"envelope_deltaH_G", fmt9(envelope.width_deltaH)},
          {"n_oscillations", fmt9(envelope.n_oscillations)},
          {"rabi_frequency_MHz", fmt9(rabi_frequency_mhz)},
          {"g_factor", fmt9(g_factor)}};
}

PipelineReport analyze_spectrum(const Spectrum& s, const PipelineOptions& options) {
  s.validate();
  PipelineReport rep;
  const auto peaks = detect_peaks(s, prominence_threshold(s, options.prominence_fraction));
  rep.total_peaks = peaks.size();
  const auto groups = partition_groups(peaks, options.gap_factor);
  rep.group_count = groups.size();
  if (groups.empty()) throw insufficient_data_error("no peaks above the prominence threshold");
  const auto main = std::max_element(groups.begin(), groups.end(), [](const PeakList& a, const PeakList& b) {
    return *std::max_element(a.amplitudes.begin(), a.amplitudes.end()) <
           *std::max_element(b.amplitudes.begin(), b.amplitudes.end());
  });
  rep.main_group = *main;
  rep.splitting = splitting_stats(rep.main_group);
  rep.envelope = fit_envelope(rep.main_group);
  if (options.microwave_freq_mhz > 0.0) rep.g_factor = g_factor(options.microwave_freq_mhz, rep.envelope.center);
  const double g_used = rep.g_factor > 0.0 ? rep.g_factor : options.assumed_g_factor;
  rep.rabi_frequency_mhz = extract_rabi_frequency(rep.envelope, g_used);
  return rep;
}

}  // namespace rabiflux::analysis
