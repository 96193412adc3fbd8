#include "rabiflux/harness/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "rabiflux/chain.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/fluxon.hpp"
#include "rabiflux/harness/acceptance.hpp"
#include "rabiflux/harness/io.hpp"
#include "rabiflux/jcm.hpp"
#include "rabiflux/spectro_analysis.hpp"

namespace rabiflux::harness {
namespace {

namespace fs = std::filesystem;

std::string key_value_text(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::size_t grid_count(double span, double step, const char* what) {
  if (!(step > 0.0) || !(span > 0.0)) throw domain_error(std::string(what) + ": span and step must be > 0");
  const double n = std::floor(span / step + 1e-9);
  if (n > 5e7) throw domain_error(std::string(what) + ": too many samples");
  return static_cast<std::size_t>(n) + 1;
}

int to_int(const RunConfig& cfg, const std::string& key, long lo, long hi) {
  const long v = cfg.integer(key);
  if (v < lo || v > hi)
    throw domain_error(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

void simulate_jcm(const RunConfig& cfg, std::ostream& log) {
  const auto field = jcm::CoherentFieldState::coherent(cfg.num("nbar"), cfg.num("phase"));
  const jcm::CouplingParams coupling{cfg.num("g"), cfg.num("detuning")};
  const std::string& init = cfg.str("init");
  jcm::QubitInit qubit;
  if (init == "ground") qubit = jcm::QubitInit::ground();
  else if (init == "excited") qubit = jcm::QubitInit::excited();
  else throw domain_error("init must be 'ground' or 'excited', got '" + init + "'");
  const int start = to_int(cfg, "fock_start", 0, 1);
  const auto fock = start == 0 ? jcm::FockSumStart::kZero : jcm::FockSumStart::kOne;

  const double dt = cfg.num("dt");
  const std::size_t n = grid_count(cfg.num("t_end"), dt, "time grid");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
  const auto w = jcm::inversion_trace(field, qubit, coupling, t, fock);

  CsvTable csv({"t", "inversion"});
  for (std::size_t i = 0; i < n; ++i) csv.row({t[i], w[i]});
  write_text(cfg.output_dir / "jcm_inversion.csv", csv.str());
  write_svg(cfg.output_dir / "jcm_inversion.svg",
            {"Atomic inversion", "t", "inversion", {{"inversion", t, w, false}}});

  std::vector<std::pair<std::string, std::string>> summary = {
      {"nbar", fmt(field.nbar)},
      {"window", std::to_string(field.n_min) + ".." + std::to_string(field.n_max)},
      {"collapse_time", fmt(jcm::collapse_time(coupling.g))},
      {"revival_time", fmt(jcm::revival_time(coupling.g, field.nbar, coupling.detuning))},
  };
  if (init == "ground" && field.nbar > 0.0)
    summary.emplace_back("revival_center", fmt(jcm::first_revival_center(field, coupling)));
  write_text(cfg.output_dir / "jcm_summary.txt", key_value_text(summary));
  log << "simulate-jcm: " << n << " samples\n";
}

void simulate_chain(const RunConfig& cfg, std::ostream& log) {
  chain::ChainParams p;
  p.site_count = to_int(cfg, "sites", 3, 1 << 20);
  p.lattice_spacing = cfg.num("spacing");
  p.omega0 = cfg.num("omega0");
  p.omega = cfg.num("omega");
  p.k = cfg.num("k");
  p.xi1 = cfg.num("xi1");
  p.xi2 = cfg.num("xi2");
  p.g = cfg.num("g");
  p.depolarization_shift = cfg.num("depolarization_shift");
  p.n_min = to_int(cfg, "n_min", 0, 1 << 20);
  p.n_max = to_int(cfg, "n_max", 0, 1 << 20);
  p.relaxation_lambda = cfg.num("lambda");
  const std::string& variant = cfg.str("variant");
  if (variant == "space") p.variant = chain::Variant::kSpaceChain;
  else if (variant == "time") p.variant = chain::Variant::kTimeLattice;
  else throw domain_error("variant must be 'space' or 'time', got '" + variant + "'");
  p.time_lattice_t1 = cfg.num("t1");
  p.light_speed = cfg.num("light_speed");
  if (cfg.flag("synchronize"))
    p.omega = p.omega0 - chain::check_synchronism(p, 1e-12).suggested_detuning2;
  p.validate();

  std::vector<double> weights{1.0};
  if (p.n_max > p.n_min) {
    if (!(cfg.num("nbar") > 0.0)) throw domain_error("nbar must be > 0 when n_max > n_min");
    weights = chain::coherent_weights(cfg.num("nbar"), p.n_min, p.n_max);
  }
  std::vector<chain::GaussianBeam> beams;
  if (cfg.num("excited_weight") != 0.0)
    beams.push_back({cfg.num("excited_weight"), cfg.num("excited_center"), cfg.num("excited_sigma"),
                     chain::Level::kExcited});
  if (cfg.num("ground_weight") != 0.0)
    beams.push_back({cfg.num("ground_weight"), cfg.num("ground_center"), cfg.num("ground_sigma"),
                     chain::Level::kGround});
  if (beams.empty()) throw domain_error("at least one beam weight must be nonzero");
  if (auto w = chain::dispersionless_warning(p, beams)) log << "warning: " << *w << "\n";

  const auto initial = chain::init_gaussian_beam(p, beams, weights);
  const double step = cfg.num("step");
  const std::size_t total = grid_count(cfg.num("t_end"), step, "evolution span") - 1;
  const auto samples = static_cast<std::size_t>(to_int(cfg, "samples", 1, 1 << 20));
  const std::size_t every = std::max<std::size_t>(1, total / samples);

  CsvTable trace({"t", "integral_inversion", "closed_form", "norm"});
  CsvTable density({"t", "site", "inversion_density"});
  std::vector<double> ts, wi, wc;
  auto observe = [&](const chain::AmplitudeField& f) {
    const auto d = chain::inversion_density(f);
    const double w = chain::integral_inversion(d);
    const double c = chain::integral_inversion_closed(initial, p, f.coordinate);
    trace.row({f.coordinate, w, c, f.norm_squared()});
    for (std::size_t s = 0; s < d.size(); ++s) density.row({f.coordinate, static_cast<double>(s), d[s]});
    ts.push_back(f.coordinate);
    wi.push_back(w);
    wc.push_back(c);
  };
  const auto traj = chain::integrate(initial, p, static_cast<double>(total) * step, step, every, observe);
  const chain::AmplitudeField& last = traj.snapshots.back();

  CsvTable final_state({"site", "n", "re_A", "im_A", "re_B", "im_B"});
  for (int s = 0; s < last.sites(); ++s)
    for (int n = last.n_min(); n <= last.n_max(); ++n)
      final_state.row({double(s), double(n), last.A(s, n).real(), last.A(s, n).imag(),
                       last.B(s, n).real(), last.B(s, n).imag()});

  const char* coord = p.variant == chain::Variant::kSpaceChain ? "t" : "x";
  write_text(cfg.output_dir / "chain_inversion.csv", trace.str());
  write_text(cfg.output_dir / "chain_density.csv", density.str());
  write_text(cfg.output_dir / "chain_final.csv", final_state.str());
  write_svg(cfg.output_dir / "chain_inversion.svg",
            {"Integral inversion", coord, "inversion",
             {{"numeric", ts, wi, false}, {"closed form", ts, wc, false}}});

  const auto sp = chain::subpacket_params(p, p.n_min);
  const auto sync = chain::check_synchronism(p, 1e-9);
  write_text(cfg.output_dir / "chain_summary.txt",
             key_value_text({{"omega", fmt(p.omega)},
                             {"detuning_eff1", fmt(sync.detuning_eff1)},
                             {"detuning_eff2", fmt(sync.detuning_eff2)},
                             {"v1_plus", fmt(sp.family1.v_plus)},
                             {"v1_minus", fmt(sp.family1.v_minus)},
                             {"v2_plus", fmt(sp.family2.v_plus)},
                             {"v2_minus", fmt(sp.family2.v_minus)},
                             {"norm_drift", fmt(traj.norm_drift)},
                             {"steps", std::to_string(traj.steps)}}));
  log << "simulate-chain: " << traj.steps << " steps, norm drift " << fmt(traj.norm_drift) << "\n";
}

void simulate_fluxon(const RunConfig& cfg, std::ostream& log) {
  fluxon::JunctionParams p;
  p.alpha = cfg.num("alpha");
  p.beta = cfg.num("beta");
  p.gamma = cfg.num("gamma");
  p.length = cfg.num("length");
  p.grid_points = to_int(cfg, "grid_points", 16, 1 << 24);
  p.dt = cfg.num("dt");
  p.validate();
  const int count = to_int(cfg, "fluxons", 1, 1000);
  std::vector<double> centers;
  for (int i = 0; i < count; ++i) centers.push_back(p.length * (i + 0.5) / count);
  auto state = fluxon::init_kinks(p, centers, cfg.num("u0"));
  // Fail early on an unstable grid, before any output is written.
  state = fluxon::step_pde(std::move(state), p, 0);

  fluxon::SteadyOptions opt;
  opt.window = cfg.num("steady_window");
  opt.tolerance = cfg.num("steady_tolerance");
  opt.max_time = cfg.num("steady_max_time");

  const auto& sweep = cfg.list("gamma_sweep");
  if (!sweep.empty()) {
    const auto iv = fluxon::sweep_iv(p, sweep, state, opt);
    CsvTable csv({"gamma", "mean_voltage", "fluxon_count", "velocity", "converged"});
    std::vector<double> gs, vs;
    for (const auto& pt : iv) {
      csv.row({pt.bias_gamma, pt.mean_voltage, double(pt.fluxon_count), pt.velocity, pt.converged ? 1.0 : 0.0});
      gs.push_back(pt.bias_gamma);
      vs.push_back(pt.mean_voltage);
      if (!pt.converged) log << "warning: gamma " << fmt(pt.bias_gamma) << " did not reach a steady state\n";
    }
    write_text(cfg.output_dir / "fluxon_iv.csv", csv.str());
    write_svg(cfg.output_dir / "fluxon_iv.svg",
              {"Current-voltage curve", "mean voltage", "gamma", {{"", vs, gs, false}}});
    log << "simulate-fluxon: " << iv.size() << " IV points\n";
    return;
  }

  const auto snaps = static_cast<std::size_t>(to_int(cfg, "snapshots", 2, 1 << 20));
  const std::size_t total = grid_count(cfg.num("t_end"), p.dt, "evolution span") - 1;
  const std::size_t per = std::max<std::size_t>(1, total / snaps);
  CsvTable trace({"t", "center", "energy"});
  std::vector<fluxon::Snapshot> traj;
  std::vector<double> ts, cs;
  for (std::size_t done = 0;; done += per) {
    const auto snap = fluxon::snapshot(state, p);
    traj.push_back(snap);
    trace.row({snap.time, snap.center, fluxon::energy(state, p)});
    ts.push_back(snap.time);
    cs.push_back(snap.center);
    if (done + per > total) break;
    state = fluxon::step_pde(std::move(state), p, per);
  }

  CsvTable profile({"x", "phi", "phi_t"});
  std::vector<double> xs, phis;
  for (std::size_t i = 0; i < state.phi.size(); ++i) {
    const double x = static_cast<double>(i) * p.dx();
    profile.row({x, state.phi[i], state.phi_t[i]});
    xs.push_back(x);
    phis.push_back(state.phi[i]);
  }
  write_text(cfg.output_dir / "fluxon_trace.csv", trace.str());
  write_text(cfg.output_dir / "fluxon_profile.csv", profile.str());
  write_svg(cfg.output_dir / "fluxon_trace.svg", {"Kink center", "t", "center", {{"", ts, cs, false}}});
  write_svg(cfg.output_dir / "fluxon_profile.svg", {"Final phase", "x", "phi", {{"", xs, phis, false}}});

  // Velocity from the second half, past the transient.
  const std::vector<fluxon::Snapshot> tail(traj.begin() + static_cast<std::ptrdiff_t>(traj.size() / 2), traj.end());
  const double u = fluxon::measure_velocity(tail, p.length);
  const auto wake = fluxon::wake_probe(state, p);
  std::vector<std::pair<std::string, std::string>> summary = {
      {"winding_number", std::to_string(fluxon::winding_number(state))},
      {"measured_velocity", fmt(u)},
      {"wake_relative_amplitude", fmt(wake.relative_amplitude)},
      {"wake_detected", wake.detected ? "true" : "false"},
      {"normalized_voltage", fmt(fluxon::dc_voltage(count, std::abs(u), p.length, 1.0).normalized)},
  };
  if (p.alpha > 0.0 && p.gamma > 0.0)
    summary.emplace_back("power_balance_velocity", fmt(fluxon::power_balance_velocity(p.alpha, p.gamma).u));
  write_text(cfg.output_dir / "fluxon_summary.txt", key_value_text(summary));
  log << "simulate-fluxon: measured velocity " << fmt(u) << "\n";
}

void synth_esr(const RunConfig& cfg, std::ostream& log) {
  esr::ComposeInput in;
  in.sweep.field_start = cfg.num("field_start");
  in.sweep.field_end = cfg.num("field_end");
  in.sweep.samples = static_cast<std::size_t>(to_int(cfg, "samples", 2, 50000000));
  in.sweep.sweep_rate = cfg.num("sweep_rate");
  in.sweep.direction = parse_direction(cfg.str("direction"));
  in.sweep.modulation_freq = cfg.num("modulation_freq");
  in.sweep.modulation_amplitude = cfg.num("modulation_amplitude");
  in.sweep.time_constant = cfg.num("time_constant");
  in.noise_amplitude = cfg.num("noise");
  in.seed = cfg.seed;

  esr::OscillationPacketSpec base;
  base.coupling_g = cfg.num("packet_g");
  base.nbar = cfg.num("nbar");
  base.center_field = cfg.num("center_field");
  base.g_factor = cfg.num("g_factor");
  base.hysteresis_offset = cfg.num("hysteresis");
  base.amplitude = cfg.num("packet_amplitude");
  base.chirp = cfg.num("chirp");
  if (base.amplitude != 0.0) in.packets.push_back(base);
  const auto& offsets = cfg.list("revival_offsets");
  const auto& amps = cfg.list("revival_amplitudes");
  if (offsets.size() != amps.size())
    throw shape_error("revival_offsets and revival_amplitudes differ in length");
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    auto rg = base;
    rg.center_field += offsets[i];
    rg.amplitude = amps[i];
    in.packets.push_back(rg);
  }
  for (double c : cfg.list("line_centers")) {
    esr::DysonLineSpec line;
    line.center = c;
    line.width_pp = cfg.num("line_width_pp");
    line.mixing_angle = cfg.num("line_psi");
    line.amplitude = cfg.num("line_amplitude");
    line.hysteresis_offset = cfg.num("hysteresis");
    in.lines.push_back(line);
  }

  const auto res = esr::compose_spectrum(in);
  for (const auto& w : res.warnings) log << "warning: " << w << "\n";
  write_spectrum(cfg.output_dir / "spectrum.csv", res.spectrum);
  write_svg(cfg.output_dir / "spectrum.svg",
            {"Synthesized spectrum", "H (G)", "signal (a.u.)",
             {{"", res.spectrum.field, res.spectrum.amplitude, false}}});
  log << "synth-esr: " << res.spectrum.size() << " samples\n";
}

void analyze(const RunConfig& cfg, std::ostream& log) {
  const fs::path input =
      cfg.input_paths.empty() ? cfg.source_dir / cfg.str("input") : cfg.input_paths.front();
  const Spectrum s = ingest_spectrum(input);

  analysis::PipelineOptions opt;
  opt.prominence_fraction = cfg.num("prominence_fraction");
  opt.gap_factor = cfg.num("gap_factor");
  opt.microwave_freq_mhz = cfg.num("microwave_freq");
  opt.assumed_g_factor = cfg.num("assumed_g_factor");
  const auto rep = analysis::analyze_spectrum(s, opt);

  write_text(cfg.output_dir / "analysis_report.txt", key_value_text(rep.lines()));
  const auto& mg = rep.main_group;
  CsvTable peaks({"position", "amplitude", "width_pp", "prominence"});
  for (std::size_t i = 0; i < mg.size(); ++i)
    peaks.row({mg.positions[i], mg.amplitudes[i], mg.widths_pp[i], mg.prominences[i]});
  write_text(cfg.output_dir / "peaks.csv", peaks.str());
  CsvTable split({"index", "splitting", "linear_fit"});
  for (std::size_t i = 0; i < rep.splitting.splittings.size(); ++i) {
    const double x = static_cast<double>(i);
    split.row({x, rep.splitting.splittings[i],
               rep.splitting.linear_fit.intercept + rep.splitting.linear_fit.slope * x});
  }
  write_text(cfg.output_dir / "splittings.csv", split.str());
  write_svg(cfg.output_dir / "analysis.svg",
            {"Spectrum and main-group peaks", "H (G)", "signal (a.u.)",
             {{"spectrum", s.field, s.amplitude, false}, {"main group", mg.positions, mg.amplitudes, true}}});
  log << "analyze-spectrum: " << rep.total_peaks << " peaks, " << mg.size() << " in the main group\n";
}

int reproduce(const RunConfig& cfg, std::ostream& log) {
  std::vector<int> which;
  for (double v : cfg.list("criteria")) {
    if (v != std::floor(v) || v < 1 || v > 11) throw domain_error("criteria must be integers in 1..11");
    which.push_back(static_cast<int>(v));
  }
  const auto results = run_acceptance(which, &log);
  std::string table;
  bool all = true;
  for (const auto& r : results) {
    table += format_result(r) + "\n";
    all = all && r.pass;
  }
  write_text(cfg.output_dir / "acceptance.txt", table);
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

fs::path resolve_output_dir(const std::string& cli_out) {
  if (const char* env = std::getenv("RABIFLUX_OUT"); env && *env) return env;
  if (!cli_out.empty()) return cli_out;
  return "rabiflux-out";
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    for (const auto& w : config.warnings) log << "warning: " << w << "\n";
    switch (config.command) {
      case Command::kSimulateJcm: simulate_jcm(config, log); break;
      case Command::kSimulateChain: simulate_chain(config, log); break;
      case Command::kSimulateFluxon: simulate_fluxon(config, log); break;
      case Command::kSynthEsr: synth_esr(config, log); break;
      case Command::kAnalyzeSpectrum: analyze(config, log); break;
      case Command::kReproduce: return reproduce(config, log);
    }
    return kExitOk;
  } catch (const input_error& e) {
    log << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    log << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const stability_error& e) {
    log << "stability error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const numerical_error& e) {
    log << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    log << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace rabiflux::harness
