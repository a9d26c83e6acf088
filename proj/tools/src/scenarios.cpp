#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "qdswitch/artifacts.hpp"
#include "qdswitch/fitting.hpp"
#include "qdswitch/scenario.hpp"
#include "qdswitch/switching.hpp"

namespace qdswitch::cli {

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> all = {
      {"anticrossing", "temperature scan of the weak-drive scatter spectrum across the QD-cavity crossing"},
      {"doublet", "weak-drive scatter spectrum at zero QD-cavity detuning (vacuum-Rabi doublet)"},
      {"stark_vs_power", "QD line shift versus incident power from master-equation emission spectra"},
      {"switching_curves", "zero-delay switching curve rho(E) for several control detunings"},
      {"switching_energy_vs_detuning", "model-reconstructed switching energy versus control detuning"},
      {"pump_probe", "signal scatter versus signal-control delay"},
      {"fit", "runs one fitter on measured or synthetic data"},
  };
  return all;
}

bool is_scenario(const std::string& name) {
  const auto& all = list_scenarios();
  return std::any_of(all.begin(), all.end(), [&](const ScenarioInfo& s) { return s.name == name; });
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const json::exception*>(&e)) {
    return kConfig;
  }
  if (dynamic_cast<const OutputError*>(&e) || dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
    return kFilesystem;
  }
  return kSimulation;
}

namespace {

// ---------------------------------------------------------------------------
// Configuration access

double num(const json& c, const std::string& pointer) {
  try {
    return c.at(json::json_pointer(pointer)).get<double>();
  } catch (const json::exception& e) {
    throw ConfigError("configuration value " + pointer + ": " + e.what());
  }
}

std::string str(const json& c, const std::string& pointer) {
  try {
    return c.at(json::json_pointer(pointer)).get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("configuration value " + pointer + ": " + e.what());
  }
}

std::vector<double> numbers(const json& c, const std::string& pointer) {
  try {
    return c.at(json::json_pointer(pointer)).get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError("configuration value " + pointer + ": " + e.what());
  }
}

int integer(const json& c, const std::string& pointer) {
  const double v = num(c, pointer);
  if (v != std::floor(v)) throw ConfigError(pointer + " must be an integer");
  return static_cast<int>(v);
}

std::vector<double> range(double lo, double hi, double step, const std::string& what) {
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError(what + ": need step > 0 and max >= min");
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 2000000) throw ConfigError(what + ": grid too large");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = lo + step * static_cast<double>(k);
  return out;
}

std::vector<double> log_range(double lo, double hi, int n, const std::string& what) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ConfigError(what + ": need 0 < min < max and >= 2 points");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  return out;
}

EvolveOptions evolve_options(const json& c) {
  EvolveOptions ev;
  const std::string stepper = str(c, "/numerics/stepper");
  if (stepper == "adaptive") {
    ev.stepper = Stepper::adaptive;
  } else if (stepper == "fixed") {
    ev.stepper = Stepper::fixed;
  } else {
    throw ConfigError("numerics.stepper must be 'adaptive' or 'fixed'");
  }
  ev.fixed_step_ps = num(c, "/numerics/fixed_step_ps");
  ev.abs_tol = num(c, "/numerics/abs_tol");
  ev.rel_tol = num(c, "/numerics/rel_tol");
  if (!(ev.fixed_step_ps > 0.0) || !(ev.abs_tol > 0.0) || ev.rel_tol < 0.0) {
    throw ConfigError("numerics: step and tolerances must be positive");
  }
  return ev;
}

struct Pulses {
  DriveSpec signal;
  DriveSpec control;
  double control_detuning_from_qd = 0.0;
};

Pulses pulses_from_config(const json& c, const DeviceParams& p) {
  const double rep = num(c, "/drives/repetition_rate_mhz");
  const double qd = p.qd_cavity_detuning();
  Pulses out;
  out.control_detuning_from_qd = num(c, "/drives/control/detuning_from_qd_ghz");
  out.signal = pulse_with_energy(num(c, "/drives/signal/energy_aj"),
                                 qd - num(c, "/drives/signal/detuning_from_qd_ghz"),
                                 num(c, "/drives/signal/fwhm_ps"), 0.0, rep);
  out.control = pulse_with_energy(num(c, "/drives/control/energy_aj"), qd - out.control_detuning_from_qd,
                                  num(c, "/drives/control/fwhm_ps"), 0.0, rep);
  return out;
}

// ---------------------------------------------------------------------------
// State audit: every density matrix produced along the way is checked for
// unit trace, Hermiticity and positivity.

struct StateAudit {
  std::size_t states = 0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  std::size_t trajectories = 0;

  void add(const DensityMatrix& rho) {
    const auto d = rho.diagnostics();
    ++states;
    max_trace_error = std::max(max_trace_error, d.trace_error);
    max_hermiticity_error = std::max(max_hermiticity_error, d.hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
  }

  [[nodiscard]] bool valid() const {
    return states > 0 && max_trace_error < 1e-9 && max_hermiticity_error < 1e-12 && min_eigenvalue > -1e-9;
  }

  [[nodiscard]] json to_json() const {
    return {{"trajectories", trajectories},
            {"states_checked", states},
            {"max_trace_error", max_trace_error},
            {"max_hermiticity_error", max_hermiticity_error},
            {"min_eigenvalue", states > 0 ? min_eigenvalue : 0.0},
            {"valid", valid()}};
  }
};

// Weak CW drive: ring-up trajectory from vacuum, steady state and the
// linear-response cross-check.
json cw_check(const DeviceParams& p, double freq_ghz, double amplitude, int n_fock,
              const EvolveOptions& ev, StateAudit& audit, const IncoherentPump& pump = {}) {
  const HilbertDims dims(n_fock);
  const Ladder ops(dims);
  const CoherentDrive drive{amplitude, freq_ghz};
  const DensityMatrix ss = steady_state(build_liouvillian(p, dims, drive, pump));
  audit.add(ss);

  DriveSpec cw;
  cw.detuning_ghz = freq_ghz;
  cw.power = WaveguidePower{drive_amplitude_to_power(amplitude, p.omega_cav)};
  const double slowest = ordinary_to_angular(std::min(p.kappa, p.gamma));
  const double t_end_ps = 40.0 / slowest * 1e3;
  std::vector<double> grid = range(0.0, t_end_ps, t_end_ps / 200.0, "audit grid");
  DensityMatrix last = DensityMatrix::vacuum_ground(dims);
  evolve_observe(
      DensityMatrix::vacuum_ground(dims), p, dims, {cw}, grid,
      [&](double, const DensityMatrix& rho) {
        audit.add(rho);
        last = rho;
        return true;
      },
      ev, pump);
  ++audit.trajectories;

  const double photons = expectation(ss, ops.n_cav).real();
  const double linear = intracavity_response(p, freq_ghz) * amplitude * amplitude;
  const TruncationCheck tc = check_truncation(p, n_fock, drive, pump);
  json out = {{"frequency_ghz", freq_ghz},
              {"drive_flux_per_ns", amplitude * amplitude},
              {"trajectory_vs_steady_state_distance", trace_distance(last, ss)},
              {"truncation", {{"n_fock", tc.n_fock}, {"relative_change", tc.relative_change}, {"converged", tc.converged}}}};
  if (!pump.active()) out["linear_response_relative_error"] = std::abs(photons - linear) / linear;
  return out;
}

// Pulsed trajectory with both drives at zero delay. The truncation is raised
// from `n_fock` until a CW drive at the control's peak flux has converged.
json pulse_check(const DeviceParams& p, const Pulses& pulses, int n_fock, const EvolveOptions& ev,
                 StateAudit& audit) {
  const CoherentDrive peak{std::sqrt(pulses.control.peak_flux(p)), pulses.control.detuning_ghz};
  TruncationCheck tc = check_truncation(p, n_fock, peak, {}, 1e-2);
  while (!tc.converged && tc.n_fock < 40) tc = check_truncation(p, tc.n_fock + 4, peak, {}, 1e-2);
  if (!tc.converged) throw SimulationError("pulse check: Fock truncation not converged below 40 levels");

  const HilbertDims dims(tc.n_fock);
  const double widest = std::max(std::get<GaussianEnvelope>(pulses.signal.envelope).fwhm_ps,
                                 std::get<GaussianEnvelope>(pulses.control.envelope).fwhm_ps);
  const std::vector<double> grid = range(-3.0 * widest, 3.0 * widest + 300.0, 2.0, "audit grid");
  EvolveOptions opt = ev;
  opt.frame_detuning_ghz = pulses.signal.detuning_ghz;
  const Ladder ops(dims);
  double peak_photons = 0.0;
  evolve_observe(
      DensityMatrix::vacuum_ground(dims), p, dims, {pulses.signal, pulses.control}, grid,
      [&](double, const DensityMatrix& rho) {
        audit.add(rho);
        peak_photons = std::max(peak_photons, expectation(rho, ops.n_cav).real());
        return true;
      },
      opt);
  ++audit.trajectories;
  return {{"peak_photons", peak_photons},
          {"truncation",
           {{"n_fock", tc.n_fock},
            {"cw_peak_photons", tc.photons},
            {"relative_change", tc.relative_change},
            {"converged", tc.converged}}}};
}

// ---------------------------------------------------------------------------
// Outputs

struct Artifact {
  std::string name;
  std::string content;
};

std::string csv_of(const std::function<void(std::ostream&)>& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

json fit_json(const FitResult& f) {
  json j;
  j["params"] = f.params;
  j["covariance_diag"] = f.covariance_diag;
  if (!f.derived.empty()) j["derived"] = f.derived;
  for (const auto& [name, iv] : f.confidence) j["confidence_90"][name] = {iv.lower, iv.upper};
  j["residual_norm"] = f.residual_norm;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  return j;
}

struct Result {
  std::vector<Artifact> files;
  json summary = json::object();
  json meta = json::object();
  std::vector<Series> plot;
  std::string plot_title, x_label, y_label;
};

// ---------------------------------------------------------------------------
// Scenarios

Result run_anticrossing(const json& c, const DeviceParams& p, StateAudit& audit) {
  const TuningModel m = tuning_from_config(c);
  const json& s = c.at("scenarios").at("anticrossing");
  const std::vector<double> temps = range(m.t_min, m.t_max, s.at("t_step").get<double>(), "anticrossing temperatures");
  const std::vector<double> freqs = range(s.at("f_min_ghz").get<double>(), s.at("f_max_ghz").get<double>(),
                                          s.at("f_step_ghz").get<double>(), "anticrossing frequencies");
  const AnticrossingMap map = anticrossing_map(p, m, temps, freqs);

  std::ostringstream modes;
  modes << "temperature_k,qd_detuning_ghz,lower_ghz,upper_ghz,mode_splitting_ghz,peak_splitting_ghz\n";
  std::vector<double> peak_split(temps.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> mode_split(temps.size());
  for (std::size_t r = 0; r < temps.size(); ++r) {
    const double det = m.detuning(temps[r]);
    const PolaritonModes pm = polariton_modes(p, det);
    mode_split[r] = pm.splitting();
    std::vector<double> row(freqs.size());
    for (std::size_t k = 0; k < freqs.size(); ++k) row[k] = map.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
    auto peaks = find_peaks(freqs, row, 1e-3);
    if (peaks.size() >= 2) {
      std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
      peak_split[r] = std::abs(peaks[0].position - peaks[1].position);
    }
    modes << format_number(temps[r]) << ',' << format_number(det) << ',' << format_number(pm.lower.real()) << ','
          << format_number(pm.upper.real()) << ',' << format_number(mode_split[r]) << ','
          << format_number(peak_split[r]) << '\n';
  }

  std::size_t best = temps.size();
  for (std::size_t r = 0; r < temps.size(); ++r) {
    if (std::isnan(peak_split[r])) continue;
    if (best == temps.size() || peak_split[r] < peak_split[best]) best = r;
  }
  const double window = s.at("linewidth_window_ghz").get<double>();
  auto linewidth = [&](std::size_t r) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      if (std::abs(freqs[k]) <= window) {
        x.push_back(freqs[k]);
        y.push_back(map.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)));
      }
    }
    return fit_lorentzian(x, y).at("fwhm");
  };

  Result res;
  res.files.push_back({"anticrossing.csv", csv_of([&](std::ostream& os) { write_csv(os, map); })});
  res.files.push_back({"anticrossing_modes.csv", modes.str()});
  if (best < temps.size()) {
    res.summary["min_peak_splitting_temperature_k"] = temps[best];
    res.summary["min_peak_splitting_ghz"] = peak_split[best];
  }
  res.summary["t_resonance_k"] = m.t_resonance;
  res.summary["temperature_step_k"] = s.at("t_step").get<double>();
  res.summary["kappa_fit_low_t_ghz"] = linewidth(0);
  res.summary["kappa_fit_high_t_ghz"] = linewidth(temps.size() - 1);
  res.summary["qd_detuning_low_t_ghz"] = m.detuning(temps.front());
  res.summary["qd_detuning_high_t_ghz"] = m.detuning(temps.back());

  const DeviceParams at_res = temperature_to_detunings(std::clamp(m.t_resonance, m.t_min, m.t_max), m, p);
  res.meta["cw_check"] = cw_check(at_res, 0.0, 0.1, integer(c, "/numerics/audit_n_fock"), evolve_options(c), audit);
  res.plot = {{"peak splitting", temps, peak_split}, {"mode splitting", temps, mode_split}};
  res.plot_title = "Polariton splitting";
  res.x_label = "temperature (K)";
  res.y_label = "splitting (GHz)";
  return res;
}

Result run_doublet(const json& c, const DeviceParams& p, StateAudit& audit) {
  const json& s = c.at("scenarios").at("doublet");
  const std::vector<double> freqs = range(s.at("f_min_ghz").get<double>(), s.at("f_max_ghz").get<double>(),
                                          s.at("f_step_ghz").get<double>(), "doublet frequencies");
  const LinearResponse lr = linear_response_scan(p, freqs);
  auto peaks = find_peaks(freqs, lr.cavity_scatter.values, 0.05);

  Result res;
  res.files.push_back({"doublet.csv", csv_of([&](std::ostream& os) { write_csv(os, lr.cavity_scatter); })});
  res.files.push_back({"doublet_transmission.csv", csv_of([&](std::ostream& os) { write_csv(os, lr.transmission); })});
  json pk = json::array();
  for (const auto& q : peaks) pk.push_back({{"frequency_ghz", q.position}, {"height", q.height}});
  res.summary["peaks"] = pk;
  if (peaks.size() >= 2) {
    res.summary["peak_separation_ghz"] = peaks.back().position - peaks.front().position;
    const FitResult g = fit_vacuum_rabi(lr.cavity_scatter, p);
    res.summary["fitted_g_ghz"] = g.at("g");
  }
  const PolaritonModes pm = polariton_modes(p, p.qd_cavity_detuning());
  res.summary["mode_splitting_ghz"] = pm.splitting();
  res.summary["closed_form_splitting_ghz"] = vacuum_rabi_splitting(p.g, p.kappa, p.gamma);
  res.summary["frequency_step_ghz"] = s.at("f_step_ghz").get<double>();
  res.meta["cw_check"] = cw_check(p, peaks.empty() ? 0.0 : peaks.front().position, 0.1,
                                  integer(c, "/numerics/audit_n_fock"), evolve_options(c), audit);
  res.plot = {{"scatter", freqs, lr.cavity_scatter.values}};
  res.plot_title = "Weak-drive cavity scatter";
  res.x_label = "drive - cavity (GHz)";
  res.y_label = "scattered fraction";
  return res;
}

StarkOptions stark_options(const json& c) {
  StarkOptions so;
  so.n_fock = integer(c, "/scenarios/stark_vs_power/n_fock");
  so.qd_detuning_ghz = num(c, "/scenarios/stark_vs_power/qd_detuning_ghz");
  so.qd_pump_ghz = num(c, "/scenarios/stark_vs_power/qd_pump_ghz");
  return so;
}

Result run_stark(const json& c, const DeviceParams& p, StateAudit& audit) {
  const StarkOptions so = stark_options(c);
  const std::vector<double> powers = numbers(c, "/scenarios/stark_vs_power/powers_w");
  if (powers.empty()) throw ConfigError("scenarios.stark_vs_power.powers_w must not be empty");
  const StarkCurve curve = stark_shift_vs_power(p, powers, so);
  const double delta = -so.qd_detuning_ghz;  // drive on the cavity

  std::ostringstream detail;
  detail << "p_inc_w,p_wg_w,photons,coherent_photons,center_ghz,fwhm_ghz,shift_ghz,dispersive_shift_ghz\n";
  json ratios = json::array();
  for (const auto& pt : curve.points) {
    const double kernel = stark_shift_dispersive(pt.coherent_photons, p, delta);
    detail << format_number(pt.p_inc_w) << ',' << format_number(pt.p_wg_w) << ',' << format_number(pt.photons)
           << ',' << format_number(pt.coherent_photons) << ',' << format_number(pt.center_ghz) << ','
           << format_number(pt.fwhm_ghz) << ',' << format_number(pt.shift_ghz) << ',' << format_number(kernel)
           << '\n';
    if (kernel > 0.0) ratios.push_back(pt.shift_ghz / kernel);
  }
  Result res;
  res.files.push_back({"stark_vs_power.csv", csv_of([&](std::ostream& os) { write_csv(os, curve); })});
  res.files.push_back({"stark_vs_power_detail.csv", detail.str()});
  res.summary["shift_over_dispersive_kernel"] = ratios;
  res.summary["reference_center_ghz"] = curve.reference_center_ghz;
  res.meta["n_fock"] = curve.n_fock;
  res.meta["qd_pump_ghz"] = so.qd_pump_ghz;
  double max_change = 0.0;
  for (const auto& pt : curve.points) max_change = std::max(max_change, pt.truncation_change);
  res.meta["truncation_max_relative_change"] = max_change;

  const double top = *std::max_element(powers.begin(), powers.end());
  const double amp = power_to_drive_amplitude(incident_to_waveguide_power(top, p.eta), p.omega_cav);
  res.meta["cw_check"] = cw_check(p.with_qd_detuning(so.qd_detuning_ghz), 0.0, std::max(amp, 0.1), so.n_fock,
                                  evolve_options(c), audit);
  std::vector<double> x, y;
  for (const auto& pt : curve.points) {
    x.push_back(pt.p_inc_w * 1e6);
    y.push_back(pt.shift_ghz);
  }
  res.plot = {{"shift", x, y}};
  res.plot_title = "Stark shift of the QD line";
  res.x_label = "incident power (uW)";
  res.y_label = "red shift (GHz)";
  return res;
}

Result run_switching_curves(const json& c, const DeviceParams& p, StateAudit& audit) {
  const json& s = c.at("scenarios").at("switching_curves");
  const Pulses pulses = pulses_from_config(c, p);
  const std::vector<double> energies =
      log_range(s.at("e_min_aj").get<double>(), s.at("e_max_aj").get<double>(),
                s.at("points").get<int>(), "switching_curves energies");
  const double ref_det = s.at("reference_detuning_ghz").get<double>();
  const double ref_e0 = s.at("reference_e0_aj").get<double>();
  const double qd = p.qd_cavity_detuning();

  auto control_at = [&](double det_from_qd) {
    DriveSpec d = pulses.control;
    d.detuning_ghz = qd - det_from_qd;
    return d;
  };
  // One energy scale factor maps the adiabatic model onto the reference E0.
  const SwitchingCurve ref = adiabatic_switching_curve(p, pulses.signal, control_at(ref_det), energies);
  const double model_e0 = fit_switching_curve(ref.energies, ref.rho).at("e0");
  const double scale = ref_e0 / model_e0;

  Result res;
  json fits = json::object();
  for (double det : numbers(c, "/scenarios/switching_curves/detunings_ghz")) {
    std::vector<double> physical(energies.size());
    std::transform(energies.begin(), energies.end(), physical.begin(), [&](double e) { return e / scale; });
    SwitchingCurve curve = adiabatic_switching_curve(p, pulses.signal, control_at(det), physical);
    curve.energies = energies;
    const FitResult f = fit_switching_curve(curve.energies, curve.rho);
    const std::string tag = format_number(det);
    res.files.push_back({"switching_curve_" + tag + "ghz.csv", csv_of([&](std::ostream& os) { write_csv(os, curve); })});
    fits[tag] = fit_json(f);
    res.plot.push_back({tag + " GHz", curve.energies, curve.rho});
  }
  res.summary["fits"] = fits;
  res.meta["model"] = "adiabatic Stark-shift model, model-reconstructed";
  res.meta["energy_scale_factor"] = scale;
  res.meta["reference_detuning_ghz"] = ref_det;
  res.meta["reference_e0_aj"] = ref_e0;
  res.meta["unscaled_model_e0_aj"] = model_e0;

  Pulses at_switch = pulses;
  at_switch.control = pulse_with_energy(switching_energy_from_e0(ref_e0) / scale, qd - ref_det,
                                        std::get<GaussianEnvelope>(pulses.control.envelope).fwhm_ps, 0.0,
                                        pulses.control.repetition_rate_mhz);
  res.meta["pulse_check"] = pulse_check(p, at_switch, integer(c, "/numerics/n_fock"), evolve_options(c), audit);
  res.plot_title = "Switching curves";
  res.x_label = "control energy (aJ)";
  res.y_label = "rho";
  return res;
}

Result run_switching_energy(const json& c, const DeviceParams& p, StateAudit& audit) {
  const json& s = c.at("scenarios").at("switching_energy_vs_detuning");
  const Pulses pulses = pulses_from_config(c, p);
  const double fwhm = std::get<GaussianEnvelope>(pulses.control.envelope).fwhm_ps;
  const SemiclassicalModel model = calibrate_semiclassical(p, s.at("reference_detuning_ghz").get<double>(),
                                                           s.at("reference_e0_aj").get<double>(), fwhm);
  const std::vector<double> grid = range(s.at("d_min_ghz").get<double>(), s.at("d_max_ghz").get<double>(),
                                         s.at("d_step_ghz").get<double>(), "switching energy detunings");
  const auto scan = switching_energy_vs_detuning(p, grid, pulses.control, model);
  const auto best = std::min_element(scan.begin(), scan.end(),
                                     [](const auto& a, const auto& b) { return a.e_switch_aj < b.e_switch_aj; });
  const PolaritonModes pm = polariton_modes(p, p.qd_cavity_detuning());

  Result res;
  res.files.push_back({"switching_energy_vs_detuning.csv", csv_of([&](std::ostream& os) { write_csv(os, scan); })});
  res.summary["argmin_detuning_ghz"] = best->detuning_ghz;
  res.summary["min_e_switch_aj"] = best->e_switch_aj;
  res.summary["lower_polariton_detuning_ghz"] = p.qd_cavity_detuning() - pm.lower.real();
  res.summary["grid_step_ghz"] = s.at("d_step_ghz").get<double>();
  res.meta["model"] = "semiclassical Stark model, model-reconstructed";
  res.meta["calibration_constant"] = model.e_ref;
  res.meta["reference_detuning_ghz"] = model.reference_detuning_ghz;
  res.meta["reference_e0_aj"] = model.reference_e0_aj;
  res.meta["reference_fwhm_ps"] = model.reference_fwhm_ps;

  Pulses at_min = pulses;
  at_min.control = pulse_with_energy(best->e_switch_aj, p.qd_cavity_detuning() - best->detuning_ghz, fwhm, 0.0,
                                     pulses.control.repetition_rate_mhz);
  res.meta["pulse_check"] = pulse_check(p, at_min, integer(c, "/numerics/n_fock"), evolve_options(c), audit);
  std::vector<double> x, y;
  for (const auto& pt : scan) {
    x.push_back(pt.detuning_ghz);
    y.push_back(pt.e_switch_aj);
  }
  res.plot = {{"E_switch", x, y}};
  res.plot_title = "Switching energy versus control detuning";
  res.x_label = "QD - control (GHz)";
  res.y_label = "E_switch (aJ)";
  return res;
}

Result run_pump_probe(const json& c, const DeviceParams& p, StateAudit& audit) {
  const json& s = c.at("scenarios").at("pump_probe");
  const Pulses pulses = pulses_from_config(c, p);
  PumpProbeOptions po;
  const std::string mode = s.at("mode").get<std::string>();
  if (mode == "adiabatic") {
    po.mode = PumpProbeMode::adiabatic;
  } else if (mode == "full_mastereq") {
    po.mode = PumpProbeMode::full_mastereq;
  } else {
    throw ConfigError("scenarios.pump_probe.mode must be 'adiabatic' or 'full_mastereq'");
  }
  po.n_fock = integer(c, "/numerics/n_fock");
  po.evolve = evolve_options(c);
  po.sample_ps = s.at("sample_ps").get<double>();
  const std::vector<double> delays = range(s.at("delay_min_ps").get<double>(), s.at("delay_max_ps").get<double>(),
                                           s.at("delay_step_ps").get<double>(), "pump_probe delays");
  const DelayScan scan = pump_probe_scan(p, pulses.signal, pulses.control, delays, po);

  Result res;
  res.files.push_back({"pump_probe.csv", csv_of([&](std::ostream& os) { write_csv(os, scan); })});
  const auto peak = std::max_element(scan.intensity.begin(), scan.intensity.end());
  const double baseline = 0.5 * (scan.intensity.front() + scan.intensity.back());
  res.summary["peak_delay_ps"] = scan.delays_ps[static_cast<std::size_t>(peak - scan.intensity.begin())];
  res.summary["baseline"] = baseline;
  res.summary["peak"] = *peak;
  if (*peak > 0.0 && baseline >= 0.0 && baseline <= *peak) res.summary["contrast"] = contrast(*peak, baseline);
  if (delays.size() >= 5) {
    const FitResult g = fit_gaussian(scan.delays_ps, scan.intensity);
    res.summary["gaussian_fit"] = fit_json(g);
    res.summary["fwhm_ps"] = g.at("fwhm");
  }
  res.meta["mode"] = mode;
  if (po.mode == PumpProbeMode::full_mastereq) res.meta["n_fock"] = po.n_fock;
  res.meta["pulse_check"] = pulse_check(p, pulses, integer(c, "/numerics/n_fock"), evolve_options(c), audit);
  res.plot = {{mode, scan.delays_ps, scan.intensity}};
  res.plot_title = "Pump-probe delay scan";
  res.x_label = "signal - control delay (ps)";
  res.y_label = "scattered signal photons";
  return res;
}

Result run_fit(const json& c, const DeviceParams& p, StateAudit& audit) {
  const json& s = c.at("scenarios").at("fit");
  const std::string fitter = s.at("fitter").get<std::string>();
  const std::string data = s.at("data").get<std::string>();
  const double noise = s.at("noise").get<double>();
  const int points = s.at("points").get<int>();
  if (points < 5) throw ConfigError("scenarios.fit.points must be >= 5");
  std::mt19937_64 rng(static_cast<std::uint64_t>(integer(c, "/numerics/seed")));
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> x, y;
  auto load = [&] {
    std::ifstream in(data);
    if (!in) throw ConfigError("cannot read fit data " + data);
    for (const auto& [a, b] : read_xy_csv(in)) {
      x.push_back(a);
      y.push_back(b);
    }
  };

  FitResult f;
  std::function<double(double)> model;
  if (fitter == "lorentzian" || fitter == "gaussian") {
    const bool lor = fitter == "lorentzian";
    if (data.empty()) {
      const double width = lor ? p.kappa : 118.0;
      x = range(-3.0 * width, 3.0 * width, 6.0 * width / (points - 1), "fit grid");
      for (double v : x) {
        const double clean = lor ? lorentzian(v, 0.0, width, 1.0, 0.0) : gaussian(v, 0.0, width, 1.0, 0.0);
        y.push_back(clean + noise * normal(rng));
      }
    } else {
      load();
    }
    f = lor ? fit_lorentzian(x, y) : fit_gaussian(x, y);
    model = [f, lor](double v) {
      return lor ? lorentzian(v, f.at("center"), f.at("fwhm"), f.at("amplitude"), f.at("offset"))
                 : gaussian(v, f.at("center"), f.at("fwhm"), f.at("amplitude"), f.at("offset"));
    };
  } else if (fitter == "switching_curve") {
    if (data.empty()) {
      x = log_range(0.3, 300.0, points, "fit grid");
      const double e0 = num(c, "/scenarios/switching_curves/reference_e0_aj");
      for (double v : x) y.push_back(std::pow(1.0 + v / e0, -2.0) * (1.0 + noise * normal(rng)));
    } else {
      load();
    }
    f = fit_switching_curve(x, y);
    model = [e0 = f.at("e0")](double v) { return std::pow(1.0 + v / e0, -2.0); };
  } else if (fitter == "vacuum_rabi") {
    Spectrum sp;
    if (data.empty()) {
      sp = linear_response_scan(p, range(-40.0, 40.0, 80.0 / (points - 1), "fit grid")).cavity_scatter;
      for (double& v : sp.values) v *= 1.0 + noise * normal(rng);
    } else {
      load();
      sp.axis_ghz = x;
      sp.values = y;
    }
    x = sp.axis_ghz;
    y = sp.values;
    f = fit_vacuum_rabi(sp, p);
    model = [f, p](double v) {
      DeviceParams q = p;
      q.g = f.at("g");
      return f.at("scale") * scatter_fraction(q, v);
    };
  } else if (fitter == "eta") {
    const StarkOptions so = stark_options(c);
    if (data.empty()) {
      for (double w : numbers(c, "/scenarios/stark_vs_power/powers_w")) {
        if (w > 0.0) x.push_back(w);
      }
      const StarkCurve truth = stark_shift_vs_power(p, x, so);
      for (const auto& pt : truth.points) y.push_back(pt.shift_ghz * (1.0 + noise * normal(rng)));
    } else {
      load();
    }
    std::vector<std::pair<double, double>> measured;
    for (std::size_t k = 0; k < x.size(); ++k) measured.emplace_back(x[k], y[k]);
    EtaOptions eo;
    eo.stark = so;
    f = estimate_eta(measured, p, eo);
    DeviceParams q = p;
    q.eta = f.at("eta");
    const StarkCurve fitted = stark_shift_vs_power(q, x, so);
    model = [fitted, x](double v) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] == v) return fitted.points[k].shift_ghz;
      }
      return std::numeric_limits<double>::quiet_NaN();
    };
  } else {
    throw ConfigError("scenarios.fit.fitter must be one of lorentzian, gaussian, switching_curve, vacuum_rabi, eta");
  }

  Result res;
  std::ostringstream os;
  os << "x,y,model\n";
  std::vector<double> ym;
  for (std::size_t k = 0; k < x.size(); ++k) {
    ym.push_back(model(x[k]));
    os << format_number(x[k]) << ',' << format_number(y[k]) << ',' << format_number(ym.back()) << '\n';
  }
  res.files.push_back({"fit_data.csv", os.str()});
  res.files.push_back({"fit_result.json", fit_json(f).dump(2) + "\n"});
  res.summary["fitter"] = fitter;
  res.summary["result"] = fit_json(f);
  res.meta["data"] = data.empty() ? "synthetic" : data;
  res.meta["noise"] = data.empty() ? noise : 0.0;
  res.meta["cw_check"] = cw_check(p, 0.0, 0.1, integer(c, "/numerics/audit_n_fock"), evolve_options(c), audit);
  res.plot = {{"data", x, y}, {"model", x, ym}};
  res.plot_title = "Fit: " + fitter;
  res.x_label = "x";
  res.y_label = "y";
  return res;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw OutputError("failed writing " + path.string());
}

}  // namespace

Manifest run_scenario(const std::string& name, const json& config, const std::filesystem::path& out_dir) {
  if (!is_scenario(name)) throw ConfigError("unknown scenario '" + name + "'");
  // validate the full configuration against the schema before any work
  json checked = default_config();
  merge_config(checked, config);
  const DeviceParams p = device_from_config(checked);
  tuning_from_config(checked);
  evolve_options(checked);

  StateAudit audit;
  Result res;
  if (name == "anticrossing") res = run_anticrossing(checked, p, audit);
  else if (name == "doublet") res = run_doublet(checked, p, audit);
  else if (name == "stark_vs_power") res = run_stark(checked, p, audit);
  else if (name == "switching_curves") res = run_switching_curves(checked, p, audit);
  else if (name == "switching_energy_vs_detuning") res = run_switching_energy(checked, p, audit);
  else if (name == "pump_probe") res = run_pump_probe(checked, p, audit);
  else res = run_fit(checked, p, audit);

  res.meta["scenario"] = name;
  res.meta["state_validity"] = audit.to_json();
  res.meta["n_fock"] = res.meta.value("n_fock", checked.at("numerics").at("n_fock"));
  res.meta["stepper"] = checked.at("numerics").at("stepper");
  res.meta["summary"] = res.summary;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  std::vector<Artifact> files = std::move(res.files);
  files.push_back({"params.json", checked.dump(2) + "\n"});
  files.push_back({name + ".meta.json", res.meta.dump(2) + "\n"});
  if (checked.at("numerics").at("svg").get<bool>() && !res.plot.empty()) {
    files.push_back({name + ".svg", render_svg(res.plot, res.plot_title, res.x_label, res.y_label)});
  }

  Manifest m;
  m.scenario = name;
  m.summary = res.summary;
  m.meta = res.meta;
  json listing = json::array();
  for (const auto& f : files) {
    const auto path = out_dir / f.name;
    write_file(path, f.content);
    ManifestEntry e{f.name, sha256_file(path), std::filesystem::file_size(path)};
    listing.push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    m.files.push_back(e);
  }
  const json manifest = {{"scenario", name}, {"files", listing}, {"summary", res.summary}};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return m;
}

}  // namespace qdswitch::cli
