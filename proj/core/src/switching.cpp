#include "qdswitch/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <ostream>

#include "qdswitch/fitting.hpp"
#include "qdswitch/parallel.hpp"

namespace qdswitch {

double stark_shift_dispersive(double n_cav, const DeviceParams& p, double delta_qd_ghz) {
  if (delta_qd_ghz == 0.0) throw ParameterError("stark_shift_dispersive: zero detuning");
  if (!std::isfinite(n_cav) || n_cav < 0.0) throw ParameterError("stark_shift_dispersive: n_cav must be >= 0");
  return 2.0 * p.g * p.g * n_cav / delta_qd_ghz;
}

bool is_dispersive(const DeviceParams& p, double delta_qd_ghz) {
  return std::abs(delta_qd_ghz) > p.g;
}

// ---------------------------------------------------------------------------

namespace {

StarkPoint measure_stark_point(const DeviceParams& base, double p_inc, const StarkOptions& opt) {
  StarkPoint pt;
  pt.p_inc_w = p_inc;
  pt.p_wg_w = incident_to_waveguide_power(p_inc, base.eta);
  const CoherentDrive drive{power_to_drive_amplitude(pt.p_wg_w, base.omega_cav), 0.0};
  const IncoherentPump pump{0.0, opt.qd_pump_ghz};

  const TruncationCheck tc = check_truncation(base, opt.n_fock, drive, pump, opt.truncation_tolerance);
  pt.truncation_change = tc.relative_change;
  if (!tc.converged) {
    throw SimulationError("stark_shift_vs_power: Fock truncation not converged at n_fock = " +
                          std::to_string(opt.n_fock) + " (relative change " +
                          format_number(tc.relative_change) + ")");
  }
  pt.photons = tc.photons;

  CorrelationOptions co;
  co.n_fock = opt.n_fock;
  co.pump = pump;
  const CorrelationTrace trace = two_time_correlation(base, drive, co);
  pt.coherent_photons = trace.coherent;
  const Spectrum s = power_spectrum(trace);

  // coarse location inside a wide window, then fit a narrow one around it
  const double guess = opt.qd_detuning_ghz;
  const double wide = 3.0 * opt.fit_half_window_ghz;
  std::size_t best = s.size();
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (std::abs(s.axis_ghz[k] - guess) > wide) continue;
    if (best == s.size() || s.values[k] > s.values[best]) best = k;
  }
  if (best == s.size()) throw SimulationError("stark_shift_vs_power: QD line outside spectral window");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (std::abs(s.axis_ghz[k] - s.axis_ghz[best]) <= opt.fit_half_window_ghz) {
      xs.push_back(s.axis_ghz[k]);
      ys.push_back(s.values[k]);
    }
  }
  const FitResult fit = fit_lorentzian(xs, ys);
  pt.center_ghz = fit.at("center");
  pt.fwhm_ghz = fit.at("fwhm");
  return pt;
}

}  // namespace

StarkCurve stark_shift_vs_power(const DeviceParams& p, const std::vector<double>& p_inc_grid_w,
                                const StarkOptions& options) {
  p.validate();
  for (double w : p_inc_grid_w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("stark_shift_vs_power: powers must be >= 0");
  }
  const DeviceParams base = p.with_qd_detuning(options.qd_detuning_ghz);

  // index 0 is the zero-power reference
  std::vector<StarkPoint> all(p_inc_grid_w.size() + 1);
  parallel_for(all.size(), [&](std::size_t i) {
    all[i] = measure_stark_point(base, i == 0 ? 0.0 : p_inc_grid_w[i - 1], options);
  });

  StarkCurve out;
  out.n_fock = options.n_fock;
  out.reference_center_ghz = all[0].center_ghz;
  for (std::size_t i = 1; i < all.size(); ++i) {
    StarkPoint pt = all[i];
    pt.shift_ghz = pt.p_inc_w == 0.0 ? 0.0 : -(pt.center_ghz - out.reference_center_ghz);
    out.points.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------

SwitchingCurve switching_curve_model(const std::vector<double>& e_grid_aj, double e0_aj) {
  if (!(e0_aj > 0.0)) throw ParameterError("switching_curve_model: e0 must be > 0");
  SwitchingCurve c;
  c.energies = e_grid_aj;
  c.rho.reserve(e_grid_aj.size());
  for (double e : e_grid_aj) {
    const double x = 1.0 + e / e0_aj;
    c.rho.push_back(1.0 / (x * x));
  }
  return c;
}

double switching_energy_from_e0(double e0_aj) { return (std::sqrt(10.0) - 1.0) * e0_aj; }

// ---------------------------------------------------------------------------

namespace {

// photons in the cavity per unit flux times the dispersive kernel per photon
double stark_efficiency(const DeviceParams& p, double control_detuning_from_qd) {
  if (control_detuning_from_qd == 0.0) throw ParameterError("semiclassical_e0: zero control detuning");
  const double omega_ctl = p.qd_cavity_detuning() - control_detuning_from_qd;
  const double chi = intracavity_response(p, omega_ctl);
  return chi * 2.0 * p.g * p.g / std::abs(control_detuning_from_qd);
}

double pulse_fwhm_ps(const DriveSpec& pulse) {
  const auto* gauss = std::get_if<GaussianEnvelope>(&pulse.envelope);
  if (!gauss) throw ParameterError("semiclassical_e0: control pulse must be Gaussian");
  return gauss->fwhm_ps;
}

}  // namespace

SemiclassicalModel calibrate_semiclassical(const DeviceParams& p, double reference_detuning_ghz,
                                           double reference_e0_aj, double reference_fwhm_ps) {
  p.validate();
  if (!(reference_e0_aj > 0.0) || !(reference_fwhm_ps > 0.0)) {
    throw ParameterError("calibrate_semiclassical: reference values must be > 0");
  }
  SemiclassicalModel m;
  m.reference_detuning_ghz = reference_detuning_ghz;
  m.reference_e0_aj = reference_e0_aj;
  m.reference_fwhm_ps = reference_fwhm_ps;
  m.e_ref = reference_e0_aj * stark_efficiency(p, reference_detuning_ghz) /
            gaussian_effective_duration_ns(reference_fwhm_ps);
  return m;
}

double semiclassical_e0(const DeviceParams& p, double control_detuning_from_qd,
                        const DriveSpec& pulse, const SemiclassicalModel& model) {
  p.validate();
  const SemiclassicalModel m =
      model.e_ref > 0.0 ? model
                        : calibrate_semiclassical(p, model.reference_detuning_ghz,
                                                  model.reference_e0_aj, model.reference_fwhm_ps);
  const double tau = gaussian_effective_duration_ns(pulse_fwhm_ps(pulse));
  const double eff = stark_efficiency(p, control_detuning_from_qd);
  if (eff == 0.0) return std::numeric_limits<double>::infinity();
  return m.e_ref * tau / eff;
}

std::vector<SwitchingEnergyPoint> switching_energy_vs_detuning(
    const DeviceParams& p, const std::vector<double>& detuning_grid_ghz, const DriveSpec& pulse,
    const SemiclassicalModel& model) {
  const SemiclassicalModel m =
      model.e_ref > 0.0 ? model
                        : calibrate_semiclassical(p, model.reference_detuning_ghz,
                                                  model.reference_e0_aj, model.reference_fwhm_ps);
  std::vector<SwitchingEnergyPoint> out;
  out.reserve(detuning_grid_ghz.size());
  for (double d : detuning_grid_ghz) {
    SwitchingEnergyPoint pt;
    pt.detuning_ghz = d;
    pt.e0_aj = semiclassical_e0(p, d, pulse, m);
    pt.e_switch_aj = switching_energy_from_e0(pt.e0_aj);
    out.push_back(pt);
  }
  return out;
}

std::vector<double> default_detuning_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 40; ++k) g.push_back(4.0 + 0.5 * k);
  return g;
}

// ---------------------------------------------------------------------------
// Pump-probe

namespace {

const GaussianEnvelope& gaussian_of(const DriveSpec& d, const char* what) {
  const auto* gauss = std::get_if<GaussianEnvelope>(&d.envelope);
  if (!gauss) throw ParameterError(std::string("pump_probe_scan: ") + what + " must be Gaussian");
  return *gauss;
}

DriveSpec shifted(const DriveSpec& d, double delay_ps) {
  DriveSpec out = d;
  std::get<GaussianEnvelope>(out.envelope).center_ps += delay_ps;
  return out;
}

double intensity_flux(const DriveSpec& d, const DeviceParams& p, double t_ns) {
  const double a = d.amplitude_envelope(t_ns);
  return d.peak_flux(p) * a * a;
}

// Instantaneous QD position (relative to the cavity) under the control field.
double stark_shifted_qd(const DeviceParams& p, const DriveSpec& control, double t_ns) {
  const double qd = p.qd_cavity_detuning();
  const double flux = intensity_flux(control, p, t_ns);
  if (flux == 0.0) return qd;
  const double n = intracavity_response(p, control.detuning_ghz) * flux;
  return qd - stark_shift_dispersive(n, p, control.detuning_ghz - qd);
}

double adiabatic_intensity(const DeviceParams& p, const DriveSpec& signal, const DriveSpec& control,
                           double sample_ps) {
  const GaussianEnvelope& gs = gaussian_of(signal, "signal");
  const double half = 3.0 * gs.fwhm_ps;
  const int n = std::max(3, static_cast<int>(std::ceil(2.0 * half / sample_ps)) + 1);
  const double h = 2.0 * half / (n - 1) * 1e-3;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = (gs.center_ps - half) * 1e-3 + k * h;
    const double qd = stark_shifted_qd(p, control, t);
    const double f = scatter_fraction(p.with_qd_detuning(qd), signal.detuning_ghz) *
                     intensity_flux(signal, p, t);
    sum += (k == 0 || k == n - 1) ? 0.5 * f : f;
  }
  return sum * h;
}

DelayScan scan_adiabatic(const DeviceParams& p, const DriveSpec& signal, const DriveSpec& control,
                         const std::vector<double>& delays, const PumpProbeOptions& opt) {
  DelayScan out;
  out.delays_ps = delays;
  out.intensity.resize(delays.size());
  parallel_for(delays.size(), [&](std::size_t i) {
    out.intensity[i] = adiabatic_intensity(p, shifted(signal, delays[i]), control, opt.sample_ps);
  });
  return out;
}

std::vector<cplx> coherent_amplitude(const DeviceParams& p, const HilbertDims& dims,
                                     const std::vector<DriveSpec>& drives,
                                     const std::vector<double>& t_ps, EvolveOptions ev) {
  const Ladder ops(dims);
  std::vector<cplx> b;
  b.reserve(t_ps.size());
  evolve_observe(
      DensityMatrix::vacuum_ground(dims), p, dims, drives, t_ps,
      [&](double, const DensityMatrix& rho) {
        b.push_back(expectation(rho, ops.b));
        return true;
      },
      ev);
  return b;
}

DelayScan scan_master_equation(const DeviceParams& p, const DriveSpec& signal,
                               const DriveSpec& control, const std::vector<double>& delays,
                               const PumpProbeOptions& opt) {
  const GaussianEnvelope& gs = gaussian_of(signal, "signal");
  const GaussianEnvelope& gc = gaussian_of(control, "control");
  const double widest = std::max(gs.fwhm_ps, gc.fwhm_ps);
  const auto [dmin, dmax] = std::minmax_element(delays.begin(), delays.end());
  const double t0 = std::min(gc.center_ps, gs.center_ps + *dmin) - 3.0 * widest;
  // leave room for the cavity and QD to ring down after the last pulse
  const double ring = 10.0 / ordinary_to_angular(std::min(p.kappa, p.gamma)) * 1e3;
  const double t1 = std::max(gc.center_ps, gs.center_ps + *dmax) + 3.0 * widest + ring;
  const int n = static_cast<int>(std::ceil((t1 - t0) / opt.sample_ps)) + 1;
  std::vector<double> t_ps(n);
  for (int k = 0; k < n; ++k) t_ps[k] = t0 + k * opt.sample_ps;

  EvolveOptions ev = opt.evolve;
  ev.frame_detuning_ghz = signal.detuning_ghz;
  const HilbertDims dims(opt.n_fock);
  const CoherentDrive peak{std::sqrt(control.peak_flux(p)), control.detuning_ghz};
  const TruncationCheck tc = check_truncation(p, opt.n_fock, peak, {}, opt.truncation_tolerance);
  if (!tc.converged) {
    throw SimulationError("pump_probe_scan: Fock truncation not converged at n_fock = " +
                          std::to_string(opt.n_fock) + " (relative change " +
                          format_number(tc.relative_change) + ")");
  }
  const std::vector<cplx> control_only = coherent_amplitude(p, dims, {control}, t_ps, ev);
  const double scatter_rate = ordinary_to_angular(p.kappa - 2.0 * p.kappa_par);
  const double h = opt.sample_ps * 1e-3;

  DelayScan out;
  out.delays_ps = delays;
  out.intensity.resize(delays.size());
  parallel_for(delays.size(), [&](std::size_t i) {
    const std::vector<cplx> both =
        coherent_amplitude(p, dims, {shifted(signal, delays[i]), control}, t_ps, ev);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const double v = std::norm(both[k] - control_only[k]);
      sum += (k == 0 || k == n - 1) ? 0.5 * v : v;
    }
    out.intensity[i] = scatter_rate * sum * h;
  });
  return out;
}

}  // namespace

DelayScan pump_probe_scan(const DeviceParams& p, const DriveSpec& signal, const DriveSpec& control,
                          const std::vector<double>& delay_grid_ps, const PumpProbeOptions& options) {
  p.validate();
  signal.validate();
  control.validate();
  gaussian_of(signal, "signal");
  gaussian_of(control, "control");
  if (!(options.sample_ps > 0.0)) throw ParameterError("pump_probe_scan: sample_ps must be > 0");
  if (delay_grid_ps.empty()) return {};
  for (double d : delay_grid_ps) {
    if (!std::isfinite(d)) throw ParameterError("pump_probe_scan: delays must be finite");
  }
  if (options.mode == PumpProbeMode::adiabatic) {
    return scan_adiabatic(p, signal, control, delay_grid_ps, options);
  }
  return scan_master_equation(p, signal, control, delay_grid_ps, options);
}

SwitchingCurve adiabatic_switching_curve(const DeviceParams& p, const DriveSpec& signal,
                                         const DriveSpec& control,
                                         const std::vector<double>& energies_aj) {
  p.validate();
  const GaussianEnvelope& gc = gaussian_of(control, "control");
  gaussian_of(signal, "signal");
  DeviceParams open = p;
  open.g = 0.0;
  const DriveSpec dark = pulse_with_energy(0.0, control.detuning_ghz, gc.fwhm_ps, gc.center_ps,
                                           control.repetition_rate_mhz);
  DriveSpec aligned = signal;
  std::get<GaussianEnvelope>(aligned.envelope).center_ps = gc.center_ps;
  const double sample = 0.5;
  const double i_open = adiabatic_intensity(open, aligned, dark, sample);
  const double i_closed = adiabatic_intensity(p, aligned, dark, sample);
  if (!(i_open - i_closed > 0.0)) {
    throw SimulationError("adiabatic_switching_curve: the QD does not reduce the signal scatter");
  }
  SwitchingCurve c;
  c.energies = energies_aj;
  c.rho.resize(energies_aj.size());
  for (std::size_t k = 0; k < energies_aj.size(); ++k) {
    const DriveSpec ctl = pulse_with_energy(energies_aj[k], control.detuning_ghz, gc.fwhm_ps,
                                            gc.center_ps, control.repetition_rate_mhz);
    c.rho[k] = (i_open - adiabatic_intensity(p, aligned, ctl, sample)) / (i_open - i_closed);
  }
  return c;
}

double contrast(double i_max, double i_min) {
  if (!(i_max > 0.0)) throw ParameterError("contrast: i_max must be > 0");
  if (!(i_min >= 0.0 && i_min <= i_max)) throw ParameterError("contrast: i_min must lie in [0, i_max]");
  return (i_max - i_min) / i_max;
}

DissipationBound dissipation_bound(double e_switch_aj, const DeviceParams& p) {
  if (!(p.kappa > 0.0) || p.kappa_par < 0.0 || 2.0 * p.kappa_par > p.kappa) {
    throw ParameterError("dissipation_bound: need kappa > 0 and 0 <= 2 kappa_par <= kappa");
  }
  if (!(e_switch_aj >= 0.0)) throw ParameterError("dissipation_bound: e_switch must be >= 0");
  const double r = 1.0 - 2.0 * p.kappa_par / p.kappa;
  DissipationBound b;
  b.coupled_fraction = 1.0 - r * r;
  b.e_dis_aj = b.coupled_fraction * e_switch_aj;
  return b;
}

// ---------------------------------------------------------------------------

void write_csv(std::ostream& os, const DelayScan& scan) {
  os << "delay_ps,intensity\n";
  for (std::size_t k = 0; k < scan.delays_ps.size(); ++k) {
    os << format_number(scan.delays_ps[k]) << ',' << format_number(scan.intensity[k]) << '\n';
  }
}

void write_csv(std::ostream& os, const SwitchingCurve& curve) {
  os << "energy_aj,rho\n";
  for (std::size_t k = 0; k < curve.energies.size(); ++k) {
    os << format_number(curve.energies[k]) << ',' << format_number(curve.rho[k]) << '\n';
  }
}

void write_csv(std::ostream& os, const std::vector<SwitchingEnergyPoint>& scan) {
  os << "detuning_ghz,e_switch_aj\n";
  for (const auto& pt : scan) {
    os << format_number(pt.detuning_ghz) << ',' << format_number(pt.e_switch_aj) << '\n';
  }
}

void write_csv(std::ostream& os, const StarkCurve& curve) {
  os << "p_inc_w,shift_ghz\n";
  for (const auto& pt : curve.points) {
    os << format_number(pt.p_inc_w) << ',' << format_number(pt.shift_ghz) << '\n';
  }
}

}  // namespace qdswitch
