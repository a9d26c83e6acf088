#pragma once

// Optical-Stark switching: Stark shift of the QD line, the switching curve
// rho(E), switching energy versus control detuning, pump-probe delay scans
// and the dissipation bound.

#include <iosfwd>
#include <vector>

#include "qdswitch/lindblad.hpp"
#include "qdswitch/spectra.hpp"

namespace qdswitch {

/// 2 g^2 n / delta in GHz, delta = omega_drive - omega_qd (GHz). Positive
/// values are red shifts of the QD. Throws ParameterError for delta = 0.
double stark_shift_dispersive(double n_cav, const DeviceParams& p, double delta_qd_ghz);

/// |delta| > g.
bool is_dispersive(const DeviceParams& p, double delta_qd_ghz);

// ---------------------------------------------------------------------------
// Stark shift versus power (full master-equation pipeline)

struct StarkOptions {
  int n_fock = 6;
  /// QD position relative to the cavity used for the scan; the drive sits
  /// on the cavity resonance.
  double qd_detuning_ghz = -55.0;
  /// Weak incoherent QD excitation that makes the QD line visible in the
  /// cavity emission (GHz).
  double qd_pump_ghz = 0.1;
  /// Half width of the Lorentzian fit window around the QD line (GHz).
  double fit_half_window_ghz = 8.0;
  double truncation_tolerance = 1e-3;
};

struct StarkPoint {
  double p_inc_w = 0.0;
  double p_wg_w = 0.0;
  double photons = 0.0;           // steady-state <b^dag b>
  double coherent_photons = 0.0;  // |<b>|^2, the driven part
  double center_ghz = 0.0;   // fitted QD line, relative to the cavity
  double fwhm_ghz = 0.0;
  double shift_ghz = 0.0;    // red shift relative to zero power
  double truncation_change = 0.0;
};

struct StarkCurve {
  std::vector<StarkPoint> points;
  int n_fock = 0;
  double reference_center_ghz = 0.0;
};

/// For each incident power: steady state with the drive on the cavity
/// resonance, regression spectrum, Lorentzian fit of the QD line. Throws
/// SimulationError when Fock truncation has not converged.
StarkCurve stark_shift_vs_power(const DeviceParams& p, const std::vector<double>& p_inc_grid_w,
                                const StarkOptions& options = {});

// ---------------------------------------------------------------------------
// Switching curve

struct SwitchingCurve {
  std::vector<double> energies;  // aJ in the waveguide
  std::vector<double> rho;
};

/// rho(E) = 1 / (1 + E/E0)^2. Throws ParameterError for e0 <= 0.
SwitchingCurve switching_curve_model(const std::vector<double>& e_grid_aj, double e0_aj);

/// (sqrt(10) - 1) e0: the energy giving a 10 dB change in rho.
double switching_energy_from_e0(double e0_aj);

// ---------------------------------------------------------------------------
// Semiclassical (model-reconstructed) switching energy

/// E0(delta) = e_ref * tau_eff / (chi(omega_ctl) * 2 g^2 / |delta|), where chi
/// is the intracavity photon number per unit input flux at the control
/// frequency and tau_eff the effective control pulse duration. A single
/// constant e_ref is fixed by one reference point.
struct SemiclassicalModel {
  double reference_detuning_ghz = 12.0;
  double reference_e0_aj = 6.47;
  double reference_fwhm_ps = 80.0;
  double e_ref = 0.0;  // aJ GHz / ns, set by calibrate_semiclassical
};

SemiclassicalModel calibrate_semiclassical(const DeviceParams& p, double reference_detuning_ghz = 12.0,
                                           double reference_e0_aj = 6.47,
                                           double reference_fwhm_ps = 80.0);

/// `control_detuning_from_qd` = omega_qd - omega_ctl (positive: control red
/// of the QD). Only the envelope of `pulse` is used; it must be Gaussian.
/// Uses calibrate_semiclassical(p) when `model.e_ref` is 0.
double semiclassical_e0(const DeviceParams& p, double control_detuning_from_qd,
                        const DriveSpec& pulse, const SemiclassicalModel& model = {});

struct SwitchingEnergyPoint {
  double detuning_ghz = 0.0;
  double e0_aj = 0.0;
  double e_switch_aj = 0.0;
};

std::vector<SwitchingEnergyPoint> switching_energy_vs_detuning(
    const DeviceParams& p, const std::vector<double>& detuning_grid_ghz, const DriveSpec& pulse,
    const SemiclassicalModel& model = {});

/// Default scan grid: 4 to 24 GHz in 0.5 GHz steps.
std::vector<double> default_detuning_grid();

// ---------------------------------------------------------------------------
// Pump-probe

enum class PumpProbeMode { adiabatic, full_mastereq };

struct PumpProbeOptions {
  PumpProbeMode mode = PumpProbeMode::adiabatic;
  /// Master-equation mode only. The truncation is checked against a CW
  /// drive at the control's peak flux before the scan starts.
  int n_fock = 10;
  double truncation_tolerance = 1e-2;
  EvolveOptions evolve;
  /// Time step of the output grid used for the time integrals (ps).
  double sample_ps = 1.0;
};

struct DelayScan {
  std::vector<double> delays_ps;  // t_signal - t_control
  std::vector<double> intensity;  // scattered signal photons per pulse
};

/// Time-integrated signal scatter out of the cavity versus delay, with the
/// control-only contribution removed. Both drives need Gaussian envelopes;
/// the signal's centre is moved by each delay, the control's is kept.
DelayScan pump_probe_scan(const DeviceParams& p, const DriveSpec& signal, const DriveSpec& control,
                          const std::vector<double>& delay_grid_ps,
                          const PumpProbeOptions& options = {});

/// Adiabatic zero-delay curve: rho(E) = (I_open - I(E)) / (I_open - I(0)),
/// where I_open is the signal scatter with the QD removed. `control` provides
/// the envelope and detuning; its power is replaced by each energy.
SwitchingCurve adiabatic_switching_curve(const DeviceParams& p, const DriveSpec& signal,
                                         const DriveSpec& control,
                                         const std::vector<double>& energies_aj);

/// (i_max - i_min) / i_max. Throws ParameterError for i_max <= 0 or i_min
/// outside [0, i_max].
double contrast(double i_max, double i_min);

struct DissipationBound {
  double coupled_fraction = 0.0;  // 1 - (1 - 2 kappa_par / kappa)^2
  double e_dis_aj = 0.0;
};

DissipationBound dissipation_bound(double e_switch_aj, const DeviceParams& p);

// ---------------------------------------------------------------------------
// CSV

/// "delay_ps,intensity"
void write_csv(std::ostream& os, const DelayScan& scan);
/// "energy_aj,rho"
void write_csv(std::ostream& os, const SwitchingCurve& curve);
/// "detuning_ghz,e_switch_aj"
void write_csv(std::ostream& os, const std::vector<SwitchingEnergyPoint>& scan);
/// "p_inc_w,shift_ghz"
void write_csv(std::ostream& os, const StarkCurve& curve);

}  // namespace qdswitch
