#pragma once

// Physical parameters, unit conventions and drive bookkeeping for the
// cavity-QD switch.
//
// Conventions used throughout the library:
//   * every quoted rate (g, kappa, kappa_par, gamma, gamma_d) is an ordinary
//     frequency in GHz, i.e. rate / 2pi. Equations of motion work with
//     angular rates in rad/ns, obtained via ordinary_to_angular().
//   * time is measured in ns internally; user-facing pulse widths and delays
//     are in ps.
//   * optical carriers are absolute ordinary frequencies in THz; detunings
//     between them are reported in GHz.
//   * a drive amplitude epsilon is expressed in sqrt(photons/ns), so that
//     epsilon^2 is the photon flux in the waveguide.

#include <stdexcept>
#include <string>
#include <variant>

namespace qdswitch {

namespace constants {
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kPlanck = 6.62607015e-34;        // J s (exact, SI 2019)
inline constexpr double kSpeedOfLight = 299792458.0;     // m/s (exact)
inline constexpr double kDefaultWavelength = 900e-9;     // m
}  // namespace constants

/// Thrown for parameter sets that violate a documented invariant.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 2*pi*f; GHz -> rad/ns.
double ordinary_to_angular(double f_ghz);

/// Optical frequency in THz for a vacuum wavelength in metres.
double wavelength_to_thz(double wavelength_m);

struct DeviceParams {
  double g = 13.4;          // GHz
  double kappa = 28.0;      // GHz
  double kappa_par = 2.9;   // GHz
  double gamma = 5.8;       // GHz
  double gamma_d = 0.0;     // GHz
  double omega_cav = wavelength_to_thz(constants::kDefaultWavelength);  // THz
  double omega_qd = wavelength_to_thz(constants::kDefaultWavelength);   // THz
  double eta = 1.4e-3;

  /// Throws ParameterError on negative rates, 2*kappa_par > kappa, or eta
  /// outside (0, 1].
  void validate() const;

  /// g > |kappa - gamma| / 4.
  [[nodiscard]] bool strong_coupling() const;

  /// omega_qd - omega_cav in GHz.
  [[nodiscard]] double qd_cavity_detuning() const;

  /// Copy with omega_qd placed `detuning_ghz` away from the cavity.
  [[nodiscard]] DeviceParams with_qd_detuning(double detuning_ghz) const;
};

/// The parameter set reported for the device (g, kappa, kappa_par, gamma,
/// eta), with gamma_d = 0 and both resonances at 900 nm.
DeviceParams paper_defaults();

/// p_inc * eta. Rejects eta outside (0, 1] and negative power.
double incident_to_waveguide_power(double p_inc_w, double eta);

/// epsilon = sqrt(P / (h nu)), returned in sqrt(photons/ns).
double power_to_drive_amplitude(double p_wg_w, double omega_cav_thz);

/// Inverse of power_to_drive_amplitude.
double drive_amplitude_to_power(double amplitude, double omega_cav_thz);

/// Photon energy h*nu in joules.
double photon_energy(double omega_thz);

// ---------------------------------------------------------------------------
// Drives

struct ConstantEnvelope {};

/// Intensity envelope exp(-4 ln2 (t - center)^2 / fwhm^2).
struct GaussianEnvelope {
  double fwhm_ps = 80.0;
  double center_ps = 0.0;
};

using Envelope = std::variant<ConstantEnvelope, GaussianEnvelope>;

struct IncidentPower {
  double watts = 0.0;
};
struct WaveguidePower {
  double watts = 0.0;
};

/// A classical drive tone. For pulsed envelopes the power is the average
/// power of the pulse train, so the energy per pulse in the waveguide is
/// P_wg / repetition_rate.
struct DriveSpec {
  double detuning_ghz = 0.0;  // carrier - omega_cav
  std::variant<IncidentPower, WaveguidePower> power = WaveguidePower{};
  Envelope envelope = ConstantEnvelope{};
  double repetition_rate_mhz = 76.3;

  void validate() const;

  [[nodiscard]] bool pulsed() const {
    return std::holds_alternative<GaussianEnvelope>(envelope);
  }

  /// Power in the waveguide (average power for pulse trains).
  [[nodiscard]] double waveguide_power(double eta) const;

  /// Energy per pulse in the waveguide, in aJ. Pulsed drives only.
  [[nodiscard]] double pulse_energy_aj(double eta) const;

  /// Peak photon flux in photons/ns (CW flux for constant envelopes).
  [[nodiscard]] double peak_flux(const DeviceParams& p) const;

  /// Envelope of the field amplitude at time t, normalised to 1 at the peak.
  [[nodiscard]] double amplitude_envelope(double t_ns) const;
};

/// Effective duration of a Gaussian intensity pulse: integral of the
/// normalised envelope, fwhm * sqrt(pi / (4 ln 2)). In ns.
double gaussian_effective_duration_ns(double fwhm_ps);

/// Builds a pulsed drive from a target pulse energy in the waveguide.
DriveSpec pulse_with_energy(double energy_aj, double detuning_ghz,
                            double fwhm_ps, double center_ps,
                            double repetition_rate_mhz);

// ---------------------------------------------------------------------------
// Temperature tuning

/// Affine red-shift of both resonances with temperature. Both lines coincide
/// at t_resonance.
struct TuningModel {
  double t_resonance = 39.0;  // K
  double qd_slope = 2.0 + 55.0 / 6.0;  // GHz/K
  double cav_slope = 2.0;     // GHz/K
  double t_min = 4.0;         // K
  double t_max = 80.0;        // K

  void validate() const;

  /// A model whose QD sits `detuning_at_ref` GHz from the cavity at t_ref.
  static TuningModel calibrated(double t_resonance, double t_ref,
                                double detuning_at_ref, double cav_slope);

  /// omega_qd - omega_cav at temperature t, GHz.
  [[nodiscard]] double detuning(double t) const;
};

/// `base` holds both resonances at t_resonance (omega_cav is used as the
/// common resonance). Throws ParameterError outside [t_min, t_max].
DeviceParams temperature_to_detunings(double t_kelvin, const TuningModel& m,
                                      const DeviceParams& base);

}  // namespace qdswitch
