#include "qdswitch/params.hpp"

#include <cmath>
#include <sstream>

namespace qdswitch {

using namespace constants;

double ordinary_to_angular(double f_ghz) { return kTwoPi * f_ghz; }

double wavelength_to_thz(double wavelength_m) {
  return kSpeedOfLight / wavelength_m * 1e-12;
}

double photon_energy(double omega_thz) { return kPlanck * omega_thz * 1e12; }

void DeviceParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
  };
  for (double r : {g, kappa, kappa_par, gamma, gamma_d, omega_cav, omega_qd}) {
    require(std::isfinite(r), "device parameters must be finite");
  }
  require(g >= 0 && kappa >= 0 && kappa_par >= 0 && gamma >= 0 && gamma_d >= 0,
          "rates must be non-negative");
  require(2.0 * kappa_par <= kappa,
          "in-plane coupling exceeds total cavity decay (2 kappa_par > kappa)");
  require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  require(omega_cav > 0 && omega_qd > 0, "optical frequencies must be positive");
}

bool DeviceParams::strong_coupling() const {
  return g > std::abs(kappa - gamma) / 4.0;
}

double DeviceParams::qd_cavity_detuning() const {
  return (omega_qd - omega_cav) * 1e3;
}

DeviceParams DeviceParams::with_qd_detuning(double detuning_ghz) const {
  DeviceParams out = *this;
  out.omega_qd = omega_cav + detuning_ghz * 1e-3;
  return out;
}

DeviceParams paper_defaults() { return DeviceParams{}; }

double incident_to_waveguide_power(double p_inc_w, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in (0, 1]");
  if (!(p_inc_w >= 0.0)) throw ParameterError("incident power must be >= 0");
  return p_inc_w * eta;
}

double power_to_drive_amplitude(double p_wg_w, double omega_cav_thz) {
  if (!(p_wg_w >= 0.0)) throw ParameterError("waveguide power must be >= 0");
  // photons per second -> photons per ns
  const double flux = p_wg_w / photon_energy(omega_cav_thz) * 1e-9;
  return std::sqrt(flux);
}

double drive_amplitude_to_power(double amplitude, double omega_cav_thz) {
  return amplitude * amplitude * 1e9 * photon_energy(omega_cav_thz);
}

double gaussian_effective_duration_ns(double fwhm_ps) {
  return fwhm_ps * 1e-3 * std::sqrt(kPi / (4.0 * std::log(2.0)));
}

// ---------------------------------------------------------------------------

void DriveSpec::validate() const {
  const double w = std::visit([](auto v) { return v.watts; }, power);
  if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("drive power must be finite and >= 0");
  if (!std::isfinite(detuning_ghz)) throw ParameterError("drive detuning must be finite");
  if (const auto* gauss = std::get_if<GaussianEnvelope>(&envelope)) {
    if (!(gauss->fwhm_ps > 0.0)) throw ParameterError("gaussian fwhm must be > 0");
    if (!(repetition_rate_mhz > 0.0)) throw ParameterError("repetition rate must be > 0");
  }
}

double DriveSpec::waveguide_power(double eta) const {
  if (const auto* inc = std::get_if<IncidentPower>(&power)) {
    return incident_to_waveguide_power(inc->watts, eta);
  }
  return std::get<WaveguidePower>(power).watts;
}

double DriveSpec::pulse_energy_aj(double eta) const {
  if (!pulsed()) throw ParameterError("pulse energy is defined for pulsed drives only");
  return waveguide_power(eta) / (repetition_rate_mhz * 1e6) * 1e18;
}

double DriveSpec::peak_flux(const DeviceParams& p) const {
  const double hv = photon_energy(p.omega_cav);
  if (const auto* gauss = std::get_if<GaussianEnvelope>(&envelope)) {
    const double photons = pulse_energy_aj(p.eta) * 1e-18 / hv;
    return photons / gaussian_effective_duration_ns(gauss->fwhm_ps);
  }
  return waveguide_power(p.eta) / hv * 1e-9;
}

double DriveSpec::amplitude_envelope(double t_ns) const {
  if (const auto* gauss = std::get_if<GaussianEnvelope>(&envelope)) {
    const double x = (t_ns - gauss->center_ps * 1e-3) / (gauss->fwhm_ps * 1e-3);
    // square root of the intensity envelope
    return std::exp(-2.0 * std::log(2.0) * x * x);
  }
  return 1.0;
}

DriveSpec pulse_with_energy(double energy_aj, double detuning_ghz,
                            double fwhm_ps, double center_ps,
                            double repetition_rate_mhz) {
  DriveSpec d;
  d.detuning_ghz = detuning_ghz;
  d.envelope = GaussianEnvelope{fwhm_ps, center_ps};
  d.repetition_rate_mhz = repetition_rate_mhz;
  d.power = WaveguidePower{energy_aj * 1e-18 * repetition_rate_mhz * 1e6};
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------

void TuningModel::validate() const {
  if (!(t_min < t_max)) throw ParameterError("tuning range must satisfy t_min < t_max");
  if (!std::isfinite(qd_slope) || !std::isfinite(cav_slope) || !std::isfinite(t_resonance)) {
    throw ParameterError("tuning model must be finite");
  }
}

TuningModel TuningModel::calibrated(double t_resonance, double t_ref,
                                    double detuning_at_ref, double cav_slope) {
  if (t_ref == t_resonance) throw ParameterError("t_ref must differ from t_resonance");
  TuningModel m;
  m.t_resonance = t_resonance;
  m.cav_slope = cav_slope;
  // detuning(t) = -(qd_slope - cav_slope) (t - t_res)
  m.qd_slope = cav_slope - detuning_at_ref / (t_ref - t_resonance);
  return m;
}

double TuningModel::detuning(double t) const {
  return -(qd_slope - cav_slope) * (t - t_resonance);
}

DeviceParams temperature_to_detunings(double t_kelvin, const TuningModel& m,
                                      const DeviceParams& base) {
  m.validate();
  if (!(t_kelvin >= m.t_min && t_kelvin <= m.t_max)) {
    std::ostringstream os;
    os << "temperature " << t_kelvin << " K outside tuning range [" << m.t_min
       << ", " << m.t_max << "]";
    throw ParameterError(os.str());
  }
  DeviceParams out = base;
  const double dt = t_kelvin - m.t_resonance;
  out.omega_cav = base.omega_cav - m.cav_slope * dt * 1e-3;
  out.omega_qd = base.omega_cav - m.qd_slope * dt * 1e-3;
  return out;
}

}  // namespace qdswitch
