#pragma once

// Spectra of the cavity-QD system: quantum-regression power spectra,
// closed-form weak-drive transmission/scatter, dressed (polariton) modes and
// the temperature anticrossing map.
//
// All frequency axes are ordinary frequencies in GHz relative to the stated
// reference.

#include <iosfwd>
#include <string>
#include <vector>

#include "qdswitch/lindblad.hpp"

namespace qdswitch {

enum class FrequencyReference { cavity, qd, drive };

std::string to_string(FrequencyReference r);

struct Spectrum {
  std::vector<double> axis_ghz;
  std::vector<double> values;
  FrequencyReference reference = FrequencyReference::cavity;
  /// Set for spectra that also carry complex amplitudes (transmission).
  std::vector<cplx> amplitudes;
  /// Weight of the elastic (coherent) delta at zero offset, removed before
  /// transforming. Photons, same units as F(0).
  double elastic_weight = 0.0;

  /// Axis strictly increasing, values finite, sizes consistent.
  void validate() const;
  [[nodiscard]] std::size_t size() const { return axis_ghz.size(); }
};

/// F(tau) = <b^dag(t + tau) b(t)> = Tr(b^dag e^{L tau}[b rho_ss]).
struct CorrelationTrace {
  std::vector<double> tau_ns;
  std::vector<cplx> values;
  /// |<b>|^2, the tau -> infinity limit of F.
  double coherent = 0.0;
  FrequencyReference reference = FrequencyReference::drive;
};

struct CorrelationOptions {
  int n_fock = 10;
  double tau_max_ns = 0.0;  // 0: 15 / min(kappa, gamma) with rates in GHz
  int n_tau = 0;            // 0: chosen from the spectral bandwidth and decay rates
  IncoherentPump pump;
};

CorrelationTrace two_time_correlation(const DeviceParams& p, const CoherentDrive& drive,
                                      const CorrelationOptions& options = {});

/// DriveSpec overload (CW drives).
CorrelationTrace two_time_correlation(const DeviceParams& p, const DriveSpec& drive,
                                      double tau_max_ns, int n_tau,
                                      const CorrelationOptions& options = {});

/// S(f) = integral F(tau) e^{-i 2 pi f tau} dtau over the Hermitian
/// extension F(-tau) = F(tau)^*, after removing the coherent part. The
/// spectrum is a density in photons/GHz, so its integral equals
/// F(0) - |<b>|^2. Zero-padded by `zero_pad`; no apodization window.
/// Throws std::invalid_argument for a non-uniform tau grid.
Spectrum power_spectrum(const CorrelationTrace& f, int zero_pad = 4);

// ---------------------------------------------------------------------------
// Weak-drive response

/// 1 - kappa_par / [i(w_c - w) + kappa/2 + g^2 / (i(w_qd - w) + gamma/2 + gamma_d)],
/// angular rates, frequency relative to the cavity.
cplx transmission_amplitude(const DeviceParams& p, double freq_ghz);

/// Steady-state <b^dag b> per unit input flux (photons / (photons/ns)).
double intracavity_response(const DeviceParams& p, double freq_ghz);

/// Fraction of input flux scattered out of plane: (kappa - 2 kappa_par) <b^dag b> / flux.
double scatter_fraction(const DeviceParams& p, double freq_ghz);

struct LinearResponse {
  Spectrum transmission;    // values |t|^2, amplitudes t
  Spectrum cavity_scatter;  // values: scatter_fraction
};

LinearResponse linear_response_scan(const DeviceParams& p, const std::vector<double>& freq_grid_ghz);

// ---------------------------------------------------------------------------

/// Complex eigenfrequencies of the dressed cavity-QD modes relative to the
/// cavity, in GHz. Real part: centre; -2 * imag: FWHM.
struct PolaritonModes {
  cplx lower;
  cplx upper;
  [[nodiscard]] double splitting() const { return upper.real() - lower.real(); }
};

/// `detuning_ghz` = omega_qd - omega_cav.
PolaritonModes polariton_modes(const DeviceParams& p, double detuning_ghz);

/// Closed-form zero-detuning splitting 2 sqrt(g^2 - ((kappa - gamma)/4)^2);
/// zero when the radicand is negative.
double vacuum_rabi_splitting(double g, double kappa, double gamma);

struct AnticrossingMap {
  std::vector<double> temperatures_k;
  std::vector<double> frequencies_ghz;  // relative to the cavity at each temperature
  Eigen::MatrixXd intensity;            // rows: temperatures
};

AnticrossingMap anticrossing_map(const DeviceParams& p, const TuningModel& m,
                                 const std::vector<double>& t_grid_k,
                                 const std::vector<double>& freq_grid_ghz);

// ---------------------------------------------------------------------------
// Peak utilities

struct Peak {
  double position = 0.0;  // parabolic refinement of the sample maximum
  double height = 0.0;
  std::size_t index = 0;
};

/// Local maxima whose height exceeds `min_relative_height` times the global
/// maximum, sorted by position.
std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double min_relative_height = 0.05);

// ---------------------------------------------------------------------------
// CSV

/// Header "frequency_ghz,value".
void write_csv(std::ostream& os, const Spectrum& s);

/// Long format with a leading temperature column:
/// "temperature_k,frequency_ghz,value".
void write_csv(std::ostream& os, const AnticrossingMap& m);

/// Shortest round-trip decimal representation, used by every CSV writer.
std::string format_number(double v);

}  // namespace qdswitch
