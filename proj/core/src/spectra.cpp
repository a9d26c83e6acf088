#include "qdswitch/spectra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <ostream>

#include <fftw3.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace qdswitch {

std::string to_string(FrequencyReference r) {
  switch (r) {
    case FrequencyReference::cavity: return "cavity";
    case FrequencyReference::qd: return "qd";
    case FrequencyReference::drive: return "drive";
  }
  return "unknown";
}

void Spectrum::validate() const {
  if (axis_ghz.size() != values.size()) throw std::invalid_argument("Spectrum: axis/value size mismatch");
  if (!amplitudes.empty() && amplitudes.size() != values.size()) {
    throw std::invalid_argument("Spectrum: amplitude size mismatch");
  }
  for (std::size_t k = 0; k < axis_ghz.size(); ++k) {
    if (!std::isfinite(values[k]) || !std::isfinite(axis_ghz[k])) {
      throw std::invalid_argument("Spectrum: non-finite entry");
    }
    if (k > 0 && !(axis_ghz[k] > axis_ghz[k - 1])) {
      throw std::invalid_argument("Spectrum: axis must be strictly increasing");
    }
  }
}

// ---------------------------------------------------------------------------
// Quantum regression

namespace {

double default_tau_max(const DeviceParams& p) {
  double slowest = std::min(p.kappa, p.gamma);
  if (!(slowest > 0.0)) slowest = std::max(p.kappa, p.gamma);
  if (!(slowest > 0.0)) throw ParameterError("two_time_correlation: needs a non-zero decay rate");
  return 15.0 / slowest;
}

int default_n_tau(const DeviceParams& p, const CoherentDrive& drive, double tau_max) {
  // Nyquist band wide enough for every bare line in the drive frame, and a
  // step small compared with the fastest amplitude decay.
  const double dc = std::abs(drive.detuning_ghz);
  const double dq = std::abs(p.qd_cavity_detuning() - drive.detuning_ghz);
  const double band = 2.0 * (std::max(dc, dq) + p.g + p.kappa + p.gamma + p.gamma_d);
  const double dt_band = 1.0 / (2.0 * band);
  const double fastest = constants::kPi * (p.kappa + p.gamma + 2.0 * p.gamma_d);
  const double dt_decay = fastest > 0.0 ? 0.1 / fastest : dt_band;
  const double dt = std::min(dt_band, dt_decay);
  return static_cast<int>(std::ceil(tau_max / dt)) + 1;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

CorrelationTrace two_time_correlation(const DeviceParams& p, const CoherentDrive& drive,
                                      const CorrelationOptions& options) {
  const HilbertDims dims(options.n_fock);
  const Ladder ops(dims);
  const Liouvillian l = build_liouvillian(p, dims, drive, options.pump);
  const DensityMatrix rho = steady_state(l);

  const double tau_max = options.tau_max_ns > 0.0 ? options.tau_max_ns : default_tau_max(p);
  const int n_tau = options.n_tau > 0 ? options.n_tau : default_n_tau(p, drive, tau_max);
  if (n_tau < 2) throw std::invalid_argument("two_time_correlation: n_tau must be >= 2");
  const double dtau = tau_max / (n_tau - 1);

  const Eigen::MatrixXcd propagator = (l.matrix() * dtau).exp();
  const Eigen::VectorXcd weights = vectorize(ops.b.conjugate());  // Tr(b^dag X) = sum conj(b) .* X
  Eigen::VectorXcd x = vectorize(ops.b * rho.matrix());
  Eigen::VectorXcd next(x.size());

  CorrelationTrace out;
  out.reference = FrequencyReference::drive;
  out.tau_ns.resize(n_tau);
  out.values.resize(n_tau);
  out.coherent = std::norm(expectation(rho, ops.b));
  for (int k = 0; k < n_tau; ++k) {
    out.tau_ns[k] = k * dtau;
    out.values[k] = weights.transpose() * x;
    if (k + 1 < n_tau) {
      next.noalias() = propagator * x;
      x.swap(next);
    }
  }
  // F(0) = <b^dag b> is real by construction
  out.values[0] = cplx(expectation(rho, ops.n_cav).real(), 0.0);
  return out;
}

CorrelationTrace two_time_correlation(const DeviceParams& p, const DriveSpec& drive,
                                      double tau_max_ns, int n_tau,
                                      const CorrelationOptions& options) {
  drive.validate();
  if (drive.pulsed()) throw ParameterError("two_time_correlation needs a CW drive");
  CorrelationOptions opt = options;
  opt.tau_max_ns = tau_max_ns;
  opt.n_tau = n_tau;
  const double amp = power_to_drive_amplitude(drive.waveguide_power(p.eta), p.omega_cav);
  return two_time_correlation(p, CoherentDrive{amp, drive.detuning_ghz}, opt);
}

Spectrum power_spectrum(const CorrelationTrace& f, int zero_pad) {
  const std::size_t n = f.tau_ns.size();
  if (n < 2 || f.values.size() != n) throw std::invalid_argument("power_spectrum: need >= 2 samples");
  if (zero_pad < 1) throw std::invalid_argument("power_spectrum: zero_pad must be >= 1");
  const double dtau = f.tau_ns[1] - f.tau_ns[0];
  if (!(dtau > 0.0) || std::abs(f.tau_ns[0]) > 1e-12 * dtau) {
    throw std::invalid_argument("power_spectrum: tau grid must start at 0 and increase");
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double step = f.tau_ns[k] - f.tau_ns[k - 1];
    if (std::abs(step - dtau) > 1e-9 * dtau) throw std::invalid_argument("power_spectrum: non-uniform tau grid");
  }

  const std::size_t m = static_cast<std::size_t>(zero_pad) * 2 * n;
  std::vector<fftw_complex> buf(m);
  for (auto& c : buf) c[0] = c[1] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx v = f.values[k] - f.coherent;
    buf[k][0] = v.real();
    buf[k][1] = v.imag();
    if (k > 0) {
      buf[m - k][0] = v.real();
      buf[m - k][1] = -v.imag();
    }
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), buf.data(), buf.data(), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.reference = f.reference;
  s.elastic_weight = f.coherent;
  s.axis_ghz.resize(m);
  s.values.resize(m);
  const double df = 1.0 / (static_cast<double>(m) * dtau);
  const std::size_t half = m / 2;
  for (std::size_t j = 0; j < m; ++j) {
    // fftshift: output index j maps to frequency bin j - m/2
    const std::size_t src = (j + half) % m;
    const long bin = static_cast<long>(j) - static_cast<long>(half);
    s.axis_ghz[j] = bin * df;
    s.values[j] = dtau * buf[src][0];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Weak-drive response

namespace {

cplx response_denominator(const DeviceParams& p, double freq_ghz) {
  const cplx i(0.0, 1.0);
  const double w = ordinary_to_angular(freq_ghz);
  const double wq = ordinary_to_angular(p.qd_cavity_detuning());
  const double g = ordinary_to_angular(p.g);
  const double kappa = ordinary_to_angular(p.kappa);
  const double dipole = ordinary_to_angular(p.gamma) / 2.0 + ordinary_to_angular(p.gamma_d);
  cplx den = i * (0.0 - w) + kappa / 2.0;
  if (g != 0.0) den += g * g / (i * (wq - w) + dipole);
  return den;
}

}  // namespace

cplx transmission_amplitude(const DeviceParams& p, double freq_ghz) {
  return 1.0 - ordinary_to_angular(p.kappa_par) / response_denominator(p, freq_ghz);
}

double intracavity_response(const DeviceParams& p, double freq_ghz) {
  return ordinary_to_angular(p.kappa_par) / std::norm(response_denominator(p, freq_ghz));
}

double scatter_fraction(const DeviceParams& p, double freq_ghz) {
  return ordinary_to_angular(p.kappa - 2.0 * p.kappa_par) * intracavity_response(p, freq_ghz);
}

LinearResponse linear_response_scan(const DeviceParams& p, const std::vector<double>& freq_grid_ghz) {
  p.validate();
  LinearResponse out;
  out.transmission.reference = FrequencyReference::cavity;
  out.cavity_scatter.reference = FrequencyReference::cavity;
  out.transmission.axis_ghz = freq_grid_ghz;
  out.cavity_scatter.axis_ghz = freq_grid_ghz;
  out.transmission.values.reserve(freq_grid_ghz.size());
  out.transmission.amplitudes.reserve(freq_grid_ghz.size());
  out.cavity_scatter.values.reserve(freq_grid_ghz.size());
  for (double f : freq_grid_ghz) {
    const cplx t = transmission_amplitude(p, f);
    out.transmission.amplitudes.push_back(t);
    out.transmission.values.push_back(std::norm(t));
    out.cavity_scatter.values.push_back(scatter_fraction(p, f));
  }
  out.transmission.validate();
  out.cavity_scatter.validate();
  return out;
}

// ---------------------------------------------------------------------------

PolaritonModes polariton_modes(const DeviceParams& p, double detuning_ghz) {
  // [[ -i kappa/2, g ], [ g, delta - i (gamma/2 + gamma_d) ]] in ordinary units
  const cplx i(0.0, 1.0);
  const cplx a = -i * (p.kappa / 2.0);
  const cplx d = detuning_ghz - i * (p.gamma / 2.0 + p.gamma_d);
  const cplx mean = 0.5 * (a + d);
  const cplx half = 0.5 * (a - d);
  cplx root = std::sqrt(half * half + p.g * p.g);
  if (root.real() < 0.0) root = -root;
  PolaritonModes m{mean - root, mean + root};
  if (m.lower.real() > m.upper.real()) std::swap(m.lower, m.upper);
  return m;
}

double vacuum_rabi_splitting(double g, double kappa, double gamma) {
  const double r = g * g - std::pow((kappa - gamma) / 4.0, 2);
  return r > 0.0 ? 2.0 * std::sqrt(r) : 0.0;
}

AnticrossingMap anticrossing_map(const DeviceParams& p, const TuningModel& m,
                                 const std::vector<double>& t_grid_k,
                                 const std::vector<double>& freq_grid_ghz) {
  AnticrossingMap out;
  out.temperatures_k = t_grid_k;
  out.frequencies_ghz = freq_grid_ghz;
  out.intensity.resize(static_cast<Eigen::Index>(t_grid_k.size()),
                       static_cast<Eigen::Index>(freq_grid_ghz.size()));
  for (std::size_t r = 0; r < t_grid_k.size(); ++r) {
    const DeviceParams at_t = temperature_to_detunings(t_grid_k[r], m, p);
    for (std::size_t c = 0; c < freq_grid_ghz.size(); ++c) {
      out.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          scatter_fraction(at_t, freq_grid_ghz[c]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double min_relative_height) {
  if (x.size() != y.size()) throw std::invalid_argument("find_peaks: size mismatch");
  std::vector<Peak> out;
  if (y.size() < 3) return out;
  const double top = *std::max_element(y.begin(), y.end());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (!(y[k] > y[k - 1] && y[k] >= y[k + 1])) continue;
    if (y[k] < min_relative_height * top) continue;
    Peak pk{x[k], y[k], k};
    const double denom = y[k - 1] - 2.0 * y[k] + y[k + 1];
    if (denom < 0.0) {
      const double shift = 0.5 * (y[k - 1] - y[k + 1]) / denom;
      const double h = 0.5 * (x[k + 1] - x[k - 1]);
      pk.position = x[k] + shift * h;
      pk.height = y[k] - 0.25 * (y[k - 1] - y[k + 1]) * shift;
    }
    out.push_back(pk);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const Spectrum& s) {
  os << "frequency_ghz,value\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << format_number(s.axis_ghz[k]) << ',' << format_number(s.values[k]) << '\n';
  }
}

void write_csv(std::ostream& os, const AnticrossingMap& m) {
  os << "temperature_k,frequency_ghz,value\n";
  for (std::size_t r = 0; r < m.temperatures_k.size(); ++r) {
    for (std::size_t c = 0; c < m.frequencies_ghz.size(); ++c) {
      os << format_number(m.temperatures_k[r]) << ',' << format_number(m.frequencies_ghz[c]) << ','
         << format_number(m.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))
         << '\n';
    }
  }
}

}  // namespace qdswitch
