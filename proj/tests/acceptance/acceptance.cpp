// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.
// Reference values are computed here from closed forms, not taken from the
// library under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "qdswitch/fitting.hpp"
#include "qdswitch/lindblad.hpp"
#include "qdswitch/scenario.hpp"
#include "qdswitch/spectra.hpp"
#include "qdswitch/switching.hpp"

namespace fs = std::filesystem;
using namespace qdswitch;
using qdswitch::cli::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> range(double a, double b, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((b - a) / step));
  for (int k = 0; k <= n; ++k) out.push_back(a + k * step);
  return out;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a * std::pow(b / a, static_cast<double>(k) / (n - 1));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_root() {
  return fs::temp_directory_path() / ("qdswitch_acceptance_" + std::to_string(::getpid()));
}

// Complex eigenfrequencies of the one-excitation coupled-mode matrix, QD at 0.
std::pair<double, double> eigen_modes_real(const DeviceParams& p) {
  Eigen::Matrix2cd m;
  m << cplx(-p.qd_cavity_detuning(), -p.kappa / 2.0), p.g, p.g,
      cplx(0.0, -p.gamma / 2.0 - p.gamma_d);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(m);
  double a = es.eigenvalues()(0).real(), b = es.eigenvalues()(1).real();
  if (a > b) std::swap(a, b);
  return {a, b};
}

// ---------------------------------------------------------------------------

Outcome vacuum_rabi_doublet() {
  DeviceParams p;
  p.g = 13.4;
  p.kappa = 28.0;
  p.gamma = 5.8;
  p.gamma_d = 0.0;
  const double expect = 2.0 * std::sqrt(p.g * p.g - std::pow((p.kappa - p.gamma) / 4.0, 2));
  const LinearResponse r = linear_response_scan(p, range(-40.0, 40.0, 0.01));
  const auto peaks = find_peaks(r.cavity_scatter.axis_ghz, r.cavity_scatter.values);
  if (peaks.size() != 2) return {false, "expected two peaks, found " + std::to_string(peaks.size())};
  const double sep = peaks[1].position - peaks[0].position;
  return {std::abs(sep - expect) <= 0.02 * expect,
          fmt("peak separation %.3f GHz", sep) + fmt(" vs %.3f GHz", expect)};
}

Outcome anticrossing() {
  json c = cli::default_config();
  const cli::Manifest m = cli::run_scenario("anticrossing", c, scratch_root() / "c2");
  const TuningModel tuning = cli::tuning_from_config(c);
  // temperature where the affine QD and cavity lines cross
  const double t_cross = tuning.t_resonance;
  const double step = m.summary.at("temperature_step_k").get<double>();
  const double t_min = m.summary.at("min_peak_splitting_temperature_k").get<double>();
  const double k_low = m.summary.at("kappa_fit_low_t_ghz").get<double>();
  const double k_high = m.summary.at("kappa_fit_high_t_ghz").get<double>();
  const bool ok = std::abs(t_min - t_cross) <= step + 1e-9 && std::abs(k_low - 28.0) <= 0.03 * 28.0 &&
                  std::abs(k_high - 28.0) <= 0.03 * 28.0;
  return {ok, fmt("minimum splitting at %.1f K (crossing %.1f K)", t_min, t_cross) +
                  fmt(", kappa fits %.2f / %.2f GHz", k_low, k_high)};
}

Outcome steady_state_oracle() {
  std::mt19937_64 rng(20241016);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    DeviceParams p;
    p.g = 5.0 + 15.0 * u(rng);
    p.kappa = 10.0 + 30.0 * u(rng);
    p.kappa_par = 0.4 * p.kappa * u(rng);
    p.gamma = 2.0 + 8.0 * u(rng);
    p.gamma_d = 2.0 * u(rng);
    p = p.with_qd_detuning(-30.0 + 60.0 * u(rng));
    const double amplitude = 0.5 + 4.5 * u(rng);
    const double detuning = -20.0 + 40.0 * u(rng);

    const HilbertDims dims(5);
    const DensityMatrix ss = steady_state(build_liouvillian(p, dims, CoherentDrive{amplitude, detuning}));
    DriveSpec cw;
    cw.detuning_ghz = detuning;
    cw.power = WaveguidePower{drive_amplitude_to_power(amplitude, p.omega_cav)};
    // 50 amplitude lifetimes of the slowest channel
    const double slow = std::min(p.kappa, p.gamma);
    const double t_end_ps = 50.0 / (kPi * slow) * 1e3;
    EvolveOptions opt;
    opt.abs_tol = 1e-12;
    const auto traj = evolve(DensityMatrix::vacuum_ground(dims), p, dims, {cw}, {0.0, t_end_ps}, opt);
    worst = std::max(worst, trace_distance(traj.back(), ss));
  }
  return {worst < 1e-8, fmt("worst trace distance %.2e over 10 draws", worst)};
}

Outcome regression_sanity() {
  DeviceParams p;
  p.g = 0.0;
  CorrelationOptions opt;
  opt.n_fock = 6;
  opt.pump.cavity_occupancy = 0.05;
  const CorrelationTrace f = two_time_correlation(p, CoherentDrive{0.0, 0.0}, opt);
  const HilbertDims dims(opt.n_fock);
  const DensityMatrix ss = steady_state(build_liouvillian(p, dims, CoherentDrive{}, opt.pump));
  const double n = expectation(ss, Ladder(dims).n_cav).real();
  const double f0_err = std::abs(f.values.front() - cplx(n, 0.0));

  const Spectrum s = power_spectrum(f);
  std::vector<double> x, y;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (std::abs(s.axis_ghz[k]) <= 150.0) {
      x.push_back(s.axis_ghz[k]);
      y.push_back(s.values[k]);
    }
  }
  const FitResult fit = fit_lorentzian(x, y);
  const double fwhm = fit.at("fwhm");
  double rms = 0.0, top = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = y[k] - lorentzian(x[k], fit.at("center"), fwhm, fit.at("amplitude"), fit.at("offset"));
    rms += d * d;
    top = std::max(top, y[k]);
  }
  rms = std::sqrt(rms / x.size()) / top;
  const bool ok = std::abs(fwhm - 28.0) <= 0.02 * 28.0 && f0_err < 1e-10 && rms < 0.01;
  return {ok, fmt("FWHM %.3f GHz, |F(0) - <n>| = %.1e", fwhm, f0_err) + fmt(", shape rms %.1e", rms)};
}

Outcome stark_pipeline() {
  const DeviceParams p;
  const double delta = 55.0;
  StarkOptions so;
  so.qd_detuning_ghz = -delta;
  const StarkCurve curve = stark_shift_vs_power(p, {1e-6, 2e-6}, so);
  double worst = 0.0;
  std::string ratios;
  for (const auto& pt : curve.points) {
    const double kernel = 2.0 * p.g * p.g * pt.coherent_photons / delta;
    const double ratio = pt.shift_ghz / kernel;
    worst = std::max(worst, std::abs(ratio - 1.0));
    ratios += fmt(" %.3f", ratio);
  }
  const bool kernel_ok = worst <= 0.10;

  std::vector<std::pair<double, double>> data;
  for (const auto& pt : stark_shift_vs_power(p, {2e-6, 5e-6, 1e-5}).points) {
    data.emplace_back(pt.p_inc_w, pt.shift_ghz);
  }
  const double eta = estimate_eta(data, p).at("eta");
  const bool eta_ok = std::abs(eta - 1.4e-3) <= 0.05 * 1.4e-3;
  return {kernel_ok && eta_ok,
          "shift / (2 g^2 n / delta) =" + ratios + fmt(", eta round trip %.4e", eta)};
}

Outcome switching_algebra() {
  const bool exact = switching_energy_from_e0(1.0) == std::sqrt(10.0) - 1.0;

  const auto e = logspace(0.1, 1000.0, 12);
  double clean = 0.0;
  for (double e0 : {1.0, 6.47, 40.0}) {
    const SwitchingCurve c = switching_curve_model(e, e0);
    clean = std::max(clean, std::abs(fit_switching_curve(c.energies, c.rho).at("e0") / e0 - 1.0));
  }
  double noisy = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    SwitchingCurve c = switching_curve_model(e, 6.47);
    for (double& r : c.rho) r *= 1.0 + noise(rng);
    noisy = std::max(noisy, std::abs(fit_switching_curve(c.energies, c.rho).at("e0") / 6.47 - 1.0));
  }
  const double e_switch = switching_energy_from_e0(6.47);
  const bool ok = exact && clean <= 1e-6 && noisy <= 0.10 && std::abs(e_switch - 14.0) < 0.05;
  return {ok, std::string(exact ? "ratio exact" : "ratio inexact") +
                  fmt(", round trip %.1e / %.3f", clean, noisy) + fmt(", E_switch %.2f aJ", e_switch)};
}

Outcome detuning_dependence() {
  const DeviceParams p;
  const std::vector<double> grid = default_detuning_grid();
  const double step = grid[1] - grid[0];
  const auto scan = switching_energy_vs_detuning(p, grid, pulse_with_energy(1.0, 0.0, 80.0, 0.0, 76.3));
  const auto best = std::min_element(scan.begin(), scan.end(), [](const auto& a, const auto& b) {
    return a.e_switch_aj < b.e_switch_aj;
  });
  // lower polariton measured from the QD line
  const double lower = -eigen_modes_real(p).first;
  return {std::abs(best->detuning_ghz - lower) <= step + 1e-9,
          fmt("argmin %.2f GHz, lower polariton %.2f GHz", best->detuning_ghz, lower)};
}

Outcome dissipation() {
  const DeviceParams p;
  const DissipationBound d = dissipation_bound(14.0, p);
  const double r = 1.0 - 2.0 * p.kappa_par / p.kappa;
  const double expect = 1.0 - r * r;
  const bool ok = std::abs(d.coupled_fraction - expect) < 1e-12 && std::abs(d.coupled_fraction - 0.371) < 5e-4 &&
                  std::abs(d.coupled_fraction - 0.36) <= 0.02 && std::abs(d.e_dis_aj - 5.0) <= 0.5;
  return {ok, fmt("coupled fraction %.4f, E_dis %.2f aJ", d.coupled_fraction, d.e_dis_aj)};
}

Outcome pump_probe() {
  const DeviceParams p;
  const DriveSpec signal = pulse_with_energy(0.01, 0.0, 60.0, 0.0, 76.3);
  const DriveSpec control = pulse_with_energy(14.0, -12.2, 80.0, 0.0, 76.3);
  const double step = 10.0;
  const DelayScan scan = pump_probe_scan(p, signal, control, range(-600.0, 600.0, step));
  const auto top = std::max_element(scan.intensity.begin(), scan.intensity.end());
  const double at = scan.delays_ps[static_cast<std::size_t>(top - scan.intensity.begin())];
  const double fwhm = fit_gaussian(scan.delays_ps, scan.intensity).at("fwhm");
  const double c = contrast(1.0, 0.56);
  const bool ok = std::abs(at) <= step && fwhm >= 80.0 && fwhm <= 160.0 && std::abs(c - 0.44) < 1e-15;
  return {ok, fmt("peak at %.0f ps, FWHM %.1f ps", at, fwhm) + fmt(", contrast(1, 0.56) = %.15f", c)};
}

Outcome state_validity() {
  std::string bad;
  std::size_t states = 0;
  for (const auto& s : cli::list_scenarios()) {
    const cli::Manifest m = cli::run_scenario(s.name, cli::default_config(), scratch_root() / "c10" / s.name);
    const json& audit = m.meta.at("state_validity");
    states += audit.at("states_checked").get<std::size_t>();
    if (!audit.at("valid").get<bool>() || audit.at("states_checked").get<std::size_t>() == 0) {
      bad += " " + s.name;
    }
  }
  return {bad.empty(), bad.empty() ? std::to_string(states) + " states checked across all scenarios"
                                   : "invalid:" + bad};
}

Outcome determinism() {
  json c = cli::default_config();
  cli::apply_override(c, "numerics.stepper=fixed");
  std::string differ;
  std::size_t files = 0;
  for (const auto& s : cli::list_scenarios()) {
    const fs::path a = scratch_root() / "c11a" / s.name, b = scratch_root() / "c11b" / s.name;
    const cli::Manifest ma = cli::run_scenario(s.name, c, a);
    const cli::Manifest mb = cli::run_scenario(s.name, c, b);
    for (const auto& f : ma.files) {
      if (!f.file.ends_with(".csv")) continue;
      ++files;
      if (!fs::exists(b / f.file) || slurp(a / f.file) != slurp(b / f.file)) differ += " " + s.name + "/" + f.file;
    }
    if (ma.files.size() != mb.files.size()) differ += " " + s.name + "(file list)";
  }
  return {differ.empty(), differ.empty() ? std::to_string(files) + " CSV files byte-identical"
                                         : "differ:" + differ};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "vacuum Rabi doublet", 10.0, vacuum_rabi_doublet},
      {2, "anticrossing", 60.0, anticrossing},
      {3, "steady state vs long-time evolution", 60.0, steady_state_oracle},
      {4, "quantum regression sanity", 0.0, regression_sanity},
      {5, "Stark shift pipeline", 300.0, stark_pipeline},
      {6, "switching algebra", 0.0, switching_algebra},
      {7, "detuning dependence", 0.0, detuning_dependence},
      {8, "dissipation bound", 0.0, dissipation},
      {9, "pump-probe", 600.0, pump_probe},
      {10, "state validity sweep", 0.0, state_validity},
      {11, "determinism", 0.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += fmt(", over the %.0f s budget", c.limit_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
