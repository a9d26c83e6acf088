#pragma once

// Nonlinear least-squares fitters: line shapes, the switching curve, the
// vacuum-Rabi coupling and the waveguide coupling efficiency.

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdswitch/spectra.hpp"
#include "qdswitch/switching.hpp"

namespace qdswitch {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> covariance_diag;
  /// Quantities computed from the fitted parameters (e.g. e_switch).
  std::map<std::string, double> derived;
  std::map<std::string, Interval> confidence;
  double residual_norm = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Residual norm after every accepted step, starting with the initial guess.
  std::vector<double> history;

  [[nodiscard]] double at(const std::string& name) const;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LmOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-9;      // relative step
  double gradient_tolerance = 1e-10;
  double initial_damping = 1e-3;
};

/// Levenberg-Marquardt with a central-difference Jacobian
/// (step max(1e-6, 1e-4 |x_i|)). The cost never increases across accepted
/// steps. Covariance is (J^T J)^-1 scaled by the residual variance.
/// Throws FitError when no convergence is reached within max_iterations.
FitResult levenberg_marquardt(const ResidualFunction& residuals,
                              const std::vector<std::string>& names,
                              const Eigen::VectorXd& x0, const LmOptions& options = {});

/// Model A / (1 + ((x - c)/(w/2))^2) + offset. Parameters: center, fwhm,
/// amplitude, offset.
double lorentzian(double x, double center, double fwhm, double amplitude, double offset);

/// Model A exp(-4 ln2 (x - c)^2 / w^2) + offset.
double gaussian(double x, double center, double fwhm, double amplitude, double offset);

/// At least 5 finite points. Throws FitError for flat data.
FitResult fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y);
FitResult fit_gaussian(const std::vector<double>& x, const std::vector<double>& y);

/// Fits rho = 1/(1 + E/E0)^2. Needs >= 4 points with the largest positive
/// energy at least 10x the smallest. Reports derived e_switch and its 90%
/// confidence interval (Student t on the linearised covariance).
FitResult fit_switching_curve(const std::vector<double>& e_aj, const std::vector<double>& rho);

/// Fits g (and an overall scale) so that scatter_fraction reproduces the
/// measured doublet; every other device parameter is held at `p_partial`.
/// Throws FitError when the spectrum has fewer than two resolved maxima.
FitResult fit_vacuum_rabi(const Spectrum& spectrum, const DeviceParams& p_partial);

/// Inverse of vacuum_rabi_splitting.
double g_from_splitting(double splitting_ghz, double kappa, double gamma);

struct EtaOptions {
  double eta_min = 1e-6;
  double eta_max = 1.0;
  int coarse_points = 19;
  StarkOptions stark;
};

/// Scalar search over log(eta) (coarse grid, then Brent) minimising the
/// squared difference between measured shifts and stark_shift_vs_power.
/// Throws FitError for fewer than 3 points or when every shift is zero
/// (eta not identifiable).
FitResult estimate_eta(const std::vector<std::pair<double, double>>& measured,
                       const DeviceParams& p, const EtaOptions& options = {});

/// Two numeric columns with a header line.
std::vector<std::pair<double, double>> read_xy_csv(std::istream& in);

}  // namespace qdswitch
