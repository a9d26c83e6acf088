#include "qdswitch/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>

namespace qdswitch {

double FitResult::at(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw std::out_of_range("FitResult: no parameter '" + name + "'");
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x, Eigen::Index m) {
  Eigen::MatrixXd j(m, x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-6, 1e-4 * std::abs(x[i]));
    xp[i] = x[i] + h;
    const Eigen::VectorXd up = f(xp);
    xp[i] = x[i] - h;
    const Eigen::VectorXd down = f(xp);
    xp[i] = x[i];
    j.col(i) = (up - down) / (2.0 * h);
  }
  return j;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

FitResult levenberg_marquardt(const ResidualFunction& residuals, const std::vector<std::string>& names,
                              const Eigen::VectorXd& x0, const LmOptions& options) {
  if (static_cast<Eigen::Index>(names.size()) != x0.size()) {
    throw std::invalid_argument("levenberg_marquardt: names/parameters size mismatch");
  }
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = residuals(x);
  if (!all_finite(r)) throw FitError("levenberg_marquardt: non-finite residuals at the initial guess");
  const Eigen::Index m = r.size();
  const Eigen::Index n = x.size();
  if (m < n) throw FitError("levenberg_marquardt: fewer residuals than parameters");

  FitResult out;
  double cost = r.squaredNorm();
  out.history.push_back(std::sqrt(cost));
  double lambda = options.initial_damping;
  Eigen::MatrixXd j;

  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    j = numerical_jacobian(residuals, x, m);
    const Eigen::VectorXd grad = j.transpose() * r;
    out.gradient_norm = grad.norm();
    if (out.gradient_norm < options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd a = j.transpose() * j;
    bool accepted = false;
    bool tiny_step = false;
    for (int inner = 0; inner < 40; ++inner) {
      Eigen::MatrixXd aug = a;
      for (Eigen::Index k = 0; k < n; ++k) aug(k, k) += lambda * std::max(a(k, k), 1e-12);
      const Eigen::VectorXd step = aug.ldlt().solve(-grad);
      tiny_step = step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance);
      const Eigen::VectorXd xn = x + step;
      const Eigen::VectorXd rn = residuals(xn);
      const double cn = all_finite(rn) ? rn.squaredNorm() : std::numeric_limits<double>::infinity();
      if (cn < cost) {
        x = xn;
        r = rn;
        cost = cn;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      if (tiny_step) break;
      lambda *= 4.0;
    }
    if (accepted) out.history.push_back(std::sqrt(cost));
    if (tiny_step) {
      out.converged = true;
      break;
    }
    if (!accepted) {
      throw FitError("levenberg_marquardt: no descent direction found");
    }
  }
  if (!out.converged) throw FitError("levenberg_marquardt: no convergence within max iterations");

  j = numerical_jacobian(residuals, x, m);
  out.gradient_norm = (j.transpose() * r).norm();
  out.residual_norm = std::sqrt(cost);
  const double dof = static_cast<double>(m - n);
  const double s2 = dof > 0 ? cost / dof : 0.0;
  const Eigen::MatrixXd a = j.transpose() * j;
  const Eigen::MatrixXd cov =
      a.completeOrthogonalDecomposition().pseudoInverse() * s2;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.params[names[k]] = x[k];
    out.covariance_diag[names[k]] = std::max(0.0, cov(k, k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Line shapes

double lorentzian(double x, double center, double fwhm, double amplitude, double offset) {
  const double u = (x - center) / (0.5 * fwhm);
  return amplitude / (1.0 + u * u) + offset;
}

double gaussian(double x, double center, double fwhm, double amplitude, double offset) {
  const double u = (x - center) / fwhm;
  return amplitude * std::exp(-4.0 * std::log(2.0) * u * u) + offset;
}

namespace {

using LineModel = double (*)(double, double, double, double, double);

FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y, LineModel model,
                   const char* who) {
  if (x.size() != y.size()) throw std::invalid_argument(std::string(who) + ": x/y size mismatch");
  if (x.size() < 5) throw FitError(std::string(who) + ": need at least 5 points");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw FitError(std::string(who) + ": non-finite data");
  }
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  if (!(scale > 0.0) || !(*hi - *lo > 1e-12 * scale)) {
    throw FitError(std::string(who) + ": degenerate data (no peak above the offset)");
  }

  // work with y / scale so the tolerances are independent of the data units
  std::vector<double> yn(y.size());
  std::transform(y.begin(), y.end(), yn.begin(), [scale](double v) { return v / scale; });
  const std::size_t peak = static_cast<std::size_t>(std::max_element(yn.begin(), yn.end()) - yn.begin());
  const double offset0 = *lo / scale;
  const double amp0 = yn[peak] - offset0;
  const double half = offset0 + 0.5 * amp0;
  auto crossing = [&](int dir) {
    long k = static_cast<long>(peak);
    while (k + dir >= 0 && k + dir < static_cast<long>(yn.size())) {
      const long nk = k + dir;
      if (yn[nk] <= half) {
        const double t = (yn[k] - half) / (yn[k] - yn[nk]);
        return x[k] + t * (x[nk] - x[k]);
      }
      k = nk;
    }
    return x[k];
  };
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  double fwhm0 = std::abs(crossing(1) - crossing(-1));
  if (!(fwhm0 > 0.0)) fwhm0 = 0.25 * (*xmax - *xmin);

  auto residuals = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
      r[static_cast<Eigen::Index>(k)] = model(x[k], v[0], std::abs(v[1]), v[2], v[3]) - yn[k];
    }
    return r;
  };
  Eigen::VectorXd x0(4);
  x0 << x[peak], fwhm0, amp0, offset0;
  FitResult fit = levenberg_marquardt(residuals, {"center", "fwhm", "amplitude", "offset"}, x0);

  fit.params["fwhm"] = std::abs(fit.params["fwhm"]);
  for (const char* name : {"amplitude", "offset"}) {
    fit.params[name] *= scale;
    fit.covariance_diag[name] *= scale * scale;
  }
  fit.residual_norm *= scale;
  fit.gradient_norm *= scale;
  for (double& h : fit.history) h *= scale;
  return fit;
}

}  // namespace

FitResult fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_line(x, y, lorentzian, "fit_lorentzian");
}

FitResult fit_gaussian(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_line(x, y, gaussian, "fit_gaussian");
}

// ---------------------------------------------------------------------------

FitResult fit_switching_curve(const std::vector<double>& e_aj, const std::vector<double>& rho) {
  if (e_aj.size() != rho.size()) throw std::invalid_argument("fit_switching_curve: size mismatch");
  if (e_aj.size() < 4) throw FitError("fit_switching_curve: need at least 4 points");
  double e_lo = std::numeric_limits<double>::infinity();
  double e_hi = 0.0;
  for (std::size_t k = 0; k < e_aj.size(); ++k) {
    if (!std::isfinite(e_aj[k]) || !std::isfinite(rho[k]) || e_aj[k] < 0.0) {
      throw FitError("fit_switching_curve: energies must be finite and >= 0");
    }
    if (e_aj[k] > 0.0) {
      e_lo = std::min(e_lo, e_aj[k]);
      e_hi = std::max(e_hi, e_aj[k]);
    }
  }
  if (!(e_hi >= 10.0 * e_lo)) throw FitError("fit_switching_curve: energies must span a factor of 10");

  // seed: energy where rho crosses 0.25, i.e. E = E0
  std::vector<std::size_t> order(e_aj.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return e_aj[a] < e_aj[b]; });
  double seed = std::sqrt(e_lo * e_hi);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double r0 = rho[order[k - 1]];
    const double r1 = rho[order[k]];
    if ((r0 - 0.25) * (r1 - 0.25) <= 0.0 && r0 != r1) {
      const double t = (r0 - 0.25) / (r0 - r1);
      seed = e_aj[order[k - 1]] + t * (e_aj[order[k]] - e_aj[order[k - 1]]);
      break;
    }
  }
  if (!(seed > 0.0)) seed = e_hi / 2.0;

  auto residuals = [&](const Eigen::VectorXd& v) {
    const double e0 = std::abs(v[0]);
    Eigen::VectorXd r(static_cast<Eigen::Index>(e_aj.size()));
    for (std::size_t k = 0; k < e_aj.size(); ++k) {
      const double u = 1.0 + e_aj[k] / e0;
      r[static_cast<Eigen::Index>(k)] = 1.0 / (u * u) - rho[k];
    }
    return r;
  };
  Eigen::VectorXd x0(1);
  x0 << seed;
  FitResult fit = levenberg_marquardt(residuals, {"e0"}, x0);
  const double e0 = std::abs(fit.params["e0"]);
  fit.params["e0"] = e0;
  const double factor = switching_energy_from_e0(1.0);
  const double e_sw = factor * e0;
  fit.derived["e_switch"] = e_sw;

  const double dof = static_cast<double>(e_aj.size() - 1);
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(dist, 0.95);
  const double half = t * std::sqrt(fit.covariance_diag["e0"]) * factor;
  fit.confidence["e_switch"] = Interval{e_sw - half, e_sw + half};
  fit.confidence["e0"] = Interval{e0 - half / factor, e0 + half / factor};
  return fit;
}

// ---------------------------------------------------------------------------

double g_from_splitting(double splitting_ghz, double kappa, double gamma) {
  if (!(splitting_ghz >= 0.0)) throw ParameterError("g_from_splitting: splitting must be >= 0");
  const double q = (kappa - gamma) / 4.0;
  return std::sqrt(0.25 * splitting_ghz * splitting_ghz + q * q);
}

FitResult fit_vacuum_rabi(const Spectrum& spectrum, const DeviceParams& p_partial) {
  spectrum.validate();
  const auto peaks = find_peaks(spectrum.axis_ghz, spectrum.values, 0.05);
  if (peaks.size() < 2) throw FitError("fit_vacuum_rabi: unresolved doublet");
  const double scale = *std::max_element(spectrum.values.begin(), spectrum.values.end());
  if (!(scale > 0.0)) throw FitError("fit_vacuum_rabi: spectrum has no positive values");

  // the two strongest maxima
  std::vector<Peak> top = peaks;
  std::sort(top.begin(), top.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  const double sep = std::abs(top[0].position - top[1].position);
  const double g0 = std::max(0.5 * sep, 1e-3);

  const std::vector<double>& f = spectrum.axis_ghz;
  auto model_at = [&](double g, double freq) {
    DeviceParams q = p_partial;
    q.g = std::abs(g);
    return scatter_fraction(q, freq);
  };
  double model_peak = 0.0;
  for (double v : f) model_peak = std::max(model_peak, model_at(g0, v));
  const double a0 = model_peak > 0.0 ? 1.0 / model_peak : 1.0;

  auto residuals = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(f.size()));
    for (std::size_t k = 0; k < f.size(); ++k) {
      r[static_cast<Eigen::Index>(k)] = v[1] * model_at(v[0], f[k]) - spectrum.values[k] / scale;
    }
    return r;
  };
  Eigen::VectorXd x0(2);
  x0 << g0, a0;
  FitResult fit = levenberg_marquardt(residuals, {"g", "scale"}, x0);
  fit.params["g"] = std::abs(fit.params["g"]);
  fit.params["scale"] *= scale;
  fit.covariance_diag["scale"] *= scale * scale;
  fit.residual_norm *= scale;
  fit.gradient_norm *= scale;
  for (double& h : fit.history) h *= scale;
  return fit;
}

// ---------------------------------------------------------------------------

FitResult estimate_eta(const std::vector<std::pair<double, double>>& measured, const DeviceParams& p,
                       const EtaOptions& options) {
  if (measured.size() < 3) throw FitError("estimate_eta: need at least 3 power points");
  if (!(options.eta_min > 0.0) || !(options.eta_max > options.eta_min) || options.eta_max > 1.0 ||
      options.coarse_points < 3) {
    throw ParameterError("estimate_eta: invalid search range");
  }
  std::vector<double> powers;
  double largest = 0.0;
  for (const auto& [pw, shift] : measured) {
    if (!(pw >= 0.0) || !std::isfinite(shift)) throw FitError("estimate_eta: invalid measurement");
    powers.push_back(pw);
    largest = std::max(largest, std::abs(shift));
  }
  if (largest == 0.0) throw FitError("estimate_eta: all shifts are zero; eta is not identifiable");

  int evaluations = 0;
  auto residual_vector = [&](double eta) {
    DeviceParams q = p;
    q.eta = eta;
    const StarkCurve c = stark_shift_vs_power(q, powers, options.stark);
    Eigen::VectorXd r(static_cast<Eigen::Index>(measured.size()));
    for (std::size_t k = 0; k < measured.size(); ++k) {
      r[static_cast<Eigen::Index>(k)] = c.points[k].shift_ghz - measured[k].second;
    }
    return r;
  };
  auto cost = [&](double log_eta) {
    ++evaluations;
    try {
      return residual_vector(std::exp(log_eta)).squaredNorm();
    } catch (const SimulationError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const FitError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const double l0 = std::log(options.eta_min);
  const double l1 = std::log(options.eta_max);
  const int n = options.coarse_points;
  std::vector<double> grid(n), costs(n);
  for (int k = 0; k < n; ++k) {
    grid[k] = l0 + (l1 - l0) * k / (n - 1);
    costs[k] = cost(grid[k]);
  }
  const int best = static_cast<int>(std::min_element(costs.begin(), costs.end()) - costs.begin());
  if (!std::isfinite(costs[best])) throw FitError("estimate_eta: model evaluation failed everywhere");
  if (best == 0 || best == n - 1) {
    throw FitError("estimate_eta: best eta lies on the search boundary; eta is not identifiable");
  }
  boost::uintmax_t max_iter = 60;
  const auto [log_eta, best_cost] =
      boost::math::tools::brent_find_minima(cost, grid[best - 1], grid[best + 1], 30, max_iter);

  FitResult fit;
  const double eta = std::exp(log_eta);
  fit.params["eta"] = eta;
  fit.residual_norm = std::sqrt(best_cost);
  fit.iterations = evaluations;
  fit.converged = max_iter < 60;
  fit.history = {std::sqrt(costs[best]), fit.residual_norm};

  // linearised variance from a central-difference derivative of the residuals
  const double h = 1e-3 * eta;
  const Eigen::VectorXd jac = (residual_vector(eta + h) - residual_vector(eta - h)) / (2.0 * h);
  const double jtj = jac.squaredNorm();
  const double dof = static_cast<double>(measured.size() - 1);
  fit.gradient_norm = std::abs(jac.dot(residual_vector(eta)));
  fit.covariance_diag["eta"] = jtj > 0.0 ? best_cost / dof / jtj : 0.0;
  if (!fit.converged) throw FitError("estimate_eta: Brent search did not converge");
  return fit;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> read_xy_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_xy_csv: empty input");
  std::vector<std::pair<double, double>> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw std::invalid_argument("read_xy_csv: line " + std::to_string(lineno) + " needs two columns");
    }
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      const double x = std::stod(a, &used);
      if (a.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("x");
      const double y = std::stod(b, &used);
      if (b.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("y");
      out.emplace_back(x, y);
    } catch (const std::exception&) {
      throw std::invalid_argument("read_xy_csv: line " + std::to_string(lineno) + " is not numeric");
    }
  }
  return out;
}

}  // namespace qdswitch
