#include "qdswitch/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace qdswitch {

namespace {

namespace odeint = boost::numeric::odeint;
using RealState = std::vector<double>;

struct Collapse {
  Operator c;
  double rate;  // angular, standard form rate * (C rho C^dag - {C^dag C, rho}/2)
};

std::vector<Collapse> collapse_operators(const DeviceParams& p, const Ladder& ops,
                                         const IncoherentPump& pump) {
  std::vector<Collapse> out;
  const double kappa = ordinary_to_angular(p.kappa);
  const double kpar = ordinary_to_angular(p.kappa_par);
  if (p.kappa > 0) out.push_back({ops.b, kappa});
  if (p.gamma > 0) out.push_back({ops.sm, ordinary_to_angular(p.gamma)});
  if (p.gamma_d > 0) out.push_back({ops.n_qd, 2.0 * ordinary_to_angular(p.gamma_d)});
  if (pump.cavity_occupancy > 0 && kpar > 0) {
    out.push_back({ops.b, kpar * pump.cavity_occupancy});
    out.push_back({ops.bd, kpar * pump.cavity_occupancy});
  }
  if (pump.qd_rate > 0) out.push_back({ops.sp, ordinary_to_angular(pump.qd_rate)});
  return out;
}

/// The undriven part of H in a frame offset by `frame_ghz` from the cavity.
Operator static_hamiltonian(const DeviceParams& p, const Ladder& ops, double frame_ghz) {
  const double dc = ordinary_to_angular(-frame_ghz);
  const double dq = ordinary_to_angular(p.qd_cavity_detuning() - frame_ghz);
  const double g = ordinary_to_angular(p.g);
  return dc * ops.n_cav + dq * ops.n_qd + g * (ops.bd * ops.sm + ops.sp * ops.b);
}

void check_pump(const IncoherentPump& pump) {
  if (!(pump.cavity_occupancy >= 0.0) || !(pump.qd_rate >= 0.0)) {
    throw ParameterError("incoherent pump rates must be >= 0");
  }
}

}  // namespace

Operator build_hamiltonian(const DeviceParams& p, const HilbertDims& dims,
                           double drive_amplitude, double drive_detuning_ghz) {
  const Ladder ops(dims);
  Operator h = static_hamiltonian(p, ops, drive_detuning_ghz);
  const double coupling = std::sqrt(ordinary_to_angular(p.kappa_par)) * drive_amplitude;
  if (coupling != 0.0) h += coupling * (ops.bd + ops.b);
  return h;
}

Operator dissipator(const Operator& c, const DensityMatrix& rho) {
  const Operator& r = rho.matrix();
  if (c.rows() != r.rows() || c.cols() != r.cols()) {
    throw DimensionError("dissipator: dimension mismatch");
  }
  const Operator cdc = c.adjoint() * c;
  return 2.0 * c * r * c.adjoint() - cdc * r - r * cdc;
}

// ---------------------------------------------------------------------------

Liouvillian::Liouvillian(HilbertDims dims, Eigen::MatrixXcd super)
    : dims_(dims), super_(std::move(super)) {
  const Eigen::Index n = static_cast<Eigen::Index>(dims_.dim()) * dims_.dim();
  if (super_.rows() != n || super_.cols() != n) {
    throw DimensionError("Liouvillian: superoperator size does not match dims");
  }
}

Eigen::VectorXcd vectorize(const Operator& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Operator unvectorize(const Eigen::VectorXcd& v, int dim) {
  return Eigen::Map<const Operator>(v.data(), dim, dim);
}

Operator Liouvillian::apply(const Operator& rho) const {
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw DimensionError("Liouvillian::apply: dimension mismatch");
  }
  return unvectorize(super_ * vectorize(rho), dim());
}

double Liouvillian::trace_preservation_error() const {
  const Eigen::VectorXcd id = vectorize(identity(dim()));
  return (id.adjoint() * super_).cwiseAbs().maxCoeff();
}

Liouvillian build_liouvillian(const DeviceParams& p, const HilbertDims& dims,
                              const CoherentDrive& drive, const IncoherentPump& pump) {
  p.validate();
  check_pump(pump);
  const Ladder ops(dims);
  const int d = dims.dim();
  const Operator id = identity(d);

  Operator h = static_hamiltonian(p, ops, drive.detuning_ghz);
  if (drive.amplitude != 0.0) {
    h += std::sqrt(ordinary_to_angular(p.kappa_par)) * drive.amplitude * (ops.bd + ops.b);
  }

  // vec(A rho B) = (B^T (x) A) vec(rho)
  const cplx i(0.0, 1.0);
  Eigen::MatrixXcd l = -i * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& [c, rate] : collapse_operators(p, ops, pump)) {
    const Operator cdc = c.adjoint() * c;
    l += rate * (kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id));
  }
  return Liouvillian(dims, std::move(l));
}

Liouvillian build_liouvillian(const DeviceParams& p, const HilbertDims& dims,
                              const DriveSpec& drive, const IncoherentPump& pump) {
  drive.validate();
  if (drive.pulsed()) {
    throw ParameterError("build_liouvillian needs a CW drive; use evolve() for pulses");
  }
  const double amp = power_to_drive_amplitude(drive.waveguide_power(p.eta), p.omega_cav);
  return build_liouvillian(p, dims, CoherentDrive{amp, drive.detuning_ghz}, pump);
}

DensityMatrix steady_state(const Liouvillian& l) {
  const int d = l.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  const double scale = l.matrix().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw SimulationError("steady_state: degenerate null space (zero generator)");

  Eigen::MatrixXcd a = l.matrix();
  a.row(0).setZero();
  for (int k = 0; k < d; ++k) a(0, static_cast<Eigen::Index>(k) * d + k) = 1.0;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(0) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  // the rcond estimate misses exactly singular systems, so check pivots too
  const double rcond = lu.rcond();
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff() / scale;
  if (!(rcond > 1e-14) || !(min_pivot > 1e-13)) {
    std::ostringstream os;
    os << "steady_state: degenerate null space (rcond = " << rcond << ", min pivot " << min_pivot << ")";
    throw SimulationError(os.str());
  }
  Eigen::VectorXcd x = lu.solve(rhs);
  // one step of iterative refinement
  x += lu.solve(rhs - a * x);

  Operator rho = unvectorize(x, d);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();

  const double residual = l.apply(rho).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-10 * std::max(1.0, scale)) {
    std::ostringstream os;
    os << "steady_state: residual " << residual << " above tolerance";
    throw SimulationError(os.str());
  }
  return DensityMatrix(std::move(rho));
}

// ---------------------------------------------------------------------------

namespace {

struct ToneTerm {
  double peak_coupling;  // sqrt(kappa_par) * eps_peak, rad/ns
  double offset;         // angular carrier offset from the frame, rad/ns
  DriveSpec spec;
};

class MasterEquationRhs {
 public:
  MasterEquationRhs(const DeviceParams& p, const HilbertDims& dims,
                    const std::vector<DriveSpec>& drives, double frame_ghz,
                    const IncoherentPump& pump)
      : ops_(dims), d_(dims.dim()) {
    h0_ = static_hamiltonian(p, ops_, frame_ghz);
    anti_ = Operator::Zero(d_, d_);
    const double sqrt_kpar = std::sqrt(ordinary_to_angular(p.kappa_par));
    for (const auto& dr : drives) {
      const double eps = std::sqrt(dr.peak_flux(p));
      tones_.push_back({sqrt_kpar * eps, ordinary_to_angular(dr.detuning_ghz - frame_ghz), dr});
    }
    for (auto& [c, rate] : collapse_operators(p, ops_, pump)) {
      jumps_.push_back({c, rate});
      anti_ += 0.5 * rate * (c.adjoint() * c);
    }
    h_ = h0_;
    m_.resize(d_, d_);
  }

  // rhs = M + M^dag with M = -i H rho - (1/2) sum r C^dag C rho + (1/2) sum r C rho C^dag,
  // which keeps the derivative exactly Hermitian in floating point.
  void operator()(const RealState& x, RealState& dxdt, double t_ns) {
    const Eigen::Map<const Operator> rho(reinterpret_cast<const cplx*>(x.data()), d_, d_);
    Eigen::Map<Operator> out(reinterpret_cast<cplx*>(dxdt.data()), d_, d_);

    h_ = h0_;
    for (const auto& tone : tones_) {
      const double a = tone.peak_coupling * tone.spec.amplitude_envelope(t_ns);
      if (a == 0.0) continue;
      const cplx phase = std::polar(a, -tone.offset * t_ns);
      h_ += phase * ops_.bd + std::conj(phase) * ops_.b;
    }
    const cplx i(0.0, 1.0);
    m_.noalias() = (-i * h_ - anti_) * rho;
    for (const auto& [c, rate] : jumps_) {
      m_.noalias() += (0.5 * rate) * (c * rho * c.adjoint());
    }
    out = m_ + m_.adjoint();
  }

  [[nodiscard]] int dim() const { return d_; }

 private:
  Ladder ops_;
  int d_;
  Operator h0_;
  Operator h_;
  Operator anti_;
  Operator m_;
  std::vector<ToneTerm> tones_;
  std::vector<std::pair<Operator, double>> jumps_;
};

double shortest_pulse_ps(const std::vector<DriveSpec>& drives) {
  double best = 0.0;
  for (const auto& d : drives) {
    if (const auto* gauss = std::get_if<GaussianEnvelope>(&d.envelope)) {
      best = best == 0.0 ? gauss->fwhm_ps : std::min(best, gauss->fwhm_ps);
    }
  }
  return best;
}

}  // namespace

void evolve_observe(const DensityMatrix& rho0, const DeviceParams& p,
                    const HilbertDims& dims, const std::vector<DriveSpec>& drives,
                    const std::vector<double>& t_grid_ps,
                    const TrajectoryObserver& observer, const EvolveOptions& options,
                    const IncoherentPump& pump) {
  p.validate();
  check_pump(pump);
  for (const auto& dr : drives) dr.validate();
  if (rho0.dim() != dims.dim()) throw DimensionError("evolve: initial state dimension mismatch");
  if (t_grid_ps.empty()) return;
  for (std::size_t k = 1; k < t_grid_ps.size(); ++k) {
    if (!(t_grid_ps[k] > t_grid_ps[k - 1])) {
      throw ParameterError("evolve: t_grid must be strictly increasing");
    }
  }
  for (double t : t_grid_ps) {
    if (!std::isfinite(t)) throw ParameterError("evolve: t_grid must be finite");
  }

  const double frame = options.frame_detuning_ghz.value_or(
      drives.empty() ? 0.0 : drives.front().detuning_ghz);
  MasterEquationRhs rhs(p, dims, drives, frame, pump);

  const int d = dims.dim();
  RealState x(2 * static_cast<std::size_t>(d) * d);
  Eigen::Map<Operator>(reinterpret_cast<cplx*>(x.data()), d, d) = rho0.matrix();

  std::vector<double> times_ns(t_grid_ps.size());
  std::transform(t_grid_ps.begin(), t_grid_ps.end(), times_ns.begin(),
                 [](double t) { return t * 1e-3; });

  bool stopped = false;
  DensityMatrix scratch(Operator::Zero(d, d));
  auto observe = [&](const RealState& s, double t_ns) {
    if (stopped) return;
    scratch.matrix() = Eigen::Map<const Operator>(reinterpret_cast<const cplx*>(s.data()), d, d);
    if (!observer(t_ns * 1e3, scratch)) stopped = true;
  };

  auto system = [&rhs](const RealState& s, RealState& ds, double t) { rhs(s, ds, t); };
  odeint::max_step_checker checker(options.max_steps_between_outputs);

  try {
    if (options.stepper == Stepper::fixed) {
      if (!(options.fixed_step_ps > 0.0)) throw ParameterError("fixed_step_ps must be > 0");
      odeint::runge_kutta4<RealState> stepper;
      odeint::integrate_times(stepper, system, x, times_ns.begin(), times_ns.end(),
                              options.fixed_step_ps * 1e-3, observe, checker);
    } else {
      double max_dt_ps = options.max_step_ps;
      if (max_dt_ps <= 0.0) {
        const double shortest = shortest_pulse_ps(drives);
        max_dt_ps = shortest > 0.0 ? shortest / 4.0 : 0.0;
      }
      using Dopri = odeint::runge_kutta_dopri5<RealState>;
      using Controlled = odeint::controlled_runge_kutta<Dopri>;
      Controlled stepper(odeint::default_error_checker<double, odeint::range_algebra,
                                                       odeint::default_operations>(
                             options.abs_tol, options.rel_tol),
                         odeint::default_step_adjuster<double, double>(max_dt_ps * 1e-3));
      const double first_dt = std::max(1e-6, (times_ns.size() > 1 ? times_ns[1] - times_ns[0] : 1e-3) / 10.0);
      odeint::integrate_times(stepper, system, x, times_ns.begin(), times_ns.end(),
                              first_dt, observe, checker);
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw SimulationError(std::string("evolve: step-size underflow: ") + e.what());
  } catch (const odeint::no_progress_error& e) {
    throw SimulationError(std::string("evolve: no progress: ") + e.what());
  } catch (const odeint::odeint_error& e) {
    throw SimulationError(std::string("evolve: integrator failure: ") + e.what());
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw SimulationError("evolve: tolerance failure (non-finite state)");
  }
}

std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const DeviceParams& p,
                                  const HilbertDims& dims,
                                  const std::vector<DriveSpec>& drives,
                                  const std::vector<double>& t_grid_ps,
                                  const EvolveOptions& options, const IncoherentPump& pump) {
  std::vector<DensityMatrix> out;
  out.reserve(t_grid_ps.size());
  evolve_observe(
      rho0, p, dims, drives, t_grid_ps,
      [&out](double, const DensityMatrix& rho) {
        out.push_back(rho);
        return true;
      },
      options, pump);
  return out;
}

TruncationCheck check_truncation(const DeviceParams& p, int n_fock,
                                 const CoherentDrive& drive, const IncoherentPump& pump,
                                 double tolerance) {
  TruncationCheck tc;
  tc.n_fock = n_fock;
  tc.n_fock_high = n_fock + 4;
  auto photons = [&](int n) {
    const HilbertDims dims(n);
    const Ladder ops(dims);
    const auto rho = steady_state(build_liouvillian(p, dims, drive, pump));
    return expectation(rho, ops.n_cav).real();
  };
  tc.photons = photons(tc.n_fock);
  tc.photons_high = photons(tc.n_fock_high);
  const double ref = std::max(std::abs(tc.photons_high), 1e-300);
  tc.relative_change = tc.photons_high == 0.0 ? 0.0 : std::abs(tc.photons - tc.photons_high) / ref;
  tc.converged = tc.relative_change < tolerance;
  return tc;
}

}  // namespace qdswitch
