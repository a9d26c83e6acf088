#pragma once

// Master-equation engine for a driven cavity-QD system.
//
//   d rho/dt = -i [H, rho]/hbar + kappa/2 D(b) + gamma/2 D(sigma_-)
//              + gamma_d D(sigma_+ sigma_-)
//   D(C) rho = 2 C rho C^dag - C^dag C rho - rho C^dag C
//
// H is written in the frame rotating at a drive carrier:
//   H/hbar = dc b^dag b + dq sigma_+ sigma_- + g (b^dag sigma_- + sigma_+ b)
//            + sqrt(kappa_par) eps (b^dag + b)
// with dc = omega_cav - omega_drive and dq = omega_qd - omega_drive. When the
// drive sits on the cavity resonance dc = 0 and dq is the QD-cavity detuning.
// All terms use angular rates (rad/ns).

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qdswitch/operators.hpp"
#include "qdswitch/params.hpp"

namespace qdswitch {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A CW coherent tone: amplitude in sqrt(photons/ns), carrier given as
/// detuning from omega_cav in GHz. The rotating frame follows the carrier.
struct CoherentDrive {
  double amplitude = 0.0;
  double detuning_ghz = 0.0;
};

/// Incoherent excitation channels. `cavity_occupancy` is a broadband
/// (thermal-like) photon occupancy entering through the in-plane channel; it
/// adds kappa_par * n to both the b and b^dag Lindblad rates, leaving the
/// cavity linewidth at kappa. `qd_rate` (GHz) pumps the QD incoherently.
struct IncoherentPump {
  double cavity_occupancy = 0.0;
  double qd_rate = 0.0;

  [[nodiscard]] bool active() const { return cavity_occupancy > 0.0 || qd_rate > 0.0; }
};

Operator build_hamiltonian(const DeviceParams& p, const HilbertDims& dims,
                           double drive_amplitude, double drive_detuning_ghz);

/// D(C) rho.
Operator dissipator(const Operator& c, const DensityMatrix& rho);

/// Superoperator acting on column-major vec(rho), size dim^2 x dim^2.
class Liouvillian {
 public:
  Liouvillian(HilbertDims dims, Eigen::MatrixXcd super);

  [[nodiscard]] const HilbertDims& dims() const { return dims_; }
  [[nodiscard]] const Eigen::MatrixXcd& matrix() const { return super_; }
  [[nodiscard]] int dim() const { return dims_.dim(); }

  [[nodiscard]] Operator apply(const Operator& rho) const;

  /// max |(vec I)^dag L|, zero for a trace-preserving generator.
  [[nodiscard]] double trace_preservation_error() const;

 private:
  HilbertDims dims_;
  Eigen::MatrixXcd super_;
};

Eigen::VectorXcd vectorize(const Operator& m);
Operator unvectorize(const Eigen::VectorXcd& v, int dim);

Liouvillian build_liouvillian(const DeviceParams& p, const HilbertDims& dims,
                              const CoherentDrive& drive,
                              const IncoherentPump& pump = {});

/// CW DriveSpec overload; the power is converted with p.eta and omega_cav.
Liouvillian build_liouvillian(const DeviceParams& p, const HilbertDims& dims,
                              const DriveSpec& drive,
                              const IncoherentPump& pump = {});

/// Stationary state from the rank-completed system in which the first
/// population equation is replaced by Tr rho = 1. Throws SimulationError
/// when the null space is degenerate or the residual exceeds 1e-10.
DensityMatrix steady_state(const Liouvillian& l);

// ---------------------------------------------------------------------------
// Time evolution

enum class Stepper { adaptive, fixed };

struct EvolveOptions {
  Stepper stepper = Stepper::adaptive;
  double abs_tol = 1e-10;       // per real/imag component of rho
  double rel_tol = 0.0;
  double fixed_step_ps = 0.25;
  double max_step_ps = 0.0;     // 0: a quarter of the shortest pulse, else unbounded
  int max_steps_between_outputs = 200000;
  /// Rotating-frame carrier as detuning from omega_cav. Defaults to the
  /// first drive's carrier, or the cavity when there are no drives.
  std::optional<double> frame_detuning_ghz;
};

/// Observer receives (t in ps, state). Returning false stops the run.
using TrajectoryObserver = std::function<bool(double, const DensityMatrix&)>;

/// Integrates the master equation under pulsed or CW drives, reporting the
/// state at every point of t_grid_ps (strictly increasing). The initial
/// state is taken at t_grid_ps.front(). A tone at carrier offset delta from
/// the frame enters as sqrt(kappa_par) eps(t) (b^dag e^{-i 2 pi delta t} + h.c.).
void evolve_observe(const DensityMatrix& rho0, const DeviceParams& p,
                    const HilbertDims& dims, const std::vector<DriveSpec>& drives,
                    const std::vector<double>& t_grid_ps,
                    const TrajectoryObserver& observer,
                    const EvolveOptions& options = {},
                    const IncoherentPump& pump = {});

std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const DeviceParams& p,
                                  const HilbertDims& dims,
                                  const std::vector<DriveSpec>& drives,
                                  const std::vector<double>& t_grid_ps,
                                  const EvolveOptions& options = {},
                                  const IncoherentPump& pump = {});

// ---------------------------------------------------------------------------

struct TruncationCheck {
  int n_fock = 0;
  int n_fock_high = 0;
  double photons = 0.0;
  double photons_high = 0.0;
  double relative_change = 0.0;
  bool converged = false;  // relative_change < tolerance
};

/// Compares steady-state <b^dag b> at n_fock and n_fock + 4.
TruncationCheck check_truncation(const DeviceParams& p, int n_fock,
                                 const CoherentDrive& drive,
                                 const IncoherentPump& pump = {},
                                 double tolerance = 1e-3);

}  // namespace qdswitch
