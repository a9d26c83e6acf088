#pragma once

// Dense operator algebra on the truncated cavity (x) QD Hilbert space.
//
// Factor order is fixed as cavity (x) qd. A basis state |m, q> with Fock
// number m and QD level q (0 = ground, 1 = excited) has joint index 2*m + q.

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace qdswitch {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct HilbertDims {
  int n_fock = 10;

  static constexpr int kQdLevels = 2;

  explicit HilbertDims(int n = 10);
  [[nodiscard]] int dim() const { return kQdLevels * n_fock; }
  [[nodiscard]] int index(int fock, int qd) const { return kQdLevels * fock + qd; }
};

enum class Slot { cavity, qd };

/// Truncated bosonic annihilation operator, a[m, m+1] = sqrt(m+1).
Operator fock_annihilation(int n_fock);

/// sigma_- = |g><e| on the two-level QD.
Operator qd_lowering();

Operator identity(int dim);
Operator kron(const Operator& a, const Operator& b);
Operator dagger(const Operator& a);
Operator commutator(const Operator& a, const Operator& b);

/// op (x) I_qd for Slot::cavity, I_cav (x) op for Slot::qd.
Operator embed(const Operator& op, Slot slot, const HilbertDims& dims);

/// The joint-space ladder operators for one truncation, built once.
struct Ladder {
  explicit Ladder(const HilbertDims& dims);

  HilbertDims dims;
  Operator b;        // cavity annihilation
  Operator bd;       // b^dagger
  Operator sm;       // sigma_-
  Operator sp;       // sigma_+
  Operator n_cav;    // b^dagger b
  Operator n_qd;     // sigma_+ sigma_-
};

/// Joint cavity-QD density matrix. Construction does not enforce the
/// physical invariants; call diagnostics() to measure them.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Operator m) : m_(std::move(m)) {}

  static DensityMatrix vacuum_ground(const HilbertDims& dims);
  static DensityMatrix fock(const HilbertDims& dims, int n, bool qd_excited);
  static DensityMatrix maximally_mixed(int dim);

  [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
  [[nodiscard]] const Operator& matrix() const { return m_; }
  Operator& matrix() { return m_; }
  [[nodiscard]] cplx trace() const { return m_.trace(); }

  /// Invariant measurements.
  struct Diagnostics {
    double trace_error = 0.0;        // |Tr rho - 1|
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double min_eigenvalue = 0.0;     // of the Hermitian part

    [[nodiscard]] bool valid(double trace_tol = 1e-9, double herm_tol = 1e-12,
                             double eig_tol = 1e-9) const {
      return trace_error < trace_tol && hermiticity_error < herm_tol &&
             min_eigenvalue > -eig_tol;
    }
  };
  [[nodiscard]] Diagnostics diagnostics() const;

 private:
  Operator m_;
};

/// Tr(rho * op).
cplx expectation(const DensityMatrix& rho, const Operator& op);

/// 0.5 * sum |eig(a - b)|.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qdswitch
