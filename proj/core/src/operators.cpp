#include "qdswitch/operators.hpp"

#include <cmath>
#include <string>

namespace qdswitch {

HilbertDims::HilbertDims(int n) : n_fock(n) {
  if (n < 2) throw DimensionError("n_fock must be >= 2, got " + std::to_string(n));
}

Operator fock_annihilation(int n_fock) {
  if (n_fock < 2) throw DimensionError("n_fock must be >= 2");
  Operator a = Operator::Zero(n_fock, n_fock);
  for (int m = 0; m + 1 < n_fock; ++m) a(m, m + 1) = std::sqrt(static_cast<double>(m + 1));
  return a;
}

Operator qd_lowering() {
  Operator s = Operator::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

Operator identity(int dim) { return Operator::Identity(dim, dim); }

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator dagger(const Operator& a) { return a.adjoint(); }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator embed(const Operator& op, Slot slot, const HilbertDims& dims) {
  if (op.rows() != op.cols()) throw DimensionError("embed: operator must be square");
  const int expected = slot == Slot::cavity ? dims.n_fock : HilbertDims::kQdLevels;
  if (op.rows() != expected) {
    throw DimensionError("embed: operator dimension " + std::to_string(op.rows()) +
                         " does not match slot dimension " + std::to_string(expected));
  }
  if (slot == Slot::cavity) return kron(op, identity(HilbertDims::kQdLevels));
  return kron(identity(dims.n_fock), op);
}

Ladder::Ladder(const HilbertDims& d)
    : dims(d),
      b(embed(fock_annihilation(d.n_fock), Slot::cavity, d)),
      bd(b.adjoint()),
      sm(embed(qd_lowering(), Slot::qd, d)),
      sp(sm.adjoint()),
      n_cav(bd * b),
      n_qd(sp * sm) {}

// ---------------------------------------------------------------------------

DensityMatrix DensityMatrix::vacuum_ground(const HilbertDims& dims) {
  return fock(dims, 0, false);
}

DensityMatrix DensityMatrix::fock(const HilbertDims& dims, int n, bool qd_excited) {
  if (n < 0 || n >= dims.n_fock) throw DimensionError("Fock level outside truncation");
  Operator m = Operator::Zero(dims.dim(), dims.dim());
  const int k = dims.index(n, qd_excited ? 1 : 0);
  m(k, k) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Operator::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix::Diagnostics DensityMatrix::diagnostics() const {
  Diagnostics d;
  d.trace_error = std::abs(m_.trace() - cplx(1.0, 0.0));
  d.hermiticity_error = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  const Operator herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

cplx expectation(const DensityMatrix& rho, const Operator& op) {
  if (rho.dim() != op.rows() || op.rows() != op.cols()) {
    throw DimensionError("expectation: dimension mismatch");
  }
  // Tr(rho op) = sum_ij rho_ij op_ji
  return (rho.matrix().transpose().cwiseProduct(op)).sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("trace_distance: dimension mismatch");
  const Operator diff = a.matrix() - b.matrix();
  const Operator herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qdswitch
