#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qdswitch/operators.hpp"

using namespace qdswitch;
using doctest::Approx;

namespace {

Operator random_operator(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Operator m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = cplx(n(rng), n(rng));
  }
  return m;
}

DensityMatrix random_state(int dim, std::mt19937_64& rng) {
  const Operator a = random_operator(dim, rng);
  Operator rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix(rho);
}

double max_abs(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("fock_annihilation matrix elements") {
  const Operator a2 = fock_annihilation(2);
  Operator expect2 = Operator::Zero(2, 2);
  expect2(0, 1) = 1.0;
  CHECK(max_abs(a2 - expect2) == 0.0);

  const Operator a3 = fock_annihilation(3);
  CHECK(a3(0, 1) == cplx(1.0));
  CHECK(a3(1, 2) == cplx(std::sqrt(2.0)));
  CHECK(a3.cwiseAbs().sum() == Approx(1.0 + std::sqrt(2.0)));

  CHECK_THROWS_AS(fock_annihilation(1), DimensionError);
}

TEST_CASE("truncated commutator [a, a^dag]") {
  for (int n : {2, 3, 6, 10}) {
    const Operator a = fock_annihilation(n);
    Operator expect = Operator::Identity(n, n);
    expect(n - 1, n - 1) -= static_cast<double>(n);
    CHECK(max_abs(commutator(a, dagger(a)) - expect) < 1e-12);
  }
}

TEST_CASE("embedding") {
  const HilbertDims dims(2);
  CHECK(dims.dim() == 4);
  CHECK(max_abs(embed(identity(2), Slot::cavity, dims) - identity(4)) == 0.0);

  const Operator sm = embed(qd_lowering(), Slot::qd, dims);
  CHECK(sm(dims.index(0, 0), dims.index(0, 1)) == cplx(1.0));
  CHECK(sm(dims.index(1, 0), dims.index(1, 1)) == cplx(1.0));
  CHECK(sm.cwiseAbs().sum() == Approx(2.0));

  const HilbertDims d5(5);
  const Operator b = embed(fock_annihilation(5), Slot::cavity, d5);
  const Operator s = embed(qd_lowering(), Slot::qd, d5);
  CHECK(max_abs(commutator(b, s)) < 1e-15);
  CHECK(max_abs(commutator(b, dagger(s))) < 1e-15);

  CHECK_THROWS_AS(embed(identity(3), Slot::qd, d5), DimensionError);
  CHECK_THROWS_AS(embed(identity(4), Slot::cavity, d5), DimensionError);
  CHECK_THROWS(HilbertDims(1));
}

TEST_CASE("embed repeats the spectrum of the embedded operator") {
  std::mt19937_64 rng(7);
  const HilbertDims dims(3);
  Operator h = random_operator(3, rng);
  h = (h + h.adjoint()).eval();
  const Operator big = embed(h, Slot::cavity, dims);

  Eigen::SelfAdjointEigenSolver<Operator> small_es(h);
  Eigen::SelfAdjointEigenSolver<Operator> big_es(big);
  std::vector<double> expect;
  for (int i = 0; i < 3; ++i) {
    expect.push_back(small_es.eigenvalues()(i));
    expect.push_back(small_es.eigenvalues()(i));
  }
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 6; ++i) CHECK(big_es.eigenvalues()(i) == Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("dagger properties on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Operator a = random_operator(6, rng);
    const Operator b = random_operator(6, rng);
    CHECK(max_abs(dagger(dagger(a)) - a) == 0.0);
    CHECK(max_abs(dagger(a * b) - dagger(b) * dagger(a)) < 1e-12);
  }
}

TEST_CASE("kron follows the cavity-major index convention") {
  const HilbertDims dims(4);
  const Operator n = fock_annihilation(4).adjoint() * fock_annihilation(4);
  const Operator n_joint = kron(n, identity(2));
  for (int m = 0; m < 4; ++m) {
    for (int q = 0; q < 2; ++q) {
      CHECK(n_joint(dims.index(m, q), dims.index(m, q)).real() == Approx(m));
    }
  }
}

TEST_CASE("ladder bundle") {
  const Ladder l(HilbertDims(4));
  CHECK(max_abs(l.bd - dagger(l.b)) == 0.0);
  CHECK(max_abs(l.n_cav - l.bd * l.b) < 1e-15);
  CHECK(max_abs(l.n_qd - l.sp * l.sm) < 1e-15);
}

TEST_CASE("expectation values") {
  const HilbertDims dims(5);
  const Ladder l(dims);
  CHECK(std::abs(expectation(DensityMatrix::vacuum_ground(dims), l.n_cav)) == 0.0);
  CHECK(expectation(DensityMatrix::fock(dims, 1, false), l.n_cav).real() == Approx(1.0));
  CHECK(expectation(DensityMatrix::fock(dims, 3, true), l.n_qd).real() == Approx(1.0));
  CHECK(expectation(DensityMatrix::maximally_mixed(10), identity(10)).real() == Approx(1.0));
  CHECK_THROWS_AS(expectation(DensityMatrix::maximally_mixed(4), l.n_cav), DimensionError);

  std::mt19937_64 rng(3);
  const DensityMatrix r1 = random_state(10, rng);
  const DensityMatrix r2 = random_state(10, rng);
  const Operator a = random_operator(10, rng);
  const Operator b = random_operator(10, rng);
  const cplx alpha(0.3, -1.2);
  // linear in the operator
  CHECK(std::abs(expectation(r1, a + alpha * b) -
                 (expectation(r1, a) + alpha * expectation(r1, b))) < 1e-12);
  // linear in the state
  const DensityMatrix mix(0.25 * r1.matrix() + 0.75 * r2.matrix());
  CHECK(std::abs(expectation(mix, a) -
                 (0.25 * expectation(r1, a) + 0.75 * expectation(r2, a))) < 1e-12);
  // Hermitian operators give real values
  const Operator h = a + a.adjoint();
  CHECK(std::abs(expectation(r1, h).imag()) < 1e-12);
}

TEST_CASE("density matrix diagnostics and trace distance") {
  const HilbertDims dims(3);
  const DensityMatrix vac = DensityMatrix::vacuum_ground(dims);
  CHECK(vac.diagnostics().valid());
  const DensityMatrix one = DensityMatrix::fock(dims, 1, false);
  CHECK(trace_distance(vac, one) == Approx(1.0));
  CHECK(trace_distance(vac, vac) == Approx(0.0));

  Operator bad = vac.matrix();
  bad(0, 1) = 0.1;
  const auto d = DensityMatrix(bad).diagnostics();
  CHECK(d.hermiticity_error == Approx(0.1));
  CHECK_FALSE(d.valid());

  Operator neg = Operator::Zero(6, 6);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  const auto dn = DensityMatrix(neg).diagnostics();
  CHECK(dn.min_eigenvalue == Approx(-0.2));
  CHECK(dn.trace_error < 1e-15);
  CHECK_FALSE(dn.valid());
}
