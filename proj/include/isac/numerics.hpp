#pragma once
// Dense complex-matrix kernel for the beamforming solver: a thin layer over
// Eigen that pins the conventions the solver depends on (column-stacking
// vec, ascending Hermitian eigenvalues) and enforces the numeric contracts
// (finiteness, Hermitian symmetry) at the kernel boundary.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace isac {

using cxd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_finite(const CMatrix& a, const char* what) {
  if (!a.allFinite())
    throw NumericalFailure(std::string(what) + ": non-finite entries");
}

struct HermitianEig {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns aligned with eigenvalues, unitary
};

// Full eigendecomposition of a Hermitian matrix. Inputs must be Hermitian to
// 1e-8 relative in Frobenius norm; the residual asymmetry is folded away by
// working on (A + A^H)/2.
inline HermitianEig hermitian_eig(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw DimensionError("hermitian_eig: matrix not square");
  if (a.rows() == 0) throw DimensionError("hermitian_eig: empty matrix");
  require_finite(a, "hermitian_eig");
  const double nrm = a.norm();
  if ((a - a.adjoint()).norm() > 1e-8 * nrm)
    throw ContractViolation("hermitian_eig: input not Hermitian within 1e-8");
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("hermitian_eig: eigensolver did not converge");
  HermitianEig out{es.eigenvalues(), es.eigenvectors()};
  require_finite(out.eigenvectors, "hermitian_eig");
  return out;
}

// Largest algebraic eigenvalue. Sizes here never exceed a few hundred, so a
// full decomposition is cheap and avoids power-iteration edge cases.
inline double max_eigenvalue(const CMatrix& a) {
  const HermitianEig eig = hermitian_eig(a);
  return eig.eigenvalues(eig.eigenvalues.size() - 1);
}

// Column-stacking vectorization and its inverse.
inline CVector vec(const CMatrix& a) { return a.reshaped(); }

inline CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw DimensionError("unvec: length does not match target shape");
  return v.reshaped(rows, cols);
}

inline CMatrix hadamard(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hadamard: dimension mismatch");
  return a.cwiseProduct(b);
}

// Entrywise max-magnitude norm (the PDD constraint-violation measure).
inline double linf_norm(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace isac
