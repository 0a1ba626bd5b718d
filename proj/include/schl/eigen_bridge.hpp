#pragma once

// Conversions between ComplexMatrix and Eigen, used where eigenvalues or
// singular values are needed.

#include <Eigen/Dense>

#include "schl/numkit.hpp"

namespace schl {

using EigenMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

inline EigenMatrix to_eigen(const ComplexMatrix& a) {
  EigenMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  return out;
}

inline ComplexMatrix from_eigen(const EigenMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  return out;
}

inline std::vector<cplx> eigenvalues(const ComplexMatrix& a) {
  if (!a.is_square()) fail(ErrorKind::DimensionMismatch, "eigenvalues of non-square " + a.shape());
  Eigen::ComplexEigenSolver<EigenMatrix> solver(to_eigen(a), false);
  if (solver.info() != Eigen::Success) fail(ErrorKind::InvalidArgument, "eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace schl
