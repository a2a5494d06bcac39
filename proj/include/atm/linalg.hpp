#pragma once

#include <complex>

#include <Eigen/Dense>

namespace atm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

/// The 2N x 2N antisymmetric unit [[0, -I], [I, 0]].
inline CMatrix symplectic_unit(Eigen::Index n) {
  CMatrix j = CMatrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -CMatrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = CMatrix::Identity(n, n);
  return j;
}

inline double frobenius(const CMatrix& m) { return m.norm(); }

/// 2-norm condition number via SVD; infinity for singular or non-finite input.
double condition_number(const CMatrix& m);

/// True when every entry is finite.
bool all_finite(const CMatrix& m);

}  // namespace atm
