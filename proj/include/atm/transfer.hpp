#pragma once

// Associated transfer matrix: T(z, z0) carries Psi = (F, A) from z0 to z,
//
//   T = [[T_AA, T_AD],
//        [T_DA, T_DD]]
//
// rows/columns ordered (F, A). Across interfaces T is a plain chain product because
// both F and A are continuous.

#include <functional>

#include "atm/integrator.hpp"
#include "atm/linalg.hpp"
#include "atm/sl_system.hpp"

namespace atm {

/// Per-layer propagation refuses to return matrices worse conditioned than this.
inline constexpr double kMaxTransferCondition = 1e14;

class TransferMatrix {
 public:
  TransferMatrix(CMatrix m, double z_to, double z_from, SpectralPoint sp);
  static TransferMatrix identity(Eigen::Index n, double z, const SpectralPoint& sp);

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows() / 2; }
  double z_to() const noexcept { return z_to_; }
  double z_from() const noexcept { return z_from_; }
  const SpectralPoint& spectral_point() const noexcept { return sp_; }

  CMatrix aa() const { return m_.topLeftCorner(dim(), dim()); }
  CMatrix ad() const { return m_.topRightCorner(dim(), dim()); }
  CMatrix da() const { return m_.bottomLeftCorner(dim(), dim()); }
  CMatrix dd() const { return m_.bottomRightCorner(dim(), dim()); }

  /// T(z_from, z_to).
  TransferMatrix inverse() const;
  double condition() const { return condition_number(m_); }

 private:
  CMatrix m_;
  double z_to_;
  double z_from_;
  SpectralPoint sp_;
};

/// exp(D (z1 - z0)) by scaling and squaring; requires c.is_constant().
/// Throws OverflowError when the result's condition number exceeds kMaxTransferCondition.
TransferMatrix propagate_constant_layer(const CoefficientSet& c, double z0, double z1,
                                        const SpectralPoint& sp);

/// Integrates dT/dz = D(z) T from T(z0, z0) = I with adaptive steps.
TransferMatrix propagate_graded_layer(const CoefficientSet& c, double z0, double z1,
                                      const SpectralPoint& sp, double tol = 1e-10);

/// Matrix exponential for constant media, integration otherwise.
TransferMatrix propagate_layer(const CoefficientSet& c, double z0, double z1,
                               const SpectralPoint& sp, double tol = 1e-10);

/// T(z2, z0) = T(z2, z1) T(z1, z0).
TransferMatrix compose(const TransferMatrix& t2, const TransferMatrix& t1);

StateVector transfer_state(const TransferMatrix& t, const StateVector& s);

/// Transconjugate of a matrix known only at a real-axis point (plain conjugate transpose).
/// Throws ContractViolation off the real axis, where m^c needs m re-evaluated at conj(Omega).
CMatrix transconjugate(const CMatrix& m, const SpectralPoint& sp);

/// m^c(Omega) = m(conj Omega)^+ for a matrix-valued function of the spectral point.
CMatrix transconjugate(const std::function<CMatrix(const SpectralPoint&)>& m,
                       const SpectralPoint& sp);

/// T^c for a transfer matrix. Blocks move to transposed positions:
///   T^c = [[T_AA^c, T_DA^c], [T_AD^c, T_DD^c]].
struct ConjugateTransfer {
  CMatrix m;
  double z_to;
  double z_from;

  Eigen::Index dim() const noexcept { return m.rows() / 2; }
  CMatrix aa_c() const { return m.topLeftCorner(dim(), dim()); }
  CMatrix da_c() const { return m.topRightCorner(dim(), dim()); }
  CMatrix ad_c() const { return m.bottomLeftCorner(dim(), dim()); }
  CMatrix dd_c() const { return m.bottomRightCorner(dim(), dim()); }
};

/// Real-axis transconjugate.
ConjugateTransfer transconjugate(const TransferMatrix& t);

/// Transconjugate from the same path propagated at sp.conjugate().
ConjugateTransfer transconjugate(const TransferMatrix& t, const TransferMatrix& at_conjugate_point);

/// Plain conjugate transpose at the same Omega. Wrong off the real axis; kept for the
/// causal-sign comparison.
ConjugateTransfer hermitean_conjugate(const TransferMatrix& t);

struct SymplecticReport {
  double residual_full = 0.0;  // ||T^c J T - J||_F
  double det_defect = 0.0;     // | |det T|^2 - 1 |
  double block_aa_da = 0.0;    // ||T_AA^c T_DA - T_DA^c T_AA||_F
  double block_dd_ad = 0.0;    // ||T_DD^c T_AD - T_AD^c T_DD||_F
  double block_aa_dd = 0.0;    // ||T_AA^c T_DD - T_DA^c T_AD - I||_F
  bool at_real_axis = false;

  double max_residual() const;
  bool within(double threshold) const { return max_residual() < threshold; }
};

SymplecticReport symplectic_report(const TransferMatrix& t, const ConjugateTransfer& t_c);

}  // namespace atm
