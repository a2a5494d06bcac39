#include "atm/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "atm/errors.hpp"

namespace atm {
namespace {

bool same_z(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

void check_conditioning(const CMatrix& m, double z0, double z1) {
  const double cond = condition_number(m);
  if (cond > kMaxTransferCondition) {
    std::ostringstream os;
    os << "transfer matrix over [" << z0 << ", " << z1 << "] has condition number " << cond
       << "; subdivide the layer or use the Green-function route";
    throw OverflowError(os.str());
  }
}

}  // namespace

TransferMatrix::TransferMatrix(CMatrix m, double z_to, double z_from, SpectralPoint sp)
    : m_(std::move(m)), z_to_(z_to), z_from_(z_from), sp_(sp) {
  if (m_.rows() != m_.cols() || m_.rows() % 2 != 0 || m_.rows() == 0)
    throw ContractViolation("TransferMatrix: matrix must be 2N x 2N");
}

TransferMatrix TransferMatrix::identity(Eigen::Index n, double z, const SpectralPoint& sp) {
  return TransferMatrix(CMatrix::Identity(2 * n, 2 * n), z, z, sp);
}

TransferMatrix TransferMatrix::inverse() const {
  Eigen::PartialPivLU<CMatrix> lu(m_);
  return TransferMatrix(lu.inverse(), z_from_, z_to_, sp_);
}

TransferMatrix propagate_constant_layer(const CoefficientSet& c, double z0, double z1,
                                        const SpectralPoint& sp) {
  if (!c.is_constant())
    throw ContractViolation("propagate_constant_layer: coefficients are not constant");
  if (z1 == z0) return TransferMatrix::identity(c.dim(), z0, sp);
  const CMatrix d = companion_matrix(c, 0.5 * (z0 + z1), sp);
  CMatrix t = (d * cplx(z1 - z0)).exp();
  check_conditioning(t, z0, z1);
  return TransferMatrix(std::move(t), z1, z0, sp);
}

TransferMatrix propagate_graded_layer(const CoefficientSet& c, double z0, double z1,
                                      const SpectralPoint& sp, double tol) {
  if (z1 == z0) return TransferMatrix::identity(c.dim(), z0, sp);
  IntegrationOptions opt;
  opt.tol = tol;
  const LinearGenerator gen = [&](double z) { return companion_matrix(c, z, sp); };
  CMatrix t = integrate_linear(gen, z0, z1, CMatrix::Identity(2 * c.dim(), 2 * c.dim()), opt);
  check_conditioning(t, z0, z1);
  return TransferMatrix(std::move(t), z1, z0, sp);
}

TransferMatrix propagate_layer(const CoefficientSet& c, double z0, double z1,
                               const SpectralPoint& sp, double tol) {
  return c.is_constant() ? propagate_constant_layer(c, z0, z1, sp)
                         : propagate_graded_layer(c, z0, z1, sp, tol);
}

TransferMatrix compose(const TransferMatrix& t2, const TransferMatrix& t1) {
  if (t1.dim() != t2.dim()) throw ContractViolation("compose: dimension mismatch");
  if (!same_z(t1.z_to(), t2.z_from())) {
    std::ostringstream os;
    os << "compose: endpoint mismatch (" << t1.z_to() << " vs " << t2.z_from() << ")";
    throw ContractViolation(os.str());
  }
  if (!(t1.spectral_point() == t2.spectral_point()))
    throw ContractViolation("compose: spectral point mismatch");
  return TransferMatrix(t2.matrix() * t1.matrix(), t2.z_to(), t1.z_from(), t1.spectral_point());
}

StateVector transfer_state(const TransferMatrix& t, const StateVector& s) {
  if (s.dim() != t.dim()) throw ContractViolation("transfer_state: dimension mismatch");
  return StateVector::from_stacked(t.matrix() * s.stacked());
}

CMatrix transconjugate(const CMatrix& m, const SpectralPoint& sp) {
  if (!sp.on_real_axis())
    throw ContractViolation("transconjugate unavailable off real axis: re-evaluate at conj(Omega)");
  return m.adjoint();
}

CMatrix transconjugate(const std::function<CMatrix(const SpectralPoint&)>& m,
                       const SpectralPoint& sp) {
  return m(sp.conjugate()).adjoint();
}

ConjugateTransfer transconjugate(const TransferMatrix& t) {
  return {transconjugate(t.matrix(), t.spectral_point()), t.z_to(), t.z_from()};
}

ConjugateTransfer transconjugate(const TransferMatrix& t, const TransferMatrix& at_conjugate_point) {
  if (!same_z(t.z_to(), at_conjugate_point.z_to()) ||
      !same_z(t.z_from(), at_conjugate_point.z_from()))
    throw ContractViolation("transconjugate: transfer paths differ");
  const SpectralPoint expected = t.spectral_point().conjugate();
  const SpectralPoint& got = at_conjugate_point.spectral_point();
  if (std::abs(got.value() - expected.value()) > 1e-14 * std::max(1.0, std::abs(expected.value())) ||
      got.kappa() != expected.kappa())
    throw ContractViolation("transconjugate: second matrix is not at the conjugate point");
  return {at_conjugate_point.matrix().adjoint(), t.z_to(), t.z_from()};
}

ConjugateTransfer hermitean_conjugate(const TransferMatrix& t) {
  return {t.matrix().adjoint(), t.z_to(), t.z_from()};
}

double SymplecticReport::max_residual() const {
  return std::max({residual_full, det_defect, block_aa_da, block_dd_ad, block_aa_dd});
}

SymplecticReport symplectic_report(const TransferMatrix& t, const ConjugateTransfer& t_c) {
  if (t_c.m.rows() != t.matrix().rows())
    throw ContractViolation("symplectic_report: dimension mismatch");
  const auto n = t.dim();
  const CMatrix j = symplectic_unit(n);
  SymplecticReport r;
  r.at_real_axis = t.spectral_point().on_real_axis();
  r.residual_full = (t_c.m * j * t.matrix() - j).norm();
  const cplx det = t.matrix().determinant();
  r.det_defect = std::abs(std::norm(det) - 1.0);
  r.block_aa_da = (t_c.aa_c() * t.da() - t_c.da_c() * t.aa()).norm();
  r.block_dd_ad = (t_c.dd_c() * t.ad() - t_c.ad_c() * t.dd()).norm();
  r.block_aa_dd = (t_c.aa_c() * t.dd() - t_c.da_c() * t.ad() - CMatrix::Identity(n, n)).norm();
  return r;
}

}  // namespace atm
