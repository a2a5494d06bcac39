#pragma once

// Matrix Sturm-Liouville system for one medium:
//
//   L F = dA/dz + Y F' + W F = 0,   A = B F' + P F,
//
// with N x N coefficient blocks that may depend on z and on the spectral point.

#include <functional>

#include "atm/linalg.hpp"
#include "atm/spectral_point.hpp"

namespace atm {

struct CoefficientBlocks {
  CMatrix b, p, y, w;
};

/// Must be a pure function of (z, sp).
using CoefficientFn = std::function<CoefficientBlocks(double z, const SpectralPoint& sp)>;

struct CoefficientOptions {
  bool is_constant = false;
  /// Request the hermitean class B = B^+, P = -Y^+, W = W^+ at real Omega. Validated at
  /// construction by sampling.
  bool hermitean = false;
  /// Interval used for hermiticity sampling (graded media should pass their extent).
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  double hermiticity_tol = 1e-10;
};

class CoefficientSet {
 public:
  CoefficientSet(Eigen::Index dim, CoefficientFn fn, CoefficientOptions options = {});

  /// Constant medium from fixed B, P, Y and an Omega-dependent W.
  static CoefficientSet constant(const CMatrix& b, const CMatrix& p, const CMatrix& y,
                                 std::function<CMatrix(const SpectralPoint&)> w,
                                 bool hermitean = false);

  Eigen::Index dim() const noexcept { return dim_; }
  bool is_constant() const noexcept { return options_.is_constant; }
  bool hermitean() const noexcept { return options_.hermitean; }
  const CoefficientOptions& options() const noexcept { return options_; }

  /// Evaluates and shape-checks all four blocks; throws CoefficientError.
  CoefficientBlocks operator()(double z, const SpectralPoint& sp) const;

  /// Central-difference z-derivative of the blocks (zero for constant media).
  CoefficientBlocks derivative(double z, const SpectralPoint& sp) const;

 private:
  Eigen::Index dim_;
  CoefficientFn fn_;
  CoefficientOptions options_;
};

/// Largest relative violation of B = B^+, P = -Y^+, W = W^+ at (z, sp).
double hermiticity_defect(const CoefficientSet& c, double z, const SpectralPoint& sp);

struct StateVector {
  CVector f;  // primary field
  CVector a;  // secondary field

  StateVector(CVector f, CVector a);
  static StateVector from_stacked(const CVector& psi);

  Eigen::Index dim() const noexcept { return f.size(); }
  CVector stacked() const;
};

/// A state located at z (for concomitant / residual evaluation).
struct StateSample {
  double z;
  StateVector psi;
};

/// Primary field and its z-derivative at z.
struct FieldSample {
  double z;
  CVector f;
  CVector df;
};

/// Value plus first and second derivative of an N-vector function.
struct FieldJet {
  CVector f, df, d2f;
};

using FieldFunction = std::function<FieldJet(double z)>;

/// Wraps a value-only function; derivatives come from central differences.
FieldFunction numeric_jet(std::function<CVector(double)> f);

/// A = B F' + P F.
CVector secondary_field(const CoefficientSet& c, const FieldSample& s, const SpectralPoint& sp);

/// First-order generator D(z) with dPsi/dz = D Psi for Psi = (F, A):
///   [[-B^-1 P, B^-1], [Y B^-1 P - W, -Y B^-1]].
CMatrix companion_matrix(const CoefficientSet& c, double z, const SpectralPoint& sp);

/// ||D^c J + J D||_F with D^c the transconjugate, i.e. D(conj Omega)^+.
double generator_symplectic_defect(const CoefficientSet& c, double z, const SpectralPoint& sp);

/// j = i (F^+ A - A^+ F).
cplx flux(const StateVector& s);

/// (B F' + P F)' + Y F' + W F at z.
CVector apply_operator(const CoefficientSet& c, const FieldFunction& f, double z,
                       const SpectralPoint& sp);

/// Formal adjoint rule: (B^+ F2' - Y^+ F2)' - P^+ F2' + W^+ F2.
CVector apply_adjoint_operator(const CoefficientSet& c, const FieldFunction& f2, double z,
                               const SpectralPoint& sp);

/// Residual R = F2^+ A - A2^+ F of two states at the same z (hermitean-class form).
cplx residual(const StateSample& s1, const StateSample& s2);

/// General bilinear concomitant
///   R = F2^+ B F' - F2'^+ B F + F2^+ (P + Y) F,
/// which reduces to residual() for hermitean-class coefficients.
cplx concomitant(const CoefficientSet& c, const FieldJet& f, const FieldJet& f2, double z,
                 const SpectralPoint& sp);

struct GreenIdentityResult {
  cplx defect;            // <F2|L F> - <F|L2 F2>^+ - [R(b) - R(a)]
  double error_estimate;  // quadrature error estimate of both integrals combined
  bool converged;
};

GreenIdentityResult green_identity_defect(const CoefficientSet& c, const FieldFunction& f,
                                          const FieldFunction& f2, double a, double b,
                                          const SpectralPoint& sp, double quadrature_tol = 1e-12);

}  // namespace atm
