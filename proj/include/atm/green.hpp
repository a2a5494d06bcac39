#pragma once

// Regular Green function assembled from the associated transfer matrix.
//
// With a reference plane z0 and T(z) = T(z, z0),
//
//   G(z, z') = sum_{a,b in {A,D}} T_Aa(z) C_ab T_Ab(z')^c
//
// where the coefficient blocks C depend on the branch (z <= z' or z >= z') and are fixed
// by the regular limits T+-, Theta+- of the two half-spaces.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "atm/linalg.hpp"
#include "atm/sl_system.hpp"
#include "atm/stack.hpp"
#include "atm/transfer.hpp"

namespace atm {

/// Which side of the real axis ties are broken toward. The conjugate system needs the
/// mirror image of the causal tilt, which is invisible once eta has been folded to zero.
enum class Tilt { retarded, advanced };

struct BulkModeOptions {
  double default_eta = 1e-6;
  /// |Re lambda| below tie_tol * max(1, ||D||) counts as undecided.
  double tie_tol = 1e-14;
  int max_retries = 3;
  /// Eigenvector matrices worse conditioned than this are treated as defective.
  double max_eigvec_condition = 1e10;
  Tilt tilt = Tilt::retarded;
};

/// Modes e^{lambda z} of a constant medium split by which way they decay.
struct BulkModes {
  CVector eigenvalues;
  std::vector<Eigen::Index> right_decaying;  // Re lambda < 0
  std::vector<Eigen::Index> left_decaying;   // Re lambda > 0
  CMatrix f_right, a_right;
  CMatrix f_left, a_left;
  /// Broadening at which the split was decided (differs from sp.eta() after a tie).
  double classification_eta = 0.0;
};

BulkModes bulk_modes(const CoefficientSet& c, const SpectralPoint& sp,
                     const BulkModeOptions& options = {});

/// True when some mode of a constant medium neither grows nor decays at sp.
bool has_propagating_modes(const CoefficientSet& c, const SpectralPoint& sp, double tol = 1e-10);

/// Replaces a graded medium by its average over [lo, hi] so it can be treated as constant.
CoefficientSet flatten(const CoefficientSet& c, double lo, double hi, int samples = 64);

enum class Conjugation {
  transconjugate,     // causal: Theta from the system at conj(Omega)
  hermitean_adjoint,  // deliberately misapplied: plain dagger at the same Omega
};

struct RegularLimits {
  CMatrix t_minus, t_plus;
  CMatrix theta_minus, theta_plus;
};

/// -A F^-1 for a decaying subspace with components (F, A). Throws IrregularMediumError.
CMatrix decaying_ratio(const CMatrix& f, const CMatrix& a);

/// Limits of an infinite homogeneous medium (any z0).
RegularLimits regular_limits(const BulkModes& modes, const BulkModes& conjugate_modes);
RegularLimits regular_limits(const CoefficientSet& medium, const SpectralPoint& sp,
                             Conjugation conj = Conjugation::transconjugate,
                             const BulkModeOptions& options = {});

struct StackLimitOptions {
  BulkModeOptions modes;
  /// Averaging windows for graded exteriors, in the exterior's local coordinate.
  std::optional<std::pair<double, double>> left_window;
  std::optional<std::pair<double, double>> right_window;
  double tol = 1e-10;
};

/// Limits of a layered structure seen from the reference plane z0: each exterior's
/// decaying subspace is carried through the layers to z0.
RegularLimits regular_limits(const LayerStack& stack, double z0, const SpectralPoint& sp,
                             Conjugation conj = Conjugation::transconjugate,
                             const StackLimitOptions& options = {});

struct GreenCoefficients {
  CMatrix c_aa;
  CMatrix c_da_lt, c_da_gt;
  CMatrix c_ad_lt, c_ad_gt;
  CMatrix c_dd_lt, c_dd_gt;
  CMatrix t_plus, t_minus, theta_plus, theta_minus;

  Eigen::Index dim() const noexcept { return c_aa.rows(); }
};

/// C_AA = (T- - T+)^-1 and the remaining blocks from it. Throws NumericalError when the
/// limits coincide. The hermitean_adjoint convention normalizes through the primed-side
/// jump instead, C_AA = (Theta- - Theta+)^-1, which is where the wrong conjugation bites.
GreenCoefficients assemble_green_coefficients(const RegularLimits& limits,
                                              Conjugation conj = Conjugation::transconjugate);

/// below: z <= z' (coefficients C^<), above: z >= z' (C^>).
enum class Branch { below, above };

struct GreenSample {
  CMatrix g;  // G(z, z')
  CMatrix a;  // A(z, z') = B dG/dz + P G
  double z;
  double zp;
};

/// t_z = T(z, z0); t_zp_c = T(z', z0)^c. Throws ContractViolation when the branch does
/// not match the ordering of z and z' or the reference planes differ.
GreenSample green_eval(const GreenCoefficients& gc, const TransferMatrix& t_z,
                       const ConjugateTransfer& t_zp_c, Branch side);

/// Z(z, z') = dG/dz' B^c(z') + G P^c(z').
CMatrix z_field_eval(const GreenCoefficients& gc, const TransferMatrix& t_z,
                     const ConjugateTransfer& t_zp_c, Branch side);

struct JumpReport {
  double a_jump = 0.0;      // ||A+ - A- + I||, worst over samples
  double z_jump = 0.0;      // ||+Z - -Z + I||
  double continuity = 0.0;  // ||G<(z,z) - G>(z,z)||
  double c_da = 0.0;        // ||C_DA< - C_DA> + I||
  double c_ad = 0.0;        // ||C_AD> - C_AD< + I||
  double c_dd_lt = 0.0;     // C_DD< vs C_DA< C_AA^-1 C_AD<, relative
  double c_dd_gt = 0.0;

  double max_field() const;
  double max_coefficient() const;
  double max() const;
  bool ok(double threshold) const { return max() < threshold; }
};

/// Coefficient relations only.
JumpReport coefficient_checks(const GreenCoefficients& gc);

/// Coefficient relations plus field jumps at every sample plane z (t_z[i] = T(z_i, z0),
/// t_z_c[i] its transconjugate).
JumpReport jump_checks(const GreenCoefficients& gc, std::span<const TransferMatrix> t_z,
                       std::span<const ConjugateTransfer> t_z_c);

/// ||G(z,z') - G(z,z0) [G(z0,z0)]^-1 G(z0,z')||_F for z <= z0 <= z'.
double interface_composition_residual(const CMatrix& g_z_zp, const CMatrix& g_z_z0,
                                      const CMatrix& g_z0_z0, const CMatrix& g_z0_zp);

/// rho = -Im tr G(z,z) / pi for each diagonal block. Requires eta > 0.
std::vector<double> local_dos(std::span<const CMatrix> g_diag, const SpectralPoint& sp);

/// Green function of a layer stack at one spectral point.
class GreenFunction {
 public:
  GreenFunction(LayerStack stack, const SpectralPoint& sp, double z0 = 0.0,
                Conjugation conj = Conjugation::transconjugate, StackLimitOptions options = {});

  const LayerStack& stack() const noexcept { return stack_; }
  const SpectralPoint& spectral_point() const noexcept { return sp_; }
  double z0() const noexcept { return z0_; }
  const GreenCoefficients& coefficients() const noexcept { return gc_; }

  TransferMatrix transfer(double z) const;
  ConjugateTransfer conjugate_transfer(double z) const;

  /// Branch chosen from the ordering of z and z'.
  GreenSample operator()(double z, double zp) const;
  GreenSample eval(double z, double zp, Branch side) const;
  CMatrix z_field(double z, double zp, Branch side) const;

  /// G(z, z) with the reference plane moved to z, i.e. C_AA seen from z. Cheaper and
  /// better conditioned than transporting from z0.
  CMatrix local_diagonal(double z) const;

  JumpReport jumps(std::span<const double> zs) const;

 private:
  LayerStack stack_;
  SpectralPoint sp_;
  double z0_;
  Conjugation conj_;
  StackLimitOptions options_;
  GreenCoefficients gc_;
};

}  // namespace atm
