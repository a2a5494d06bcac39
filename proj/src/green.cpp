#include "atm/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "atm/errors.hpp"

namespace atm {
namespace {

struct Decomposition {
  CVector lambda;
  CMatrix v;
  double d_norm;
};

Decomposition decompose(const CoefficientSet& c, const SpectralPoint& sp) {
  const CMatrix d = companion_matrix(c, 0.0, sp);
  Eigen::ComplexEigenSolver<CMatrix> es(d);
  if (es.info() != Eigen::Success) throw IrregularMediumError("eigen-decomposition of D failed");
  return {es.eigenvalues(), es.eigenvectors(), d.norm()};
}

bool has_tie(const Decomposition& d, double tie_tol) {
  const double cut = tie_tol * std::max(1.0, d.d_norm);
  for (Eigen::Index j = 0; j < d.lambda.size(); ++j)
    if (std::abs(d.lambda(j).real()) < cut) return true;
  return false;
}

// Pairs each eigenvalue of `from` with its nearest unused partner in `to`.
std::vector<Eigen::Index> match_eigenvalues(const CVector& from, const CVector& to) {
  const Eigen::Index n = from.size();
  std::vector<Eigen::Index> out(n, -1);
  std::vector<bool> used(n, false);
  // Greedy on globally smallest distance first, so close pairs cannot be stolen.
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) pairs.emplace_back(std::abs(from(i) - to(j)), i, j);
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [dist, i, j] : pairs) {
    if (out[i] >= 0 || used[j]) continue;
    out[i] = j;
    used[j] = true;
  }
  return out;
}

CoefficientSet exterior_medium(const CoefficientSet& c,
                               const std::optional<std::pair<double, double>>& window,
                               const char* side) {
  if (c.is_constant()) return c;
  if (!window)
    throw ContractViolation(std::string(side) +
                            " exterior is graded: supply an averaging window to flatten it");
  return flatten(c, window->first, window->second);
}

CMatrix stacked(const CMatrix& top, const CMatrix& bottom) {
  CMatrix s(top.rows() + bottom.rows(), top.cols());
  s << top, bottom;
  return s;
}

struct SideLimits {
  CMatrix t_minus, t_plus;
};

SideLimits stack_side_limits(const LayerStack& stack, double z0, const SpectralPoint& sp, Tilt tilt,
                             const StackLimitOptions& opt) {
  BulkModeOptions mo = opt.modes;
  mo.tilt = tilt;
  const auto n = stack.dim();
  const BulkModes ml = bulk_modes(exterior_medium(stack.left(), opt.left_window, "left"), sp, mo);
  const BulkModes mr =
      bulk_modes(exterior_medium(stack.right(), opt.right_window, "right"), sp, mo);

  const CMatrix phi_l =
      stack.transfer(z0, 0.0, sp, opt.tol).matrix() * stacked(ml.f_left, ml.a_left);
  const CMatrix phi_r = stack.transfer(z0, stack.total_thickness(), sp, opt.tol).matrix() *
                        stacked(mr.f_right, mr.a_right);
  return {decaying_ratio(phi_l.topRows(n), phi_l.bottomRows(n)),
          decaying_ratio(phi_r.topRows(n), phi_r.bottomRows(n))};
}

CMatrix checked_inverse(const CMatrix& m, const char* what) {
  const double cond = condition_number(m);
  if (!std::isfinite(cond) || cond > 1e13) throw NumericalError(what);
  return m.partialPivLu().inverse();
}

}  // namespace

BulkModes bulk_modes(const CoefficientSet& c, const SpectralPoint& sp, const BulkModeOptions& opt) {
  if (!c.is_constant()) throw ContractViolation("bulk_modes: coefficients must be constant");
  const auto n = c.dim();
  const Decomposition at_sp = decompose(c, sp);

  if (condition_number(at_sp.v) > opt.max_eigvec_condition)
    throw IrregularMediumError(
        "D is defective (non-diagonalizable) at this spectral point; perturb eta");

  // Sign of Re lambda for each eigenvalue at sp, possibly decided at a tilted probe point.
  std::vector<bool> right(2 * n, false);
  double classified_at = sp.eta();

  if (!has_tie(at_sp, opt.tie_tol)) {
    for (Eigen::Index j = 0; j < 2 * n; ++j) right[j] = at_sp.lambda(j).real() < 0.0;
  } else {
    const double sign = opt.tilt == Tilt::retarded ? 1.0 : -1.0;
    double eta = sp.eta() > 0.0 ? sp.eta() * 10.0 : opt.default_eta;
    bool resolved = false;
    for (int attempt = 0; attempt <= opt.max_retries && !resolved; ++attempt, eta *= 10.0) {
      const SpectralPoint probe(sp.omega() + sign * kI * eta, 0.0, sp.kappa());
      const Decomposition at_probe = decompose(c, probe);
      if (has_tie(at_probe, opt.tie_tol)) continue;
      const auto match = match_eigenvalues(at_sp.lambda, at_probe.lambda);
      for (Eigen::Index j = 0; j < 2 * n; ++j) right[j] = at_probe.lambda(match[j]).real() < 0.0;
      classified_at = eta;
      resolved = true;
    }
    if (!resolved)
      throw IrregularMediumError("cannot split modes by decay direction: Re(lambda) ties persist");
  }

  BulkModes m;
  m.eigenvalues = at_sp.lambda;
  m.classification_eta = classified_at;
  for (Eigen::Index j = 0; j < 2 * n; ++j)
    (right[j] ? m.right_decaying : m.left_decaying).push_back(j);
  if (static_cast<Eigen::Index>(m.right_decaying.size()) != n)
    throw IrregularMediumError("medium not regular at this spectral point");

  auto fill = [&](const std::vector<Eigen::Index>& idx, CMatrix& f, CMatrix& a) {
    f.resize(n, n);
    a.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      f.col(k) = at_sp.v.col(idx[k]).head(n);
      a.col(k) = at_sp.v.col(idx[k]).tail(n);
    }
  };
  fill(m.right_decaying, m.f_right, m.a_right);
  fill(m.left_decaying, m.f_left, m.a_left);
  return m;
}

bool has_propagating_modes(const CoefficientSet& c, const SpectralPoint& sp, double tol) {
  if (!c.is_constant()) throw ContractViolation("has_propagating_modes: coefficients must be constant");
  return has_tie(decompose(c, sp), tol);
}

CoefficientSet flatten(const CoefficientSet& c, double lo, double hi, int samples) {
  if (!(hi > lo) || samples < 1) throw ContractViolation("flatten: empty averaging window");
  CoefficientOptions opt = c.options();
  opt.is_constant = true;
  auto fn = [c, lo, hi, samples](double, const SpectralPoint& sp) {
    const double h = (hi - lo) / samples;
    CoefficientBlocks sum = c(lo + 0.5 * h, sp);
    for (int i = 1; i < samples; ++i) {
      const CoefficientBlocks s = c(lo + (i + 0.5) * h, sp);
      sum.b += s.b;
      sum.p += s.p;
      sum.y += s.y;
      sum.w += s.w;
    }
    const double inv = 1.0 / samples;
    return CoefficientBlocks{sum.b * inv, sum.p * inv, sum.y * inv, sum.w * inv};
  };
  return CoefficientSet(c.dim(), std::move(fn), opt);
}

CMatrix decaying_ratio(const CMatrix& f, const CMatrix& a) {
  const double cond = condition_number(f);
  if (!std::isfinite(cond) || cond > 1e12)
    throw IrregularMediumError("irregular medium: F block of the decaying subspace is singular");
  // -A F^-1 without forming the inverse.
  return -f.transpose().partialPivLu().solve(a.transpose()).transpose();
}

RegularLimits regular_limits(const BulkModes& modes, const BulkModes& conjugate_modes) {
  return {decaying_ratio(modes.f_left, modes.a_left),
          decaying_ratio(modes.f_right, modes.a_right),
          decaying_ratio(conjugate_modes.f_left, conjugate_modes.a_left).adjoint(),
          decaying_ratio(conjugate_modes.f_right, conjugate_modes.a_right).adjoint()};
}

RegularLimits regular_limits(const CoefficientSet& medium, const SpectralPoint& sp,
                             Conjugation conj, const BulkModeOptions& options) {
  BulkModeOptions ret = options;
  ret.tilt = Tilt::retarded;
  const BulkModes modes = bulk_modes(medium, sp, ret);
  if (conj == Conjugation::hermitean_adjoint) return regular_limits(modes, modes);
  BulkModeOptions adv = options;
  adv.tilt = Tilt::advanced;
  return regular_limits(modes, bulk_modes(medium, sp.conjugate(), adv));
}

RegularLimits regular_limits(const LayerStack& stack, double z0, const SpectralPoint& sp,
                             Conjugation conj, const StackLimitOptions& options) {
  const SideLimits here = stack_side_limits(stack, z0, sp, Tilt::retarded, options);
  const SideLimits mirror = conj == Conjugation::transconjugate
                                ? stack_side_limits(stack, z0, sp.conjugate(), Tilt::advanced, options)
                                : here;
  return {here.t_minus, here.t_plus, mirror.t_minus.adjoint(), mirror.t_plus.adjoint()};
}

GreenCoefficients assemble_green_coefficients(const RegularLimits& l, Conjugation conj) {
  const CMatrix gap = conj == Conjugation::transconjugate ? CMatrix(l.t_minus - l.t_plus)
                                                          : CMatrix(l.theta_minus - l.theta_plus);
  GreenCoefficients gc;
  gc.c_aa = checked_inverse(gap, "Green function undefined (degenerate limits)");
  gc.c_da_lt = -l.t_minus * gc.c_aa;
  gc.c_da_gt = -l.t_plus * gc.c_aa;
  gc.c_ad_lt = -gc.c_aa * l.theta_plus;
  gc.c_ad_gt = -gc.c_aa * l.theta_minus;
  // Both D-D blocks carry a plus sign; with a minus on the z <= z' block the field jumps
  // at any z away from z0 would be wrong.
  gc.c_dd_lt = l.t_minus * gc.c_aa * l.theta_plus;
  gc.c_dd_gt = l.t_plus * gc.c_aa * l.theta_minus;
  gc.t_minus = l.t_minus;
  gc.t_plus = l.t_plus;
  gc.theta_minus = l.theta_minus;
  gc.theta_plus = l.theta_plus;
  return gc;
}

namespace {

CMatrix coefficient_matrix(const GreenCoefficients& gc, Branch side) {
  const auto n = gc.dim();
  CMatrix c(2 * n, 2 * n);
  if (side == Branch::below)
    c << gc.c_aa, gc.c_ad_lt, gc.c_da_lt, gc.c_dd_lt;
  else
    c << gc.c_aa, gc.c_ad_gt, gc.c_da_gt, gc.c_dd_gt;
  return c;
}

void check_eval_args(const GreenCoefficients& gc, const TransferMatrix& t_z,
                     const ConjugateTransfer& t_zp_c, Branch side) {
  if (t_z.dim() != gc.dim() || t_zp_c.dim() != gc.dim())
    throw ContractViolation("green_eval: dimension mismatch");
  const double zf = t_z.z_from(), zpf = t_zp_c.z_from;
  if (std::abs(zf - zpf) > 1e-12 * std::max({1.0, std::abs(zf), std::abs(zpf)}))
    throw ContractViolation("green_eval: transfer matrices use different reference planes");
  const double z = t_z.z_to(), zp = t_zp_c.z_to;
  const double slack = 1e-12 * std::max({1.0, std::abs(z), std::abs(zp)});
  if ((side == Branch::below && z > zp + slack) || (side == Branch::above && z < zp - slack)) {
    std::ostringstream os;
    os << "green_eval: branch does not match ordering (z = " << z << ", z' = " << zp << ")";
    throw ContractViolation(os.str());
  }
}

}  // namespace

GreenSample green_eval(const GreenCoefficients& gc, const TransferMatrix& t_z,
                       const ConjugateTransfer& t_zp_c, Branch side) {
  check_eval_args(gc, t_z, t_zp_c, side);
  const auto n = gc.dim();
  const CMatrix right = coefficient_matrix(gc, side) * t_zp_c.m.leftCols(n);
  return {t_z.matrix().topRows(n) * right, t_z.matrix().bottomRows(n) * right, t_z.z_to(),
          t_zp_c.z_to};
}

CMatrix z_field_eval(const GreenCoefficients& gc, const TransferMatrix& t_z,
                     const ConjugateTransfer& t_zp_c, Branch side) {
  check_eval_args(gc, t_z, t_zp_c, side);
  const auto n = gc.dim();
  return t_z.matrix().topRows(n) * coefficient_matrix(gc, side) * t_zp_c.m.rightCols(n);
}

double JumpReport::max_field() const { return std::max({a_jump, z_jump, continuity}); }
double JumpReport::max_coefficient() const { return std::max({c_da, c_ad, c_dd_lt, c_dd_gt}); }
double JumpReport::max() const { return std::max(max_field(), max_coefficient()); }

JumpReport coefficient_checks(const GreenCoefficients& gc) {
  const auto n = gc.dim();
  const CMatrix id = CMatrix::Identity(n, n);
  JumpReport r;
  r.c_da = (gc.c_da_lt - gc.c_da_gt + id).norm();
  r.c_ad = (gc.c_ad_gt - gc.c_ad_lt + id).norm();
  const auto lu = gc.c_aa.partialPivLu();
  const CMatrix want_lt = gc.c_da_lt * lu.solve(gc.c_ad_lt);
  const CMatrix want_gt = gc.c_da_gt * lu.solve(gc.c_ad_gt);
  r.c_dd_lt = (gc.c_dd_lt - want_lt).norm() / std::max(1.0, want_lt.norm());
  r.c_dd_gt = (gc.c_dd_gt - want_gt).norm() / std::max(1.0, want_gt.norm());
  if (!std::isfinite(r.max_coefficient())) r.c_da = std::numeric_limits<double>::infinity();
  return r;
}

JumpReport jump_checks(const GreenCoefficients& gc, std::span<const TransferMatrix> t_z,
                       std::span<const ConjugateTransfer> t_z_c) {
  if (t_z.size() != t_z_c.size()) throw ContractViolation("jump_checks: sample count mismatch");
  JumpReport r = coefficient_checks(gc);
  const auto n = gc.dim();
  const CMatrix id = CMatrix::Identity(n, n);
  for (std::size_t i = 0; i < t_z.size(); ++i) {
    const GreenSample lo = green_eval(gc, t_z[i], t_z_c[i], Branch::below);
    const GreenSample hi = green_eval(gc, t_z[i], t_z_c[i], Branch::above);
    // A+ takes z' -> z + 0 (branch below); +Z takes z' -> z - 0 (branch above).
    r.a_jump = std::max(r.a_jump, (lo.a - hi.a + id).norm());
    const CMatrix z_hi = z_field_eval(gc, t_z[i], t_z_c[i], Branch::above);
    const CMatrix z_lo = z_field_eval(gc, t_z[i], t_z_c[i], Branch::below);
    r.z_jump = std::max(r.z_jump, (z_hi - z_lo + id).norm());
    r.continuity = std::max(r.continuity, (lo.g - hi.g).norm() / std::max(1.0, lo.g.norm()));
  }
  return r;
}

double interface_composition_residual(const CMatrix& g_z_zp, const CMatrix& g_z_z0,
                                      const CMatrix& g_z0_z0, const CMatrix& g_z0_zp) {
  const double cond = condition_number(g_z0_z0);
  if (!std::isfinite(cond) || cond > 1e13)
    throw NumericalError("interface composition: G(z0, z0) is singular");
  return (g_z_zp - g_z_z0 * g_z0_z0.partialPivLu().solve(g_z0_zp)).norm();
}

std::vector<double> local_dos(std::span<const CMatrix> g_diag, const SpectralPoint& sp) {
  if (!(sp.eta() > 0.0))
    throw ContractViolation("local_dos: needs eta > 0 (the DOS is a broadened quantity)");
  std::vector<double> rho;
  rho.reserve(g_diag.size());
  for (const CMatrix& g : g_diag) rho.push_back(-g.trace().imag() / std::numbers::pi);
  return rho;
}

GreenFunction::GreenFunction(LayerStack stack, const SpectralPoint& sp, double z0,
                             Conjugation conj, StackLimitOptions options)
    : stack_(std::move(stack)), sp_(sp), z0_(z0), conj_(conj), options_(std::move(options)) {
  gc_ = assemble_green_coefficients(regular_limits(stack_, z0_, sp_, conj_, options_), conj_);
}

TransferMatrix GreenFunction::transfer(double z) const {
  return stack_.transfer(z, z0_, sp_, options_.tol);
}

ConjugateTransfer GreenFunction::conjugate_transfer(double z) const {
  const TransferMatrix t = transfer(z);
  if (conj_ == Conjugation::hermitean_adjoint) return hermitean_conjugate(t);
  if (sp_.on_real_axis()) return transconjugate(t);
  return transconjugate(t, stack_.transfer(z, z0_, sp_.conjugate(), options_.tol));
}

GreenSample GreenFunction::operator()(double z, double zp) const {
  return eval(z, zp, z <= zp ? Branch::below : Branch::above);
}

GreenSample GreenFunction::eval(double z, double zp, Branch side) const {
  return green_eval(gc_, transfer(z), conjugate_transfer(zp), side);
}

CMatrix GreenFunction::z_field(double z, double zp, Branch side) const {
  return z_field_eval(gc_, transfer(z), conjugate_transfer(zp), side);
}

CMatrix GreenFunction::local_diagonal(double z) const {
  return assemble_green_coefficients(regular_limits(stack_, z, sp_, conj_, options_), conj_).c_aa;
}

JumpReport GreenFunction::jumps(std::span<const double> zs) const {
  std::vector<TransferMatrix> t;
  std::vector<ConjugateTransfer> tc;
  for (double z : zs) {
    t.push_back(transfer(z));
    tc.push_back(conjugate_transfer(z));
  }
  return jump_checks(gc_, t, tc);
}

}  // namespace atm
