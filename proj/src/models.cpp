#include "atm/models.hpp"

#include <cmath>

#include "atm/errors.hpp"
#include "atm/green.hpp"

namespace atm {

CoefficientSet free_particle(double mass_scale) {
  if (!(mass_scale > 0.0)) throw ContractViolation("free_particle: mass_scale must be positive");
  const CMatrix b = CMatrix::Constant(1, 1, mass_scale);
  const CMatrix zero = CMatrix::Zero(1, 1);
  return CoefficientSet::constant(
      b, zero, zero,
      [mass_scale](const SpectralPoint& sp) {
        return CMatrix::Constant(1, 1, sp.value() - mass_scale * sp.kappa_squared());
      },
      true);
}

CoefficientSet effective_mass_medium(double mass, double potential) {
  if (!(mass > 0.0)) throw ContractViolation("effective_mass_medium: mass must be positive");
  const CMatrix b = CMatrix::Constant(1, 1, 1.0 / mass);
  const CMatrix zero = CMatrix::Zero(1, 1);
  return CoefficientSet::constant(
      b, zero, zero,
      [mass, potential](const SpectralPoint& sp) {
        return CMatrix::Constant(1, 1, sp.value() - potential - sp.kappa_squared() / mass);
      },
      true);
}

LayerStack bendaniel_duke_well(double width, double depth, double mass_in, double mass_out) {
  if (!(width > 0.0) || !(depth > 0.0) || !(mass_in > 0.0) || !(mass_out > 0.0))
    throw ContractViolation("bendaniel_duke_well: width, depth and masses must be positive");
  const CoefficientSet barrier = effective_mass_medium(mass_out, depth);
  return LayerStack(barrier, barrier, {Layer{effective_mass_medium(mass_in, 0.0), width, "well"}});
}

CoefficientSet two_band_toy(double gap, double coupling, double offset) {
  if (!(gap >= 0.0)) throw ContractViolation("two_band_toy: gap must be non-negative");
  CMatrix p(2, 2);
  p << 0.0, coupling, -coupling, 0.0;
  return CoefficientSet::constant(
      CMatrix::Identity(2, 2), p, p,
      [gap, offset](const SpectralPoint& sp) {
        const cplx shift = sp.value() - sp.kappa_squared() - offset;
        CMatrix w = CMatrix::Zero(2, 2);
        w(0, 0) = shift - 0.5 * gap;
        w(1, 1) = shift + 0.5 * gap;
        return w;
      },
      true);
}

cplx analytic_free_green(cplx k, double z, double zp) {
  if (k == cplx(0.0)) throw ContractViolation("analytic_free_green: k = 0 has no regular Green function");
  if (k.imag() < 0.0) throw ContractViolation("analytic_free_green: needs Im k >= 0");
  return std::exp(kI * k * std::abs(z - zp)) / (2.0 * kI * k);
}

FdGreenOracle::FdGreenOracle(const LayerStack& stack, double z_min, double z_max,
                             int grid_points, const SpectralPoint& sp)
    : n_(stack.dim()) {
  if (grid_points < 3 || !(z_max > z_min))
    throw ContractViolation("fd_green_oracle: need at least 3 points on a non-empty interval");
  if (z_min >= 0.0 || z_max <= stack.total_thickness())
    throw ContractViolation("fd_green_oracle: grid ends must lie inside the exteriors");
  const int m = grid_points;
  h_ = (z_max - z_min) / (m - 1);
  z_.resize(m);
  for (int i = 0; i < m; ++i) z_[i] = z_min + i * h_;
  for (double x : stack.interfaces()) {
    const double s = (x - z_min) / h_;
    if (std::abs(s - std::round(s)) > 1e-8)
      throw ContractViolation("fd_green_oracle: interface at z = " + std::to_string(x) +
                              " is not a grid node");
  }

  // Only the modal split of the (constant) exteriors is shared with the transfer route.
  if (!stack.left().is_constant() || !stack.right().is_constant())
    throw ContractViolation("fd_green_oracle: exteriors must be constant media");
  const BulkModes ml = bulk_modes(stack.left(), sp);
  const BulkModes mr = bulk_modes(stack.right(), sp);
  const CMatrix t_minus = decaying_ratio(ml.f_left, ml.a_left);
  const CMatrix t_plus = decaying_ratio(mr.f_right, mr.a_right);

  // Coefficients of the medium that owns the cell centred at zc, evaluated at z.
  auto cell = [&](double zc, double z) {
    const int r = stack.region_of(zc);
    return stack.medium(r)(z - stack.origin(r), sp);
  };

  const Eigen::Index n = n_;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(3 * m * n * n));
  auto put = [&](int row_node, int col_node, const CMatrix& blk) {
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        if (blk(r, c) != cplx(0.0)) trip.emplace_back(row_node * n + r, col_node * n + c, blk(r, c));
  };

  const double h = h_;
  for (int i = 0; i < m; ++i) {
    const bool first = i == 0, last = i == m - 1;
    CMatrix diag = CMatrix::Zero(n, n);
    // Control volume [z_i - h/2, z_i + h/2], clipped to half a cell at the ends.
    const double vol = (first || last) ? 0.5 * h : h;
    CMatrix w = CMatrix::Zero(n, n);
    int sides = 0;
    if (!first) {
      const double zm = z_[i] - 0.5 * h;
      const CoefficientBlocks c = cell(zm, zm);
      // -A_{i-1/2} / vol with A_{i-1/2} = B (F_i - F_{i-1}) / h + P (F_i + F_{i-1}) / 2,
      // plus the left half of the Y F' volume integral.
      put(i, i - 1, (c.b / h - 0.5 * c.p) / vol - 0.5 * c.y / vol);
      diag += -(c.b / h + 0.5 * c.p) / vol + 0.5 * c.y / vol;
      w += cell(zm, z_[i]).w;
      ++sides;
    } else {
      diag += t_minus / vol;  // -A(z_min) = T- F_0
    }
    if (!last) {
      const double zp = z_[i] + 0.5 * h;
      const CoefficientBlocks c = cell(zp, zp);
      put(i, i + 1, (c.b / h + 0.5 * c.p) / vol + 0.5 * c.y / vol);
      diag += (-c.b / h + 0.5 * c.p) / vol - 0.5 * c.y / vol;
      w += cell(zp, z_[i]).w;
      ++sides;
    } else {
      diag += -t_plus / vol;  // A(z_max) = -T+ F_{m-1}
    }
    diag += w / static_cast<double>(sides);
    put(i, i, diag);
  }

  Eigen::SparseMatrix<cplx> mat(m * n, m * n);
  mat.setFromTriplets(trip.begin(), trip.end());
  lu_.analyzePattern(mat);
  lu_.factorize(mat);
  if (lu_.info() != Eigen::Success)
    throw NumericalError("fd_green_oracle: discrete operator is singular (increase eta)");
}

Eigen::Index FdGreenOracle::node_of(double z) const {
  const double s = (z - z_.front()) / h_;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-8 || r < 0 || r >= static_cast<double>(z_.size()))
    throw ContractViolation("fd_green_oracle: z = " + std::to_string(z) + " is not a grid node");
  return static_cast<Eigen::Index>(r);
}

std::vector<CMatrix> FdGreenOracle::column(Eigen::Index j) const {
  const auto m = static_cast<Eigen::Index>(z_.size());
  if (j <= 0 || j >= m - 1) throw ContractViolation("fd_green_oracle: source must be an interior node");
  CMatrix rhs = CMatrix::Zero(m * n_, n_);
  rhs.block(j * n_, 0, n_, n_) = CMatrix::Identity(n_, n_) / h_;
  const CMatrix x = lu_.solve(rhs);
  std::vector<CMatrix> out(m);
  for (Eigen::Index i = 0; i < m; ++i) out[i] = x.block(i * n_, 0, n_, n_);
  return out;
}

FdGreenOracle fd_green_oracle(const LayerStack& stack, int grid_points, const SpectralPoint& sp,
                              double margin) {
  return FdGreenOracle(stack, -margin, stack.total_thickness() + margin, grid_points, sp);
}

}  // namespace atm
