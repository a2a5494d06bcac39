#pragma once

// Concrete media in units where hbar^2 / 2m0 = 1: energies and Omega share one unit and
// wavevectors satisfy Omega = k^2 for the bare free particle.

#include <vector>

#include <Eigen/SparseLU>

#include "atm/linalg.hpp"
#include "atm/sl_system.hpp"
#include "atm/stack.hpp"

namespace atm {

/// N = 1, B = mass_scale, P = Y = 0, W = Omega - mass_scale |kappa|^2.
CoefficientSet free_particle(double mass_scale = 1.0);

/// Envelope-function medium with effective mass m (in units of m0) and band offset V:
/// B = 1/m, W = Omega - V - |kappa|^2 / m, so A = F'/m is the mass-weighted derivative.
CoefficientSet effective_mass_medium(double mass, double potential);

/// Well of the given width with barriers of height depth on both sides.
LayerStack bendaniel_duke_well(double width, double depth, double mass_in, double mass_out);

/// Two coupled channels: B = I, P = coupling [[0, 1], [-1, 0]] = Y,
/// W = diag(Omega - gap/2, Omega + gap/2) - (|kappa|^2 + offset) I.
CoefficientSet two_band_toy(double gap, double coupling, double offset = 0.0);

/// e^{ik|z - z'|} / (2ik).
cplx analytic_free_green(cplx k, double z, double zp);

/// Brute-force Green function of a layer stack on a uniform grid.
///
/// Conservative second-order scheme: A is differenced between cell midpoints, and the two
/// ends carry the exterior decay conditions A = -T- F (left) and A = -T+ F (right) over
/// half cells. Interfaces must fall on grid nodes.
class FdGreenOracle {
 public:
  FdGreenOracle(const LayerStack& stack, double z_min, double z_max, int grid_points,
                const SpectralPoint& sp);

  const std::vector<double>& grid() const noexcept { return z_; }
  double spacing() const noexcept { return h_; }
  Eigen::Index dim() const noexcept { return n_; }

  /// Index of the node at z; throws ContractViolation when z is not a node.
  Eigen::Index node_of(double z) const;

  /// G_h(z_i, z_j) for every node i, with the source at interior node j.
  std::vector<CMatrix> column(Eigen::Index j) const;

 private:
  std::vector<double> z_;
  double h_;
  Eigen::Index n_;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu_;
};

/// Grid over [-margin, L + margin].
FdGreenOracle fd_green_oracle(const LayerStack& stack, int grid_points, const SpectralPoint& sp,
                              double margin = 2.0);

}  // namespace atm
