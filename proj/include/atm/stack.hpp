#pragma once

#include <string>
#include <vector>

#include "atm/sl_system.hpp"
#include "atm/transfer.hpp"

namespace atm {

struct Layer {
  CoefficientSet medium;
  double thickness;
  std::string label;
};

/// Finite layers between two semi-infinite media.
///
/// Interfaces sit at z = 0, t_1, t_1 + t_2, ..., L. Coefficient callbacks see local
/// coordinates: a layer gets z measured from its own left edge, the left exterior gets
/// z (< 0) and the right exterior gets z - L (> 0).
class LayerStack {
 public:
  LayerStack(CoefficientSet left, CoefficientSet right, std::vector<Layer> layers = {});

  /// A single infinite homogeneous medium.
  static LayerStack homogeneous(const CoefficientSet& medium);

  Eigen::Index dim() const noexcept { return left_.dim(); }
  const CoefficientSet& left() const noexcept { return left_; }
  const CoefficientSet& right() const noexcept { return right_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  double total_thickness() const noexcept { return interfaces_.back(); }
  /// 0, t_1, ..., L (layers().size() + 1 entries).
  const std::vector<double>& interfaces() const noexcept { return interfaces_; }

  /// Region index for z: -1 left exterior, layers().size() right exterior, else the layer.
  /// Points on an interface belong to the region on their right.
  int region_of(double z) const;
  const CoefficientSet& medium(int region) const;
  /// Offset subtracted from z before calling the region's coefficients.
  double origin(int region) const;

  /// Coefficients of whatever medium occupies z, in global coordinates.
  CoefficientBlocks coefficients_at(double z, const SpectralPoint& sp) const;

  /// T(z_to, z_from) chained across every interface in between.
  TransferMatrix transfer(double z_to, double z_from, const SpectralPoint& sp,
                          double tol = 1e-10) const;

 private:
  CoefficientSet left_;
  CoefficientSet right_;
  std::vector<Layer> layers_;
  std::vector<double> interfaces_;
};

}  // namespace atm
