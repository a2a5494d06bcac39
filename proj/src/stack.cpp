#include "atm/stack.hpp"

#include <algorithm>
#include <cmath>

#include "atm/errors.hpp"

namespace atm {

LayerStack::LayerStack(CoefficientSet left, CoefficientSet right, std::vector<Layer> layers)
    : left_(std::move(left)), right_(std::move(right)), layers_(std::move(layers)) {
  if (left_.dim() != right_.dim()) throw ContractViolation("LayerStack: exterior dimensions differ");
  interfaces_.reserve(layers_.size() + 1);
  interfaces_.push_back(0.0);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (!(l.thickness > 0.0) || !std::isfinite(l.thickness))
      throw ContractViolation("LayerStack: layer " + std::to_string(i) + " (" + l.label +
                              ") has non-positive thickness");
    if (l.medium.dim() != left_.dim())
      throw ContractViolation("LayerStack: layer " + std::to_string(i) + " has dimension " +
                              std::to_string(l.medium.dim()));
    interfaces_.push_back(interfaces_.back() + l.thickness);
  }
}

LayerStack LayerStack::homogeneous(const CoefficientSet& medium) { return LayerStack(medium, medium); }

int LayerStack::region_of(double z) const {
  if (z < 0.0) return -1;
  const auto it = std::upper_bound(interfaces_.begin(), interfaces_.end(), z);
  return static_cast<int>(it - interfaces_.begin()) - 1;
}

const CoefficientSet& LayerStack::medium(int region) const {
  if (region < 0) return left_;
  if (region >= static_cast<int>(layers_.size())) return right_;
  return layers_[region].medium;
}

double LayerStack::origin(int region) const {
  if (region < 0) return 0.0;
  if (region >= static_cast<int>(layers_.size())) return interfaces_.back();
  return interfaces_[region];
}

CoefficientBlocks LayerStack::coefficients_at(double z, const SpectralPoint& sp) const {
  const int r = region_of(z);
  return medium(r)(z - origin(r), sp);
}

TransferMatrix LayerStack::transfer(double z_to, double z_from, const SpectralPoint& sp,
                                    double tol) const {
  TransferMatrix t = TransferMatrix::identity(dim(), z_from, sp);
  if (z_to == z_from) return t;
  const bool forward = z_to > z_from;

  // Breakpoints strictly between the endpoints, in travel order.
  std::vector<double> cuts;
  for (double x : interfaces_)
    if ((forward && x > z_from && x < z_to) || (!forward && x < z_from && x > z_to)) cuts.push_back(x);
  if (!forward) std::reverse(cuts.begin(), cuts.end());
  cuts.push_back(z_to);

  double a = z_from;
  for (double b : cuts) {
    const int region = region_of(0.5 * (a + b));
    const double o = origin(region);
    const TransferMatrix local = propagate_layer(medium(region), a - o, b - o, sp, tol);
    t = compose(TransferMatrix(local.matrix(), b, a, sp), t);
    a = b;
  }
  return t;
}

}  // namespace atm
