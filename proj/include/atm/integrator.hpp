#pragma once

#include <functional>
#include <span>
#include <vector>

#include "atm/linalg.hpp"

namespace atm {

/// dY/dz = D(z) Y for a matrix state Y.
using LinearGenerator = std::function<CMatrix(double z)>;

struct IntegrationOptions {
  /// Mixed absolute/relative tolerance, applied per unit length of the interval.
  double tol = 1e-10;
  long max_steps = 5'000'000;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
};

/// Embedded Dormand-Prince 5(4) with local extrapolation. The local error of each step is
/// held below tol * h / |z1 - z0| (relative to the max-norm of Y), so the accumulated
/// error over the whole interval stays near tol. Works for z1 < z0 too.
/// Throws ConvergenceError (carrying the z where it failed) on step-size underflow.
CMatrix integrate_linear(const LinearGenerator& d, double z0, double z1, const CMatrix& y0,
                         const IntegrationOptions& options = {}, IntegrationStats* stats = nullptr);

/// Same flow, returning Y at every point of an ordered (monotone) sample list that starts
/// at or after z0. The error budget is set by the full span z0 -> zs.back().
std::vector<CMatrix> integrate_linear_sampled(const LinearGenerator& d, double z0,
                                              std::span<const double> zs, const CMatrix& y0,
                                              const IntegrationOptions& options = {});

}  // namespace atm
