#include "atm/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "atm/errors.hpp"

namespace atm {
namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

class Stepper {
 public:
  Stepper(const LinearGenerator& d, const IntegrationOptions& opt, double span)
      : d_(d), opt_(opt), span_(std::max(std::abs(span), 1e-300)) {}

  // Advances y from z0 to z1 in place; h is the running step guess (signed by direction).
  void run(double z0, double z1, CMatrix& y, double& h, IntegrationStats& stats) {
    const double dir = z1 >= z0 ? 1.0 : -1.0;
    double z = z0;
    if (h == 0.0) {
      const double dn = d_(z).norm();
      h = dir * std::min(std::abs(z1 - z0), 0.05 / std::max(dn, 1e-12));
    }
    h = dir * std::abs(h);
    CMatrix k1 = d_(z) * y;
    long steps = 0;
    while (dir * (z1 - z) > 0.0) {
      if (++steps > opt_.max_steps) throw ConvergenceError("integrator: too many steps", z);
      const double h_free = h;
      const bool clipped = dir * (z + h - z1) > 0.0;
      if (clipped) h = z1 - z;
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(z)))
        throw ConvergenceError("integrator: step size underflow at z = " + std::to_string(z), z);

      const CMatrix k2 = d_(z + c2 * h) * (y + h * (a21 * k1));
      const CMatrix k3 = d_(z + c3 * h) * (y + h * (a31 * k1 + a32 * k2));
      const CMatrix k4 = d_(z + c4 * h) * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const CMatrix k5 = d_(z + c5 * h) * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const CMatrix k6 =
          d_(z + h) * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      CMatrix y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const CMatrix k7 = d_(z + h) * y_new;
      const CMatrix err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double scale = opt_.tol * (1.0 + std::max(max_abs(y), max_abs(y_new)));
      const double budget = scale * std::abs(h) / span_;
      const double ratio = max_abs(err) / budget;
      if (!std::isfinite(ratio)) throw ConvergenceError("integrator: non-finite state", z);

      // Error-per-unit-step control: err ~ h^5 against a budget ~ h.
      const double factor = ratio == 0.0 ? 4.0 : 0.9 * std::pow(ratio, -0.25);
      if (ratio <= 1.0) {
        z = clipped ? z1 : z + h;
        y = std::move(y_new);
        k1 = k7;
        ++stats.accepted;
        // A step shortened to land on z1 says nothing about the natural step size.
        h = clipped ? h_free : h * std::clamp(factor, 0.2, 4.0);
      } else {
        ++stats.rejected;
        h *= std::clamp(factor, 0.2, 1.0);
      }
    }
  }

 private:
  const LinearGenerator& d_;
  IntegrationOptions opt_;
  double span_;
};

}  // namespace

CMatrix integrate_linear(const LinearGenerator& d, double z0, double z1, const CMatrix& y0,
                         const IntegrationOptions& options, IntegrationStats* stats) {
  IntegrationStats local;
  CMatrix y = y0;
  if (z1 == z0) return y;
  Stepper stepper(d, options, z1 - z0);
  double h = 0.0;
  stepper.run(z0, z1, y, h, stats ? *stats : local);
  return y;
}

std::vector<CMatrix> integrate_linear_sampled(const LinearGenerator& d, double z0,
                                              std::span<const double> zs, const CMatrix& y0,
                                              const IntegrationOptions& options) {
  std::vector<CMatrix> out;
  out.reserve(zs.size());
  if (zs.empty()) return out;
  IntegrationStats stats;
  Stepper stepper(d, options, zs.back() - z0);
  CMatrix y = y0;
  double z = z0;
  double h = 0.0;
  for (double target : zs) {
    if (target != z) stepper.run(z, target, y, h, stats);
    z = target;
    out.push_back(y);
  }
  return out;
}

}  // namespace atm
