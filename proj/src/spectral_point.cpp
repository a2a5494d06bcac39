#include "atm/spectral_point.hpp"

#include <cmath>

#include "atm/errors.hpp"

namespace atm {

SpectralPoint::SpectralPoint(cplx omega, double eta, std::array<double, 2> kappa)
    : omega_(omega), eta_(eta), kappa_(kappa) {
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw ContractViolation("SpectralPoint: eta must be finite and >= 0");
}

SpectralPoint SpectralPoint::conjugate() const { return SpectralPoint(std::conj(value()), 0.0, kappa_); }

SpectralPoint SpectralPoint::with_eta(double eta) const { return SpectralPoint(omega_, eta, kappa_); }

}  // namespace atm
