#pragma once

#include <array>

#include "atm/linalg.hpp"

namespace atm {

/// Eigenvalue parameter Omega with causal broadening eta and in-plane wavevector kappa.
///
/// Every computation reads the eigenvalue as omega + i*eta. A point with eta == 0 and a
/// real omega is "on the real axis"; identities that only hold for real eigenvalues are
/// enabled there.
class SpectralPoint {
 public:
  SpectralPoint(cplx omega, double eta = 0.0, std::array<double, 2> kappa = {0.0, 0.0});

  cplx omega() const noexcept { return omega_; }
  double eta() const noexcept { return eta_; }
  const std::array<double, 2>& kappa() const noexcept { return kappa_; }
  double kappa_squared() const noexcept { return kappa_[0] * kappa_[0] + kappa_[1] * kappa_[1]; }

  /// omega + i*eta, the value coefficient callbacks should use.
  cplx value() const noexcept { return omega_ + kI * eta_; }

  bool on_real_axis() const noexcept { return eta_ == 0.0 && omega_.imag() == 0.0; }

  /// The mirror point conj(omega + i*eta), folded into omega with eta = 0.
  SpectralPoint conjugate() const;

  /// Same omega and kappa with a different broadening.
  SpectralPoint with_eta(double eta) const;

  bool operator==(const SpectralPoint&) const = default;

 private:
  cplx omega_;
  double eta_;
  std::array<double, 2> kappa_;
};

}  // namespace atm
