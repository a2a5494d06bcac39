#pragma once

// Random media shared by several test files.

#include <random>

#include "atm/sl_system.hpp"
#include "oracles.hpp"

namespace fixture {

/// Constant hermitean-class medium: B > 0, Y = -P^+, W = Omega I - H.
inline atm::CoefficientSet random_hermitean_medium(std::mt19937& rng, int n) {
  const atm::CMatrix b = oracle::random_positive(rng, n);
  const atm::CMatrix p = oracle::random_matrix(rng, n, 0.5);
  const atm::CMatrix h = oracle::random_hermitean(rng, n, 1.0);
  return atm::CoefficientSet::constant(
      b, p, -p.adjoint(),
      [h, n](const atm::SpectralPoint& sp) {
        return atm::CMatrix(sp.value() * atm::CMatrix::Identity(n, n) - h);
      },
      true);
}

/// Constant medium with no symmetry at all.
inline atm::CoefficientSet random_general_medium(std::mt19937& rng, int n) {
  const atm::CMatrix b = oracle::random_positive(rng, n) + oracle::random_matrix(rng, n, 0.1);
  const atm::CMatrix p = oracle::random_matrix(rng, n, 0.5);
  const atm::CMatrix y = oracle::random_matrix(rng, n, 0.5);
  const atm::CMatrix h = oracle::random_matrix(rng, n, 1.0);
  return atm::CoefficientSet::constant(b, p, y, [h, n](const atm::SpectralPoint& sp) {
    return atm::CMatrix(sp.value() * atm::CMatrix::Identity(n, n) - h);
  });
}

}  // namespace fixture
