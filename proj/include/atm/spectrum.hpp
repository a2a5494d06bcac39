#pragma once

#include <string>
#include <vector>

#include "atm/green.hpp"
#include "atm/stack.hpp"

namespace atm {

/// det([T+, I] T(L, 0) [I; -T-]) at real Omega, with T- from the left exterior and T+ from
/// the right one. It vanishes exactly at bound states.
cplx matching_determinant(const LayerStack& stack, double omega, std::array<double, 2> kappa = {});

struct BoundStateOptions {
  int scan_points = 2000;
  std::array<double, 2> kappa{0.0, 0.0};
};

/// Roots of the matching determinant in [lo, hi], located by a sign scan and refined by
/// bisection to width tol. Roots of even multiplicity do not change sign and are missed.
/// Throws ContractViolation if an exterior medium propagates somewhere in the bracket.
std::vector<double> find_bound_states(const LayerStack& stack, double lo, double hi, double tol,
                                      const BoundStateOptions& options = {});

/// Flux transmission for a wave incident from the left, N = 1 only. Evaluated at the
/// real-axis point (Re Omega, eta = 0). Zero when either exterior is evanescent.
double transmission(const LayerStack& stack, const SpectralPoint& sp);

/// Letters of generation n: S_1 = A, S_2 = AB, S_n = S_{n-1} S_{n-2}.
std::string fibonacci_word(int generation);

/// Layers ordered by fibonacci_word(generation). Exteriors default to layer_a's medium.
LayerStack fibonacci_stack(int generation, const Layer& layer_a, const Layer& layer_b);
LayerStack fibonacci_stack(int generation, const Layer& layer_a, const Layer& layer_b,
                           const CoefficientSet& left, const CoefficientSet& right);

}  // namespace atm
