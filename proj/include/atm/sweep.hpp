#pragma once

#include <filesystem>
#include <iosfwd>

#include "atm/stack.hpp"
#include "atm/stack_file.hpp"

namespace atm {

enum class IdentityMode { strict, warn };

struct RunOptions {
  std::filesystem::path out_dir;
  int threads = 1;
  IdentityMode mode = IdentityMode::strict;
};

struct SweepSummary {
  std::size_t points = 0;
  std::size_t failures = 0;    // points that threw; recorded, sweep continued
  std::size_t violations = 0;  // points whose identity residuals exceed the threshold
  double max_residual = 0.0;
  int exit_code = 0;           // 0 ok, 2 identity violation (strict mode only)
};

/// Evaluates every (Omega, kappa) point of the sweep and writes into out_dir:
///   sweep.csv            one row per point, columns as listed in the format notes
///   z_grid.csv           index -> z for the G-diagonal / DOS columns
///   bound_states.csv     when bound-states is requested
///   identity_report.json when identity-report is requested
/// Symplectic identities are always monitored at the real-axis image of every point.
SweepSummary run_sweep(const LayerStack& stack, const SweepSpec& spec, const RunOptions& options,
                       std::ostream* log = nullptr);

}  // namespace atm
