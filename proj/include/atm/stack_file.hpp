#pragma once

// Stack description files. The grammar is documented in docs/stack-format.md.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atm/stack.hpp"

namespace atm {

/// hbar^2 / (2 m0 nm^2) in eV: one natural energy unit.
inline constexpr double kNaturalEnergyEv = 0.0380998212;

enum class Dimension { length, energy, inverse_length, mass };

/// Parses "<decimal> <unit>" into natural units (nm, hbar^2/(2 m0 nm^2), 1/nm, m0).
/// Throws InputError naming `field` on malformed text or a unit of the wrong kind.
double parse_quantity(const std::string& text, Dimension dim, const std::string& field);

enum class Output { t_blocks, g_diagonal, dos, bound_states, transmission, identity_report };

const char* output_name(Output o);

struct Grid {
  double min = 0.0;
  double max = 0.0;
  int count = 0;

  std::vector<double> points() const;
};

struct SweepSpec {
  Grid omega;
  double eta = 0.0;
  std::vector<std::array<double, 2>> kappa{{0.0, 0.0}};
  std::vector<Output> outputs;
  std::optional<Grid> z_grid;
  std::optional<std::pair<double, double>> bound_bracket;
  double bound_tol = 1e-10;
  double identity_threshold = 1e-8;

  bool wants(Output o) const;
};

struct StackFile {
  LayerStack stack;
  std::optional<SweepSpec> sweep;  // absent for layer-only files
};

/// Broadening used when a file gives none: ATM_DEFAULT_ETA if set, else 1e-6.
double default_eta();

StackFile parse_stack_text(const std::string& text, const std::string& origin = "<input>");
StackFile parse_stack_file(const std::filesystem::path& path);

/// Builds a new stack file from two single-layer files: layers follow the Fibonacci word of
/// the given generation, exteriors and sweep come from file_a. A medium of file_b whose
/// name clashes with a different definition in file_a is renamed "b.<name>". Returns the
/// file text.
std::string fibonacci_stack_text(int generation, const std::filesystem::path& file_a,
                                 const std::filesystem::path& file_b);

}  // namespace atm
