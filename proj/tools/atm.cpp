// Command-line front end: sweeps, Fibonacci stacks and bound-state searches.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "atm/errors.hpp"
#include "atm/spectrum.hpp"
#include "atm/stack_file.hpp"
#include "atm/sweep.hpp"

namespace {

constexpr int kExitIdentity = 2;
constexpr int kExitInput = 3;

// Bare numbers on the command line are natural units; suffixed ones are converted.
double energy_arg(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() && *end == '\0') return v;
  return atm::parse_quantity(text, atm::Dimension::energy, what);
}

int cmd_run(const std::string& stack_path, const std::string& out, int threads,
            const std::string& check) {
  const atm::StackFile f = atm::parse_stack_file(stack_path);
  if (!f.sweep) throw atm::InputError(stack_path + ": no sweep section");
  atm::RunOptions opt;
  opt.out_dir = out;
  opt.threads = threads;
  opt.mode = check == "warn" ? atm::IdentityMode::warn : atm::IdentityMode::strict;
  const atm::SweepSummary s = atm::run_sweep(f.stack, *f.sweep, opt, &std::cerr);
  std::printf("%zu points, %zu failed, %zu over threshold, max residual %.3g\n", s.points,
              s.failures, s.violations, s.max_residual);
  return s.exit_code;
}

int cmd_fib(int generation, const std::string& a, const std::string& b, const std::string& out,
            const std::string& omega_text, double threshold) {
  const std::string text = atm::fibonacci_stack_text(generation, a, b);
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw atm::InputError(out + ": cannot write");
    f << text;
  }
  const atm::StackFile parsed = atm::parse_stack_text(text, "<generated>");
  const auto& layers = parsed.stack.layers();
  const std::string word = atm::fibonacci_word(generation);
  const auto count_a = std::count(word.begin(), word.end(), 'A');
  std::printf("generation %d: %zu layers (%ld A, %ld B), thickness %.17g nm\n", generation,
              layers.size(), static_cast<long>(count_a), static_cast<long>(word.size() - count_a),
              parsed.stack.total_thickness());

  const double omega = energy_arg(omega_text, "--omega");
  const atm::SpectralPoint sp(omega, 0.0);
  try {
    const atm::TransferMatrix t = parsed.stack.transfer(parsed.stack.total_thickness(), 0.0, sp);
    const atm::SymplecticReport r = atm::symplectic_report(t, atm::transconjugate(t));
    std::printf("omega %.17g: det defect %.3g, symplectic residual %.3g, cond(T) %.3g\n", omega,
                r.det_defect, r.residual_full, t.condition());
    std::fflush(stdout);
    if (!(r.det_defect < threshold)) {
      std::fprintf(stderr, "precision loss: det defect %.3g exceeds %.3g\n", r.det_defect, threshold);
      return kExitIdentity;
    }
  } catch (const atm::OverflowError& e) {
    std::fflush(stdout);
    std::fprintf(stderr, "precision loss: %s\n", e.what());
    return kExitIdentity;
  }
  return 0;
}

int cmd_bound(const std::string& stack_path, const std::string& bracket, double tol) {
  const atm::StackFile f = atm::parse_stack_file(stack_path);
  const auto comma = bracket.find(',');
  if (comma == std::string::npos) throw atm::InputError("--bracket: expected LO,HI");
  const double lo = energy_arg(bracket.substr(0, comma), "--bracket");
  const double hi = energy_arg(bracket.substr(comma + 1), "--bracket");
  if (!(hi > lo)) throw atm::InputError("--bracket: HI must exceed LO");
  if (!(tol > 0.0)) throw atm::InputError("--tol: must be positive");
  atm::BoundStateOptions opt;
  if (f.sweep) opt.kappa = f.sweep->kappa.front();
  std::vector<double> roots;
  try {
    roots = atm::find_bound_states(f.stack, lo, hi, tol, opt);
  } catch (const atm::ContractViolation& e) {
    throw atm::InputError(e.what());
  }
  std::printf("index,omega_nat,omega_eV\n");
  for (std::size_t i = 0; i < roots.size(); ++i)
    std::printf("%zu,%.17g,%.17g\n", i, roots[i], roots[i] * atm::kNaturalEnergyEv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Associated transfer matrix and Green function toolkit"};
  app.require_subcommand(1);

  std::string stack_path, out_dir, check = "strict";
  int threads = 1;
  auto* run = app.add_subcommand("run", "sweep a stack file and write CSV and reports");
  run->add_option("--stack", stack_path, "stack description file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--check-identities", check, "strict or warn")
      ->check(CLI::IsMember({"strict", "warn"}));

  int generation = 0;
  std::string file_a, file_b, fib_out, omega_text = "1";
  double threshold = 1e-6;
  auto* fib = app.add_subcommand("fib", "build a Fibonacci stack from two single-layer files");
  fib->add_option("--generation", generation, "generation (1 gives A, 2 gives AB)")->required();
  fib->add_option("--a", file_a, "layer file for letter A")->required();
  fib->add_option("--b", file_b, "layer file for letter B")->required();
  fib->add_option("--out", fib_out, "write the generated stack file here");
  fib->add_option("--omega", omega_text, "real Omega for the determinant monitor (natural units or e.g. 0.1eV)");
  fib->add_option("--threshold", threshold, "allowed | |det T|^2 - 1 |");

  std::string bracket;
  double tol = 1e-10;
  auto* bound = app.add_subcommand("bound", "bound states of a stack in an energy bracket");
  bound->add_option("--stack", stack_path, "stack description file")->required();
  bound->add_option("--bracket", bracket, "LO,HI (natural units or with energy units)")->required();
  bound->add_option("--tol", tol, "root tolerance in natural energy units");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run) return cmd_run(stack_path, out_dir, threads, check);
    if (*fib) return cmd_fib(generation, file_a, file_b, fib_out, omega_text, threshold);
    if (*bound) return cmd_bound(stack_path, bracket, tol);
  } catch (const atm::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
