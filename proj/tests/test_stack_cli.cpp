#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "atm/errors.hpp"
#include "atm/green.hpp"
#include "atm/models.hpp"
#include "atm/spectrum.hpp"
#include "atm/stack_file.hpp"
#include "atm/sweep.hpp"
#include "oracles.hpp"

using namespace atm;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ATM_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("atm_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ATM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string error_of(const std::string& text) {
  try {
    parse_stack_text(text, "case.json");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

const char* const kMinimalHead = R"({
  "media": {"v": {"model": "free_particle", "mass_scale": 1}},
  "layers": {"left": "v", "right": "v", "stack": [)";

}  // namespace

TEST_CASE("quantities carry units") {
  CHECK(parse_quantity("2 nm", Dimension::length, "x") == 2.0);
  CHECK(parse_quantity("5 A", Dimension::length, "x") == doctest::Approx(0.5));
  CHECK(parse_quantity("1 eV", Dimension::energy, "x") == doctest::Approx(1.0 / kNaturalEnergyEv));
  CHECK(parse_quantity("38.0998212 meV", Dimension::energy, "x") == doctest::Approx(1.0));
  CHECK(parse_quantity("1 1/A", Dimension::inverse_length, "x") == doctest::Approx(10.0));
  CHECK(parse_quantity("0.067 m0", Dimension::mass, "x") == doctest::Approx(0.067));
  CHECK(parse_quantity("-1.5e-2 nat", Dimension::energy, "x") == doctest::Approx(-0.015));
  CHECK_THROWS_AS(parse_quantity("2", Dimension::length, "x"), InputError);
  CHECK_THROWS_AS(parse_quantity("2 eV", Dimension::length, "x"), InputError);
  CHECK_THROWS_AS(parse_quantity("two nm", Dimension::length, "x"), InputError);
}

TEST_CASE("minimal file is a free-particle medium") {
  const StackFile f = parse_stack_file(kData / "minimal.json");
  CHECK(f.stack.dim() == 1);
  CHECK(f.stack.layers().empty());
  CHECK(f.stack.total_thickness() == 0.0);
  REQUIRE(f.sweep);
  CHECK(f.sweep->omega.count == 8);
  CHECK(f.sweep->eta == doctest::Approx(1e-6));
  CHECK(f.sweep->wants(Output::dos));
  CHECK_FALSE(f.sweep->wants(Output::bound_states));
  const SpectralPoint sp(2.0);
  const CMatrix t = f.stack.transfer(1.0, 0.0, sp).matrix();
  CHECK((t - CMatrix(oracle::free_transfer(std::sqrt(2.0), 1.0))).norm() < 1e-12);
}

TEST_CASE("shipped well file equals the programmatic builder") {
  const StackFile f = parse_stack_file(kData / "well.json");
  const LayerStack built = bendaniel_duke_well(10.0, 0.3 / kNaturalEnergyEv, 0.067, 0.092);
  REQUIRE(f.stack.layers().size() == 1);
  CHECK(f.stack.total_thickness() == doctest::Approx(10.0));
  for (double omega : {0.5, 3.0, 9.0}) {
    const SpectralPoint sp(omega, 0.01);
    const CMatrix a = f.stack.transfer(12.0, -2.0, sp).matrix();
    const CMatrix b = built.transfer(12.0, -2.0, sp).matrix();
    CHECK((a - b).norm() < 1e-12 * b.norm());
  }
  REQUIRE(f.sweep->bound_bracket);
  CHECK(f.sweep->bound_bracket->first == doctest::Approx(1e-4 / kNaturalEnergyEv));
}

TEST_CASE("validation errors name the field") {
  const std::string neg = std::string(kMinimalHead) + R"({"medium": "v", "thickness": "-1 nm"}]}})";
  CHECK(error_of(neg).find("layers.stack[0].thickness") != std::string::npos);
  const std::string zero = std::string(kMinimalHead) + R"({"medium": "v", "thickness": "0 nm"}]}})";
  CHECK_FALSE(error_of(zero).empty());
  const std::string unknown = std::string(kMinimalHead) + R"({"medium": "v", "thickness": "1 nm", "colour": 3}]}})";
  CHECK(error_of(unknown).find("layers.stack[0].colour") != std::string::npos);
  const std::string bare = std::string(kMinimalHead) + R"({"medium": "v", "thickness": 1}]}})";
  CHECK(error_of(bare).find("layers.stack[0].thickness") != std::string::npos);
  const std::string missing = std::string(kMinimalHead) + R"({"medium": "w", "thickness": "1 nm"}]}})";
  CHECK(error_of(missing).find("w") != std::string::npos);
  const std::string no_eta = std::string(kMinimalHead) +
                             R"(]}, "sweep": {"omega": {"min": "1 nat", "max": "2 nat", "count": 2},
                               "eta": "0 nat", "outputs": ["DOS"], "z_grid": {"min": "0 nm", "max": "1 nm", "count": 2}}})";
  CHECK(error_of(no_eta).find("eta") != std::string::npos);
  const std::string no_count = std::string(kMinimalHead) +
                               R"(]}, "sweep": {"omega": {"min": "1 nat", "max": "2 nat", "count": 0},
                                 "eta": "1 nat", "outputs": ["T-blocks"]}})";
  CHECK(error_of(no_count).find("sweep.omega.count") != std::string::npos);
}

TEST_CASE("syntax errors report line and column") {
  const std::string text = "{\n  \"media\": {\n    \"v\": {\"model\": \"free_particle\",}\n  }\n}";
  const std::string msg = error_of(text);
  CHECK(msg.find("case.json:3:") != std::string::npos);
}

TEST_CASE("fibonacci words follow the recursion") {
  CHECK(fibonacci_word(1) == "A");
  CHECK(fibonacci_word(2) == "AB");
  CHECK(fibonacci_word(5) == "ABAABABA");
  // Independent recursion on counts: (a, b) -> (a + b, a).
  long a = 1, b = 0;
  for (int g = 1; g <= 16; ++g) {
    const std::string w = fibonacci_word(g);
    CHECK(static_cast<long>(std::count(w.begin(), w.end(), 'A')) == a);
    CHECK(static_cast<long>(std::count(w.begin(), w.end(), 'B')) == b);
    if (g >= 2) CHECK(w.substr(0, fibonacci_word(g - 1).size()) == fibonacci_word(g - 1));
    const long next_a = a + b;
    b = a;
    a = next_a;
  }
  CHECK(fibonacci_word(16).size() == 1597);
  const std::string w = fibonacci_word(20);
  const double ratio = static_cast<double>(std::count(w.begin(), w.end(), 'A')) /
                       static_cast<double>(std::count(w.begin(), w.end(), 'B'));
  CHECK(ratio == doctest::Approx(std::numbers::phi).epsilon(1e-6));
  CHECK_THROWS_AS(fibonacci_word(0), ContractViolation);
}

TEST_CASE("fibonacci stack from layer files") {
  const StackFile f = parse_stack_text(fibonacci_stack_text(5, kData / "fib_a.json", kData / "fib_b.json"));
  REQUIRE(f.stack.layers().size() == 8);
  std::string letters;
  for (const Layer& l : f.stack.layers()) letters += l.label;
  CHECK(letters == "ABAABABA");
  CHECK(f.stack.total_thickness() == doctest::Approx(5 * 1.0 + 3 * 0.6));
  const Layer la{effective_mass_medium(1.0, 0.0), 1.0, "A"};
  const Layer lb{effective_mass_medium(1.0, 2.0), 0.6, "B"};
  const LayerStack built = fibonacci_stack(5, la, lb);
  const SpectralPoint sp(1.3);
  CHECK((f.stack.transfer(f.stack.total_thickness(), 0.0, sp).matrix() -
         built.transfer(built.total_thickness(), 0.0, sp).matrix())
            .norm() < 1e-11);
}

TEST_CASE("bound-state edge cases") {
  // Deep narrow well approaches the hard-wall box levels (n pi / L)^2.
  const double width = 1.0;
  const auto levels = find_bound_states(bendaniel_duke_well(width, 1e5, 1.0, 1.0), 1.0, 100.0, 1e-10);
  REQUIRE(levels.size() >= 3);
  for (int n = 1; n <= 3; ++n) {
    const double box = std::pow(n * std::numbers::pi / width, 2);
    CHECK(std::abs(levels[n - 1] - box) / box < 2.0 * 2.0 / (width * std::sqrt(1e5)));
    CHECK(levels[n - 1] < box);
  }
  CHECK(find_bound_states(LayerStack::homogeneous(free_particle()), -5.0, -0.1, 1e-10).empty());
}

TEST_CASE("sweeps are byte-identical across runs and thread counts") {
  const StackFile f = parse_stack_file(kData / "toy.json");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunOptions oa{a, 1, IdentityMode::warn}, ob{b, 4, IdentityMode::warn};
  run_sweep(f.stack, *f.sweep, oa);
  run_sweep(f.stack, *f.sweep, ob);
  for (const char* name : {"sweep.csv", "z_grid.csv", "identity_report.json"})
    CHECK(slurp(a / name) == slurp(b / name));
  CHECK_FALSE(slurp(a / "sweep.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("free-particle sweep: unit transmission and 1/(2 pi k) density of states") {
  const StackFile f = parse_stack_file(kData / "minimal.json");
  const fs::path out = scratch("free");
  const SweepSummary s = run_sweep(f.stack, *f.sweep, {out, 2, IdentityMode::strict});
  CHECK(s.exit_code == 0);
  CHECK(s.failures == 0);
  const auto rows = read_csv(out / "sweep.csv");
  const auto& head = rows.front();
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
  };
  REQUIRE(col("transmission") < head.size());
  REQUIRE(col("DOS_z1") < head.size());
  CHECK(head[0] == "omega_re");
  CHECK(head[4] == "T_AA_00_re");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double omega = std::stod(rows[r][0]);
    CHECK(std::stod(rows[r][col("transmission")]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::stod(rows[r][col("DOS_z1")]) == doctest::Approx(oracle::free_dos(std::sqrt(omega))).epsilon(1e-5));
  }
  fs::remove_all(out);
}

TEST_CASE("barrier sweep transmission matches the closed form") {
  const StackFile f = parse_stack_file(kData / "barrier.json");
  const fs::path out = scratch("barrier");
  const SweepSummary s = run_sweep(f.stack, *f.sweep, {out, 3, IdentityMode::strict});
  CHECK(s.exit_code == 0);
  const auto rows = read_csv(out / "sweep.csv");
  const std::size_t tcol = rows.front().size() - 1;
  CHECK(rows.front()[tcol] == "transmission");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double e = std::stod(rows[r][0]);
    CHECK(std::stod(rows[r][tcol]) == doctest::Approx(oracle::barrier_transmission(e, 3.0, 1.5)).epsilon(1e-9));
  }
  fs::remove_all(out);
}

TEST_CASE("well sweep: bound states and density-of-states peaks") {
  const StackFile f = parse_stack_file(kData / "well.json");
  const double depth = 0.3 / kNaturalEnergyEv;
  const auto expect = oracle::finite_well_levels(10.0, depth, 0.067, 0.092);
  const fs::path out = scratch("well");
  const SweepSummary s = run_sweep(f.stack, *f.sweep, {out, 4, IdentityMode::strict});
  CHECK(s.exit_code == 0);
  const auto bound = read_csv(out / "bound_states.csv");
  REQUIRE(bound.size() == expect.size() + 1);
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(std::stod(bound[i + 1][3]) - expect[i]) < 1e-8);

  // Fine scan of the DOS summed over the well (single points can sit on a node).
  const double eta = 1e-3;
  for (double level : expect) {
    double best = -1.0, at = 0.0;
    for (int i = -200; i <= 200; ++i) {
      const double omega = level + i * eta / 20.0;
      const GreenFunction g(f.stack, SpectralPoint(omega, eta));
      std::vector<CMatrix> diag;
      for (int j = 0; j <= 20; ++j) diag.push_back(g.local_diagonal(0.5 * j));
      double rho = 0.0;
      for (double r : local_dos(diag, g.spectral_point())) rho += r;
      if (rho > best) best = rho, at = omega;
    }
    CHECK(std::abs(at - level) < 3.0 * eta);
  }
  fs::remove_all(out);
}

TEST_CASE("identity monitor flags a fabricated violation in strict mode only") {
  StackFile f = parse_stack_file(kData / "minimal.json");
  f.sweep->identity_threshold = 1e-30;  // nothing can pass this
  const fs::path out = scratch("strict");
  CHECK(run_sweep(f.stack, *f.sweep, {out, 1, IdentityMode::strict}).exit_code == 2);
  CHECK(run_sweep(f.stack, *f.sweep, {out, 1, IdentityMode::warn}).exit_code == 0);
  fs::remove_all(out);
}

TEST_CASE("command-line exit codes") {
  const fs::path out = scratch("cli");
  CHECK(run_cli("run --stack " + (kData / "barrier.json").string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "sweep.csv"));
  CHECK(run_cli("run --stack " + (out / "missing.json").string() + " --out " + out.string()) == 3);
  CHECK(run_cli("run --stack") == 3);
  {
    std::ofstream bad(out / "bad.json");
    bad << std::string(kMinimalHead) << R"({"medium": "v", "thickness": "-2 nm"}]}})";
  }
  CHECK(run_cli("run --stack " + (out / "bad.json").string() + " --out " + out.string()) == 3);
  CHECK(run_cli("fib --generation 5 --a " + (kData / "fib_a.json").string() + " --b " +
                (kData / "fib_b.json").string() + " --out " + (out / "fib5.json").string()) == 0);
  CHECK(parse_stack_file(out / "fib5.json").stack.layers().size() == 8);
  CHECK(run_cli("bound --stack " + (kData / "well.json").string() + " --bracket 1meV,299meV --tol 1e-10") == 0);
  CHECK(run_cli("bound --stack " + (kData / "minimal.json").string() + " --bracket 1,2 --tol 1e-10") == 3);
  fs::remove_all(out);
}
