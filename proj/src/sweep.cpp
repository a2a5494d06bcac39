#include "atm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "atm/errors.hpp"
#include "atm/green.hpp"
#include "atm/spectrum.hpp"

namespace atm {
namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* const kBlockNames[] = {"AA", "AD", "DA", "DD"};

std::vector<std::string> header(const SweepSpec& spec, Eigen::Index n, std::size_t nz) {
  std::vector<std::string> h{"omega_re", "omega_im", "kappa_x", "kappa_y"};
  auto entries = [&](const std::string& prefix) {
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) {
        const std::string base = prefix + "_" + std::to_string(r) + std::to_string(c);
        h.push_back(base + "_re");
        h.push_back(base + "_im");
      }
  };
  if (spec.wants(Output::t_blocks))
    for (const char* b : kBlockNames) entries(std::string("T_") + b);
  if (spec.wants(Output::g_diagonal))
    for (std::size_t i = 0; i < nz; ++i) entries("G_z" + std::to_string(i));
  if (spec.wants(Output::dos))
    for (std::size_t i = 0; i < nz; ++i) h.push_back("DOS_z" + std::to_string(i));
  if (spec.wants(Output::transmission)) h.push_back("transmission");
  return h;
}

void append_matrix(std::vector<double>& row, const CMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c).real());
      row.push_back(m(r, c).imag());
    }
}

struct PointResult {
  std::string line;
  json report;
  std::optional<json> failure;
  double max_residual = 0.0;
};

// Planes at which the field jumps are probed.
std::vector<double> jump_planes(const LayerStack& stack) {
  const double l = stack.total_thickness();
  if (l == 0.0) return {-0.5, -0.25, 0.0, 0.25, 0.5};
  return {0.1 * l, 0.3 * l, 0.5 * l, 0.7 * l, 0.9 * l};
}

PointResult evaluate(const LayerStack& stack, const SweepSpec& spec, double omega,
                     const std::array<double, 2>& kappa, const std::vector<double>& zs,
                     std::size_t width) {
  PointResult out;
  const SpectralPoint sp(omega, spec.eta, kappa);
  std::vector<double> row{omega, spec.eta, kappa[0], kappa[1]};
  out.report = {{"omega", omega}, {"eta", spec.eta}, {"kappa", {kappa[0], kappa[1]}}};
  try {
    const double l = stack.total_thickness();
    const SpectralPoint sp0(omega, 0.0, kappa);
    const TransferMatrix t0 = stack.transfer(l, 0.0, sp0);
    const SymplecticReport sym = symplectic_report(t0, transconjugate(t0));
    out.report["symplectic"] = {{"t_c_j_t_minus_j", sym.residual_full},
                                {"det_defect", sym.det_defect},
                                {"block_aa_da", sym.block_aa_da},
                                {"block_dd_ad", sym.block_dd_ad},
                                {"block_aa_dd", sym.block_aa_dd}};
    out.max_residual = sym.max_residual();

    if (spec.wants(Output::t_blocks)) {
      const TransferMatrix t = spec.eta == 0.0 ? t0 : stack.transfer(l, 0.0, sp);
      append_matrix(row, t.aa());
      append_matrix(row, t.ad());
      append_matrix(row, t.da());
      append_matrix(row, t.dd());
    }

    const bool green = spec.wants(Output::g_diagonal) || spec.wants(Output::dos);
    if (green || spec.wants(Output::identity_report)) {
      const GreenFunction gf(stack, sp, 0.0);
      const std::vector<double> planes = jump_planes(stack);
      const JumpReport j = gf.jumps(planes);
      out.report["jumps"] = {{"a_jump", j.a_jump},   {"z_jump", j.z_jump},   {"continuity", j.continuity},
                             {"c_da", j.c_da},       {"c_ad", j.c_ad},       {"c_dd_lt", j.c_dd_lt},
                             {"c_dd_gt", j.c_dd_gt}};
      out.max_residual = std::max(out.max_residual, j.max());
      if (green) {
        std::vector<CMatrix> diag;
        diag.reserve(zs.size());
        for (double z : zs) diag.push_back(gf.local_diagonal(z));
        if (spec.wants(Output::g_diagonal))
          for (const CMatrix& g : diag) append_matrix(row, g);
        if (spec.wants(Output::dos))
          for (double rho : local_dos(diag, sp)) row.push_back(rho);
      }
    }
    if (spec.wants(Output::transmission)) row.push_back(transmission(stack, sp));
  } catch (const std::exception& e) {
    out.failure = json{{"omega", omega}, {"eta", spec.eta}, {"kappa", {kappa[0], kappa[1]}},
                       {"error", e.what()}};
    row.resize(4);
  }
  row.resize(width, std::numeric_limits<double>::quiet_NaN());
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += num(row[i]);
  }
  out.line = std::move(line);
  out.report["max_residual"] = out.max_residual;
  return out;
}

void open_or_throw(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p, std::ios::binary);
  if (!f) throw InputError(p.string() + ": cannot write");
}

}  // namespace

SweepSummary run_sweep(const LayerStack& stack, const SweepSpec& spec, const RunOptions& opt,
                       std::ostream* log) {
  std::filesystem::create_directories(opt.out_dir);
  const std::vector<double> omegas = spec.omega.points();
  const std::vector<double> zs = spec.z_grid ? spec.z_grid->points() : std::vector<double>{};
  const auto head = header(spec, stack.dim(), zs.size());

  struct Job {
    double omega;
    std::array<double, 2> kappa;
  };
  std::vector<Job> jobs;
  for (const auto& k : spec.kappa)
    for (double w : omegas) jobs.push_back({w, k});

  std::ofstream csv;
  open_or_throw(csv, opt.out_dir / "sweep.csv");
  for (std::size_t i = 0; i < head.size(); ++i) csv << (i ? "," : "") << head[i];
  csv << '\n';

  if (!zs.empty()) {
    std::ofstream zf;
    open_or_throw(zf, opt.out_dir / "z_grid.csv");
    zf << "index,z\n";
    for (std::size_t i = 0; i < zs.size(); ++i) zf << i << ',' << num(zs[i]) << '\n';
  }

  // Workers fill slots; this thread writes them strictly in job order.
  std::vector<std::optional<PointResult>> slots(jobs.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      PointResult r = evaluate(stack, spec, jobs[i].omega, jobs[i].kappa, zs, head.size());
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(r);
      }
      ready.notify_all();
    }
  };
  const int nthreads = std::max(1, std::min<int>(opt.threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);

  SweepSummary summary;
  summary.points = jobs.size();
  json per_point = json::array();
  json failures = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    PointResult r;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      r = std::move(*slots[i]);
      slots[i].reset();
    }
    csv << r.line << '\n';
    if (r.failure) {
      ++summary.failures;
      if (log) *log << "point failed: omega = " << num(jobs[i].omega) << ": " << (*r.failure)["error"].get<std::string>() << '\n';
      failures.push_back(std::move(*r.failure));
    }
    summary.max_residual = std::max(summary.max_residual, r.max_residual);
    if (r.max_residual > spec.identity_threshold) ++summary.violations;
    per_point.push_back(std::move(r.report));
  }
  for (auto& th : pool) th.join();

  json bound = json::array();
  if (spec.wants(Output::bound_states)) {
    std::ofstream bf;
    open_or_throw(bf, opt.out_dir / "bound_states.csv");
    bf << "kappa_x,kappa_y,index,omega\n";
    for (const auto& k : spec.kappa) {
      try {
        BoundStateOptions bo;
        bo.kappa = k;
        const auto roots =
            find_bound_states(stack, spec.bound_bracket->first, spec.bound_bracket->second,
                              spec.bound_tol, bo);
        for (std::size_t i = 0; i < roots.size(); ++i)
          bf << num(k[0]) << ',' << num(k[1]) << ',' << i << ',' << num(roots[i]) << '\n';
      } catch (const std::exception& e) {
        ++summary.failures;
        if (log) *log << "bound-state search failed: " << e.what() << '\n';
        failures.push_back({{"bound_states", true}, {"kappa", {k[0], k[1]}}, {"error", e.what()}});
      }
    }
  }

  if (spec.wants(Output::identity_report)) {
    json maxes = json::object();
    for (const auto& p : per_point)
      for (const char* group : {"symplectic", "jumps"})
        if (p.contains(group))
          for (const auto& [k, v] : p[group].items())
            maxes[k] = std::max(maxes.value(k, 0.0), v.get<double>());
    json report = {{"threshold", spec.identity_threshold},
                   {"points", summary.points},
                   {"violations", summary.violations},
                   {"max_residual", summary.max_residual},
                   {"max", maxes},
                   {"failures", failures},
                   {"per_point", per_point}};
    std::ofstream rf;
    open_or_throw(rf, opt.out_dir / "identity_report.json");
    rf << report.dump(2) << '\n';
  }

  if (summary.violations > 0) {
    if (log)
      *log << (opt.mode == IdentityMode::strict ? "error" : "warning") << ": " << summary.violations
           << " point(s) exceed the identity threshold " << num(spec.identity_threshold)
           << " (max residual " << num(summary.max_residual) << ")\n";
    if (opt.mode == IdentityMode::strict) summary.exit_code = 2;
  }
  return summary;
}

}  // namespace atm
