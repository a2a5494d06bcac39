#include "atm/spectrum.hpp"

#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "atm/errors.hpp"

namespace atm {

cplx matching_determinant(const LayerStack& stack, double omega, std::array<double, 2> kappa) {
  const SpectralPoint sp(omega, 0.0, kappa);
  const auto n = stack.dim();
  const BulkModes ml = bulk_modes(stack.left(), sp);
  const BulkModes mr = bulk_modes(stack.right(), sp);
  CMatrix from_left(2 * n, n);
  from_left << CMatrix::Identity(n, n), -decaying_ratio(ml.f_left, ml.a_left);
  CMatrix onto_right(n, 2 * n);
  onto_right << decaying_ratio(mr.f_right, mr.a_right), CMatrix::Identity(n, n);
  const CMatrix t = stack.transfer(stack.total_thickness(), 0.0, sp).matrix();
  return (onto_right * t * from_left).determinant();
}

std::vector<double> find_bound_states(const LayerStack& stack, double lo, double hi, double tol,
                                      const BoundStateOptions& opt) {
  if (!(hi > lo) || !(tol > 0.0)) throw ContractViolation("find_bound_states: need lo < hi and tol > 0");
  if (opt.scan_points < 2) throw ContractViolation("find_bound_states: scan_points < 2");
  const int m = opt.scan_points;
  std::vector<double> omega(m);
  std::vector<cplx> det(m);
  double biggest = 0.0;
  cplx phase = 1.0;
  for (int i = 0; i < m; ++i) {
    omega[i] = lo + (hi - lo) * i / (m - 1);
    const SpectralPoint sp(omega[i], 0.0, opt.kappa);
    if (has_propagating_modes(stack.left(), sp) || has_propagating_modes(stack.right(), sp))
      throw ContractViolation("find_bound_states: bracket reaches the exterior continuum at Omega = " +
                              std::to_string(omega[i]));
    det[i] = matching_determinant(stack, omega[i], opt.kappa);
    if (std::abs(det[i]) > biggest) {
      biggest = std::abs(det[i]);
      phase = det[i] / biggest;
    }
  }
  if (biggest == 0.0) return {};

  // Hermitean scalar problems give a real determinant; in general strip a common phase
  // and confirm each candidate is a genuine zero.
  auto f = [&](double w) { return (std::conj(phase) * matching_determinant(stack, w, opt.kappa)).real(); };
  auto g = [&](int i) { return (std::conj(phase) * det[i]).real(); };
  auto close = [tol](double a, double b) { return std::abs(b - a) <= tol; };

  std::vector<double> roots;
  for (int i = 0; i + 1 < m; ++i) {
    const double ga = g(i), gb = g(i + 1);
    double root;
    if (ga == 0.0) {
      root = omega[i];
    } else if ((ga < 0.0) != (gb < 0.0) && gb != 0.0) {
      const auto [a, b] = boost::math::tools::bisect(f, omega[i], omega[i + 1], close);
      root = 0.5 * (a + b);
    } else {
      continue;
    }
    if (std::abs(matching_determinant(stack, root, opt.kappa)) <= 1e-6 * biggest) roots.push_back(root);
  }
  if (m > 0 && g(m - 1) == 0.0) roots.push_back(omega[m - 1]);
  return roots;
}

double transmission(const LayerStack& stack, const SpectralPoint& sp) {
  if (stack.dim() != 1) throw ContractViolation("transmission: only defined for N = 1");
  const SpectralPoint real(sp.omega().real(), 0.0, sp.kappa());
  if (!has_propagating_modes(stack.left(), real) || !has_propagating_modes(stack.right(), real))
    return 0.0;
  // Classes are decided under the causal tilt: the right-decaying mode is the one that
  // carries energy to the right.
  const BulkModes ml = bulk_modes(stack.left(), real);
  const BulkModes mr = bulk_modes(stack.right(), real);
  CVector u_in(2), u_ref(2), u_tr(2);
  u_in << ml.f_right(0, 0), ml.a_right(0, 0);
  u_ref << ml.f_left(0, 0), ml.a_left(0, 0);
  u_tr << mr.f_right(0, 0), mr.a_right(0, 0);
  const CMatrix t = stack.transfer(stack.total_thickness(), 0.0, real).matrix();

  // T (u_in + r u_ref) = tr u_tr
  Eigen::Matrix2cd sys;
  sys.col(0) = u_tr;
  sys.col(1) = -t * u_ref;
  const Eigen::Vector2cd coef = sys.partialPivLu().solve(t * u_in);
  const auto j = [](const CVector& u) { return flux(StateVector(u.head(1), u.tail(1))).real(); };
  return std::norm(coef(0)) * j(u_tr) / j(u_in);
}

std::string fibonacci_word(int generation) {
  if (generation < 1) throw ContractViolation("fibonacci_word: generation must be >= 1");
  std::string prev = "A", cur = "AB";
  if (generation == 1) return prev;
  for (int g = 3; g <= generation; ++g) {
    std::string next = cur + prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

LayerStack fibonacci_stack(int generation, const Layer& a, const Layer& b,
                           const CoefficientSet& left, const CoefficientSet& right) {
  const std::string word = fibonacci_word(generation);
  std::vector<Layer> layers;
  layers.reserve(word.size());
  for (char ch : word) layers.push_back(ch == 'A' ? a : b);
  return LayerStack(left, right, std::move(layers));
}

LayerStack fibonacci_stack(int generation, const Layer& a, const Layer& b) {
  return fibonacci_stack(generation, a, b, a.medium, a.medium);
}

}  // namespace atm
