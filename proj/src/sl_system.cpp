#include "atm/sl_system.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "atm/errors.hpp"

namespace atm {
namespace {

double first_derivative_step(double z) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(z));
}

// Second differences need a larger step than first differences.
double second_derivative_step(double z) {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * std::max(1.0, std::abs(z));
}

void check_block(const CMatrix& m, Eigen::Index n, const char* name, double z) {
  if (m.rows() != n || m.cols() != n)
    throw CoefficientError(std::string("coefficient ") + name + " has wrong shape at z = " +
                           std::to_string(z));
  if (!all_finite(m))
    throw CoefficientError(std::string("coefficient ") + name + " is not finite at z = " +
                           std::to_string(z));
}

double rel(const CMatrix& defect, double scale) { return defect.norm() / std::max(scale, 1.0); }

CMatrix invert_b(const CMatrix& b, double z) {
  Eigen::PartialPivLU<CMatrix> lu(b);
  if (!(lu.rcond() > 1e-14)) throw SingularCoefficientError(z);
  return lu.inverse();
}

}  // namespace

CoefficientSet::CoefficientSet(Eigen::Index dim, CoefficientFn fn, CoefficientOptions options)
    : dim_(dim), fn_(std::move(fn)), options_(options) {
  if (dim_ < 1) throw ContractViolation("CoefficientSet: dim must be >= 1");
  if (!fn_) throw ContractViolation("CoefficientSet: empty coefficient callback");
  if (!(options_.domain_hi >= options_.domain_lo))
    throw ContractViolation("CoefficientSet: empty sampling domain");
  if (!options_.hermitean) return;

  // 16 sample points, two real probe energies, a nonzero in-plane wavevector.
  const SpectralPoint probes[] = {SpectralPoint(0.731, 0.0, {0.3, -0.2}),
                                  SpectralPoint(-1.37, 0.0, {0.0, 0.45})};
  for (const auto& sp : probes) {
    for (int i = 0; i < 16; ++i) {
      const double z = options_.domain_lo +
                       (options_.domain_hi - options_.domain_lo) * (i + 0.5) / 16.0;
      const double d = hermiticity_defect(*this, z, sp);
      if (d > options_.hermiticity_tol)
        throw CoefficientError("coefficients declared hermitean violate B=B+, P=-Y+, W=W+ at z = " +
                               std::to_string(z) + " (relative defect " + std::to_string(d) + ")");
    }
  }
}

CoefficientSet CoefficientSet::constant(const CMatrix& b, const CMatrix& p, const CMatrix& y,
                                        std::function<CMatrix(const SpectralPoint&)> w,
                                        bool hermitean) {
  CoefficientOptions opts;
  opts.is_constant = true;
  opts.hermitean = hermitean;
  return CoefficientSet(
      b.rows(),
      [b, p, y, w = std::move(w)](double, const SpectralPoint& sp) {
        return CoefficientBlocks{b, p, y, w(sp)};
      },
      opts);
}

CoefficientBlocks CoefficientSet::operator()(double z, const SpectralPoint& sp) const {
  CoefficientBlocks c;
  try {
    c = fn_(z, sp);
  } catch (const CoefficientError&) {
    throw;
  } catch (const std::exception& e) {
    throw CoefficientError(std::string("coefficient evaluation failed: ") + e.what());
  }
  check_block(c.b, dim_, "B", z);
  check_block(c.p, dim_, "P", z);
  check_block(c.y, dim_, "Y", z);
  check_block(c.w, dim_, "W", z);
  return c;
}

CoefficientBlocks CoefficientSet::derivative(double z, const SpectralPoint& sp) const {
  if (is_constant()) {
    const CMatrix zero = CMatrix::Zero(dim_, dim_);
    return {zero, zero, zero, zero};
  }
  const double h = first_derivative_step(z);
  const auto up = (*this)(z + h, sp);
  const auto dn = (*this)(z - h, sp);
  const double inv = 1.0 / (2.0 * h);
  return {(up.b - dn.b) * inv, (up.p - dn.p) * inv, (up.y - dn.y) * inv, (up.w - dn.w) * inv};
}

double hermiticity_defect(const CoefficientSet& c, double z, const SpectralPoint& sp) {
  const auto k = c(z, sp);
  const double scale = k.b.norm() + k.p.norm() + k.y.norm() + k.w.norm();
  const CMatrix db = k.b - k.b.adjoint();
  const CMatrix dp = k.p + k.y.adjoint();
  const CMatrix dw = k.w - k.w.adjoint();
  return std::max({rel(db, scale), rel(dp, scale), rel(dw, scale)});
}

StateVector::StateVector(CVector f_, CVector a_) : f(std::move(f_)), a(std::move(a_)) {
  if (f.size() != a.size()) throw ContractViolation("StateVector: |F| != |A|");
}

StateVector StateVector::from_stacked(const CVector& psi) {
  if (psi.size() % 2 != 0) throw ContractViolation("StateVector: odd stacked length");
  const auto n = psi.size() / 2;
  return StateVector(psi.head(n), psi.tail(n));
}

CVector StateVector::stacked() const {
  CVector psi(2 * f.size());
  psi << f, a;
  return psi;
}

FieldFunction numeric_jet(std::function<CVector(double)> f) {
  return [f = std::move(f)](double z) {
    const double h1 = first_derivative_step(z);
    const double h2 = second_derivative_step(z);
    FieldJet j;
    j.f = f(z);
    j.df = (f(z + h1) - f(z - h1)) / (2.0 * h1);
    j.d2f = (f(z + h2) - 2.0 * j.f + f(z - h2)) / (h2 * h2);
    return j;
  };
}

CVector secondary_field(const CoefficientSet& c, const FieldSample& s, const SpectralPoint& sp) {
  if (s.f.size() != c.dim() || s.df.size() != c.dim())
    throw ContractViolation("secondary_field: dimension mismatch");
  const auto k = c(s.z, sp);
  return k.b * s.df + k.p * s.f;
}

CMatrix companion_matrix(const CoefficientSet& c, double z, const SpectralPoint& sp) {
  const auto k = c(z, sp);
  const auto n = c.dim();
  const CMatrix binv = invert_b(k.b, z);
  CMatrix d(2 * n, 2 * n);
  d.topLeftCorner(n, n) = -binv * k.p;
  d.topRightCorner(n, n) = binv;
  d.bottomLeftCorner(n, n) = k.y * binv * k.p - k.w;
  d.bottomRightCorner(n, n) = -k.y * binv;
  return d;
}

double generator_symplectic_defect(const CoefficientSet& c, double z, const SpectralPoint& sp) {
  const CMatrix d = companion_matrix(c, z, sp);
  const CMatrix dc = companion_matrix(c, z, sp.conjugate()).adjoint();
  const CMatrix j = symplectic_unit(c.dim());
  return (dc * j + j * d).norm();
}

cplx flux(const StateVector& s) { return kI * (s.f.dot(s.a) - s.a.dot(s.f)); }

CVector apply_operator(const CoefficientSet& c, const FieldFunction& f, double z,
                       const SpectralPoint& sp) {
  const auto k = c(z, sp);
  const auto dk = c.derivative(z, sp);
  const FieldJet j = f(z);
  if (j.f.size() != c.dim()) throw ContractViolation("apply_operator: dimension mismatch");
  return dk.b * j.df + k.b * j.d2f + dk.p * j.f + k.p * j.df + k.y * j.df + k.w * j.f;
}

CVector apply_adjoint_operator(const CoefficientSet& c, const FieldFunction& f2, double z,
                               const SpectralPoint& sp) {
  const auto k = c(z, sp);
  const auto dk = c.derivative(z, sp);
  const FieldJet j = f2(z);
  if (j.f.size() != c.dim()) throw ContractViolation("apply_adjoint_operator: dimension mismatch");
  return dk.b.adjoint() * j.df + k.b.adjoint() * j.d2f - dk.y.adjoint() * j.f -
         k.y.adjoint() * j.df - k.p.adjoint() * j.df + k.w.adjoint() * j.f;
}

cplx residual(const StateSample& s1, const StateSample& s2) {
  if (std::abs(s1.z - s2.z) > 1e-12 * std::max(1.0, std::abs(s1.z)))
    throw ContractViolation("residual: samples at different z");
  if (s1.psi.dim() != s2.psi.dim()) throw ContractViolation("residual: dimension mismatch");
  return s2.psi.f.dot(s1.psi.a) - s2.psi.a.dot(s1.psi.f);
}

cplx concomitant(const CoefficientSet& c, const FieldJet& f, const FieldJet& f2, double z,
                 const SpectralPoint& sp) {
  const auto k = c(z, sp);
  return f2.f.dot(k.b * f.df) - f2.df.dot(k.b * f.f) + f2.f.dot((k.p + k.y) * f.f);
}

GreenIdentityResult green_identity_defect(const CoefficientSet& c, const FieldFunction& f,
                                          const FieldFunction& f2, double a, double b,
                                          const SpectralPoint& sp, double quadrature_tol) {
  using boost::math::quadrature::gauss_kronrod;
  auto forward = [&](double z) -> cplx { return f2(z).f.dot(apply_operator(c, f, z, sp)); };
  auto adjoint = [&](double z) -> cplx { return f(z).f.dot(apply_adjoint_operator(c, f2, z, sp)); };

  double err1 = 0.0, err2 = 0.0, l1a = 0.0, l1b = 0.0;
  const cplx i1 = gauss_kronrod<double, 31>::integrate(forward, a, b, 15, quadrature_tol, &err1, &l1a);
  const cplx i2 = gauss_kronrod<double, 31>::integrate(adjoint, a, b, 15, quadrature_tol, &err2, &l1b);

  const cplx boundary = concomitant(c, f(b), f2(b), b, sp) - concomitant(c, f(a), f2(a), a, sp);
  GreenIdentityResult r;
  r.defect = i1 - std::conj(i2) - boundary;
  // |Kronrod - Gauss| per panel; pessimistic for smooth integrands.
  r.error_estimate = err1 + err2;
  r.converged = r.error_estimate <= quadrature_tol * std::max(1.0, l1a + l1b);
  return r;
}

}  // namespace atm
