// Cross-module invariants checked over small random corpora.

#include "doctest.h"

#include <random>

#include "atm/green.hpp"
#include "atm/models.hpp"
#include "atm/spectrum.hpp"
#include "atm/stack.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace atm;

namespace {

CoefficientSet wobbly_hermitean() {
  CoefficientOptions opt;
  opt.hermitean = true;
  opt.domain_lo = 0.0;
  opt.domain_hi = 2.0;
  return CoefficientSet(2, [](double z, const SpectralPoint& sp) {
    CMatrix b(2, 2), p(2, 2), w(2, 2);
    b << 1.0 + 0.3 * z, cplx(0.0, 0.2), cplx(0.0, -0.2), 1.5;
    p << cplx(0.0, 0.4 * std::cos(z)), 0.3, -0.1, 0.0;
    w << sp.value() - z, 0.2, 0.2, sp.value() - 1.0;
    return CoefficientBlocks{b, p, -p.adjoint(), w};
  }, opt);
}

std::vector<LayerStack> stack_corpus() {
  std::mt19937 rng(99);
  std::vector<LayerStack> out;
  out.push_back(LayerStack::homogeneous(free_particle()));
  out.push_back(bendaniel_duke_well(1.0, 5.0, 0.5, 1.0));
  out.push_back(LayerStack(two_band_toy(1.0, 0.4), two_band_toy(1.0, 0.4),
                           {{two_band_toy(1.0, 0.4, 0.8), 1.0, "insert"}, {wobbly_hermitean(), 0.7, "graded"}}));
  std::vector<Layer> layers;
  for (int i = 0; i < 6; ++i) layers.push_back({fixture::random_hermitean_medium(rng, 3), 0.3, ""});
  out.emplace_back(fixture::random_hermitean_medium(rng, 3), fixture::random_hermitean_medium(rng, 3), layers);
  return out;
}

}  // namespace

TEST_CASE("group and inverse properties through graded layers") {
  const LayerStack stack(two_band_toy(1.0, 0.4), two_band_toy(1.0, 0.4),
                         {{wobbly_hermitean(), 1.3, "graded"}, {two_band_toy(1.0, 0.4, 0.5), 0.5, ""}});
  const SpectralPoint sp(0.9, 0.02);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    double z0 = u(rng), z2 = u(rng);
    if (z0 > z2) std::swap(z0, z2);
    const double z1 = z0 + (z2 - z0) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const CMatrix whole = stack.transfer(z2, z0, sp).matrix();
    const CMatrix parts = stack.transfer(z2, z1, sp).matrix() * stack.transfer(z1, z0, sp).matrix();
    CHECK((whole - parts).norm() < 1e-8 * whole.norm());
    const CMatrix back = stack.transfer(z0, z2, sp).matrix() * whole;
    CHECK((back - CMatrix::Identity(4, 4)).norm() < 1e-8);
  }
}

TEST_CASE("block identities for analytic constant layers") {
  for (const CoefficientSet& c : {free_particle(), effective_mass_medium(0.3, 1.0), two_band_toy(1.0, 0.4)})
    for (double omega : {-0.7, 0.4, 2.5}) {
      const TransferMatrix t = propagate_layer(c, 0.0, 1.1, SpectralPoint(omega));
      const SymplecticReport r = symplectic_report(t, transconjugate(t));
      CHECK(r.block_aa_da < 1e-10);
      CHECK(r.block_dd_ad < 1e-10);
      CHECK(r.block_aa_dd < 1e-10);
      CHECK(r.det_defect < 1e-10);
    }
}

TEST_CASE("flux is conserved across interfaces of a real-axis stack") {
  const LayerStack stack = stack_corpus()[2];
  const SpectralPoint sp(1.4);
  std::mt19937 rng(17);
  const CVector psi0 = oracle::random_matrix(rng, 4).col(0);
  const cplx j0 = flux(StateVector::from_stacked(psi0));
  double worst = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double z = -1.0 + 0.08 * i;
    const CVector psi = stack.transfer(z, -1.0, sp).matrix() * psi0;
    worst = std::max(worst, std::abs(flux(StateVector::from_stacked(psi)) - j0));
  }
  CHECK(worst < 10.0 * 1e-10 * psi0.squaredNorm());
}

TEST_CASE("jump and coefficient relations hold across the model corpus") {
  const std::vector<double> zs{-0.6, 0.0, 0.35, 1.0, 1.8};
  for (const LayerStack& stack : stack_corpus())
    for (double omega : {0.3, 1.7}) {
      const GreenFunction g(stack, SpectralPoint(omega, 1e-3));
      const JumpReport r = g.jumps(zs);
      CHECK(r.max_field() < 1e-9);
      CHECK(r.max_coefficient() < 1e-9);
    }
}

TEST_CASE("reference plane can sit inside any layer") {
  for (const LayerStack& stack : stack_corpus()) {
    const SpectralPoint sp(1.1, 0.01);
    const GreenFunction base(stack, sp, 0.0);
    const double l = std::max(stack.total_thickness(), 1.0);
    for (double z0 : {-0.8, 0.25 * l, 0.6 * l, l + 0.4}) {
      const GreenFunction moved(stack, sp, z0);
      for (auto [z, zp] : {std::pair{-0.5, 0.9 * l}, std::pair{0.7 * l, 0.1}, std::pair{0.3 * l, 0.3 * l}}) {
        const CMatrix a = base(z, zp).g, b = moved(z, zp).g;
        CHECK((a - b).norm() < 1e-10 * a.norm());
      }
    }
  }
}

TEST_CASE("causal sign of the free-particle coefficient") {
  for (double eta : {1e-2, 1e-5, 1e-9}) {
    const GreenCoefficients gc = assemble_green_coefficients(regular_limits(free_particle(), SpectralPoint(2.0, eta)));
    CHECK(gc.c_aa(0, 0).imag() < 0.0);
    CHECK(gc.c_aa(0, 0).imag() == doctest::Approx(-1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-2));
  }
}

TEST_CASE("exact modes of every constant preset are annihilated") {
  const SpectralPoint sp(0.8);
  for (const CoefficientSet& c : {free_particle(), free_particle(2.0), effective_mass_medium(0.067, 0.3),
                                  two_band_toy(1.0, 0.4), two_band_toy(0.2, 1.5, 0.3)}) {
    Eigen::ComplexEigenSolver<CMatrix> es(companion_matrix(c, 0.0, sp));
    const Eigen::Index n = c.dim();
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
      const cplx lam = es.eigenvalues()(j);
      const CVector v = es.eigenvectors().col(j).head(n);
      const FieldFunction mode = [lam, v](double z) {
        const cplx e = std::exp(lam * z);
        return FieldJet{v * e, v * (lam * e), v * (lam * lam * e)};
      };
      CHECK(apply_operator(c, mode, 0.4, sp).norm() < 1e-8);
    }
  }
}

TEST_CASE("shallow-well limit reduces to the free particle") {
  const SpectralPoint sp(1.5, 0.01);
  const cplx k = oracle::wavevector(sp.value());
  for (double depth : {1e-4, 1e-7}) {
    // Barriers of height depth shift k by O(depth), so G moves by O(depth) as well.
    const GreenFunction g(bendaniel_duke_well(1.0, depth, 1.0, 1.0), sp);
    for (auto [z, zp] : {std::pair{-0.5, 0.4}, std::pair{1.7, 0.2}, std::pair{0.5, 0.5}})
      CHECK(std::abs(g(z, zp).g(0, 0) - oracle::free_green(k, z, zp)) < 10.0 * depth);
  }
  const LayerStack flat(free_particle(), free_particle(), {{effective_mass_medium(1.0, 0.0), 1.0, ""}});
  const GreenFunction g(flat, sp);
  CHECK(std::abs(g(-0.5, 0.4).g(0, 0) - oracle::free_green(k, -0.5, 0.4)) < 1e-11);
}
