#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maxqed/green1d.hpp"
#include "maxqed/modes.hpp"
#include "maxqed/reference.hpp"

using namespace maxqed;
using std::numbers::pi;

namespace {

const UnitsSystem kNatural = UnitsSystem::natural();
const MaterialModel kDielectric({{1.0, 1.0, 0.1}}, {});
const MaterialModel kMagnetic({}, {{0.5, 2.0, 0.2}});
const MaterialModel kBoth({{1.0, 1.0, 0.1}}, {{0.5, 2.0, 0.2}});

GreenSolution slab_green(const MaterialModel& m, double omega, double h) {
  const LayerStack slab = LayerStack::slab(m, 1.0);
  return solve_green(slab, omega, Grid1D::covering(slab, h, 1.0), kNatural);
}

}  // namespace

TEST_CASE("source kernels") {
  const LayerStack dielectric = LayerStack::slab(kDielectric, 1.0);
  const Grid1D g = Grid1D::covering(dielectric, 0.05, 1.0);
  const auto s = modes::source_kernels(dielectric, 0.9, g, kNatural);
  CHECK(s.magnetic.cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = g.node(i);
    if (z < -0.5 * g.spacing() || z > 1.0 + 0.5 * g.spacing()) {
      CHECK(s.electric.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  // hbar -> 4 hbar doubles every kernel entry.
  const UnitsSystem heavy = UnitsSystem::make(1.0, 1.0, 4.0);
  const LayerStack both = LayerStack::slab(kBoth, 1.0);
  const auto a = modes::source_kernels(both, 0.9, g, kNatural);
  const auto b = modes::source_kernels(both, 0.9, g, heavy);
  CHECK((b.electric - 2.0 * a.electric).cwiseAbs().maxCoeff() <= 1e-14 * a.electric.cwiseAbs().maxCoeff());
  CHECK((b.magnetic - 2.0 * a.magnetic).cwiseAbs().maxCoeff() <= 1e-14 * a.magnetic.cwiseAbs().maxCoeff());
}

TEST_CASE("mode kernels") {
  SUBCASE("vacuum has no modes") {
    const LayerStack vacuum = LayerStack::homogeneous(MaterialModel());
    const auto green = solve_green(vacuum, 1.0, Grid1D::covering(vacuum, 0.05, 2.0), kNatural);
    const auto b = modes::mode_fE(green, kNatural);
    CHECK(b.electric.cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.magnetic.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("electric columns are generated only on the slab") {
    const auto green = slab_green(kDielectric, 0.9, 0.05);
    const auto b = modes::mode_fE(green, kNatural);
    for (std::size_t j = 0; j < green.grid.size(); ++j) {
      const double z = green.grid.node(j);
      const double col = b.electric.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff();
      if (z < -0.5 * green.grid.spacing() || z > 1.0 + 0.5 * green.grid.spacing()) {
        CHECK(col == 0.0);
      } else if (z > 0.1 && z < 0.9) {
        CHECK(col > 0.0);
      }
    }
    CHECK(b.magnetic.cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.normalization == doctest::Approx(std::sqrt(1.0 / (2.0 * 0.9))));
  }
  SUBCASE("mode equation and normalization") {
    for (const auto* m : {&kDielectric, &kMagnetic, &kBoth}) {
      const auto green = slab_green(*m, 0.9, 0.02);
      const auto b = modes::mode_fE(green, kNatural);
      CHECK(modes::mode_equation_residual(b, green, kNatural) <= 1e-8);
      CHECK(modes::normalization_residual(b, green.op, kNatural) <= 1e-12);
    }
  }
}

TEST_CASE("fluctuation-dissipation identity") {
  for (const auto* m : {&kDielectric, &kMagnetic, &kBoth}) {
    const auto green = slab_green(*m, 0.9, 0.02);
    const auto b = modes::mode_fE(green, kNatural);
    const auto r = modes::fdt_identity_check(b, green, kNatural);
    CHECK(r.relative() <= 1e-6);
    if (!m->is_magnetic()) CHECK(r.magnetic.cwiseAbs().maxCoeff() == 0.0);
    if (!m->is_electric()) CHECK(r.electric.cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.exterior - modes::exterior_term(green)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("noise kernel") {
  SUBCASE("vacuum") {
    const LayerStack vacuum = LayerStack::homogeneous(MaterialModel());
    const auto k = modes::noise_kernel(vacuum, 1.0, Grid1D::covering(vacuum, 0.1, 1.0), kNatural);
    CHECK(k.electric.cwiseAbs().maxCoeff() == 0.0);
    CHECK(k.magnetic.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hand value inside a uniform absorber") {
    // eps_I(1) = 10 for the (1, 1, 0.1) pole: 4 pi * 10 / 0.1 = 400 pi.
    const LayerStack uniform = LayerStack::homogeneous(kDielectric);
    const auto k = modes::noise_kernel(uniform, 1.0, Grid1D(-1.0, 0.1, 21), kNatural);
    CHECK(k.electric(10, 10) == doctest::Approx(400.0 * pi).epsilon(1e-12));
    CHECK(k.electric(10, 11) == 0.0);
  }
  SUBCASE("positive semidefinite as a quadratic form") {
    const LayerStack stack = LayerStack::slab(kBoth, 1.0);
    const auto k = modes::noise_kernel(stack, 1.1, Grid1D::covering(stack, 0.05, 0.5), kNatural);
    CHECK((k.electric - k.electric.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((k.magnetic - k.magnetic.transpose()).cwiseAbs().maxCoeff() <=
          1e-14 * k.magnetic.cwiseAbs().maxCoeff());
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXcd x(k.electric.rows());
      for (auto& v : x) v = cdouble(normal(rng), normal(rng));
      const double scale = x.squaredNorm();
      CHECK((x.adjoint() * k.electric * x)(0).real() >= -1e-12 * scale * k.electric.maxCoeff());
      CHECK((x.adjoint() * k.magnetic * x)(0).real() >= -1e-12 * scale * k.magnetic.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("vacuum spectrum") {
  const auto green = slab_green(kDielectric, 0.9, 0.02);
  const auto b = modes::mode_fE(green, kNatural);
  const auto fdt = modes::fdt_identity_check(b, green, kNatural);
  const std::size_t node = green.grid.nearest(0.5);
  const auto i = static_cast<Eigen::Index>(node);
  const double spectrum = modes::vacuum_spectrum(green, node, kNatural);
  CHECK(spectrum == doctest::Approx(0.81 / pi * fdt.lhs()(i, i).real()).epsilon(1e-6));
  const UnitsSystem heavy = UnitsSystem::make(1.0, 1.0, 3.0);
  CHECK(modes::vacuum_spectrum(green, node, heavy) == doctest::Approx(3.0 * spectrum));

  // In one dimension the local spectrum in a homogeneous absorber scales as
  // Re(1/n): strong absorption at the resonance suppresses it, and it rises
  // above the free-space value near the frequency where Re eps crosses zero.
  const LayerStack slab = LayerStack::slab(kDielectric, 4.0);
  const LayerStack vacuum = LayerStack::homogeneous(MaterialModel());
  const Grid1D g = Grid1D::covering(slab, 0.01, 1.0);
  const std::size_t centre = g.nearest(2.0);
  const auto ratio = [&](double w) {
    return modes::vacuum_spectrum(solve_green(slab, w, g, kNatural), centre, kNatural) /
           modes::vacuum_spectrum(solve_green(vacuum, w, g, kNatural), centre, kNatural);
  };
  const auto continuum_ratio = [&](double w) {
    return reference::ContinuumGreen(slab, w, kNatural)(2.0, 2.0).imag() * 2.0 * w;
  };
  CHECK(ratio(1.0) == doctest::Approx(continuum_ratio(1.0)).epsilon(1e-3));
  CHECK(ratio(1.0) < 0.5);
  const double longitudinal = std::sqrt(2.0);
  CHECK(ratio(longitudinal + 0.1) > 1.5);
  CHECK(ratio(longitudinal + 0.1) == doctest::Approx(continuum_ratio(longitudinal + 0.1)).epsilon(1e-3));
}

TEST_CASE("charge conservation of the source kernels") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    std::vector<Layer> layers{Layer{}};
    for (int l = 0; l < 4; ++l) {
      layers.push_back(Layer{0.2 + u(rng), MaterialModel({{0.2 + 2.0 * u(rng), 0.5 + u(rng),
                                                           0.05 + 0.3 * u(rng)}}, {})});
    }
    layers.push_back(Layer{});
    const LayerStack stack(std::move(layers));
    const auto k = modes::source_kernels(stack, 0.3 + u(rng), Grid1D::covering(stack, 0.02, 0.5),
                                         kNatural);
    CHECK(modes::charge_conservation_check(k) <= 1e-12);
  }
  const LayerStack vacuum = LayerStack::homogeneous(MaterialModel());
  CHECK(modes::charge_conservation_check(
            modes::source_kernels(vacuum, 1.0, Grid1D::covering(vacuum, 0.1, 1.0), kNatural)) == 0.0);
}

TEST_CASE("energy quadratic form diagnostics") {
  const auto grid = pvquad::FrequencyGrid::mapped_square(16.0, 200);
  const auto r = modes::magnetic_quadratic_form(kMagnetic, grid, kNatural);
  CHECK(std::isfinite(r.min_eigenvalue));
  CHECK(r.schur_complement > 0.0);
  CHECK(r.schur_complement < 1.0);
}
