#include <doctest.h>

#include <cmath>

#include "maxqed/errors.hpp"
#include "maxqed/green1d.hpp"
#include "maxqed/reference.hpp"

using namespace maxqed;

namespace {

const UnitsSystem kNatural = UnitsSystem::natural();
const MaterialModel kLossy({{1.0, 1.0, 0.1}}, {});

double max_error_vs_vacuum(double h, double omega) {
  const LayerStack vacuum = LayerStack::homogeneous(MaterialModel());
  const Grid1D g = Grid1D::covering(vacuum, h, 4.0);
  const auto sol = solve_green(vacuum, omega, g, kNatural);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const cdouble exact = homogeneous_green(1.0, 1.0, omega, g.node(i), g.node(j), kNatural);
      err = std::max(err, std::abs(sol.kernel(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)) - exact));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("stack and grid validation") {
  CHECK_THROWS_AS(LayerStack({Layer{}}), ValidationError);
  CHECK_THROWS_AS(LayerStack({Layer{}, Layer{-1.0, kLossy}, Layer{}}), ValidationError);
  CHECK_THROWS_AS(LayerStack({Layer{1.0, {}}, Layer{}}), ValidationError);
  const LayerStack slab = LayerStack::slab(kLossy, 2.0);
  CHECK(slab.interfaces().size() == 2);
  CHECK(slab.layer_index(0.0) == 1);
  CHECK(slab.layer_index(2.0) == 2);
  const Grid1D g = Grid1D::covering(slab, 0.1, 1.0);
  CHECK(g.interfaces_on_nodes(slab));
  CHECK_FALSE(Grid1D(-1.05, 0.1, 40).interfaces_on_nodes(slab));
  // Ends inside the layered region.
  CHECK_THROWS_AS(solve_green(slab, 1.0, Grid1D(0.5, 0.1, 30), kNatural), GridMismatch);
}

TEST_CASE("homogeneous closed form") {
  CHECK(homogeneous_green(1.0, 1.0, 1.0, 0.3, 0.3, kNatural) == cdouble(0.0, 0.5));
  // |g| strictly decreasing with separation in an absorbing medium.
  double previous = std::abs(homogeneous_green({1.0, 1.0}, 1.0, 1.0, 0.0, 0.0, kNatural));
  for (double z = 0.1; z < 10.0; z += 0.1) {
    const double v = std::abs(homogeneous_green({1.0, 1.0}, 1.0, 1.0, z, 0.0, kNatural));
    CHECK(v < previous);
    previous = v;
  }
  CHECK(wavenumber({1.0, 1.0}, 1.0, 1.0, kNatural).imag() > 0.0);
  CHECK_THROWS_AS(wavenumber(0.0, 1.0, 1.0, kNatural), BranchAmbiguity);
}

TEST_CASE("closed form satisfies the central-difference operator to O(h^2)") {
  // Interior residual of -g'' - k^2 g away from the source, scaled by |k^2 g|.
  const double omega = 1.3;
  std::vector<double> residual;
  for (double h : {0.04, 0.02}) {
    double worst = 0.0;
    for (double z = 0.5; z < 3.0; z += 0.1) {
      const auto g = [&](double x) { return homogeneous_green(1.0, 1.0, omega, x, 0.0, kNatural); };
      const cdouble r = -(g(z + h) - 2.0 * g(z) + g(z - h)) / (h * h) - omega * omega * g(z);
      worst = std::max(worst, std::abs(r) / std::abs(omega * omega * g(z)));
    }
    residual.push_back(worst);
  }
  CHECK(std::log2(residual[0] / residual[1]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("vacuum solver converges at second order") {
  const double e1 = max_error_vs_vacuum(0.1, 1.0);
  const double e2 = max_error_vs_vacuum(0.05, 1.0);
  const double e3 = max_error_vs_vacuum(0.025, 1.0);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  CHECK(p1 >= 1.8);
  CHECK(p1 <= 2.2);
  CHECK(p2 >= 1.8);
  CHECK(p2 <= 2.2);
}

TEST_CASE("reciprocity, residual and passivity of a layered stack") {
  const MaterialModel mag({{0.5, 2.0, 0.2}}, {{0.5, 2.0, 0.2}});
  const LayerStack stack({Layer{}, Layer{1.0, kLossy}, Layer{0.6, mag}, Layer{}});
  const Grid1D g = Grid1D::covering(stack, 0.02, 1.0);
  for (double w : {0.3, 1.0, 2.2}) {
    const auto sol = solve_green(stack, w, g, kNatural);
    CHECK(sol.reciprocity_error <= 1e-10);
    CHECK(sol.residual_norm <= 1e-8);
    for (Eigen::Index i = 0; i < sol.kernel.rows(); ++i) CHECK(sol.kernel(i, i).imag() > 0.0);
  }
}

TEST_CASE("half-space reflection") {
  const LayerStack half({Layer{}, Layer{std::numeric_limits<double>::infinity(), kLossy}});
  const double omega = 0.8;
  const cdouble eps = kLossy.epsilon(omega);
  const cdouble k2 = wavenumber(eps, 1.0, omega, kNatural);
  const cdouble continuum = reference::interface_reflection(1.0, omega, 1.0, k2);
  std::vector<double> gaps;
  for (double h : {0.02, 0.01}) {
    const auto left = static_cast<std::size_t>(std::llround(3.0 / h));
    const Grid1D g(-static_cast<double>(left) * h, h, 2 * left + 1);
    const auto sol = solve_green(half, omega, g, kNatural);
    const std::size_t interface = g.nearest(0.0);
    const cdouble r = extract_reflection(sol, interface - left / 2, interface);
    const cdouble discrete = reference::discrete_interface_reflection(1.0, 1.0, eps, 1.0, omega, h);
    CHECK(std::abs(r - discrete) <= 1e-8);
    gaps.push_back(std::abs(r - continuum));
  }
  // The discrete reflection approaches the continuum value as h shrinks.
  CHECK(gaps[1] < gaps[0]);
}

TEST_CASE("solver agrees with the continuum transfer-matrix Green function") {
  const LayerStack slab = LayerStack::slab(kLossy, 1.0);
  const reference::ContinuumGreen exact(slab, 0.9, kNatural);
  std::vector<double> errors;
  for (double h : {0.02, 0.01}) {
    const Grid1D g = Grid1D::covering(slab, h, 1.0);
    const auto sol = solve_green(slab, 0.9, g, kNatural);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 5) {
      for (std::size_t j = 0; j < g.size(); j += 5) {
        err = std::max(err, std::abs(sol.kernel(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(j)) -
                                     exact(g.node(i), g.node(j))));
      }
    }
    errors.push_back(err);
  }
  CHECK(std::log2(errors[0] / errors[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(exact.transmittance() + exact.reflectance() < 1.0);
}

TEST_CASE("fields from currents") {
  const LayerStack slab = LayerStack::slab(kLossy, 1.0);
  const Grid1D g = Grid1D::covering(slab, 0.02, 1.0);
  const double omega = 0.9;
  const auto sol = solve_green(slab, omega, g, kNatural);
  const auto n = static_cast<Eigen::Index>(g.size());

  CHECK(field_from_current(sol, ComplexVector::Zero(n), kNatural).cwiseAbs().maxCoeff() == 0.0);

  const std::size_t z0 = g.nearest(-0.5);
  ComplexVector point = ComplexVector::Zero(n);
  point(static_cast<Eigen::Index>(z0)) = 1.0 / g.spacing();
  const ComplexVector e = field_from_current(sol, point, kNatural);
  for (Eigen::Index i = 0; i < n; ++i) {
    const cdouble expected = cdouble(0.0, omega) * sol.kernel(i, static_cast<Eigen::Index>(z0));
    CHECK(std::abs(e(i) - expected) <= 1e-13 * std::abs(expected) + 1e-300);
  }

  // Opposite currents at mirror positions about the slab centre.
  const std::size_t mid = g.nearest(0.5);
  ComplexVector pair = ComplexVector::Zero(n);
  pair(static_cast<Eigen::Index>(mid - 40)) = 1.0;
  pair(static_cast<Eigen::Index>(mid + 40)) = -1.0;
  const ComplexVector anti = field_from_current(sol, pair, kNatural);
  const double scale = anti.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k <= mid; ++k) {
    CHECK(std::abs(anti(static_cast<Eigen::Index>(mid - k)) +
                   anti(static_cast<Eigen::Index>(mid + k))) <= 1e-10 * scale);
  }
  CHECK_THROWS_AS(field_from_current(sol, ComplexVector::Zero(n - 1), kNatural), GridMismatch);
}

TEST_CASE("magnetic field from electric field") {
  const double omega = 1.5, k = 2.0;
  std::vector<double> errors;
  for (double h : {0.02, 0.01}) {
    const auto n = static_cast<Eigen::Index>(std::llround(4.0 / h)) + 1;
    ComplexVector e(n), exact(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = static_cast<double>(i) * h;
      e(i) = std::exp(cdouble(0.0, k * z));
      exact(i) = (k / omega) * e(i);
    }
    errors.push_back((magnetic_from_electric(e, omega, h) - exact).cwiseAbs().maxCoeff());
  }
  CHECK(std::log2(errors[0] / errors[1]) == doctest::Approx(2.0).epsilon(0.1));

  const ComplexVector constant = ComplexVector::Constant(50, cdouble(2.0, -1.0));
  CHECK(magnetic_from_electric(constant, 1.0, 0.1).cwiseAbs().maxCoeff() <= 1e-14);

  ComplexVector e = ComplexVector::Random(40);
  const cdouble s(2.0, 3.0);
  const ComplexVector lhs = magnetic_from_electric(s * e, 0.7, 0.05);
  const ComplexVector rhs = s * magnetic_from_electric(e, 0.7, 0.05);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());
}
