#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maxqed/errors.hpp"
#include "maxqed/materials.hpp"
#include "maxqed/pvquad.hpp"

using namespace maxqed;
using namespace maxqed::pvquad;
using std::numbers::pi;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const auto rule = gauss_legendre(5);
  double sum = 0.0;
  for (std::size_t k = 0; k < 5; ++k) sum += rule.weights[k] * std::pow(rule.nodes[k], 8);
  CHECK(sum == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("frequency grid invariants") {
  for (const auto& grid : {FrequencyGrid::log_spaced(1e-3, 100.0, 60),
                           FrequencyGrid::log_spaced_relative(1e-3, 50.0, 0.05),
                           FrequencyGrid::composite({0.0, 0.5, 1.0, 4.0}, 4),
                           FrequencyGrid::mapped_square(8.0, 200)}) {
    const auto w = grid.nodes();
    const auto dw = grid.weights();
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      CHECK(w[k] > 0.0);
      CHECK(dw[k] > 0.0);
      if (k > 0) CHECK(w[k] > w[k - 1]);
      total += dw[k];
    }
    CHECK(std::abs(total - (grid.upper() - grid.lower())) <= 1e-12 * grid.upper());
  }
}

TEST_CASE("principal value integrals") {
  const auto grid = FrequencyGrid::composite({0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0});
  SUBCASE("odd symmetry") {
    CHECK(std::abs(pv_integral([](double) { return 1.0; }, 1.0, grid)) < 1e-14);
  }
  SUBCASE("f = w on [0, 2] about 1") {
    CHECK(pv_integral([](double w) { return w; }, 1.0, grid) == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("linearity") {
    const auto f = [](double w) { return std::sin(w); };
    const auto g = [](double w) { return std::exp(-w); };
    const double lhs = pv_integral([&](double w) { return 2.0 * f(w) - 3.0 * g(w); }, 0.8, grid);
    const double rhs = 2.0 * pv_integral(f, 0.8, grid) - 3.0 * pv_integral(g, 0.8, grid);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  }
  SUBCASE("reflection about the pole flips the sign") {
    // f(w0 + u) -> f(w0 - u) on a symmetric interval negates the integral.
    const auto f = [](double w) { return std::exp(w) + w * w; };
    const double a = pv_integral(f, 1.0, grid);
    const double b = pv_integral([&](double w) { return f(2.0 - w); }, 1.0, grid);
    CHECK(a == doctest::Approx(-b).epsilon(1e-12));
  }
  SUBCASE("pole at an endpoint") {
    CHECK_THROWS_AS(pv_integral([](double w) { return w; }, 0.1, grid), PoleOnBoundary);
  }
  SUBCASE("Lorentz oracle") {
    const MaterialModel m({{1.0, 1.0, 0.1}}, {});
    const auto fine = kk_grid(m);
    const double wp = 0.7;
    const double pv = pv_integral(
        [&](double w) { return w * m.epsilon(w).imag() / (w + wp); }, wp, fine);
    // Truncated at the grid top: the 1/w^3 tail beyond it is below 1e-6.
    CHECK(pv == doctest::Approx(pi / 2.0 * (m.epsilon(wp).real() - 1.0)).epsilon(1e-3));
  }
}

TEST_CASE("Sokhotski split") {
  const auto s = sokhotski_split(1.0, 1.0);
  CHECK(s.delta_minus_active);
  CHECK_FALSE(s.delta_plus_active);
  CHECK(s.active_delta_weight() == cdouble(0.0, pi / 2.0));
  const auto n = sokhotski_split(1.0, -1.0);
  CHECK(n.delta_plus_active);
  CHECK_FALSE(n.delta_minus_active);
  CHECK(n.active_delta_weight().imag() < 0.0);
  CHECK(sokhotski_split(2.0, 0.5).pv_kernel == doctest::Approx(1.0 / 3.75));
  CHECK_THROWS_AS(sokhotski_split(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("split integral reproduces the Lorentz permittivity") {
  // (2 / pi) int w Im eps / (w^2 - (w' + i0)^2) dw = eps(w') - 1.
  const MaterialModel m({{1.0, 1.0, 0.1}}, {});
  const auto grid = kk_grid(m);
  for (double wp : {0.4, 1.0, 1.6}) {
    const cdouble v = (2.0 / pi) *
        integrate_split([&](double w) { return w * m.epsilon(w).imag(); }, wp, grid);
    const cdouble exact = m.epsilon(wp) - 1.0;
    CHECK(std::abs(v - exact) <= 2e-3 * std::abs(exact));
  }
}

TEST_CASE("split agrees with the eta -> 0 limit") {
  // Smooth test function; finite-eta integrals by brute-force quadrature are
  // Richardson-extrapolated to eta = 0.
  const auto f = [](double w) { return w * std::exp(-w * w / 4.0); };
  const double wp = 1.2;
  const auto grid = FrequencyGrid::log_spaced_relative(1e-4, 12.0, 0.01, 4);
  const cdouble split = integrate_split(f, wp, grid);
  const auto direct = [&](double eta) {
    // Panels grade geometrically toward the pole from both sides so that the
    // width-eta Lorentzian and the 1/(w - w') shoulders are both resolved.
    std::vector<double> b{0.0};
    std::vector<double> offsets;
    for (double d = 1e-3 * eta; d < 1.0; d *= 1.15) offsets.push_back(d);
    for (int k = 1; k < 40; ++k) b.push_back((wp - 1.0) * k / 40.0);
    for (auto it = offsets.rbegin(); it != offsets.rend(); ++it) b.push_back(wp - *it);
    for (double d : offsets) b.push_back(wp + d);
    for (int k = 0; k <= 200; ++k) b.push_back(wp + 1.0 + (12.0 - wp - 1.0) * k / 200.0);
    const auto fine = FrequencyGrid::composite(std::move(b), 6);
    cdouble sum = 0.0;
    for (std::size_t k = 0; k < fine.size(); ++k) {
      const double w = fine.nodes()[k];
      sum += fine.weights()[k] * f(w) / (w * w - std::pow(cdouble(wp, eta), 2));
    }
    return sum;
  };
  const cdouble i2 = direct(1e-2), i3 = direct(1e-3), i4 = direct(1e-4);
  // Error is linear in eta to leading order.
  const cdouble extrapolated = i4 + (i4 - i3) / 9.0;
  CHECK(std::abs(split - extrapolated) <= 1e-6 * std::abs(split));
  CHECK(std::abs(i2 - split) > std::abs(i4 - split));
}

TEST_CASE("pole-product identities") {
  CHECK(pole_identity_A(1.3, 0.7, 2.1, 1e-3).max() <= 1e-12);
  CHECK(pole_identity_A(1.0, 1.0, 0.4, 1e-2).max() <= 1e-12);
  CHECK(pole_identity_B(1.3, 0.7, 2.1, 1e-3).max() <= 1e-12);
  const auto sums = pole_identity_B(2.0, 2.0, 1.0, 1e-3, IdentitySubset::SumDenominatorsOnly);
  CHECK(sums.max() <= 1e-12);
  CHECK_FALSE(sums.evaluated[0]);
  CHECK_FALSE(sums.evaluated[3]);
  CHECK_THROWS_AS(pole_identity_B(2.0, 2.0, 1.0, 1e-3), DegeneratePair);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> draw(0.0, 10.0);
  for (double eta : {1e-1, 1e-4}) {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double a = draw(rng), b = draw(rng), c = draw(rng);
      worst = std::max({worst, pole_identity_A(a, b, c, eta).max(),
                        pole_identity_B(a, b, c, eta).max()});
    }
    CHECK(worst <= 1e-10);
  }
}
