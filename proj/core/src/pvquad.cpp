#include "maxqed/pvquad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "maxqed/errors.hpp"

namespace maxqed::pvquad {

namespace {

using std::numbers::pi;

void append_panel(const GaussRule& rule, double a, double b,
                  std::vector<double>& nodes, std::vector<double>& weights) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    nodes.push_back(mid + half * rule.nodes[k]);
    weights.push_back(half * rule.weights[k]);
  }
}

double integrate_smooth(const std::function<double(double)>& g, const GaussRule& rule,
                        double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * g(mid + half * rule.nodes[k]);
  }
  return half * sum;
}

}  // namespace

GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const auto un = static_cast<unsigned>(n);
  for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(pi * (static_cast<double>(k) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double pn = std::legendre(un, x);
      const double pm = n > 1 ? std::legendre(un - 1, x) : 1.0;
      dp = static_cast<double>(n) * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      const double pn = std::legendre(un, x);
      const double pm = n > 1 ? std::legendre(un - 1, x) : 1.0;
      dp = static_cast<double>(n) * (x * pn - pm) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = -x;
    rule.weights[k] = w;
    rule.nodes[n - 1 - k] = x;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

FrequencyGrid FrequencyGrid::composite(std::vector<double> breaks,
                                       std::size_t points_per_panel) {
  if (breaks.size() < 2) {
    throw std::invalid_argument("FrequencyGrid: need at least one panel");
  }
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    if (!(breaks[p + 1] > breaks[p])) {
      throw std::invalid_argument("FrequencyGrid: breakpoints must be strictly increasing");
    }
  }
  if (breaks.front() < 0.0) {
    throw std::invalid_argument("FrequencyGrid: frequencies must be non-negative");
  }
  FrequencyGrid g;
  g.kind_ = Kind::Composite;
  g.points_per_panel_ = points_per_panel;
  const GaussRule rule = gauss_legendre(points_per_panel);
  g.nodes_.reserve((breaks.size() - 1) * points_per_panel);
  g.weights_.reserve((breaks.size() - 1) * points_per_panel);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    append_panel(rule, breaks[p], breaks[p + 1], g.nodes_, g.weights_);
  }
  g.breaks_ = std::move(breaks);
  return g;
}

FrequencyGrid FrequencyGrid::log_spaced(double omega_first, double omega_max,
                                        std::size_t log_panels,
                                        std::size_t points_per_panel) {
  if (!(omega_first > 0.0) || !(omega_max > omega_first) || log_panels == 0) {
    throw std::invalid_argument("FrequencyGrid::log_spaced: need 0 < omega_first < omega_max");
  }
  std::vector<double> breaks;
  breaks.reserve(log_panels + 2);
  breaks.push_back(0.0);
  const double ratio = std::log(omega_max / omega_first) / static_cast<double>(log_panels);
  for (std::size_t p = 0; p <= log_panels; ++p) {
    breaks.push_back(omega_first * std::exp(ratio * static_cast<double>(p)));
  }
  breaks.back() = omega_max;
  return composite(std::move(breaks), points_per_panel);
}

FrequencyGrid FrequencyGrid::log_spaced_relative(double omega_first, double omega_max,
                                                 double max_relative_width,
                                                 std::size_t points_per_panel) {
  if (!(max_relative_width > 0.0)) {
    throw std::invalid_argument("FrequencyGrid: max_relative_width must be positive");
  }
  const double n = std::ceil(std::log(omega_max / omega_first) / std::log1p(max_relative_width));
  return log_spaced(omega_first, omega_max, static_cast<std::size_t>(std::max(1.0, n)),
                    points_per_panel);
}

FrequencyGrid FrequencyGrid::mapped_square(double omega_cut, std::size_t n) {
  if (!(omega_cut > 0.0) || n == 0) {
    throw std::invalid_argument("FrequencyGrid::mapped_square: need omega_cut > 0, n > 0");
  }
  const GaussRule rule = gauss_legendre(n);
  FrequencyGrid g;
  g.kind_ = Kind::Mapped;
  g.points_per_panel_ = n;
  g.breaks_ = {0.0, omega_cut};
  g.nodes_.resize(n);
  g.weights_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = 0.5 * (rule.nodes[k] + 1.0);
    const double wu = 0.5 * rule.weights[k];
    g.nodes_[k] = omega_cut * u * u;
    g.weights_[k] = 2.0 * omega_cut * u * wu;
  }
  return g;
}

std::size_t FrequencyGrid::panel_of(double omega) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), omega);
  if (it == breaks_.begin()) return 0;
  const auto p = static_cast<std::size_t>(std::distance(breaks_.begin(), it)) - 1;
  return std::min(p, panel_count() - 1);
}

double FrequencyGrid::integrate(std::span<const double> values) const {
  if (values.size() != nodes_.size()) {
    throw std::invalid_argument("FrequencyGrid::integrate: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) sum += weights_[k] * values[k];
  return sum;
}

SampledFunction::SampledFunction(const FrequencyGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (grid.kind() != FrequencyGrid::Kind::Composite) {
    throw std::invalid_argument("SampledFunction: needs a composite grid");
  }
  if (values_.size() != grid.size()) {
    throw std::invalid_argument("SampledFunction: one sample per grid node required");
  }
}

double SampledFunction::operator()(double omega) const {
  const std::size_t m = grid_.points_per_panel();
  const std::size_t p = grid_.panel_of(omega);
  const auto x = grid_.nodes().subspan(p * m, m);
  const auto y = std::span<const double>(values_).subspan(p * m, m);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double basis = 1.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l != k) basis *= (omega - x[l]) / (x[k] - x[l]);
    }
    sum += basis * y[k];
  }
  return sum;
}

double pv_integral(const std::function<double(double)>& f, double pole,
                   const FrequencyGrid& grid) {
  if (grid.kind() != FrequencyGrid::Kind::Composite) {
    throw std::invalid_argument("pv_integral: needs a composite grid");
  }
  const double a = grid.lower();
  const double b = grid.upper();
  const double first = grid.panel_width(0);
  const double last = grid.panel_width(grid.panel_count() - 1);
  if (!(pole - a > first) || !(b - pole > last)) {
    throw PoleOnBoundary("pole " + std::to_string(pole) + " within one panel of [" +
                         std::to_string(a) + ", " + std::to_string(b) + "]");
  }

  const double f0 = f(pole);
  const auto subtracted = [&](double w) { return (f(w) - f0) / (w - pole); };
  const GaussRule rule = gauss_legendre(grid.points_per_panel());
  const std::size_t m = grid.points_per_panel();
  const std::size_t split = grid.panel_of(pole);
  const auto nodes = grid.nodes();
  const auto weights = grid.weights();

  double sum = 0.0;
  for (std::size_t p = 0; p < grid.panel_count(); ++p) {
    const double lo = grid.breaks()[p];
    const double hi = grid.breaks()[p + 1];
    if (p == split && pole > lo && pole < hi) {
      // A sliver next to a breakpoint carries a bounded integrand over a
      // negligible length; its Gauss nodes could round onto the pole.
      const double sliver = 1e-10 * (hi - lo);
      if (pole - lo > sliver) sum += integrate_smooth(subtracted, rule, lo, pole);
      if (hi - pole > sliver) sum += integrate_smooth(subtracted, rule, pole, hi);
      continue;
    }
    for (std::size_t k = p * m; k < (p + 1) * m; ++k) {
      sum += weights[k] * subtracted(nodes[k]);
    }
  }
  return sum + f0 * std::log(std::abs((b - pole) / (a - pole)));
}

cdouble PoleSplit::active_delta_weight() const {
  if (delta_minus_active) return delta_minus_weight;
  if (delta_plus_active) return delta_plus_weight;
  return {0.0, 0.0};
}

PoleSplit sokhotski_split(double omega, double omega_prime) {
  if (!(omega > 0.0)) {
    throw std::invalid_argument("sokhotski_split: the reservoir frequency must be positive");
  }
  PoleSplit split;
  const double diff = omega * omega - omega_prime * omega_prime;
  split.pv_kernel = std::abs(omega) == std::abs(omega_prime) ? 0.0 : 1.0 / diff;
  const double sign = omega_prime > 0.0 ? 1.0 : (omega_prime < 0.0 ? -1.0 : 0.0);
  const cdouble weight{0.0, sign * pi / (2.0 * omega)};
  split.delta_minus_weight = weight;
  split.delta_plus_weight = weight;
  split.delta_minus_active = omega_prime > 0.0;
  split.delta_plus_active = omega_prime < 0.0;
  return split;
}

cdouble integrate_split(const std::function<double(double)>& f, double omega_prime,
                        const FrequencyGrid& grid) {
  const double pole = std::abs(omega_prime);
  if (pole == 0.0) throw std::invalid_argument("integrate_split: omega' must be nonzero");
  const double pv = pv_integral([&](double w) { return f(w) / (w + pole); }, pole, grid);
  const PoleSplit split = sokhotski_split(pole, omega_prime);
  return cdouble{pv, 0.0} + split.active_delta_weight() * f(pole);
}

double IdentityResiduals::max() const {
  double m = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (evaluated[k]) m = std::max(m, residual[k]);
  }
  return m;
}

namespace {

double scaled_residual(cdouble lhs, cdouble rhs) {
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

}  // namespace

IdentityResiduals pole_identity_A(double w, double wp, double x, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("pole_identity_A: eta must be positive");
  const cdouble ie{0.0, eta};
  IdentityResiduals r;
  r.evaluated = {true, true, true, true};
  {
    const cdouble p = 1.0 / (x - w + ie), q = 1.0 / (x - wp - ie);
    r.residual[0] = scaled_residual(p * q, (p - q) / (w - wp - 2.0 * ie));
  }
  {
    const cdouble p = 1.0 / (x - w + ie), q = 1.0 / (x + wp - ie);
    r.residual[1] = scaled_residual(p * q, (p - q) / (w + wp - 2.0 * ie));
  }
  {
    const cdouble p = 1.0 / (x + w + ie), q = 1.0 / (x - wp - ie);
    r.residual[2] = scaled_residual(p * q, (q - p) / (w + wp + 2.0 * ie));
  }
  {
    const cdouble p = 1.0 / (x + w + ie), q = 1.0 / (x + wp - ie);
    r.residual[3] = scaled_residual(p * q, (q - p) / (w - wp + 2.0 * ie));
  }
  return r;
}

IdentityResiduals pole_identity_B(double w, double wp, double x, double eta,
                                  IdentitySubset subset, double pair_floor) {
  if (!(eta > 0.0)) throw std::invalid_argument("pole_identity_B: eta must be positive");
  const bool with_difference = subset == IdentitySubset::All;
  if (with_difference && std::abs(w - wp) < pair_floor) {
    throw DegeneratePair("|w - w'| = " + std::to_string(std::abs(w - wp)) +
                         " below floor; the difference identities carry no prescription");
  }
  const cdouble ie{0.0, eta};
  IdentityResiduals r;
  r.evaluated = {with_difference, true, true, with_difference};
  if (with_difference) {
    const cdouble p = 1.0 / (x - w + ie), q = 1.0 / (x - wp + ie);
    r.residual[0] = scaled_residual(p * q, (p - q) / (w - wp));
  }
  {
    const cdouble p = 1.0 / (x - w + ie), q = 1.0 / (x + wp + ie);
    r.residual[1] = scaled_residual(p * q, (p - q) / (w + wp));
  }
  {
    const cdouble p = 1.0 / (x + w + ie), q = 1.0 / (x - wp + ie);
    r.residual[2] = scaled_residual(p * q, (q - p) / (w + wp));
  }
  if (with_difference) {
    const cdouble p = 1.0 / (x + w + ie), q = 1.0 / (x + wp + ie);
    r.residual[3] = scaled_residual(p * q, (q - p) / (w - wp));
  }
  return r;
}

}  // namespace maxqed::pvquad
