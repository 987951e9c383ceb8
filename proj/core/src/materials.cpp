#include "maxqed/materials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "maxqed/errors.hpp"

namespace maxqed {

namespace {

using std::numbers::pi;

cdouble lorentz_sum(const std::vector<LorentzPole>& poles, double omega) {
  const double w = std::abs(omega);
  cdouble sum{1.0, 0.0};
  for (const auto& p : poles) sum += p.response(w);
  return omega < 0.0 ? std::conj(sum) : sum;
}

double checked_sqrt(double radicand, double scale, const char* what) {
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  if (radicand < -tol) {
    throw NegativeRadicand(std::string(what) + " radicand " + std::to_string(radicand));
  }
  return std::sqrt(std::max(radicand, 0.0));
}

}  // namespace

void LorentzPole::validate() const {
  if (!std::isfinite(plasma) || !std::isfinite(resonance) || !std::isfinite(damping)) {
    throw ValidationError("pole parameters must be finite");
  }
  if (!(plasma >= 0.0)) throw ValidationError("plasma strength must be >= 0");
  if (!(resonance > 0.0)) throw ValidationError("resonance must be > 0");
  if (!(damping > 0.0)) {
    throw ValidationError("damping must be > 0 (got " + std::to_string(damping) + ")");
  }
}

cdouble LorentzPole::response(double omega) const {
  return plasma * plasma /
         cdouble(resonance * resonance - omega * omega, -damping * omega);
}

MaterialModel::MaterialModel(std::vector<LorentzPole> electric,
                             std::vector<LorentzPole> magnetic, double mu_floor)
    : electric_(std::move(electric)), magnetic_(std::move(magnetic)), mu_floor_(mu_floor) {
  for (const auto& p : electric_) p.validate();
  for (const auto& p : magnetic_) p.validate();
  if (!(mu_floor_ >= 0.0)) throw ValidationError("mu floor must be >= 0");
}

cdouble MaterialModel::epsilon(double omega) const { return lorentz_sum(electric_, omega); }

cdouble MaterialModel::mu(double omega) const { return lorentz_sum(magnetic_, omega); }

cdouble MaterialModel::kappa(double omega) const {
  if (magnetic_.empty()) return {1.0, 0.0};
  const cdouble m = mu(omega);
  if (std::abs(m) < mu_floor_) {
    throw PoleAtFrequency("|mu(" + std::to_string(omega) + ")| = " +
                          std::to_string(std::abs(m)) + " below floor");
  }
  return 1.0 / m;
}

double MaterialModel::max_resonance() const {
  double m = 0.0;
  for (const auto& p : electric_) m = std::max(m, p.resonance);
  for (const auto& p : magnetic_) m = std::max(m, p.resonance);
  return m;
}

double MaterialModel::min_relative_damping() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : electric_) m = std::min(m, p.damping / p.resonance);
  for (const auto& p : magnetic_) m = std::min(m, p.damping / p.resonance);
  return std::isfinite(m) ? m : 0.0;
}

double coupling_alpha(const MaterialModel& model, double omega, const UnitsSystem& units) {
  if (!(omega > 0.0)) throw std::invalid_argument("coupling_alpha: omega must be > 0");
  if (!model.is_electric()) return 0.0;
  const double loss = model.epsilon(omega).imag();
  return checked_sqrt(2.0 * units.eps0 / pi * omega * loss,
                      2.0 * units.eps0 / pi * omega * std::abs(model.epsilon(omega)),
                      "coupling_alpha");
}

double coupling_beta(const MaterialModel& model, double omega, const UnitsSystem& units) {
  if (!(omega > 0.0)) throw std::invalid_argument("coupling_beta: omega must be > 0");
  if (!model.is_magnetic()) return 0.0;
  const cdouble k = model.kappa(omega);
  return checked_sqrt(-2.0 * units.kappa0() / pi * omega * k.imag(),
                      2.0 * units.kappa0() / pi * omega * std::abs(k), "coupling_beta");
}

pvquad::FrequencyGrid kk_grid(const MaterialModel& model, const KKOptions& options) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& p : model.electric_poles()) lo = std::min(lo, p.resonance);
  for (const auto& p : model.magnetic_poles()) lo = std::min(lo, p.resonance);
  if (!std::isfinite(lo)) lo = 1.0;
  const double hi = std::max(model.max_resonance(), lo);
  double rel = options.max_relative_width;
  if (model.min_relative_damping() > 0.0) {
    rel = std::min(rel, model.min_relative_damping() / options.panels_per_linewidth);
  }
  return pvquad::FrequencyGrid::log_spaced_relative(options.omega_first_factor * lo,
                                                    options.omega_max_factor * hi, rel,
                                                    options.points_per_panel);
}

double kk_reconstruct(const pvquad::SampledFunction& absorptive, double omega_prime,
                      const KKOptions& options) {
  const auto& grid = absorptive.grid();
  if (!(omega_prime > grid.lower()) || !(omega_prime < grid.upper())) {
    throw std::invalid_argument("kk_reconstruct: omega' must lie strictly inside the grid");
  }
  const double width = grid.panel_width(grid.panel_of(omega_prime));
  if (width > options.coarse_limit * omega_prime) {
    throw GridTooCoarse("panel width " + std::to_string(width) + " at w' = " +
                        std::to_string(omega_prime) + " exceeds " +
                        std::to_string(options.coarse_limit) + " w'");
  }

  const double wp2 = omega_prime * omega_prime;
  const double pv = pvquad::pv_integral(
      [&](double w) { return w * absorptive(w) / (w + omega_prime); }, omega_prime, grid);
  double result = 2.0 / pi * pv;

  if (options.tail_correction) {
    const double w_last = grid.nodes().back();
    const double strength = absorptive.values().back() * w_last * w_last * w_last;
    const double w_max = grid.upper();
    // sum_k w'^(2k) / ((2k + 3) w_max^(2k + 3)), converges since w' < w_max
    const double ratio = wp2 / (w_max * w_max);
    double term = 1.0 / (w_max * w_max * w_max);
    double tail = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double add = term / (2.0 * k + 3.0);
      tail += add;
      if (add < 1e-17 * std::abs(tail)) break;
      term *= ratio;
    }
    result += 2.0 / pi * strength * tail;
  }
  return result;
}

pvquad::SampledFunction sample_epsilon_imag(const MaterialModel& model,
                                            const pvquad::FrequencyGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = model.epsilon(grid.nodes()[k]).imag();
  return pvquad::SampledFunction(grid, std::move(v));
}

pvquad::SampledFunction sample_kappa_loss(const MaterialModel& model,
                                          const pvquad::FrequencyGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = -model.kappa(grid.nodes()[k]).imag();
  return pvquad::SampledFunction(grid, std::move(v));
}

}  // namespace maxqed
