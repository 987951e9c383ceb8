#include "maxqed/reference.hpp"

#include <cmath>
#include <numbers>

namespace maxqed::reference {

namespace {

const cdouble kI{0.0, 1.0};

}  // namespace

ContinuumGreen::ContinuumGreen(const LayerStack& stack, double omega, const UnitsSystem& units)
    : stack_(stack) {
  const std::size_t n = stack.layer_count();
  k_.resize(n);
  kappa_.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const auto& m = stack.layers()[l].material;
    kappa_[l] = m.kappa(omega);
    k_[l] = wavenumber(m.epsilon(omega), kappa_[l], omega, units);
  }

  // psi_L decays to the left, psi_R to the right; continuity of psi and
  // kappa psi' carries each across the interfaces.
  left_.resize(n);
  left_[0] = {0.0, 1.0};
  for (std::size_t l = 0; l + 1 < n; ++l) {
    const Sample s = evaluate_in(left_, l, stack.interfaces()[l]);
    const cdouble q = s.flux / (kI * kappa_[l + 1] * k_[l + 1]);
    left_[l + 1] = {0.5 * (s.value + q), 0.5 * (s.value - q)};
  }

  right_.resize(n);
  right_[n - 1] = {1.0, 0.0};
  for (std::size_t l = n - 1; l > 0; --l) {
    const double z = stack.interfaces()[l - 1];
    const Sample s = evaluate_in(right_, l, z);
    const cdouble q = s.flux / (kI * kappa_[l - 1] * k_[l - 1]);
    const cdouble phase = std::exp(kI * k_[l - 1] * (z - anchor(l - 1)));
    right_[l - 1] = {0.5 * (s.value + q) / phase, 0.5 * (s.value - q) * phase};
  }

  const double z0 = stack.interfaces().front();
  const Sample a = evaluate_in(left_, 0, z0);
  const Sample b = evaluate_in(right_, 0, z0);
  wronskian_ = a.value * b.flux - a.flux * b.value;
}

double ContinuumGreen::anchor(std::size_t layer) const {
  return layer == 0 ? stack_.interfaces().front() : stack_.interfaces()[layer - 1];
}

ContinuumGreen::Sample ContinuumGreen::evaluate_in(const std::vector<Coefficients>& c,
                                                   std::size_t layer, double z) const {
  const cdouble arg = kI * k_[layer] * (z - anchor(layer));
  const cdouble up = c[layer].forward * std::exp(arg);
  const cdouble down = c[layer].backward * std::exp(-arg);
  return {up + down, kI * kappa_[layer] * k_[layer] * (up - down)};
}

ContinuumGreen::Sample ContinuumGreen::evaluate(const std::vector<Coefficients>& c,
                                                double z) const {
  return evaluate_in(c, stack_.layer_index(z), z);
}

cdouble ContinuumGreen::operator()(double z, double z_prime) const {
  const double lo = std::min(z, z_prime);
  const double hi = std::max(z, z_prime);
  return -evaluate(left_, lo).value * evaluate(right_, hi).value / wronskian_;
}

double ContinuumGreen::transmittance() const {
  const cdouble a = incident_amplitude();
  const double out = (kappa_.back() * k_.back()).real();
  const double in = (kappa_.front() * k_.front()).real();
  return out / in / std::norm(a);
}

double ContinuumGreen::reflectance() const {
  return std::norm(reflected_amplitude() / incident_amplitude());
}

cdouble interface_reflection(cdouble kappa1, cdouble k1, cdouble kappa2, cdouble k2) {
  return (kappa1 * k1 - kappa2 * k2) / (kappa1 * k1 + kappa2 * k2);
}

cdouble discrete_interface_reflection(cdouble eps1, cdouble kappa1, cdouble eps2,
                                      cdouble kappa2, double k0, double spacing) {
  const double h2 = spacing * spacing;
  const cdouble q1 = k0 * k0 * eps1 / kappa1 * h2;
  const cdouble q2 = k0 * k0 * eps2 / kappa2 * h2;
  const cdouble l1 = outgoing_root(q1);
  const cdouble l2 = outgoing_root(q2);
  const cdouble mass = k0 * k0 * h2 * 0.5 * (eps1 + eps2);
  // Interface row with g = l1^m + r l1^-m on the left and (1 + r) l2^m on the right.
  const cdouble common = kappa2 * (1.0 - l2) - mass;
  return -(kappa1 * (1.0 - 1.0 / l1) + common) / (kappa1 * (1.0 - l1) + common);
}

double gaussian_pulse_energy(double amplitude, double width, double carrier,
                             const UnitsSystem& units) {
  return units.eps0 * amplitude * amplitude * std::sqrt(std::numbers::pi) * width / 2.0 *
         (1.0 + std::exp(-carrier * carrier * width * width));
}

}  // namespace maxqed::reference
