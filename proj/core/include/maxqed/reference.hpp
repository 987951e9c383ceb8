#pragma once

// Closed-form and semi-analytic oracles. Nothing here calls the discrete
// solvers; tests and `maxqed verify` compare solver output against these.

#include <complex>
#include <vector>

#include "maxqed/green1d.hpp"
#include "maxqed/units.hpp"

namespace maxqed::reference {

/// Exact Green function of the continuous layered problem, built from the
/// left- and right-outgoing homogeneous solutions by transfer matrices:
///   g(z, z') = -psi_L(z<) psi_R(z>) / W,  W = kappa (psi_L psi_R' - psi_L' psi_R).
class ContinuumGreen {
 public:
  ContinuumGreen(const LayerStack& stack, double omega, const UnitsSystem& units);

  cdouble operator()(double z, double z_prime) const;
  cdouble left_solution(double z) const { return evaluate(left_, z).value; }
  cdouble right_solution(double z) const { return evaluate(right_, z).value; }

  /// Amplitude of the rightgoing wave in the first half-space when psi_R is
  /// normalized to exp(i k (z - z_last)) in the last one.
  cdouble incident_amplitude() const { return right_.front().forward; }
  /// Amplitude of the leftgoing wave in the first half-space for that psi_R.
  cdouble reflected_amplitude() const { return right_.front().backward; }

  /// Power transmittance for a wave incident from the first half-space.
  double transmittance() const;
  /// Power reflectance for a wave incident from the first half-space.
  double reflectance() const;

 private:
  struct Coefficients {
    cdouble forward, backward;  ///< of exp(+-i k (z - anchor))
  };
  struct Sample {
    cdouble value, flux;  ///< psi and kappa psi'
  };

  double anchor(std::size_t layer) const;
  Sample evaluate(const std::vector<Coefficients>& c, double z) const;
  Sample evaluate_in(const std::vector<Coefficients>& c, std::size_t layer, double z) const;

  LayerStack stack_;
  std::vector<cdouble> k_;
  std::vector<cdouble> kappa_;
  std::vector<Coefficients> left_;
  std::vector<Coefficients> right_;
  cdouble wronskian_;
};

/// Continuum amplitude reflection at a single interface for a wave incident
/// from medium 1: (kappa1 k1 - kappa2 k2) / (kappa1 k1 + kappa2 k2).
cdouble interface_reflection(cdouble kappa1, cdouble k1, cdouble kappa2, cdouble k2);

/// Reflection amplitude of the discretized operator at an interface sitting
/// on a node, for the discrete plane wave lambda1^m incident from medium 1.
/// The interface node carries the mean permittivity (eps1 + eps2) / 2 and the
/// faces on either side carry kappa1 and kappa2.
cdouble discrete_interface_reflection(cdouble eps1, cdouble kappa1, cdouble eps2,
                                      cdouble kappa2, double k0, double spacing);

/// Electromagnetic energy per unit area of E = E0 exp(-(z-z0)^2 / 2w^2)
/// cos(k (z - z0)), B = E / c, in vacuum: eps0 E0^2 (sqrt(pi) w / 2)(1 + exp(-k^2 w^2)).
double gaussian_pulse_energy(double amplitude, double width, double carrier,
                             const UnitsSystem& units);

}  // namespace maxqed::reference
