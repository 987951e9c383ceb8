#pragma once

// Causal dielectric and magnetic response built from Lorentz poles, the
// reservoir couplings derived from their absorptive parts, and a numerical
// Kramers-Kronig reconstruction used to audit them.

#include <complex>
#include <vector>

#include "maxqed/pvquad.hpp"
#include "maxqed/units.hpp"

namespace maxqed {

using cdouble = std::complex<double>;

/// One Lorentz resonance: strength^2 / (resonance^2 - w^2 - i damping w).
struct LorentzPole {
  double plasma = 0.0;     ///< oscillator strength w_p, >= 0
  double resonance = 1.0;  ///< transverse resonance w_T, > 0
  double damping = 0.1;    ///< linewidth gamma, > 0

  /// Throws ValidationError unless plasma >= 0, resonance > 0, damping > 0.
  void validate() const;
  /// Susceptibility contribution at w >= 0.
  cdouble response(double omega) const;

  friend bool operator==(const LorentzPole&, const LorentzPole&) = default;
};

/// A passive isotropic medium. Electric poles act on epsilon, magnetic poles
/// on mu; kappa = 1/mu. Immutable once constructed.
class MaterialModel {
 public:
  /// Vacuum.
  MaterialModel() = default;
  /// Validates every pole. mu_floor bounds |mu| away from zero in kappa().
  MaterialModel(std::vector<LorentzPole> electric, std::vector<LorentzPole> magnetic,
                double mu_floor = 1e-12);

  const std::vector<LorentzPole>& electric_poles() const { return electric_; }
  const std::vector<LorentzPole>& magnetic_poles() const { return magnetic_; }
  bool is_vacuum() const { return electric_.empty() && magnetic_.empty(); }
  bool is_electric() const { return !electric_.empty(); }
  bool is_magnetic() const { return !magnetic_.empty(); }

  /// Relative permittivity; epsilon(-w) == conj(epsilon(w)) bitwise.
  cdouble epsilon(double omega) const;
  /// Relative permeability, same parity.
  cdouble mu(double omega) const;
  /// 1/mu. Throws PoleAtFrequency when |mu| < mu_floor.
  cdouble kappa(double omega) const;

  /// Largest resonance over both pole sets (0 for vacuum).
  double max_resonance() const;
  /// Smallest damping/resonance ratio over both pole sets (0 for vacuum).
  double min_relative_damping() const;

  friend bool operator==(const MaterialModel&, const MaterialModel&) = default;

 private:
  std::vector<LorentzPole> electric_;
  std::vector<LorentzPole> magnetic_;
  double mu_floor_ = 1e-12;
};

/// sqrt((2 eps0 / pi) w Im epsilon(w)), w > 0. Throws NegativeRadicand when
/// the radicand is negative beyond rounding, std::invalid_argument if w <= 0.
double coupling_alpha(const MaterialModel& model, double omega, const UnitsSystem& units);
/// sqrt(-(2 kappa0 / pi) w Im kappa(w)), w > 0.
double coupling_beta(const MaterialModel& model, double omega, const UnitsSystem& units);

/// Controls for kk_reconstruct and the default grids built for it.
struct KKOptions {
  /// Upper grid limit as a multiple of the largest resonance.
  double omega_max_factor = 100.0;
  /// Lower log-panel start as a multiple of the smallest resonance.
  double omega_first_factor = 1e-3;
  /// Cap on panel width / w for the default grid.
  double max_relative_width = 0.05;
  /// Panels per damping width: width / w <= (gamma / w_T) / panels_per_linewidth.
  double panels_per_linewidth = 10.0;
  /// GridTooCoarse when the panel holding w' is wider than this times w'.
  double coarse_limit = 0.1;
  std::size_t points_per_panel = 3;
  /// Add the analytic contribution of (w_max, inf) from the 1/w^3 tail.
  bool tail_correction = true;
};

/// Log-spaced composite grid adapted to the model's resonances and widths.
pvquad::FrequencyGrid kk_grid(const MaterialModel& model, const KKOptions& options = {});

/// (2/pi) P int_0^inf w Im(w) / (w^2 - w'^2) dw from samples of an absorptive
/// part (Im epsilon, or -Im kappa) on a composite grid starting at 0.
/// Beyond the grid the samples are continued as C / w^3, matched at the last
/// node. For Im epsilon this approximates Re epsilon - 1; for -Im kappa it
/// approximates 1 - Re kappa.
double kk_reconstruct(const pvquad::SampledFunction& absorptive, double omega_prime,
                      const KKOptions& options = {});

/// Samples Im epsilon(w) on the grid nodes.
pvquad::SampledFunction sample_epsilon_imag(const MaterialModel& model,
                                            const pvquad::FrequencyGrid& grid);
/// Samples -Im kappa(w) on the grid nodes.
pvquad::SampledFunction sample_kappa_loss(const MaterialModel& model,
                                          const pvquad::FrequencyGrid& grid);

}  // namespace maxqed
