#pragma once

// The physics checks run by `maxqed verify`, grouped by the property they
// audit. Every group returns one CheckResult per threshold comparison; a
// group never throws, a failing computation becomes a failed result.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "maxqed/cli/config.hpp"
#include "maxqed/tdsim.hpp"

namespace maxqed::cli {

struct CheckResult {
  std::string group;
  std::string name;
  double value = 0.0;
  double low = 0.0;   ///< lower limit (equal to -inf for one-sided checks)
  double high = 0.0;  ///< upper limit
  bool passed = false;
  std::string detail;
  double seconds = 0.0;

  /// value <= limit, and value finite.
  static CheckResult at_most(std::string group, std::string name, double value, double limit,
                             std::string detail = {});
  /// low <= value <= high.
  static CheckResult within(std::string group, std::string name, double value, double low,
                            double high, std::string detail = {});
  static CheckResult failure(std::string group, std::string name, std::string detail);

  std::string limit_text() const;
};

/// A quantity reported alongside the checks without a pass/fail verdict.
struct Diagnostic {
  std::string name;
  double value = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> checks;
  std::vector<Diagnostic> diagnostics;
  double seconds = 0.0;

  std::size_t failures() const;
  void append(CheckReport other);
};

// ---- settings, with the defaults of the shipped configuration ----

struct KKSettings {
  std::vector<std::string> electric_presets{"lorentz_narrow", "lorentz_weak", "lorentz_two_pole"};
  std::vector<std::string> magnetic_presets{"magnetic_lorentz"};
  double relative_min = 0.1;  ///< sweep from relative_min * smallest resonance
  double relative_max = 5.0;  ///< to relative_max * largest resonance
  std::size_t count = 200;
};

struct PoleSettings {
  std::size_t triples = 1000;
  std::vector<double> etas{1e-1, 1e-4};
  double omega_range = 10.0;  ///< frequencies drawn uniformly from (0, range)
  std::uint64_t seed = 20240607;
};

struct GreenSettings {
  double omega = 1.0;
  std::vector<double> spacings{0.1, 0.05, 0.025, 0.0125};
  double padding = 4.0;
  std::string halfspace_material = "lorentz_narrow";
  double reflection_omega = 0.8;
  double reflection_spacing = 0.02;
};

struct FdtSettings {
  std::vector<std::string> materials{"lossy_dielectric", "magnetic_lorentz", "magnetodielectric"};
  double thickness = 1.0;
  double omega = 0.9;
  std::vector<double> spacings{0.04, 0.02, 0.01};
  double padding = 1.0;
};

struct ConservationSettings {
  std::size_t profiles = 20;
  std::size_t nodes = 60;
  std::size_t modes = 16;
  std::uint64_t seed = 7;
};

struct EnergySettings {
  SimulateSpec run;
  double absorption_thickness = 30.0;  ///< slab that holds the whole pulse
};

struct EmergentSettings {
  std::string electric_material = "emergent_dielectric";
  std::string magnetic_material = "emergent_magnetic";
  std::vector<double> frequencies{0.5, 0.8, 1.5};
  std::size_t coarse_modes = 200;
  std::size_t fine_modes = 400;
  tdsim::EmergentOptions options{};
};

struct TransmissionSettings {
  std::string material = "magnetodielectric_absorber";
  double thickness = 2.0;
  double spacing = 0.05;
  double domain_left = -40.0;
  double domain_right = 55.0;
  double pulse_center = -20.0;
  double pulse_width = 2.0;
  double pulse_carrier = 0.8;
  double probe = 5.0;
  double duration = 90.0;
  std::size_t modes = 400;
  std::vector<double> frequencies{0.5, 0.65, 0.8, 0.95, 1.1};
};

struct AdvectionSettings {
  double spacing = 0.05;
  double length = 40.0;
  double pulse_width = 1.0;
  double pulse_carrier = 1.0;
  std::size_t steps = 200;
};

struct VerifySettings {
  KKSettings kk;
  PoleSettings poles;
  GreenSettings green;
  FdtSettings fdt;
  ConservationSettings conservation;
  EnergySettings energy;
  EmergentSettings emergent;
  TransmissionSettings transmission;
  AdvectionSettings advection;

  /// Reads the `verify` section of a config; absent keys keep their defaults.
  static VerifySettings from_json(const Json& j);
};

// ---- check groups ----

CheckReport check_kk(const MaterialLibrary& library, const KKSettings& s, const Tolerances& tol);
CheckReport check_pole_identities(const PoleSettings& s, const Tolerances& tol);
/// Vacuum convergence, half-space reflection against the discrete oracle,
/// and reciprocity, residual and passivity of the configured stack over the sweep.
CheckReport check_green(const MaterialLibrary& library, const LayerStack& stack,
                        const std::vector<double>& sweep, const GridSpec& grid,
                        const GreenSettings& s, const UnitsSystem& units, const Tolerances& tol);
CheckReport check_fdt(const MaterialLibrary& library, const FdtSettings& s,
                      const UnitsSystem& units, const Tolerances& tol);
CheckReport check_conservation(const ConservationSettings& s, const UnitsSystem& units,
                               const Tolerances& tol);
CheckReport check_energy(const MaterialLibrary& library, const EnergySettings& s,
                         const UnitsSystem& units, const Tolerances& tol);
/// Electric and magnetic emergent response at the probe frequencies, at the
/// coarse and fine reservoir sizes. `magnetic` = false skips the mu runs.
CheckReport check_emergent(const MaterialLibrary& library, const EmergentSettings& s,
                           const UnitsSystem& units, const Tolerances& tol,
                           bool magnetic = true);
CheckReport check_transmission(const MaterialLibrary& library, const TransmissionSettings& s,
                               const UnitsSystem& units, const Tolerances& tol);
CheckReport check_advection(const AdvectionSettings& s, const UnitsSystem& units,
                            const Tolerances& tol);
/// Minimum eigenvalue of the discrete energy quadratic form of each magnetic
/// preset; reported, never judged.
CheckReport quadratic_form_diagnostics(const MaterialLibrary& library, const KKSettings& s,
                                       const UnitsSystem& units);

/// Every group above on the configured inputs.
CheckReport run_all_checks(const RunConfig& config);

/// Observed order log(e_k / e_{k+1}) / log(h_k / h_{k+1}) of each successive
/// refinement.
std::vector<double> pairwise_orders(const std::vector<double>& spacing,
                                    const std::vector<double>& error);

}  // namespace maxqed::cli
