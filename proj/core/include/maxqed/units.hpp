#pragma once

#include <string_view>

namespace maxqed {

/// Physical constants used by every module. mu0 is derived from eps0 and c
/// so that mu0 * eps0 * c^2 == 1 holds for the stored values.
struct UnitsSystem {
  double c = 1.0;
  double eps0 = 1.0;
  double mu0 = 1.0;
  double hbar = 1.0;

  double kappa0() const { return 1.0 / mu0; }

  /// c = eps0 = mu0 = hbar = 1.
  static UnitsSystem natural();
  /// CODATA 2018 values; mu0 recomputed from c and eps0.
  static UnitsSystem si();
  /// Builds a system from c, eps0 and hbar. Throws std::invalid_argument on
  /// non-positive input.
  static UnitsSystem make(double c, double eps0, double hbar);
  /// "natural" or "si"; anything else throws std::invalid_argument.
  static UnitsSystem from_name(std::string_view name);

  /// |mu0 eps0 c^2 - 1|, zero up to a few ulps for systems built by make().
  double closure_error() const;
};

std::string_view units_name(const UnitsSystem& u);

}  // namespace maxqed
