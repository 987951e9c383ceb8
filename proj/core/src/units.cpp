#include "maxqed/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace maxqed {

UnitsSystem UnitsSystem::natural() { return make(1.0, 1.0, 1.0); }

UnitsSystem UnitsSystem::si() {
  return make(299792458.0, 8.8541878128e-12, 1.054571817e-34);
}

UnitsSystem UnitsSystem::make(double c, double eps0, double hbar) {
  if (!(c > 0.0) || !(eps0 > 0.0) || !(hbar > 0.0)) {
    throw std::invalid_argument("UnitsSystem: c, eps0 and hbar must be positive");
  }
  UnitsSystem u;
  u.c = c;
  u.eps0 = eps0;
  u.mu0 = 1.0 / (eps0 * c * c);
  u.hbar = hbar;
  return u;
}

UnitsSystem UnitsSystem::from_name(std::string_view name) {
  if (name == "natural") return natural();
  if (name == "si") return si();
  throw std::invalid_argument("unknown units system '" + std::string(name) +
                              "' (expected natural|si)");
}

double UnitsSystem::closure_error() const {
  return std::abs(mu0 * eps0 * c * c - 1.0);
}

std::string_view units_name(const UnitsSystem& u) {
  return (u.c == 1.0 && u.eps0 == 1.0 && u.hbar == 1.0) ? "natural" : "si";
}

}  // namespace maxqed
