#pragma once

// Principal-value quadrature and the pole prescription used to pass between
// the retarded reservoir response and principal values plus delta terms.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace maxqed::pvquad {

using cdouble = std::complex<double>;

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n). n >= 1.
GaussRule gauss_legendre(std::size_t n);

/// Quadrature grid over a frequency interval.
///
/// Composite grids are a sequence of panels [breaks[p], breaks[p+1]], each
/// carrying `points_per_panel` Gauss-Legendre nodes; nodes are stored panel
/// by panel. Mapped grids carry a single Gauss-Legendre rule in u on [0, 1]
/// pulled back through omega = omega_cut * u^2 and have no panel structure.
class FrequencyGrid {
 public:
  enum class Kind { Composite, Mapped };

  /// Composite rule over the given strictly increasing breakpoints.
  static FrequencyGrid composite(std::vector<double> breaks,
                                 std::size_t points_per_panel = 3);
  /// One panel [0, omega_first] followed by `log_panels` logarithmically
  /// spaced panels up to omega_max.
  static FrequencyGrid log_spaced(double omega_first, double omega_max,
                                  std::size_t log_panels,
                                  std::size_t points_per_panel = 3);
  /// Like log_spaced but picks the panel count so that the panel width
  /// relative to omega never exceeds `max_relative_width`.
  static FrequencyGrid log_spaced_relative(double omega_first, double omega_max,
                                           double max_relative_width,
                                           std::size_t points_per_panel = 3);
  /// n-point Gauss-Legendre rule in u mapped by omega = omega_cut * u^2.
  static FrequencyGrid mapped_square(double omega_cut, std::size_t n);

  Kind kind() const { return kind_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> breaks() const { return breaks_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t points_per_panel() const { return points_per_panel_; }
  std::size_t panel_count() const { return breaks_.size() - 1; }
  double lower() const { return breaks_.front(); }
  double upper() const { return breaks_.back(); }

  /// Index of the panel containing omega (clamped to the grid).
  std::size_t panel_of(double omega) const;
  double panel_width(std::size_t p) const { return breaks_[p + 1] - breaks_[p]; }

  /// Sum over nodes of weight * f(node).
  double integrate(std::span<const double> values) const;

 private:
  Kind kind_ = Kind::Composite;
  std::size_t points_per_panel_ = 0;
  std::vector<double> breaks_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Tabulated samples on a composite grid, evaluated off-node by the
/// Lagrange polynomial through the nodes of the enclosing panel.
class SampledFunction {
 public:
  SampledFunction(const FrequencyGrid& grid, std::vector<double> values);

  double operator()(double omega) const;
  const FrequencyGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// P int_a^b f(w) / (w - pole) dw over the grid interval [a, b], by
/// subtracting the singularity:
///   int (f(w) - f(pole)) / (w - pole) dw + f(pole) ln|(b - pole)/(a - pole)|.
/// The panel containing the pole is split at the pole. Throws PoleOnBoundary
/// when the pole lies within one end-panel width of either endpoint.
double pv_integral(const std::function<double(double)>& f, double pole,
                   const FrequencyGrid& grid);

/// Decomposition of 1/(w^2 - (w' + i0+)^2), w > 0, into a principal-value
/// kernel and delta terms at w = w' and w = -w':
///   P 1/(w^2 - w'^2) + sgn(w') (i pi / 2w) [delta(w - w') + delta(w + w')].
/// A delta term is active only if its support can be reached with w > 0.
struct PoleSplit {
  /// P 1/(w^2 - w'^2); the symmetric-limit value 0 at |w'| = w.
  double pv_kernel = 0.0;
  /// Coefficient of delta(w - w').
  cdouble delta_minus_weight;
  /// Coefficient of delta(w + w').
  cdouble delta_plus_weight;
  bool delta_minus_active = false;
  bool delta_plus_active = false;

  /// Signed weight of the active delta term (the form used for w > 0):
  /// +i pi/(2w) when w' > 0, -i pi/(2w) when w' < 0.
  cdouble active_delta_weight() const;
};

/// Throws std::invalid_argument unless omega > 0.
PoleSplit sokhotski_split(double omega, double omega_prime);

/// int_a^b f(w) / (w^2 - (w' + i0+)^2) dw with the delta terms of
/// sokhotski_split consumed analytically. w' != 0 must lie strictly inside.
cdouble integrate_split(const std::function<double(double)>& f, double omega_prime,
                        const FrequencyGrid& grid);

/// Residuals of the four product-of-poles identities with i0+ replaced by i eta.
struct IdentityResiduals {
  std::array<double, 4> residual{};
  std::array<bool, 4> evaluated{};
  double max() const;
};

/// Opposite-sign prescriptions (products of a pole with its conjugate).
/// Residual k is |lhs - rhs| / max(1, |lhs|).
IdentityResiduals pole_identity_A(double omega, double omega_p, double omega_pp,
                                  double eta);

/// Which same-sign identities to evaluate. The first and fourth divide by
/// (w - w') without a prescription.
enum class IdentitySubset { All, SumDenominatorsOnly };

/// Same-sign prescriptions. Throws DegeneratePair if |w - w'| < pair_floor and
/// the subset includes the identities that divide by it.
IdentityResiduals pole_identity_B(double omega, double omega_p, double omega_pp,
                                  double eta,
                                  IdentitySubset subset = IdentitySubset::All,
                                  double pair_floor = 1e-9);

}  // namespace maxqed::pvquad
