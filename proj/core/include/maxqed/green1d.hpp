#pragma once

// Scalar Green function of the layered 1D wave operator
//   -d/dz (kappa(z) dg/dz) - (w/c)^2 eps(z) g = delta(z - z')
// for fields polarized along x and varying along z, with outgoing-wave
// conditions in the two outer half-spaces.

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "maxqed/materials.hpp"
#include "maxqed/units.hpp"

namespace maxqed {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// A homogeneous layer. The first and last layers of a stack are half-spaces
/// and carry an infinite thickness.
struct Layer {
  double thickness = std::numeric_limits<double>::infinity();
  MaterialModel material;
};

/// Ordered layers along z. Interface k separates layer k from layer k + 1;
/// the first interface sits at `origin`.
class LayerStack {
 public:
  /// Throws ValidationError unless there are at least two layers, the outer
  /// two are infinite and every inner layer has finite positive thickness.
  explicit LayerStack(std::vector<Layer> layers, double origin = 0.0);

  /// Two identical half-spaces meeting at z = 0.
  static LayerStack homogeneous(const MaterialModel& material);
  /// Vacuum | slab of the given thickness | vacuum, slab starting at z = 0.
  static LayerStack slab(const MaterialModel& material, double thickness);

  std::span<const Layer> layers() const { return layers_; }
  std::span<const double> interfaces() const { return interfaces_; }
  std::size_t layer_count() const { return layers_.size(); }

  /// Layer containing z; a point on an interface belongs to the layer on its right.
  std::size_t layer_index(double z) const;
  const MaterialModel& material_at(double z) const { return layers_[layer_index(z)].material; }

  /// Length-weighted mean of f(material) over [a, b], a < b.
  template <typename F>
  auto average(double a, double b, F&& f) const;

 private:
  std::vector<Layer> layers_;
  std::vector<double> interfaces_;
};

/// Uniform nodes z_i = origin + i h, i = 0 .. size-1.
class Grid1D {
 public:
  Grid1D(double origin, double spacing, std::size_t size);

  /// Grid with `padding` of outer material on both sides of the stack's
  /// interfaces, nodes aligned with the first interface.
  static Grid1D covering(const LayerStack& stack, double spacing, double padding);

  double origin() const { return origin_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return size_; }
  double node(std::size_t i) const { return origin_ + static_cast<double>(i) * spacing_; }
  /// Nearest node index to z (clamped).
  std::size_t nearest(double z) const;
  /// True when every interface lies within 1e-9 h of a node.
  bool interfaces_on_nodes(const LayerStack& stack) const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double origin_ = 0.0;
  double spacing_ = 1.0;
  std::size_t size_ = 0;
};

/// Wavenumber (w/c) sqrt(eps/kappa) on the branch Im k >= 0 (Re k > 0 when
/// Im k == 0). Throws BranchAmbiguity when |k| < floor * w/c.
cdouble wavenumber(cdouble eps, cdouble kappa, double omega, const UnitsSystem& units,
                   double floor = 1e-12);

/// Closed form in a uniform medium: i exp(i k |z - z'|) / (2 kappa k).
cdouble homogeneous_green(cdouble eps, cdouble kappa, double omega, double z, double z_prime,
                          const UnitsSystem& units);

/// Root of lambda + 1/lambda = 2 - (k h)^2 describing the discrete outgoing
/// wave lambda^m: |lambda| < 1, or Im lambda > 0 on the unit circle.
cdouble outgoing_root(cdouble kh_squared);

/// The tridiagonal complex-symmetric matrix of the discretized wave operator
/// together with the per-node and per-face coefficients it was built from.
///
/// Row i:  (kappa_{i-1/2} (g_i - g_{i-1}) + kappa_{i+1/2} (g_i - g_{i+1})) / h^2
///         - k0^2 eps_i g_i.
/// eps_i is the mean over the dual cell [z_i - h/2, z_i + h/2]; kappa on a face
/// is the harmonic mean over [z_i, z_{i+1}]. Each end row continues into the
/// half-space with the exact discrete outgoing solution g_{-1} = lambda g_0,
/// which adds kappa_b (1 - lambda) / h^2 to the diagonal.
struct DiscreteOperator {
  double omega = 0.0;
  double k0 = 0.0;  ///< omega / c
  double spacing = 0.0;
  std::vector<cdouble> eps_nodes;
  std::vector<cdouble> kappa_faces;  ///< size n - 1
  cdouble kappa_left, kappa_right;   ///< half-space kappa
  cdouble lambda_left, lambda_right; ///< outgoing roots in the half-spaces
  Eigen::SparseMatrix<cdouble> matrix;

  std::size_t size() const { return eps_nodes.size(); }
  /// Diagonal boundary terms kappa_b (1 - lambda_b) / h^2.
  cdouble boundary_left() const;
  cdouble boundary_right() const;
  /// Forward difference (g_{i+1} - g_i) / h, faces x nodes.
  Eigen::SparseMatrix<double> difference() const;
};

/// Throws GridMismatch if the grid's ends lie inside the layered region or
/// the grid has fewer than three nodes.
DiscreteOperator assemble_operator(const LayerStack& stack, double omega, const Grid1D& grid,
                                   const UnitsSystem& units);

/// Largest |k| h over the layers touched by the grid, and the resolution
/// requirement |k| h <= 2 pi / 8 (eight nodes per local wavelength).
double max_phase_per_cell(const LayerStack& stack, double omega, const Grid1D& grid,
                          const UnitsSystem& units);
bool resolves_wavelength(const LayerStack& stack, double omega, const Grid1D& grid,
                         const UnitsSystem& units, double nodes_per_wavelength = 8.0);

struct GreenOptions {
  bool require_resolution = true;
  double nodes_per_wavelength = 8.0;
  double residual_tolerance = 1e-8;
};

/// Discrete Green kernel at one frequency. kernel(i, j) ~ g(z_i, z_j).
struct GreenSolution {
  double omega = 0.0;
  Grid1D grid{0.0, 1.0, 0};
  ComplexMatrix kernel;
  DiscreteOperator op;
  /// max |A G h - I|.
  double residual_norm = 0.0;
  /// max |G - G^T| / max |G|.
  double reciprocity_error = 0.0;
  std::string solver = "SparseLU";
};

/// Solves A G = I / h column by column. Throws SingularOperator if the
/// factorization fails, GridMismatch for an inadequate grid (including an
/// unresolved wavelength when options.require_resolution), and
/// std::runtime_error if the residual exceeds options.residual_tolerance.
GreenSolution solve_green(const LayerStack& stack, double omega, const Grid1D& grid,
                          const UnitsSystem& units, const GreenOptions& options = {});

/// E_i = mu0 sum_j i w g_ij j_j h. Throws GridMismatch on a size mismatch.
ComplexVector field_from_current(const GreenSolution& green, const ComplexVector& current,
                                 const UnitsSystem& units);

/// Reflection amplitude at an interface node, read off a kernel column whose
/// source lies in a homogeneous region left of the interface with at least
/// one node of that region on each side. The region's waves are lambda^m and
/// lambda^-m with lambda = g[s-1][s] / g[s][s]; the amplitude is referred to
/// the interface node with unit incident wave there.
cdouble extract_reflection(const GreenSolution& green, std::size_t source,
                           std::size_t interface_node);

/// B = -(i / w) dE/dz by second-order differences (one-sided at the ends).
ComplexVector magnetic_from_electric(const ComplexVector& field, double omega, double spacing);

template <typename F>
auto LayerStack::average(double a, double b, F&& f) const {
  using R = decltype(f(layers_.front().material));
  R sum{};
  double lo = a;
  std::size_t idx = layer_index(a);
  while (lo < b) {
    const double hi = idx < interfaces_.size() ? std::min(b, interfaces_[idx]) : b;
    if (hi > lo) sum += (hi - lo) * f(layers_[idx].material);
    lo = std::max(lo, hi);
    ++idx;
    if (idx >= layers_.size()) break;
  }
  return sum / (b - a);
}

}  // namespace maxqed
