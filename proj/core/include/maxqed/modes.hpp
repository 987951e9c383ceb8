#pragma once

// Mode kernels of the diagonalized field-reservoir system on the 1D grid,
// and the numerical checks that tie them to the Green function: the
// fluctuation-dissipation identity, the normalization of the reservoir
// coefficients, the noise-current kernel and charge conservation.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "maxqed/green1d.hpp"
#include "maxqed/materials.hpp"
#include "maxqed/units.hpp"

namespace maxqed::modes {

enum class Channel { Electric, Magnetic };

/// Discrete sources of the two channels at one frequency.
///   electric: n x n diagonal, w^2 sqrt(hbar eps0 eps_I,i / pi) / h
///   magnetic: n x (n-1), i w D^T diag(sqrt(-hbar kappa0 kappa_I,f / pi)) / h
/// where D is the forward difference (faces x nodes). Columns are labelled by
/// source position: nodes for the electric channel, faces for the magnetic one.
struct SourceKernels {
  double omega = 0.0;
  double spacing = 0.0;
  Eigen::VectorXd electric_amplitude;  ///< sqrt(hbar eps0 eps_I / pi) per node
  Eigen::VectorXd magnetic_amplitude;  ///< sqrt(-hbar kappa0 kappa_I / pi) per face
  ComplexMatrix electric;
  ComplexMatrix magnetic;
};

/// Uses the node permittivities and face kappas of the assembled operator so
/// that sources and Green function share one discretization.
SourceKernels source_kernels(const DiscreteOperator& op, const UnitsSystem& units);
SourceKernels source_kernels(const LayerStack& stack, double omega, const Grid1D& grid,
                             const UnitsSystem& units);

/// f_E for both channels: mu0 G s h.
struct ModeBundle {
  double omega = 0.0;
  Grid1D grid{0.0, 1.0, 0};
  ComplexMatrix electric;  ///< n x n
  ComplexMatrix magnetic;  ///< n x (n-1)
  double normalization = 0.0;  ///< sqrt(hbar / 2w)
  SourceKernels sources;
};

ModeBundle mode_fE(const GreenSolution& green, const UnitsSystem& units);

/// max |A f_E - mu0 s| / max |mu0 s| over both channels: the mode equation
/// with the same operator the Green function inverts.
double mode_equation_residual(const ModeBundle& bundle, const GreenSolution& green,
                              const UnitsSystem& units);

/// Terms of the discrete identity  Im G = -h G (Im A) G^H, split by origin.
struct FdtResult {
  ComplexMatrix electric;  ///< (w/c)^2 sum_k eps_I g g* h
  ComplexMatrix magnetic;  ///< sum_f (-kappa_I) dg dg* h
  ComplexMatrix exterior;  ///< radiation into the half-spaces
  ComplexMatrix residual;  ///< electric + magnetic + exterior - Im G
  double max_residual = 0.0;
  double scale = 0.0;  ///< max |Im g|

  double relative() const { return scale > 0.0 ? max_residual / scale : max_residual; }
  ComplexMatrix lhs() const { return electric + magnetic + exterior; }
};

/// Rebuilds the absorption-weighted |G|^2 sums from the mode kernels (so the
/// mode normalization is exercised) and compares against Im G. The exterior
/// term -h Im(d_b) G[:, b] G[:, b]^H accounts for the outgoing half-space
/// rows d_b; it is the vacuum limit of absorption in the half-spaces.
FdtResult fdt_identity_check(const ModeBundle& bundle, const GreenSolution& green,
                             const UnitsSystem& units);

/// Exterior term alone, computed from the boundary rows.
ComplexMatrix exterior_term(const GreenSolution& green);

/// Discrete normalization of the reservoir coefficients. With
/// h_X = sqrt(hbar/2w) delta_ij / h for the electric channel and h_Y the same
/// for the magnetic one, checks
///   sum_k h_X[i,k]* h_X[j,k] h + h_Y[i,k]* h_Y[j,k] h = (hbar / 2w) delta_ij / h
/// with no cross-channel overlap, and that the sources equal
/// w^2 alpha h_X and i w D^T (beta h_Y) for the couplings of the node and face
/// responses. Returns the largest mismatch relative to its scale.
double normalization_residual(const ModeBundle& bundle, const DiscreteOperator& op,
                              const UnitsSystem& units);

/// Commutator kernel of the noise current at one frequency, per unit
/// frequency delta:
///   electric = 4 pi hbar w^2 eps0 diag(eps_I) / h
///   magnetic = 4 pi hbar kappa0 D^T diag(-kappa_I) D / h
struct NoiseKernel {
  double omega = 0.0;
  Eigen::MatrixXd electric;
  Eigen::MatrixXd magnetic;
};

NoiseKernel noise_kernel(const DiscreteOperator& op, const UnitsSystem& units);
NoiseKernel noise_kernel(const LayerStack& stack, double omega, const Grid1D& grid,
                         const UnitsSystem& units);

/// (hbar mu0 w^2 / pi) Im g(z_i, z_i).
double vacuum_spectrum(const GreenSolution& green, std::size_t node, const UnitsSystem& units);

/// Longitudinal charge-current check for the electric channel:
///   sigma = -2 pi Div(a C),  j = -2 pi i w a C,  residual = -i w sigma + Div j
/// with a the electric amplitudes, Div the central difference and C = I.
/// Returns max |residual| / max |Div j|.
double charge_conservation_check(const SourceKernels& kernels);

/// Quadratic-form diagnostics of the energy at one point of a magnetic medium
/// with a discretized reservoir: the smallest eigenvalue of
/// [[kappa0, -beta^T], [-beta, diag(w_n^2)]] and its Schur complement
/// kappa0 - sum beta_n^2 / w_n^2.
struct QuadraticFormReport {
  double min_eigenvalue = 0.0;
  double schur_complement = 0.0;
};

QuadraticFormReport magnetic_quadratic_form(const MaterialModel& material,
                                            const pvquad::FrequencyGrid& reservoir,
                                            const UnitsSystem& units);

}  // namespace maxqed::modes
