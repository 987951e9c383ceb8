#pragma once

// Classical time-domain simulation of the 1D field coupled to a discretized
// oscillator reservoir, between perfectly conducting walls.
//
// Degrees of freedom, with E = -(Pi_A + P) / eps0 and B_f = (A_{f+1} - A_f) / h:
//   nodes i = 0 .. N     vector potential A_i and momentum Pi_A,i (A fixed at
//                        both walls),
//   electric sites       oscillators X_n, Pi_X,n on nodes with alpha != 0,
//   magnetic sites       oscillators Y_n, Pi_Y,n on faces with beta != 0,
// where P_i = sum_n alpha_n,i X_n,i and M_f = sum_n beta_n,f Y_n,f.
//
// Conserved energy (per unit transverse area):
//   H = h sum_i (Pi_A + P)^2 / (2 eps0) + h sum_f (kappa0 B^2 / 2 - M B)
//     + h sum_sites sum_n (Pi^2 + w_n^2 Q^2) / 2.
// Each step is the Strang composition of the exact flows of
//   (Pi_A + P)^2 term,  oscillator kinetic terms,  remaining potential terms,
// which is symplectic and second order in dt.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "maxqed/green1d.hpp"
#include "maxqed/pvquad.hpp"
#include "maxqed/units.hpp"

namespace maxqed::tdsim {

struct ReservoirOptions {
  std::size_t modes = 200;   ///< oscillators per site
  double cut_factor = 8.0;   ///< w_cut = cut_factor * largest resonance
};

/// Reservoir frequencies and the couplings alpha(z, w_n) sqrt(dw_n) per site.
struct ReservoirDiscretization {
  pvquad::FrequencyGrid frequencies = pvquad::FrequencyGrid::mapped_square(1.0, 1);
  std::vector<std::size_t> electric_sites;  ///< node indices
  std::vector<double> electric_coupling;    ///< sites x modes, row-major
  std::vector<std::size_t> magnetic_sites;  ///< face indices
  std::vector<double> magnetic_coupling;    ///< sites x modes, row-major

  std::size_t modes() const { return frequencies.size(); }
  double max_frequency() const;
  /// 2 pi / (largest gap between neighbouring frequencies up to band_top):
  /// the time after which the discrete reservoir visibly rephases.
  double recurrence_horizon(double band_top) const;

  /// Mapped-square frequency grid and dual-cell averaged couplings: the
  /// coupling squared is averaged over [z_i - h/2, z_i + h/2] for nodes and
  /// over [z_i, z_{i+1}] for faces. Sites with zero coupling are dropped.
  static ReservoirDiscretization build(const LayerStack& stack, const Grid1D& grid,
                                       const UnitsSystem& units,
                                       const ReservoirOptions& options = {});
};

struct SimState {
  double time = 0.0;
  std::vector<double> potential;          ///< A, one per node
  std::vector<double> potential_momentum; ///< Pi_A, one per node
  std::vector<double> x, x_momentum;      ///< electric sites x modes
  std::vector<double> y, y_momentum;      ///< magnetic sites x modes
};

/// Point current density j(t) = amplitude ramp(t) sin(w t) / h at one node,
/// with ramp rising as sin^2 over `ramp_time` and 1 afterwards.
struct PointDrive {
  std::size_t node = 0;
  double amplitude = 1.0;
  double omega = 1.0;
  double ramp_time = 0.0;

  double current(double t, double spacing) const;
};

struct EnergyBreakdown {
  double electromagnetic = 0.0;  ///< eps0 E^2 / 2 + kappa0 B^2 / 2
  double reservoir = 0.0;        ///< oscillator energies
  double interaction = 0.0;      ///< -M B
  double total() const { return electromagnetic + reservoir + interaction; }
};

/// Gaussian pulse E = amplitude exp(-(z - center)^2 / (2 width^2)) cos(carrier (z - center)),
/// moving toward +z (B = E / c) or -z.
struct PulseParams {
  double center = 0.0;
  double width = 1.0;
  double amplitude = 1.0;
  double carrier = 0.0;
  bool rightward = true;
  double support_widths = 6.0;  ///< half-extent of the support, in widths
};

class System {
 public:
  System(const Grid1D& grid, ReservoirDiscretization reservoir, const UnitsSystem& units);
  static System from_stack(const LayerStack& stack, const Grid1D& grid,
                           const UnitsSystem& units, const ReservoirOptions& options = {});

  const Grid1D& grid() const { return grid_; }
  const ReservoirDiscretization& reservoir() const { return reservoir_; }
  const UnitsSystem& units() const { return units_; }

  /// min(0.9 h / c, 0.2 / max w_n).
  double max_stable_dt() const;
  /// Throws StabilityViolation when dt is not positive or exceeds max_stable_dt().
  void check_dt(double dt) const;

  SimState zero_state() const;
  /// Gaussian pulse with the reservoir at rest. Throws PulseOverlapsMaterial
  /// if any reservoir site lies within the pulse support.
  SimState init_pulse(const PulseParams& pulse) const;

  /// One Strang step. The drive current is evaluated at mid-step. Throws
  /// StabilityViolation when a field leaves the overflow guard.
  void step(SimState& state, double dt, const PointDrive* drive = nullptr) const;

  std::vector<double> electric_field(const SimState& state) const;
  std::vector<double> magnetic_field(const SimState& state) const;
  double polarization(const SimState& state, std::size_t node) const;
  double magnetization(const SimState& state, std::size_t face) const;
  EnergyBreakdown energy(const SimState& state) const;
  double total_energy(const SimState& state) const { return energy(state).total(); }

  /// Site index of a node or face, if it carries oscillators.
  std::optional<std::size_t> electric_site(std::size_t node) const;
  std::optional<std::size_t> magnetic_site(std::size_t face) const;

 private:
  void kick_field(SimState& s, double tau) const;
  void drift_oscillators(SimState& s, double tau) const;
  void kick_potential(SimState& s, double tau) const;
  void guard(const SimState& s) const;

  Grid1D grid_;
  ReservoirDiscretization reservoir_;
  UnitsSystem units_;
  std::vector<std::ptrdiff_t> node_site_;
  std::vector<std::ptrdiff_t> face_site_;
};

/// Energy sample of a run.
struct EnergySample {
  double time = 0.0;
  EnergyBreakdown energy;
};

/// Advances `steps` steps, recording the energy every `every` steps (and at
/// both ends).
std::vector<EnergySample> run(const System& system, SimState& state, double dt,
                              std::size_t steps, std::size_t every = 1,
                              const PointDrive* drive = nullptr);

/// Probe time series of a driven run.
struct RunRecord {
  double dt = 0.0;
  std::vector<double> time;
  std::vector<double> field;          ///< E at the probe node
  std::vector<double> polarization;   ///< P at the probe node
  std::vector<double> induction;      ///< B at the probe face
  std::vector<double> magnetization;  ///< M at the probe face
};

/// Drives the system from rest and records probe values after every step.
RunRecord run_driven(const System& system, const PointDrive& drive, std::size_t probe_node,
                     std::size_t probe_face, double dt, std::size_t steps);

/// Lock-in estimates over the part of the record with time >= window_start,
/// using a Hann window. Throws NotSteadyState when the field amplitude of the
/// two halves of the window differs by more than `drift_tolerance`.
cdouble emergent_susceptibility(const RunRecord& record, double omega, double window_start,
                                const UnitsSystem& units, double drift_tolerance = 0.01);
cdouble emergent_permeability(const RunRecord& record, double omega, double window_start,
                              const UnitsSystem& units, double drift_tolerance = 0.01);

enum class ResponseChannel { Electric, Magnetic };

/// Driven-cavity measurement of the emergent response of one material.
/// The run lasts horizon_fraction times the recurrence horizon of the
/// reservoir (band top at twice the largest resonance), and the cavity is
/// long enough that no wall reflection reaches the central probe in that
/// time, so the result is the local response of the unbounded medium.
struct EmergentOptions {
  ReservoirOptions reservoir{};
  double spacing = 0.1;
  double horizon_fraction = 0.5;
  double ramp_time = 10.0;
  double window_start_fraction = 0.5;  ///< lock-in window starts at this fraction of the run
  double drift_tolerance = 0.01;
};

struct EmergentResult {
  double omega = 0.0;
  cdouble estimate{};
  cdouble exact{};
  double horizon = 0.0;
  double run_time = 0.0;
  double relative_error() const { return std::abs(estimate - exact) / std::abs(exact); }
};

/// Electric channel: epsilon estimate vs MaterialModel::epsilon. Magnetic
/// channel: mu estimate vs MaterialModel::mu. Throws ValidationError when the
/// material has no poles in the requested channel.
EmergentResult measure_emergent_response(const MaterialModel& material, double omega,
                                         ResponseChannel channel, const UnitsSystem& units,
                                         const EmergentOptions& options = {});

/// Power transmittance of a stack obtained from two pulse runs on the same
/// grid, one with the stack and one in vacuum: the ratio of the squared
/// Fourier amplitudes of E at `probe_node` over `steps` steps, per frequency.
std::vector<double> pulse_transmittance(const System& system, const PulseParams& pulse,
                                        std::size_t probe_node, double dt, std::size_t steps,
                                        std::span<const double> frequencies);

/// Free-oscillation amplitudes of the reservoir, nodes x modes, row-major.
struct SourceAmplitudes {
  std::vector<cdouble> longitudinal;  ///< Z along z
  std::vector<cdouble> transverse;    ///< Z along x
  std::vector<cdouble> magnetic;      ///< W along y
};

/// Free charge and current densities at time t from the amplitudes, with
/// Q(z, t) = (1/2pi) sum_n [a_n(z) Z_n(z) exp(-i w_n t) + c.c.] for a coupling
/// table a (nodes x modes, already carrying sqrt(dw_n)):
///   sigma = -dQ_z/dz,  j_z = dQ_z/dt,  j_x = dQ_x/dt - d(Q_W)/dz.
/// Spatial derivatives are central differences; d sigma/dt is formed from the
/// same sums, so the conservation residual is rounding only.
struct FreeSources {
  std::vector<double> charge;
  std::vector<double> charge_rate;
  std::vector<double> current_z;
  std::vector<double> current_x;
  double conservation_residual = 0.0;  ///< max |d sigma/dt + d j_z/dz|
  double scale = 0.0;                  ///< max |d j_z/dz|
};

FreeSources free_current_from_amplitudes(const SourceAmplitudes& src,
                                         const std::vector<double>& electric_coupling,
                                         const std::vector<double>& magnetic_coupling,
                                         std::span<const double> frequencies,
                                         double spacing, double time);

}  // namespace maxqed::tdsim
