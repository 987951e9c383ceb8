#include "maxqed/tdsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "maxqed/errors.hpp"

namespace maxqed::tdsim {

namespace {

using std::numbers::pi;

constexpr double kOverflowGuard = 1e150;

std::size_t layer_first_nonvacuum(const LayerStack& stack) {
  for (std::size_t l = 0; l < stack.layer_count(); ++l) {
    if (!stack.layers()[l].material.is_vacuum()) return l;
  }
  return stack.layer_count();
}

}  // namespace

double ReservoirDiscretization::max_frequency() const {
  const auto w = frequencies.nodes();
  return w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
}

double ReservoirDiscretization::recurrence_horizon(double band_top) const {
  const auto w = frequencies.nodes();
  double gap = 0.0;
  for (std::size_t n = 0; n + 1 < w.size() && w[n] <= band_top; ++n) {
    gap = std::max(gap, w[n + 1] - w[n]);
  }
  return gap > 0.0 ? 2.0 * pi / gap : std::numeric_limits<double>::infinity();
}

ReservoirDiscretization ReservoirDiscretization::build(const LayerStack& stack,
                                                       const Grid1D& grid,
                                                       const UnitsSystem& units,
                                                       const ReservoirOptions& options) {
  double top = 0.0;
  for (const auto& layer : stack.layers()) top = std::max(top, layer.material.max_resonance());
  ReservoirDiscretization r;
  if (layer_first_nonvacuum(stack) == stack.layer_count() || options.modes == 0) {
    r.frequencies = pvquad::FrequencyGrid::mapped_square(1.0, 1);
    return r;
  }
  r.frequencies = pvquad::FrequencyGrid::mapped_square(options.cut_factor * top, options.modes);
  const auto w = r.frequencies.nodes();
  const auto dw = r.frequencies.weights();
  const std::size_t m = w.size();
  const double h = grid.spacing();

  std::vector<double> row(m);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.node(i);
    bool any = false;
    for (std::size_t n = 0; n < m; ++n) {
      const double a2 = stack.average(z - 0.5 * h, z + 0.5 * h, [&](const MaterialModel& mat) {
        const double a = coupling_alpha(mat, w[n], units);
        return a * a;
      });
      row[n] = std::sqrt(a2 * dw[n]);
      any = any || row[n] > 0.0;
    }
    if (any) {
      r.electric_sites.push_back(i);
      r.electric_coupling.insert(r.electric_coupling.end(), row.begin(), row.end());
    }
  }
  for (std::size_t f = 0; f + 1 < grid.size(); ++f) {
    bool any = false;
    for (std::size_t n = 0; n < m; ++n) {
      const double b2 =
          stack.average(grid.node(f), grid.node(f + 1), [&](const MaterialModel& mat) {
            const double b = coupling_beta(mat, w[n], units);
            return b * b;
          });
      row[n] = std::sqrt(b2 * dw[n]);
      any = any || row[n] > 0.0;
    }
    if (any) {
      r.magnetic_sites.push_back(f);
      r.magnetic_coupling.insert(r.magnetic_coupling.end(), row.begin(), row.end());
    }
  }
  return r;
}

double PointDrive::current(double t, double spacing) const {
  double ramp = 1.0;
  if (ramp_time > 0.0 && t < ramp_time) {
    const double s = std::sin(0.5 * pi * std::max(t, 0.0) / ramp_time);
    ramp = s * s;
  }
  return amplitude * ramp * std::sin(omega * t) / spacing;
}

System::System(const Grid1D& grid, ReservoirDiscretization reservoir, const UnitsSystem& units)
    : grid_(grid), reservoir_(std::move(reservoir)), units_(units) {
  if (grid_.size() < 3) throw ValidationError("simulation grid needs at least three nodes");
  const std::size_t m = reservoir_.modes();
  if (reservoir_.electric_coupling.size() != reservoir_.electric_sites.size() * m ||
      reservoir_.magnetic_coupling.size() != reservoir_.magnetic_sites.size() * m) {
    throw ValidationError("coupling tables do not match sites x modes");
  }
  node_site_.assign(grid_.size(), -1);
  face_site_.assign(grid_.size() - 1, -1);
  for (std::size_t s = 0; s < reservoir_.electric_sites.size(); ++s) {
    const std::size_t i = reservoir_.electric_sites[s];
    if (i == 0 || i + 1 >= grid_.size()) {
      throw ValidationError("electric reservoir sites must be interior nodes");
    }
    node_site_[i] = static_cast<std::ptrdiff_t>(s);
  }
  for (std::size_t s = 0; s < reservoir_.magnetic_sites.size(); ++s) {
    const std::size_t f = reservoir_.magnetic_sites[s];
    if (f + 1 >= grid_.size()) throw ValidationError("magnetic site outside the grid");
    face_site_[f] = static_cast<std::ptrdiff_t>(s);
  }
}

System System::from_stack(const LayerStack& stack, const Grid1D& grid,
                          const UnitsSystem& units, const ReservoirOptions& options) {
  return System(grid, ReservoirDiscretization::build(stack, grid, units, options), units);
}

double System::max_stable_dt() const {
  double dt = 0.9 * grid_.spacing() / units_.c;
  const bool has_sites =
      !reservoir_.electric_sites.empty() || !reservoir_.magnetic_sites.empty();
  if (has_sites && reservoir_.max_frequency() > 0.0) {
    dt = std::min(dt, 0.2 / reservoir_.max_frequency());
  }
  return dt;
}

void System::check_dt(double dt) const {
  if (!(dt > 0.0) || dt > max_stable_dt() * (1.0 + 1e-12)) {
    throw StabilityViolation("dt = " + std::to_string(dt) + " outside (0, " +
                             std::to_string(max_stable_dt()) + "]");
  }
}

SimState System::zero_state() const {
  SimState s;
  s.potential.assign(grid_.size(), 0.0);
  s.potential_momentum.assign(grid_.size(), 0.0);
  const std::size_t m = reservoir_.modes();
  s.x.assign(reservoir_.electric_sites.size() * m, 0.0);
  s.x_momentum.assign(s.x.size(), 0.0);
  s.y.assign(reservoir_.magnetic_sites.size() * m, 0.0);
  s.y_momentum.assign(s.y.size(), 0.0);
  return s;
}

SimState System::init_pulse(const PulseParams& pulse) const {
  if (!(pulse.width > 0.0)) throw ValidationError("pulse width must be positive");
  const double lo = pulse.center - pulse.support_widths * pulse.width;
  const double hi = pulse.center + pulse.support_widths * pulse.width;
  const double h = grid_.spacing();
  for (std::size_t i : reservoir_.electric_sites) {
    if (grid_.node(i) + 0.5 * h > lo && grid_.node(i) - 0.5 * h < hi) {
      throw PulseOverlapsMaterial("support [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] reaches node " + std::to_string(i));
    }
  }
  for (std::size_t f : reservoir_.magnetic_sites) {
    if (grid_.node(f + 1) > lo && grid_.node(f) < hi) {
      throw PulseOverlapsMaterial("support [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] reaches face " + std::to_string(f));
    }
  }
  const std::size_t n = grid_.size();
  if (grid_.node(0) > lo || grid_.node(n - 1) < hi) {
    throw ValidationError("pulse support must lie inside the walls");
  }

  SimState s = zero_state();
  const auto profile = [&](double z) {
    const double u = z - pulse.center;
    return pulse.amplitude * std::exp(-u * u / (2.0 * pulse.width * pulse.width)) *
           std::cos(pulse.carrier * u);
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    s.potential_momentum[i] = -units_.eps0 * profile(grid_.node(i));
  }
  // B_f = +-E(z_f + h/2) / c, integrated from the left wall.
  const double sign = pulse.rightward ? 1.0 : -1.0;
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double b = sign * profile(grid_.node(f) + 0.5 * h) / units_.c;
    s.potential[f + 1] = s.potential[f] + h * b;
  }
  // The right wall holds A fixed; the pulse support ends well before it.
  s.potential[n - 1] = s.potential[n - 2];
  return s;
}

void System::kick_field(SimState& s, double tau) const {
  // Flow of (Pi_A + P)^2 / 2 eps0: E is frozen, A and Pi_X move linearly.
  const std::size_t n = grid_.size();
  const std::size_t m = reservoir_.modes();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double p = 0.0;
    const std::ptrdiff_t site = node_site_[i];
    if (site >= 0) {
      const double* a = &reservoir_.electric_coupling[static_cast<std::size_t>(site) * m];
      const double* x = &s.x[static_cast<std::size_t>(site) * m];
      for (std::size_t k = 0; k < m; ++k) p += a[k] * x[k];
    }
    const double e = -(s.potential_momentum[i] + p) / units_.eps0;
    s.potential[i] -= e * tau;
    if (site >= 0) {
      const double* a = &reservoir_.electric_coupling[static_cast<std::size_t>(site) * m];
      double* px = &s.x_momentum[static_cast<std::size_t>(site) * m];
      for (std::size_t k = 0; k < m; ++k) px[k] += a[k] * e * tau;
    }
  }
}

void System::drift_oscillators(SimState& s, double tau) const {
  for (std::size_t k = 0; k < s.x.size(); ++k) s.x[k] += s.x_momentum[k] * tau;
  for (std::size_t k = 0; k < s.y.size(); ++k) s.y[k] += s.y_momentum[k] * tau;
}

void System::kick_potential(SimState& s, double tau) const {
  const std::size_t n = grid_.size();
  const std::size_t m = reservoir_.modes();
  const double h = grid_.spacing();
  const auto w = reservoir_.frequencies.nodes();

  // H_f = kappa0 B_f - M_f on every face; magnetic oscillators feel B_f.
  std::vector<double> hfield(n - 1);
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double b = (s.potential[f + 1] - s.potential[f]) / h;
    double mag = 0.0;
    const std::ptrdiff_t site = face_site_[f];
    if (site >= 0) {
      const std::size_t off = static_cast<std::size_t>(site) * m;
      const double* beta = &reservoir_.magnetic_coupling[off];
      const double* y = &s.y[off];
      for (std::size_t k = 0; k < m; ++k) mag += beta[k] * y[k];
      double* py = &s.y_momentum[off];
      for (std::size_t k = 0; k < m; ++k) py[k] += (beta[k] * b - w[k] * w[k] * y[k]) * tau;
    }
    hfield[f] = units_.kappa0() * b - mag;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    s.potential_momentum[i] += tau * (hfield[i] - hfield[i - 1]) / h;
  }
  for (std::size_t site = 0; site < reservoir_.electric_sites.size(); ++site) {
    const std::size_t off = site * m;
    for (std::size_t k = 0; k < m; ++k) {
      s.x_momentum[off + k] -= w[k] * w[k] * s.x[off + k] * tau;
    }
  }
}

void System::guard(const SimState& s) const {
  for (std::size_t i = 0; i < s.potential.size(); ++i) {
    const double a = s.potential[i];
    const double p = s.potential_momentum[i];
    if (!std::isfinite(a) || !std::isfinite(p) || std::abs(a) > kOverflowGuard ||
        std::abs(p) > kOverflowGuard) {
      throw StabilityViolation("field left the overflow guard at node " + std::to_string(i) +
                               ", t = " + std::to_string(s.time));
    }
  }
}

void System::step(SimState& s, double dt, const PointDrive* drive) const {
  const double half = 0.5 * dt;
  kick_field(s, half);
  drift_oscillators(s, half);
  kick_potential(s, dt);
  if (drive != nullptr) {
    if (drive->node == 0 || drive->node + 1 >= grid_.size()) {
      throw ValidationError("drive node must be interior");
    }
    s.potential_momentum[drive->node] += dt * drive->current(s.time + half, grid_.spacing());
  }
  drift_oscillators(s, half);
  kick_field(s, half);
  s.time += dt;
  guard(s);
}

double System::polarization(const SimState& s, std::size_t node) const {
  const std::ptrdiff_t site = node_site_.at(node);
  if (site < 0) return 0.0;
  const std::size_t m = reservoir_.modes();
  const std::size_t off = static_cast<std::size_t>(site) * m;
  double p = 0.0;
  for (std::size_t k = 0; k < m; ++k) p += reservoir_.electric_coupling[off + k] * s.x[off + k];
  return p;
}

double System::magnetization(const SimState& s, std::size_t face) const {
  const std::ptrdiff_t site = face_site_.at(face);
  if (site < 0) return 0.0;
  const std::size_t m = reservoir_.modes();
  const std::size_t off = static_cast<std::size_t>(site) * m;
  double mag = 0.0;
  for (std::size_t k = 0; k < m; ++k) mag += reservoir_.magnetic_coupling[off + k] * s.y[off + k];
  return mag;
}

std::vector<double> System::electric_field(const SimState& s) const {
  std::vector<double> e(grid_.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid_.size(); ++i) {
    e[i] = -(s.potential_momentum[i] + polarization(s, i)) / units_.eps0;
  }
  return e;
}

std::vector<double> System::magnetic_field(const SimState& s) const {
  std::vector<double> b(grid_.size() - 1);
  for (std::size_t f = 0; f < b.size(); ++f) {
    b[f] = (s.potential[f + 1] - s.potential[f]) / grid_.spacing();
  }
  return b;
}

EnergyBreakdown System::energy(const SimState& s) const {
  const double h = grid_.spacing();
  EnergyBreakdown out;
  const auto e = electric_field(s);
  const auto b = magnetic_field(s);
  for (double v : e) out.electromagnetic += 0.5 * units_.eps0 * v * v * h;
  for (std::size_t f = 0; f < b.size(); ++f) {
    out.electromagnetic += 0.5 * units_.kappa0() * b[f] * b[f] * h;
    out.interaction -= magnetization(s, f) * b[f] * h;
  }
  const std::size_t m = reservoir_.modes();
  const auto w = reservoir_.frequencies.nodes();
  const auto oscillators = [&](const std::vector<double>& q, const std::vector<double>& p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double wk = w[k % m];
      sum += 0.5 * (p[k] * p[k] + wk * wk * q[k] * q[k]);
    }
    return sum * h;
  };
  out.reservoir = oscillators(s.x, s.x_momentum) + oscillators(s.y, s.y_momentum);
  return out;
}

std::optional<std::size_t> System::electric_site(std::size_t node) const {
  const std::ptrdiff_t site = node_site_.at(node);
  if (site < 0) return std::nullopt;
  return static_cast<std::size_t>(site);
}

std::optional<std::size_t> System::magnetic_site(std::size_t face) const {
  const std::ptrdiff_t site = face_site_.at(face);
  if (site < 0) return std::nullopt;
  return static_cast<std::size_t>(site);
}

std::vector<EnergySample> run(const System& system, SimState& state, double dt,
                              std::size_t steps, std::size_t every, const PointDrive* drive) {
  system.check_dt(dt);
  every = std::max<std::size_t>(every, 1);
  std::vector<EnergySample> out;
  out.reserve(steps / every + 2);
  out.push_back({state.time, system.energy(state)});
  for (std::size_t k = 1; k <= steps; ++k) {
    system.step(state, dt, drive);
    if (k % every == 0 || k == steps) out.push_back({state.time, system.energy(state)});
  }
  return out;
}

RunRecord run_driven(const System& system, const PointDrive& drive, std::size_t probe_node,
                     std::size_t probe_face, double dt, std::size_t steps) {
  system.check_dt(dt);
  SimState state = system.zero_state();
  RunRecord rec;
  rec.dt = dt;
  rec.time.reserve(steps);
  rec.field.reserve(steps);
  rec.polarization.reserve(steps);
  rec.induction.reserve(steps);
  rec.magnetization.reserve(steps);
  const double h = system.grid().spacing();
  for (std::size_t k = 0; k < steps; ++k) {
    system.step(state, dt, &drive);
    rec.time.push_back(state.time);
    const double p = system.polarization(state, probe_node);
    rec.field.push_back(-(state.potential_momentum[probe_node] + p) / system.units().eps0);
    rec.polarization.push_back(p);
    rec.induction.push_back(
        (state.potential[probe_face + 1] - state.potential[probe_face]) / h);
    rec.magnetization.push_back(system.magnetization(state, probe_face));
  }
  return rec;
}

namespace {

struct LockIn {
  cdouble first, second, whole;
};

// Hann-windowed Fourier amplitude at omega over [t0, t1] of a sampled series.
cdouble windowed_amplitude(const std::vector<double>& t, const std::vector<double>& v,
                           double omega, double t0, double t1) {
  cdouble sum{};
  double norm = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t0 || t[k] > t1) continue;
    const double s = std::sin(pi * (t[k] - t0) / (t1 - t0));
    const double w = s * s;
    sum += w * v[k] * std::exp(cdouble(0.0, omega * t[k]));
    norm += w;
  }
  return norm > 0.0 ? 2.0 * sum / norm : cdouble{};
}

LockIn lock_in(const RunRecord& r, const std::vector<double>& v, double omega, double start) {
  if (r.time.empty() || !(r.time.back() > start)) {
    throw NotSteadyState("record ends before the analysis window starts");
  }
  const double end = r.time.back();
  const double mid = 0.5 * (start + end);
  return {windowed_amplitude(r.time, v, omega, start, mid),
          windowed_amplitude(r.time, v, omega, mid, end),
          windowed_amplitude(r.time, v, omega, start, end)};
}

void require_steady(const LockIn& l, double tolerance, const char* what) {
  const double a = std::abs(l.first);
  const double b = std::abs(l.second);
  const double drift = std::abs(a - b) / std::max(std::max(a, b), 1e-300);
  if (drift > tolerance) {
    throw NotSteadyState(std::string(what) + " amplitude drifts by " + std::to_string(drift) +
                         " between window halves");
  }
}

}  // namespace

cdouble emergent_susceptibility(const RunRecord& record, double omega, double window_start,
                                const UnitsSystem& units, double drift_tolerance) {
  const LockIn e = lock_in(record, record.field, omega, window_start);
  require_steady(e, drift_tolerance, "field");
  const LockIn p = lock_in(record, record.polarization, omega, window_start);
  return 1.0 + p.whole / (units.eps0 * e.whole);
}

cdouble emergent_permeability(const RunRecord& record, double omega, double window_start,
                              const UnitsSystem& units, double drift_tolerance) {
  const LockIn b = lock_in(record, record.induction, omega, window_start);
  require_steady(b, drift_tolerance, "induction");
  const LockIn m = lock_in(record, record.magnetization, omega, window_start);
  const cdouble kappa = 1.0 - m.whole / (units.kappa0() * b.whole);
  return 1.0 / kappa;
}

EmergentResult measure_emergent_response(const MaterialModel& material, double omega,
                                         ResponseChannel channel, const UnitsSystem& units,
                                         const EmergentOptions& options) {
  const bool electric = channel == ResponseChannel::Electric;
  if (electric ? !material.is_electric() : !material.is_magnetic()) {
    throw ValidationError("material has no poles in the requested channel");
  }
  if (!(omega > 0.0)) throw ValidationError("probe frequency must be positive");
  const double h = options.spacing;

  // The horizon depends only on the frequency grid, so a one-cell probe system
  // is enough to read it off.
  const double band_top = 2.0 * material.max_resonance();
  const auto probe_reservoir = ReservoirDiscretization::build(
      LayerStack::slab(material, 2.0 * h), Grid1D(-h, h, 5), units, options.reservoir);
  const double horizon = probe_reservoir.recurrence_horizon(band_top);
  const double run_time = options.horizon_fraction * horizon;
  if (!std::isfinite(run_time)) throw ValidationError("reservoir has no finite horizon");

  // Round trip centre -> wall -> centre must exceed the run time.
  const double length = std::ceil(1.05 * units.c * run_time / h) * h;
  const auto stack = LayerStack::slab(material, length);
  const Grid1D grid(-h, h, static_cast<std::size_t>(std::llround(length / h)) + 3);
  const System system = System::from_stack(stack, grid, units, options.reservoir);
  const double dt = system.max_stable_dt();
  const std::size_t probe = grid.size() / 2;
  const PointDrive drive{probe, 1.0, omega, options.ramp_time};
  const auto steps = static_cast<std::size_t>(std::llround(run_time / dt));
  const RunRecord record = run_driven(system, drive, probe, probe, dt, steps);

  EmergentResult r;
  r.omega = omega;
  r.horizon = horizon;
  r.run_time = run_time;
  const double window = options.window_start_fraction * run_time;
  if (electric) {
    r.estimate = emergent_susceptibility(record, omega, window, units, options.drift_tolerance);
    r.exact = material.epsilon(omega);
  } else {
    r.estimate = emergent_permeability(record, omega, window, units, options.drift_tolerance);
    r.exact = material.mu(omega);
  }
  return r;
}

std::vector<double> pulse_transmittance(const System& system, const PulseParams& pulse,
                                        std::size_t probe_node, double dt, std::size_t steps,
                                        std::span<const double> frequencies) {
  system.check_dt(dt);
  if (probe_node == 0 || probe_node + 1 >= system.grid().size()) {
    throw ValidationError("probe must be an interior node");
  }
  const System vacuum(system.grid(), ReservoirDiscretization{}, system.units());
  const auto spectrum = [&](const System& s) {
    SimState state = s.init_pulse(pulse);
    std::vector<cdouble> acc(frequencies.size());
    for (std::size_t k = 0; k < steps; ++k) {
      s.step(state, dt);
      const double e = -(state.potential_momentum[probe_node] + s.polarization(state, probe_node)) /
                       s.units().eps0;
      for (std::size_t j = 0; j < frequencies.size(); ++j) {
        acc[j] += e * std::exp(cdouble(0.0, frequencies[j] * state.time));
      }
    }
    return acc;
  };
  const auto through = spectrum(system);
  const auto reference = spectrum(vacuum);
  std::vector<double> t(frequencies.size());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = std::norm(through[j]) / std::norm(reference[j]);
  return t;
}

FreeSources free_current_from_amplitudes(const SourceAmplitudes& src,
                                         const std::vector<double>& electric_coupling,
                                         const std::vector<double>& magnetic_coupling,
                                         std::span<const double> frequencies, double spacing,
                                         double time) {
  const std::size_t m = frequencies.size();
  if (m == 0 || electric_coupling.size() % m != 0) {
    throw ValidationError("coupling table is not nodes x modes");
  }
  const std::size_t n = electric_coupling.size() / m;
  if (src.longitudinal.size() != n * m || src.transverse.size() != n * m ||
      src.magnetic.size() != n * m || magnetic_coupling.size() != n * m) {
    throw ValidationError("source amplitudes do not match nodes x modes");
  }

  // q = (1/2pi) sum [a Z e^{-iwt} + c.c.], dq/dt = (1/2pi) sum [-iw a Z e^{-iwt} + c.c.]
  std::vector<double> qz(n), qz_rate(n), qx_rate(n), qw(n);
  for (std::size_t i = 0; i < n; ++i) {
    double vz = 0.0, vz_rate = 0.0, vx_rate = 0.0, vw = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const cdouble phase = std::exp(cdouble(0.0, -frequencies[k] * time));
      const cdouble iw{0.0, -frequencies[k]};
      const double a = electric_coupling[i * m + k];
      const double b = magnetic_coupling[i * m + k];
      vz += 2.0 * (a * src.longitudinal[i * m + k] * phase).real();
      vz_rate += 2.0 * (iw * a * src.longitudinal[i * m + k] * phase).real();
      vx_rate += 2.0 * (iw * a * src.transverse[i * m + k] * phase).real();
      vw += 2.0 * (b * src.magnetic[i * m + k] * phase).real();
    }
    qz[i] = vz / (2.0 * pi);
    qz_rate[i] = vz_rate / (2.0 * pi);
    qx_rate[i] = vx_rate / (2.0 * pi);
    qw[i] = vw / (2.0 * pi);
  }

  const auto ddz = [&](const std::vector<double>& f, std::size_t i) {
    const double right = i + 1 < n ? f[i + 1] : 0.0;
    const double left = i > 0 ? f[i - 1] : 0.0;
    return (right - left) / (2.0 * spacing);
  };

  FreeSources out;
  out.charge.resize(n);
  out.charge_rate.resize(n);
  out.current_z = qz_rate;
  out.current_x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.charge[i] = -ddz(qz, i);
    out.charge_rate[i] = -ddz(qz_rate, i);
    // (curl of W along y)_x = -d/dz W_y
    out.current_x[i] = qx_rate[i] - ddz(qw, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double div_j = ddz(out.current_z, i);
    out.conservation_residual =
        std::max(out.conservation_residual, std::abs(out.charge_rate[i] + div_j));
    out.scale = std::max(out.scale, std::abs(div_j));
  }
  return out;
}

}  // namespace maxqed::tdsim
