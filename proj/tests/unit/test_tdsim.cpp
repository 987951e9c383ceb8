#include <doctest.h>

#include <cmath>
#include <numbers>

#include "maxqed/errors.hpp"
#include "maxqed/materials.hpp"
#include "maxqed/reference.hpp"
#include "maxqed/tdsim.hpp"

using namespace maxqed;
using namespace maxqed::tdsim;
using std::numbers::pi;

namespace {

const UnitsSystem kNatural = UnitsSystem::natural();
const MaterialModel kAbsorber({{1.0, 1.0, 0.1}}, {});
const MaterialModel kMagnetodielectric({{1.0, 1.0, 0.3}}, {{0.5, 1.2, 0.3}});

Grid1D grid_over(double left, double right, double h) {
  return Grid1D(left, h, static_cast<std::size_t>(std::llround((right - left) / h)) + 1);
}

/// One decoupled oscillator of frequency w at an interior node.
System lone_oscillator(double w) {
  ReservoirDiscretization r;
  // A single Gauss node sits at u = 1/2, i.e. at cut / 4.
  r.frequencies = pvquad::FrequencyGrid::mapped_square(4.0 * w, 1);
  r.electric_sites = {5};
  r.electric_coupling = {0.0};
  return System(grid_over(0.0, 1.0, 0.1), std::move(r), kNatural);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("reservoir discretization") {
  const LayerStack slab = LayerStack::slab(kMagnetodielectric, 2.0);
  const Grid1D grid = grid_over(-3.0, 5.0, 0.1);
  const auto r = ReservoirDiscretization::build(slab, grid, kNatural, {100, 8.0});
  CHECK(r.modes() == 100);
  CHECK(r.max_frequency() <= 8.0 * 1.2);
  for (double c : r.electric_coupling) CHECK(c >= 0.0);
  for (double c : r.magnetic_coupling) CHECK(c >= 0.0);
  for (std::size_t i : r.electric_sites) {
    CHECK(grid.node(i) >= -0.05);
    CHECK(grid.node(i) <= 2.05);
  }
  // Inside the slab the dual cell is pure material: coupling^2 = alpha^2 dw.
  const auto w = r.frequencies.nodes();
  const auto dw = r.frequencies.weights();
  const std::size_t centre = grid.nearest(1.0);
  for (std::size_t s = 0; s < r.electric_sites.size(); ++s) {
    if (r.electric_sites[s] != centre) continue;
    for (std::size_t k = 0; k < r.modes(); ++k) {
      const double a = coupling_alpha(kMagnetodielectric, w[k], kNatural);
      CHECK(r.electric_coupling[s * r.modes() + k] ==
            doctest::Approx(a * std::sqrt(dw[k])).epsilon(1e-12));
    }
  }
  CHECK(std::isfinite(r.recurrence_horizon(2.4)));
  CHECK(std::isinf(ReservoirDiscretization{}.recurrence_horizon(0.0)));
}

TEST_CASE("stability bound") {
  const System system = System::from_stack(LayerStack::slab(kAbsorber, 1.0),
                                           grid_over(-3.0, 4.0, 0.05), kNatural, {50, 8.0});
  const double dt = system.max_stable_dt();
  CHECK(dt <= 0.9 * 0.05);
  CHECK(dt <= 0.2 / system.reservoir().max_frequency() + 1e-15);
  CHECK_NOTHROW(system.check_dt(dt));
  CHECK_THROWS_AS(system.check_dt(1.01 * dt), StabilityViolation);
  CHECK_THROWS_AS(system.check_dt(0.0), StabilityViolation);

  auto runaway = system.init_pulse({-2.0, 0.1, 1e160, 0.0, true, 6.0});
  CHECK_THROWS_AS(system.step(runaway, dt), StabilityViolation);
}

TEST_CASE("trivial states") {
  const System system = System::from_stack(LayerStack::slab(kMagnetodielectric, 1.0),
                                           grid_over(-4.0, 5.0, 0.05), kNatural, {40, 8.0});
  auto zero = system.zero_state();
  CHECK(system.total_energy(zero) == 0.0);
  for (int k = 0; k < 20; ++k) system.step(zero, system.max_stable_dt());
  CHECK(max_abs(zero.potential) == 0.0);
  CHECK(max_abs(zero.potential_momentum) == 0.0);
  CHECK(max_abs(zero.x) == 0.0);
  CHECK(max_abs(zero.y_momentum) == 0.0);

  const auto silent = system.init_pulse({-2.0, 0.3, 0.0, 1.0, true, 6.0});
  CHECK(max_abs(silent.potential) == 0.0);
  CHECK(max_abs(silent.potential_momentum) == 0.0);
}

TEST_CASE("initial pulse") {
  const System system = System::from_stack(LayerStack::slab(kAbsorber, 2.0),
                                           grid_over(-25.0, 27.0, 0.05), kNatural, {50, 8.0});
  const PulseParams pulse{-10.0, 1.0, 1.0, 1.0, true};
  const auto state = system.init_pulse(pulse);
  const auto e = system.energy(state);
  CHECK(e.reservoir == 0.0);
  CHECK(e.interaction == 0.0);
  CHECK(e.total() == doctest::Approx(reference::gaussian_pulse_energy(1.0, 1.0, 1.0, kNatural))
                         .epsilon(1e-2));
  CHECK_THROWS_AS(system.init_pulse({0.5, 1.0, 1.0, 1.0, true}), PulseOverlapsMaterial);
  CHECK_THROWS_AS(system.init_pulse({-3.0, 1.0, 1.0, 1.0, true}), PulseOverlapsMaterial);
}

TEST_CASE("vacuum translation") {
  const Grid1D grid = grid_over(0.0, 40.0, 0.05);
  const System system(grid, ReservoirDiscretization{}, kNatural);
  auto state = system.init_pulse({10.0, 1.0, 1.0, 1.0, true});
  const double dt = system.max_stable_dt();
  for (int k = 0; k < 200; ++k) system.step(state, dt);
  const auto e = system.electric_field(state);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = grid.node(i) - 10.0 - state.time;
    const double exact = std::exp(-u * u / 2.0) * std::cos(u);
    diff += (e[i] - exact) * (e[i] - exact);
    norm += exact * exact;
  }
  CHECK(std::sqrt(diff / norm) <= 1e-2);

  // Leftward pulses move the other way.
  auto left = system.init_pulse({30.0, 1.0, 1.0, 0.0, false});
  for (int k = 0; k < 200; ++k) system.step(left, dt);
  const auto el = system.electric_field(left);
  const auto peak = static_cast<std::size_t>(
      std::max_element(el.begin(), el.end()) - el.begin());
  CHECK(grid.node(peak) == doctest::Approx(30.0 - left.time).epsilon(0.01));
}

TEST_CASE("decoupled oscillator") {
  const double w = 1.0;
  std::vector<double> phase;
  for (double dt : {0.05, 0.025}) {
    const System system = lone_oscillator(w);
    CHECK(system.reservoir().frequencies.nodes()[0] == doctest::Approx(w));
    auto state = system.zero_state();
    state.x[0] = 1.0;
    // Energies are line integrals, so the single site carries weight h.
    CHECK(system.energy(state).reservoir == doctest::Approx(0.5 * w * w * 0.1));
    const auto steps = static_cast<std::size_t>(std::llround(2.0 * pi / w / dt));
    const double dt_exact = 2.0 * pi / w / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) system.step(state, dt_exact);
    // After one nominal period the phase lag is atan2 of the state.
    phase.push_back(std::abs(std::atan2(-state.x_momentum[0] / w, state.x[0])));
    CHECK(max_abs(state.potential_momentum) == 0.0);
  }
  CHECK(phase[0] > 0.0);
  CHECK(std::log2(phase[0] / phase[1]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("energy is conserved with second-order drift") {
  const System system = System::from_stack(LayerStack::slab(kMagnetodielectric, 1.0),
                                           grid_over(-14.0, 16.0, 0.1), kNatural, {60, 8.0});
  const auto initial = system.init_pulse({-7.0, 1.0, 1.0, 1.0, true});
  const double e0 = system.total_energy(initial);
  std::vector<double> drift;
  for (double dt : {system.max_stable_dt(), 0.5 * system.max_stable_dt()}) {
    auto state = initial;
    const auto steps = static_cast<std::size_t>(std::llround(20.0 / dt));
    double worst = 0.0;
    for (const auto& s : run(system, state, dt, steps, 1)) {
      worst = std::max(worst, std::abs(s.energy.total() - e0) / e0);
    }
    drift.push_back(worst);
  }
  CHECK(drift[0] <= 1e-3);
  CHECK(std::log2(drift[0] / drift[1]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("emergent response") {
  SUBCASE("vacuum drive gives unit permittivity") {
    const Grid1D grid = grid_over(-100.0, 100.0, 0.1);
    const System system(grid, ReservoirDiscretization{}, kNatural);
    const std::size_t probe = grid.nearest(0.0);
    const PointDrive drive{probe, 1.0, 0.8, 10.0};
    const double dt = system.max_stable_dt();
    const auto record = run_driven(system, drive, probe, probe, dt,
                                   static_cast<std::size_t>(std::llround(80.0 / dt)));
    CHECK(emergent_susceptibility(record, 0.8, 40.0, kNatural) == cdouble(1.0, 0.0));
    CHECK(emergent_permeability(record, 0.8, 40.0, kNatural) == cdouble(1.0, 0.0));
  }
  SUBCASE("growing amplitude is not a steady state") {
    RunRecord r;
    r.dt = 0.05;
    for (int k = 0; k < 4000; ++k) {
      const double t = r.dt * k;
      r.time.push_back(t);
      r.field.push_back(t * std::sin(t));
      r.polarization.push_back(0.0);
      r.induction.push_back(t * std::cos(t));
      r.magnetization.push_back(0.0);
    }
    CHECK_THROWS_AS(emergent_susceptibility(r, 1.0, 100.0, kNatural), NotSteadyState);
  }
  SUBCASE("Lorentz permittivity at a coarse reservoir") {
    EmergentOptions o;
    o.reservoir.modes = 200;
    const MaterialModel m({{1.0, 1.0, 0.3}}, {});
    const auto r = measure_emergent_response(m, 0.8, ResponseChannel::Electric, kNatural, o);
    CHECK(r.exact == m.epsilon(0.8));
    CHECK(r.run_time <= 0.5 * r.horizon + 1e-9);
    CHECK(r.relative_error() <= 2e-2);
    CHECK_THROWS_AS(measure_emergent_response(m, 0.8, ResponseChannel::Magnetic, kNatural, o),
                    ValidationError);
  }
}

TEST_CASE("free sources") {
  const std::size_t n = 30, m = 4;
  const std::vector<double> freq{0.5, 1.0, 1.5, 2.0};
  const std::vector<double> a(n * m, 0.7), b(n * m, 0.0);
  SourceAmplitudes src;
  src.longitudinal.assign(n * m, 0.0);
  src.transverse.assign(n * m, 0.0);
  src.magnetic.assign(n * m, 0.0);

  const auto quiet = free_current_from_amplitudes(src, a, b, freq, 0.1, 3.0);
  CHECK(max_abs(quiet.charge) == 0.0);
  CHECK(max_abs(quiet.current_z) == 0.0);
  CHECK(max_abs(quiet.current_x) == 0.0);

  // One mode with a z-independent amplitude: no interior charge, and
  // j_z = -(w a / pi) sin(w t) for Z = 1.
  for (std::size_t i = 0; i < n; ++i) src.longitudinal[i * m + 1] = 1.0;
  for (double t : {0.3, 1.7}) {
    const auto f = free_current_from_amplitudes(src, a, b, freq, 0.1, t);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      CHECK(f.charge[i] == 0.0);
      CHECK(f.current_z[i] == doctest::Approx(-1.0 * 0.7 / pi * std::sin(t)).epsilon(1e-13));
    }
    CHECK(f.conservation_residual <= 1e-12 * std::max(f.scale, 1.0));
  }
  CHECK_THROWS_AS(free_current_from_amplitudes(src, std::vector<double>(7, 1.0), b, freq, 0.1, 0.0),
                  ValidationError);
}

TEST_CASE("pulse transmittance through vacuum is one") {
  const Grid1D grid = grid_over(-30.0, 30.0, 0.1);
  const System system(grid, ReservoirDiscretization{}, kNatural);
  const double dt = system.max_stable_dt();
  const std::vector<double> freqs{0.6, 1.0, 1.4};
  const auto t = pulse_transmittance(system, {-15.0, 1.5, 1.0, 1.0, true}, grid.nearest(5.0), dt,
                                     static_cast<std::size_t>(std::llround(40.0 / dt)), freqs);
  for (double v : t) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}
