#include "maxqed/cli/checks.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "maxqed/errors.hpp"
#include "maxqed/green1d.hpp"
#include "maxqed/modes.hpp"
#include "maxqed/pvquad.hpp"
#include "maxqed/reference.hpp"

namespace maxqed::cli {

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format(const char* fmt, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

template <typename... Args>
std::string formatf(const char* fmt, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Runs one group, timing it and turning an escaping exception into a failed
// check so that one broken computation cannot hide the others.
template <typename F>
CheckReport guarded(const std::string& group, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckReport report;
  try {
    report = body();
  } catch (const std::exception& e) {
    report.checks.push_back(CheckResult::failure(group, group, e.what()));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& c : report.checks) {
    if (c.seconds == 0.0) c.seconds = report.seconds;
  }
  return report;
}

double min_resonance(const MaterialModel& m) {
  double lo = kInf;
  for (const auto& p : m.electric_poles()) lo = std::min(lo, p.resonance);
  for (const auto& p : m.magnetic_poles()) lo = std::min(lo, p.resonance);
  return lo;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return v;
}

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Grid1D grid_between(double left, double right, double h) {
  return Grid1D(left, h, static_cast<std::size_t>(std::llround((right - left) / h)) + 1);
}

double horizon_band_top(const MaterialModel& m) { return 2.0 * m.max_resonance(); }

template <typename T>
void read(const Json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

}  // namespace

// ---- results ----

CheckResult CheckResult::at_most(std::string group, std::string name, double value,
                                 double limit, std::string detail) {
  CheckResult r{std::move(group), std::move(name), value, -kInf, limit, false, std::move(detail)};
  r.passed = std::isfinite(value) && value <= limit;
  return r;
}

CheckResult CheckResult::within(std::string group, std::string name, double value, double low,
                                double high, std::string detail) {
  CheckResult r{std::move(group), std::move(name), value, low, high, false, std::move(detail)};
  r.passed = std::isfinite(value) && value >= low && value <= high;
  return r;
}

CheckResult CheckResult::failure(std::string group, std::string name, std::string detail) {
  CheckResult r{std::move(group), std::move(name), std::numeric_limits<double>::quiet_NaN(),
                -kInf, kInf, false, std::move(detail)};
  return r;
}

std::string CheckResult::limit_text() const {
  if (low == -kInf && high == kInf) return "-";
  if (low == -kInf) return format("<= %.3g", high);
  return formatf("in [%.3g, %.3g]", low, high);
}

std::size_t CheckReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
}

void CheckReport::append(CheckReport other) {
  checks.insert(checks.end(), std::make_move_iterator(other.checks.begin()),
                std::make_move_iterator(other.checks.end()));
  diagnostics.insert(diagnostics.end(), std::make_move_iterator(other.diagnostics.begin()),
                     std::make_move_iterator(other.diagnostics.end()));
  seconds += other.seconds;
}

std::vector<double> pairwise_orders(const std::vector<double>& spacing,
                                    const std::vector<double>& error) {
  std::vector<double> orders;
  for (std::size_t k = 0; k + 1 < std::min(spacing.size(), error.size()); ++k) {
    orders.push_back(std::log(error[k] / error[k + 1]) / std::log(spacing[k] / spacing[k + 1]));
  }
  return orders;
}

// ---- settings ----

VerifySettings VerifySettings::from_json(const Json& j) {
  VerifySettings s;
  if (!j.is_object()) return s;
  try {
    if (j.contains("kk")) {
      const Json& k = j.at("kk");
      read(k, "electric_presets", s.kk.electric_presets);
      read(k, "magnetic_presets", s.kk.magnetic_presets);
      read(k, "relative_min", s.kk.relative_min);
      read(k, "relative_max", s.kk.relative_max);
      read(k, "count", s.kk.count);
    }
    if (j.contains("poles")) {
      const Json& k = j.at("poles");
      read(k, "triples", s.poles.triples);
      read(k, "etas", s.poles.etas);
      read(k, "omega_range", s.poles.omega_range);
      read(k, "seed", s.poles.seed);
    }
    if (j.contains("green")) {
      const Json& k = j.at("green");
      read(k, "omega", s.green.omega);
      read(k, "spacings", s.green.spacings);
      read(k, "padding", s.green.padding);
      read(k, "halfspace_material", s.green.halfspace_material);
      read(k, "reflection_omega", s.green.reflection_omega);
      read(k, "reflection_spacing", s.green.reflection_spacing);
    }
    if (j.contains("fdt")) {
      const Json& k = j.at("fdt");
      read(k, "materials", s.fdt.materials);
      read(k, "thickness", s.fdt.thickness);
      read(k, "omega", s.fdt.omega);
      read(k, "spacings", s.fdt.spacings);
      read(k, "padding", s.fdt.padding);
    }
    if (j.contains("conservation")) {
      const Json& k = j.at("conservation");
      read(k, "profiles", s.conservation.profiles);
      read(k, "nodes", s.conservation.nodes);
      read(k, "modes", s.conservation.modes);
      read(k, "seed", s.conservation.seed);
    }
    if (j.contains("energy")) {
      read(j.at("energy"), "absorption_thickness", s.energy.absorption_thickness);
    }
    if (j.contains("emergent")) {
      const Json& k = j.at("emergent");
      read(k, "electric_material", s.emergent.electric_material);
      read(k, "magnetic_material", s.emergent.magnetic_material);
      read(k, "frequencies", s.emergent.frequencies);
      read(k, "coarse_modes", s.emergent.coarse_modes);
      read(k, "fine_modes", s.emergent.fine_modes);
      read(k, "spacing", s.emergent.options.spacing);
      read(k, "horizon_fraction", s.emergent.options.horizon_fraction);
      read(k, "ramp_time", s.emergent.options.ramp_time);
      read(k, "window_start_fraction", s.emergent.options.window_start_fraction);
      read(k, "cut_factor", s.emergent.options.reservoir.cut_factor);
    }
    if (j.contains("transmission")) {
      const Json& k = j.at("transmission");
      auto& t = s.transmission;
      read(k, "material", t.material);
      read(k, "thickness", t.thickness);
      read(k, "spacing", t.spacing);
      read(k, "domain_left", t.domain_left);
      read(k, "domain_right", t.domain_right);
      read(k, "pulse_center", t.pulse_center);
      read(k, "pulse_width", t.pulse_width);
      read(k, "pulse_carrier", t.pulse_carrier);
      read(k, "probe", t.probe);
      read(k, "duration", t.duration);
      read(k, "modes", t.modes);
      read(k, "frequencies", t.frequencies);
    }
    if (j.contains("advection")) {
      const Json& k = j.at("advection");
      read(k, "spacing", s.advection.spacing);
      read(k, "length", s.advection.length);
      read(k, "pulse_width", s.advection.pulse_width);
      read(k, "pulse_carrier", s.advection.pulse_carrier);
      read(k, "steps", s.advection.steps);
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("verify section: ") + e.what());
  }
  return s;
}

// ---- groups ----

CheckReport check_kk(const MaterialLibrary& library, const KKSettings& s, const Tolerances& tol) {
  return guarded("kk", [&] {
    CheckReport report;
    const auto one = [&](const std::string& name, bool magnetic) {
      const auto start = std::chrono::steady_clock::now();
      const MaterialModel& m = library.at(name);
      const auto grid = kk_grid(m);
      const auto samples = magnetic ? sample_kappa_loss(m, grid) : sample_epsilon_imag(m, grid);
      double worst = 0.0;
      double at = 0.0;
      for (double w : linspace(s.relative_min * min_resonance(m), s.relative_max * m.max_resonance(),
                               s.count)) {
        const double rec = kk_reconstruct(samples, w);
        // Electric samples reconstruct Re eps - 1, magnetic ones 1 - Re kappa.
        const cdouble response = magnetic ? 1.0 - m.kappa(w) : m.epsilon(w) - 1.0;
        const double err = std::abs(rec - response.real()) / std::abs(response);
        if (err > worst) {
          worst = err;
          at = w;
        }
      }
      auto c = CheckResult::at_most("kk", (magnetic ? "kappa." : "epsilon.") + name, worst,
                                    tol["kk_relative"], format("worst at w = %.4g", at));
      c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.checks.push_back(std::move(c));
    };
    for (const auto& name : s.electric_presets) one(name, false);
    for (const auto& name : s.magnetic_presets) one(name, true);
    return report;
  });
}

CheckReport check_pole_identities(const PoleSettings& s, const Tolerances& tol) {
  return guarded("poles", [&] {
    CheckReport report;
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> draw(0.0, s.omega_range);
    std::vector<std::array<double, 3>> triples(s.triples);
    for (auto& t : triples) t = {draw(rng), draw(rng), draw(rng)};
    for (double eta : s.etas) {
      double worst_a = 0.0;
      double worst_b = 0.0;
      std::size_t degenerate = 0;
      for (const auto& [w, wp, wpp] : triples) {
        worst_a = std::max(worst_a, pvquad::pole_identity_A(w, wp, wpp, eta).max());
        try {
          worst_b = std::max(worst_b, pvquad::pole_identity_B(w, wp, wpp, eta).max());
        } catch (const DegeneratePair&) {
          ++degenerate;
          worst_b = std::max(
              worst_b,
              pvquad::pole_identity_B(w, wp, wpp, eta, pvquad::IdentitySubset::SumDenominatorsOnly)
                  .max());
        }
      }
      const std::string tag = format("eta=%g", eta);
      report.checks.push_back(CheckResult::at_most("poles", "conjugate_pairs." + tag, worst_a,
                                                   tol["pole_identity"]));
      report.checks.push_back(CheckResult::at_most(
          "poles", "same_sign." + tag, worst_b, tol["pole_identity"],
          formatf("%zu triples, %zu degenerate pairs on the sum identities only", s.triples,
                  degenerate)));
    }
    return report;
  });
}

CheckReport check_green(const MaterialLibrary& library, const LayerStack& stack,
                        const std::vector<double>& sweep, const GridSpec& grid,
                        const GreenSettings& s, const UnitsSystem& units, const Tolerances& tol) {
  return guarded("green", [&] {
    CheckReport report;

    // Vacuum against the closed form.
    const LayerStack vacuum = LayerStack::homogeneous(MaterialModel());
    std::vector<double> errors;
    for (double h : s.spacings) {
      const Grid1D g = Grid1D::covering(vacuum, h, s.padding);
      const auto sol = solve_green(vacuum, s.omega, g, units);
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
          const cdouble exact = homogeneous_green(1.0, 1.0, s.omega, g.node(i), g.node(j), units);
          err = std::max(err, std::abs(sol.kernel(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j)) -
                                       exact));
        }
      }
      errors.push_back(err);
    }
    const auto orders = pairwise_orders(s.spacings, errors);
    for (std::size_t k = 0; k < orders.size(); ++k) {
      report.checks.push_back(CheckResult::within(
          "green", formatf("vacuum_order.%zu", k + 1), orders[k], tol["green_order_low"],
          tol["green_order_high"], formatf("h %g -> %g, error %.3e -> %.3e", s.spacings[k],
                                           s.spacings[k + 1], errors[k], errors[k + 1])));
    }

    // Half-space reflection against the discrete interface oracle.
    {
      const MaterialModel& m = library.at(s.halfspace_material);
      const LayerStack half({Layer{}, Layer{.material = m}});
      const double h = s.reflection_spacing;
      const std::size_t left_nodes = static_cast<std::size_t>(std::llround(3.0 / h));
      const Grid1D g(-static_cast<double>(left_nodes) * h, h, 2 * left_nodes + 1);
      const auto sol = solve_green(half, s.reflection_omega, g, units);
      const std::size_t interface = g.nearest(0.0);
      const cdouble r = extract_reflection(sol, interface - left_nodes / 2, interface);
      const cdouble oracle = reference::discrete_interface_reflection(
          1.0, 1.0, m.epsilon(s.reflection_omega), m.kappa(s.reflection_omega),
          s.reflection_omega / units.c, h);
      report.checks.push_back(CheckResult::at_most(
          "green", "halfspace_reflection", std::abs(r - oracle), tol["reflection"],
          formatf("r = %.6f%+.6fi", r.real(), r.imag())));
    }

    // Configured stack over the sweep.
    double reciprocity = 0.0;
    double residual = 0.0;
    std::size_t nonpositive = 0;
    const Grid1D g = Grid1D::covering(stack, grid.spacing, grid.padding);
    bool absorbing = false;
    for (const auto& layer : stack.layers()) absorbing = absorbing || !layer.material.is_vacuum();
    for (double w : sweep) {
      const auto sol = solve_green(stack, w, g, units);
      reciprocity = std::max(reciprocity, sol.reciprocity_error);
      residual = std::max(residual, sol.residual_norm);
      if (absorbing) {
        for (Eigen::Index i = 0; i < sol.kernel.rows(); ++i) {
          if (!(sol.kernel(i, i).imag() > 0.0)) ++nonpositive;
        }
      }
    }
    const std::string where = formatf("%zu frequencies, %zu nodes", sweep.size(), g.size());
    report.checks.push_back(
        CheckResult::at_most("green", "stack_reciprocity", reciprocity, tol["reciprocity"], where));
    report.checks.push_back(
        CheckResult::at_most("green", "stack_residual", residual, tol["green_residual"], where));
    report.checks.push_back(CheckResult::at_most(
        "green", "stack_passivity", static_cast<double>(nonpositive), 0.0,
        "count of diagonal entries with Im g <= 0"));
    return report;
  });
}

CheckReport check_fdt(const MaterialLibrary& library, const FdtSettings& s,
                      const UnitsSystem& units, const Tolerances& tol) {
  return guarded("fdt", [&] {
    CheckReport report;
    for (const auto& name : s.materials) {
      const MaterialModel& m = library.at(name);
      const LayerStack stack = LayerStack::slab(m, s.thickness);
      const reference::ContinuumGreen continuum(stack, s.omega, units);
      double fdt = 0.0;
      double mode_eq = 0.0;
      double norm = 0.0;
      double psd = 0.0;
      double magnetic_in_dielectric = 0.0;
      std::vector<double> errors;
      for (double h : s.spacings) {
        const Grid1D g = Grid1D::covering(stack, h, s.padding);
        const auto green = solve_green(stack, s.omega, g, units);
        const auto bundle = modes::mode_fE(green, units);
        const auto r = modes::fdt_identity_check(bundle, green, units);
        fdt = std::max(fdt, r.relative());
        mode_eq = std::max(mode_eq, modes::mode_equation_residual(bundle, green, units));
        norm = std::max(norm, modes::normalization_residual(bundle, green.op, units));
        if (!m.is_magnetic()) magnetic_in_dielectric = std::max(magnetic_in_dielectric, max_abs(r.magnetic));

        const auto noise = modes::noise_kernel(green.op, units);
        for (const Eigen::MatrixXd* k : {&noise.electric, &noise.magnetic}) {
          const double scale = k->cwiseAbs().maxCoeff();
          if (scale == 0.0) continue;
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*k, Eigen::EigenvaluesOnly);
          psd = std::max(psd, -eig.eigenvalues().minCoeff() / scale);
        }

        const ComplexMatrix lhs = r.lhs();
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          for (std::size_t j = 0; j < g.size(); ++j) {
            err = std::max(err, std::abs(lhs(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(j))
                                             .real() -
                                         continuum(g.node(i), g.node(j)).imag()));
          }
        }
        errors.push_back(err);
      }
      const std::string g = "fdt";
      report.checks.push_back(
          CheckResult::at_most(g, name + ".identity", fdt, tol["fdt_relative"],
                               "max over spacings of max|LHS - Im g| / max|Im g|"));
      const auto orders = pairwise_orders(s.spacings, errors);
      for (std::size_t k = 0; k < orders.size(); ++k) {
        report.checks.push_back(CheckResult::within(
            g, name + formatf(".continuum_order.%zu", k + 1), orders[k], tol["fdt_order_low"],
            tol["fdt_order_high"], formatf("error %.3e -> %.3e", errors[k], errors[k + 1])));
      }
      report.checks.push_back(
          CheckResult::at_most(g, name + ".mode_equation", mode_eq, tol["mode_equation"]));
      report.checks.push_back(
          CheckResult::at_most(g, name + ".normalization", norm, tol["normalization"]));
      report.checks.push_back(CheckResult::at_most(g, name + ".noise_psd", psd, tol["noise_psd"],
                                                   "-min eigenvalue / max entry"));
      if (!m.is_magnetic()) {
        report.checks.push_back(CheckResult::at_most(g, name + ".magnetic_term_zero",
                                                     magnetic_in_dielectric, 0.0));
      }
    }
    return report;
  });
}

CheckReport check_conservation(const ConservationSettings& s, const UnitsSystem& units,
                               const Tolerances& tol) {
  return guarded("conservation", [&] {
    CheckReport report;
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Source kernels of random layered absorbers.
    double charge = 0.0;
    for (std::size_t p = 0; p < s.profiles; ++p) {
      std::vector<Layer> layers{Layer{}};
      for (int l = 0; l < 5; ++l) {
        const LorentzPole pole{0.2 + 2.0 * unit(rng), 0.5 + 2.0 * unit(rng),
                               0.02 + 0.5 * unit(rng)};
        layers.push_back(Layer{0.2 + unit(rng), MaterialModel({pole}, {})});
      }
      layers.push_back(Layer{});
      const LayerStack stack(std::move(layers));
      const double omega = 0.2 + 2.0 * unit(rng);
      const Grid1D grid = Grid1D::covering(stack, 0.02, 0.5);
      charge = std::max(charge, modes::charge_conservation_check(
                                    modes::source_kernels(stack, omega, grid, units)));
    }
    report.checks.push_back(CheckResult::at_most(
        "conservation", "charge_kernels", charge, tol["charge_conservation"],
        formatf("%zu random layered profiles", s.profiles)));

    // Free charge and current of random reservoir amplitudes.
    double worst = 0.0;
    const std::size_t n = s.nodes;
    const std::size_t m = s.modes;
    for (std::size_t p = 0; p < s.profiles; ++p) {
      std::vector<double> freq(m);
      for (auto& w : freq) w = 3.0 * unit(rng);
      std::vector<double> a(n * m), b(n * m);
      for (auto& v : a) v = unit(rng);
      for (auto& v : b) v = unit(rng);
      tdsim::SourceAmplitudes src;
      const auto random_complex = [&] { return cdouble(unit(rng) - 0.5, unit(rng) - 0.5); };
      for (auto* field : {&src.longitudinal, &src.transverse, &src.magnetic}) {
        field->resize(n * m);
        for (auto& z : *field) z = random_complex();
      }
      const auto f = tdsim::free_current_from_amplitudes(src, a, b, freq, 0.05, 10.0 * unit(rng));
      worst = std::max(worst, f.scale > 0.0 ? f.conservation_residual / f.scale : 0.0);
    }
    report.checks.push_back(CheckResult::at_most("conservation", "free_sources", worst,
                                                 tol["free_current"],
                                                 "max|d sigma/dt + d j/dz| / max|d j/dz|"));
    return report;
  });
}

CheckReport check_energy(const MaterialLibrary& library, const EnergySettings& s,
                         const UnitsSystem& units, const Tolerances& tol) {
  return guarded("energy", [&] {
    CheckReport report;
    const SimulateSpec& run = s.run;
    const MaterialModel& m = library.at(run.material);
    const LayerStack stack = LayerStack::slab(m, run.slab_thickness);
    const Grid1D grid = grid_between(run.domain_left, run.domain_right, run.spacing);
    const auto system =
        tdsim::System::from_stack(stack, grid, units, {run.modes, run.cut_factor});
    const double duration = run.periods * 2.0 * pi / run.period_omega;
    const double horizon = system.reservoir().recurrence_horizon(horizon_band_top(m));
    report.diagnostics.push_back({"energy.recurrence_horizon", horizon,
                                  format("run length %.4g", duration)});
    report.checks.push_back(CheckResult::at_most("energy", "within_horizon", duration / horizon,
                                                 tol["horizon_fraction"]));

    const tdsim::PulseParams pulse{run.pulse_center, run.pulse_width, run.pulse_amplitude,
                                   run.pulse_carrier, true};
    const auto initial = system.init_pulse(pulse);
    const auto e0 = system.energy(initial);
    const double analytic = reference::gaussian_pulse_energy(run.pulse_amplitude, run.pulse_width,
                                                             run.pulse_carrier, units);
    report.checks.push_back(CheckResult::at_most("energy", "pulse_energy",
                                                 std::abs(e0.total() - analytic) / analytic,
                                                 tol["pulse_energy"]));
    report.checks.push_back(
        CheckResult::at_most("energy", "reservoir_at_rest", std::abs(e0.reservoir), 0.0));

    const double dt = run.dt > 0.0 ? run.dt : system.max_stable_dt();
    std::vector<double> drift;
    for (const double step : {dt, 0.5 * dt}) {
      auto state = initial;
      const auto steps = static_cast<std::size_t>(std::llround(duration / step));
      auto samples = tdsim::run(system, state, step, steps, 1);
      double worst = 0.0;
      for (const auto& e : samples) {
        worst = std::max(worst, std::abs(e.energy.total() - e0.total()) / e0.total());
      }
      drift.push_back(worst);
    }
    report.checks.push_back(CheckResult::at_most("energy", "drift", drift[0], tol["energy_drift"],
                                                 formatf("dt = %.4g, %.4g periods", dt, run.periods)));
    const double order = std::log2(drift[0] / drift[1]);
    report.checks.push_back(CheckResult::within(
        "energy", "drift_order", order, tol["energy_order_low"], tol["energy_order_high"],
        formatf("drift %.3e at dt, %.3e at dt/2", drift[0], drift[1])));

    // Irreversible absorption needs the whole pulse inside the absorber, so it
    // runs on a slab thicker than the pulse. The window spans from the moment
    // the tail has entered to the earliest arrival of the front at the back face.
    {
      const double reach = pulse.support_widths * run.pulse_width;
      const double center = -(reach + run.pulse_width);
      const LayerStack thick = LayerStack::slab(m, s.absorption_thickness);
      const Grid1D thick_grid =
          grid_between(center - reach - 2.0, s.absorption_thickness + 2.0, run.spacing);
      const auto absorber =
          tdsim::System::from_stack(thick, thick_grid, units, {run.modes, run.cut_factor});
      auto state = absorber.init_pulse({center, run.pulse_width, run.pulse_amplitude,
                                        run.pulse_carrier, true});
      const double start = (reach - center) / units.c;
      const double stop = (s.absorption_thickness - (center + reach)) / units.c;
      const double step = absorber.max_stable_dt();
      const auto samples = tdsim::run(absorber, state, step,
                                      static_cast<std::size_t>(std::ceil(stop / step)), 1);
      const auto window =
          static_cast<std::size_t>(std::llround(2.0 * pi / run.period_omega / step));
      std::vector<double> averaged;
      double running = 0.0;
      std::size_t first = 0;
      while (first < samples.size() && samples[first].time < start) ++first;
      for (std::size_t k = first; k < samples.size(); ++k) {
        running += samples[k].energy.electromagnetic;
        if (k >= first + window) running -= samples[k - window].energy.electromagnetic;
        if (k + 1 >= first + window) averaged.push_back(running / static_cast<double>(window));
      }
      if (averaged.size() < 2) {
        report.checks.push_back(CheckResult::failure(
            "energy", "field_energy_nonincreasing", "absorption window shorter than one period"));
      } else {
        // Largest climb above the running minimum, against the net decrease.
        double lowest = averaged.front();
        double rise = 0.0;
        for (double v : averaged) {
          rise = std::max(rise, v - lowest);
          lowest = std::min(lowest, v);
        }
        const double decrease = averaged.front() - averaged.back();
        const double ratio = decrease > 0.0 ? rise / decrease
                                            : std::numeric_limits<double>::infinity();
        report.checks.push_back(CheckResult::at_most(
            "energy", "field_energy_nonincreasing", ratio, tol["absorption_ripple"],
            formatf("rise %.3e, decrease %.3e of the period-averaged field energy over t in "
                    "[%.1f, %.1f]",
                    rise, decrease, samples[first].time, samples.back().time)));
      }
    }
    return report;
  });
}

CheckReport check_emergent(const MaterialLibrary& library, const EmergentSettings& s,
                           const UnitsSystem& units, const Tolerances& tol, bool magnetic) {
  return guarded("emergent", [&] {
    CheckReport report;
    const auto channel_runs = [&](const std::string& material, tdsim::ResponseChannel channel,
                                  const char* label) {
      const MaterialModel& m = library.at(material);
      for (double w : s.frequencies) {
        double coarse_error = 0.0;
        for (const auto& [modes, key, tag] :
             {std::tuple{s.coarse_modes, "emergent_coarse", "coarse"},
              std::tuple{s.fine_modes, "emergent_fine", "fine"}}) {
          const auto start = std::chrono::steady_clock::now();
          tdsim::EmergentOptions opts = s.options;
          opts.reservoir.modes = modes;
          const std::string name = formatf("%s.w=%g.N=%zu", label, w, modes);
          try {
            const auto r = tdsim::measure_emergent_response(m, w, channel, units, opts);
            auto c = CheckResult::at_most(
                "emergent", name, r.relative_error(), tol[key],
                formatf("%.5f%+.5fi vs %.5f%+.5fi, run %.1f of horizon %.1f", r.estimate.real(),
                        r.estimate.imag(), r.exact.real(), r.exact.imag(), r.run_time, r.horizon));
            c.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            report.checks.push_back(std::move(c));
            if (std::string_view(tag) == "coarse") {
              coarse_error = r.relative_error();
            } else if (coarse_error > 0.0) {
              report.diagnostics.push_back({formatf("%s.w=%g.error_ratio", label, w),
                                            coarse_error / r.relative_error(),
                                            "coarse error / fine error"});
            }
          } catch (const Error& e) {
            report.checks.push_back(CheckResult::failure("emergent", name, e.what()));
          }
        }
      }
    };
    channel_runs(s.electric_material, tdsim::ResponseChannel::Electric, "epsilon");
    if (magnetic) channel_runs(s.magnetic_material, tdsim::ResponseChannel::Magnetic, "mu");
    return report;
  });
}

CheckReport check_transmission(const MaterialLibrary& library, const TransmissionSettings& s,
                               const UnitsSystem& units, const Tolerances& tol) {
  return guarded("transmission", [&] {
    CheckReport report;
    const MaterialModel& m = library.at(s.material);
    const LayerStack stack = LayerStack::slab(m, s.thickness);
    const Grid1D grid = grid_between(s.domain_left, s.domain_right, s.spacing);
    const auto system = tdsim::System::from_stack(stack, grid, units, {s.modes, 8.0});
    const double horizon = system.reservoir().recurrence_horizon(horizon_band_top(m));
    report.checks.push_back(CheckResult::at_most("transmission", "within_horizon",
                                                 s.duration / horizon, tol["horizon_fraction"]));
    const double dt = system.max_stable_dt();
    const auto steps = static_cast<std::size_t>(std::llround(s.duration / dt));
    const tdsim::PulseParams pulse{s.pulse_center, s.pulse_width, 1.0, s.pulse_carrier, true};
    const auto t = tdsim::pulse_transmittance(system, pulse, grid.nearest(s.probe), dt, steps,
                                              s.frequencies);
    double worst = 0.0;
    std::string detail;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double oracle = reference::ContinuumGreen(stack, s.frequencies[k], units).transmittance();
      const double err = std::abs(t[k] - oracle) / oracle;
      detail += formatf("%sw=%g: %.5f vs %.5f", k ? "; " : "", s.frequencies[k], t[k], oracle);
      worst = std::max(worst, err);
    }
    report.checks.push_back(CheckResult::at_most(
        "transmission", formatf("slab.N=%zu", s.modes), worst, tol["transmission"], detail));
    return report;
  });
}

CheckReport check_advection(const AdvectionSettings& s, const UnitsSystem& units,
                            const Tolerances& tol) {
  return guarded("advection", [&] {
    CheckReport report;
    const Grid1D grid = grid_between(0.0, s.length, s.spacing);
    const tdsim::System system(grid, tdsim::ReservoirDiscretization{}, units);
    const tdsim::PulseParams pulse{0.25 * s.length, s.pulse_width, 1.0, s.pulse_carrier, true};
    auto state = system.init_pulse(pulse);
    const double dt = system.max_stable_dt();
    for (std::size_t k = 0; k < s.steps; ++k) system.step(state, dt);
    const auto e = system.electric_field(state);
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double u = grid.node(i) - pulse.center - units.c * state.time;
      const double exact = std::exp(-u * u / (2.0 * s.pulse_width * s.pulse_width)) *
                           std::cos(s.pulse_carrier * u);
      diff += (e[i] - exact) * (e[i] - exact);
      norm += exact * exact;
    }
    report.checks.push_back(CheckResult::at_most(
        "advection", "vacuum_translation", std::sqrt(diff / norm), tol["advection"],
        formatf("relative L2 error after %zu steps", s.steps)));
    return report;
  });
}

CheckReport quadratic_form_diagnostics(const MaterialLibrary& library, const KKSettings& s,
                                       const UnitsSystem& units) {
  CheckReport report;
  for (const auto& name : s.magnetic_presets) {
    try {
      const MaterialModel& m = library.at(name);
      const auto grid = pvquad::FrequencyGrid::mapped_square(8.0 * m.max_resonance(), 200);
      const auto q = modes::magnetic_quadratic_form(m, grid, units);
      report.diagnostics.push_back({"quadratic_form." + name + ".min_eigenvalue",
                                    q.min_eigenvalue,
                                    format("Schur complement %.6g", q.schur_complement)});
    } catch (const std::exception& e) {
      report.diagnostics.push_back({"quadratic_form." + name, std::nan(""), e.what()});
    }
  }
  return report;
}

CheckReport run_all_checks(const RunConfig& config) {
  const MaterialLibrary library = config.materials();
  const LayerStack stack = config.stack(library);
  VerifySettings s = VerifySettings::from_json(config.verify);
  s.energy.run = config.simulate;
  const auto& u = config.units;
  const auto& tol = config.tolerances;
  const auto sweep = config.sweep.frequencies();

  std::vector<std::function<CheckReport()>> groups{
      [&] { return check_kk(library, s.kk, tol); },
      [&] { return check_pole_identities(s.poles, tol); },
      [&] { return check_green(library, stack, sweep, config.grid, s.green, u, tol); },
      [&] { return check_fdt(library, s.fdt, u, tol); },
      [&] { return check_conservation(s.conservation, u, tol); },
      [&] { return check_energy(library, s.energy, u, tol); },
      [&] { return check_emergent(library, s.emergent, u, tol); },
      [&] { return check_transmission(library, s.transmission, u, tol); },
      [&] { return check_advection(s.advection, u, tol); },
      [&] { return quadratic_form_diagnostics(library, s.kk, u); },
  };

  CheckReport all;
  const auto start = std::chrono::steady_clock::now();
  if (config.jobs <= 1) {
    for (auto& g : groups) all.append(g());
  } else {
    // Groups are independent; results are appended in declaration order.
    std::vector<std::future<CheckReport>> pending;
    std::size_t next = 0;
    std::vector<CheckReport> done(groups.size());
    while (next < groups.size() || !pending.empty()) {
      while (next < groups.size() && pending.size() < config.jobs) {
        pending.push_back(std::async(std::launch::async, groups[next]));
        ++next;
      }
      const std::size_t base = next - pending.size();
      for (std::size_t k = 0; k < pending.size(); ++k) done[base + k] = pending[k].get();
      pending.clear();
    }
    for (auto& r : done) all.append(std::move(r));
  }
  all.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return all;
}

}  // namespace maxqed::cli
