#include "maxqed/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <future>
#include <numbers>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "maxqed/cli/csv.hpp"
#include "maxqed/errors.hpp"
#include "maxqed/green1d.hpp"
#include "maxqed/materials.hpp"
#include "maxqed/modes.hpp"
#include "maxqed/pvquad.hpp"
#include "maxqed/reference.hpp"
#include "maxqed/tdsim.hpp"

#ifndef MAXQED_DEFAULT_CONFIG
#define MAXQED_DEFAULT_CONFIG ""
#endif

namespace maxqed::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Evaluates fn(k) for k < n on up to `jobs` threads; results keep index order.
template <typename F>
auto parallel_map(std::size_t jobs, std::size_t n, F&& fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(n);
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fn(k);
    return out;
  }
  std::vector<std::future<void>> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t k = t; k < n; k += jobs) out[k] = fn(k);
    }));
  }
  for (auto& w : workers) w.get();
  return out;
}

fs::path output_path(const RunConfig& c, const std::string& file) { return c.output_dir / file; }

struct KKRow {
  double omega, closed, reconstructed, abs_err, rel_err;
};

std::vector<KKRow> kk_rows(const MaterialModel& m, const std::vector<double>& sweep,
                           bool magnetic, std::size_t jobs) {
  const auto grid = kk_grid(m);
  const auto samples = magnetic ? sample_kappa_loss(m, grid) : sample_epsilon_imag(m, grid);
  return parallel_map(jobs, sweep.size(), [&](std::size_t k) {
    const double w = sweep[k];
    const cdouble response = magnetic ? 1.0 - m.kappa(w) : m.epsilon(w) - 1.0;
    const double rec = kk_reconstruct(samples, w);
    const double abs_err = std::abs(rec - response.real());
    const double scale = std::abs(response);
    return KKRow{w, response.real(), rec, abs_err, scale > 0.0 ? abs_err / scale : abs_err};
  });
}

}  // namespace

int exit_code_for_failures(std::size_t failures) {
  if (failures == 0) return kExitOk;
  return static_cast<int>(std::clamp<std::size_t>(failures, 2, 255));
}

int cmd_kk_check(const RunConfig& config, std::ostream& log) {
  const MaterialLibrary library = config.materials();
  const MaterialModel& m = library.at(config.material);
  const auto sweep = config.sweep.frequencies();
  const double tol = config.tolerances["kk_relative"];

  std::size_t failures = 0;
  const auto channel = [&](bool magnetic, const std::string& file) {
    const auto rows = kk_rows(m, sweep, magnetic, config.jobs);
    CsvWriter csv(output_path(config, file), config.hash(), config.units_name, "kk-check",
                  {"omega", "re_closed_form", "re_reconstructed", "abs_err", "rel_err"});
    double worst = 0.0;
    for (const auto& r : rows) {
      csv.row({r.omega, r.closed, r.reconstructed, r.abs_err, r.rel_err});
      worst = std::max(worst, r.rel_err);
    }
    const bool ok = worst <= tol;
    if (!ok) ++failures;
    log << (ok ? "PASS" : "FAIL") << "  kk " << (magnetic ? "1 - Re kappa" : "Re epsilon - 1")
        << " of '" << config.material << "': max relative error " << fmt("%.3e", worst)
        << " (limit " << fmt("%.1e", tol) << ") -> " << csv.path().string() << '\n';
  };
  channel(false, "kk_check.csv");
  if (m.is_magnetic()) channel(true, "kk_check_kappa.csv");
  return exit_code_for_failures(failures);
}

int cmd_green(const RunConfig& config, std::ostream& log) {
  const MaterialLibrary library = config.materials();
  const LayerStack stack = config.stack(library);
  const Grid1D grid = config.grid.build(stack);
  const auto sweep = config.sweep.frequencies();
  const std::size_t source = grid.nearest(config.green_source);
  const auto& u = config.units;

  struct Slice {
    GreenSolution solution;
    std::vector<cdouble> continuum;
  };
  const auto slices = parallel_map(config.jobs, sweep.size(), [&](std::size_t k) {
    Slice s{solve_green(stack, sweep[k], grid, u), {}};
    const reference::ContinuumGreen exact(stack, sweep[k], u);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      s.continuum.push_back(exact(grid.node(i), grid.node(source)));
    }
    return s;
  });

  CsvWriter csv(output_path(config, "green_slices.csv"), config.hash(), config.units_name, "green",
                {"omega", "z", "z_source", "re_g", "im_g", "re_g_continuum", "im_g_continuum"});
  CsvWriter spectrum(output_path(config, "vacuum_spectrum.csv"), config.hash(), config.units_name,
                     "green", {"omega", "z", "spectrum", "im_g", "reciprocity_error"});
  double reciprocity = 0.0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const auto& g = slices[k].solution;
    reciprocity = std::max(reciprocity, g.reciprocity_error);
    const auto s = static_cast<Eigen::Index>(source);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const cdouble v = g.kernel(static_cast<Eigen::Index>(i), s);
      const cdouble c = slices[k].continuum[i];
      csv.row({sweep[k], grid.node(i), grid.node(source), v.real(), v.imag(), c.real(), c.imag()});
    }
    spectrum.row({sweep[k], grid.node(source), modes::vacuum_spectrum(g, source, u),
                  g.kernel(s, s).imag(), g.reciprocity_error});
  }

  // Residual of the fluctuation-dissipation identity at the middle of the sweep.
  const auto& mid = slices[sweep.size() / 2].solution;
  const auto bundle = modes::mode_fE(mid, u);
  const auto fdt = modes::fdt_identity_check(bundle, mid, u);
  CsvWriter heat(output_path(config, "fdt_residual.csv"), config.hash(), config.units_name,
                 "green", {"omega", "z", "z_prime", "residual"});
  for (Eigen::Index i = 0; i < fdt.residual.rows(); ++i) {
    for (Eigen::Index j = 0; j < fdt.residual.cols(); ++j) {
      heat.row({mid.omega, grid.node(static_cast<std::size_t>(i)),
                grid.node(static_cast<std::size_t>(j)), fdt.residual(i, j).real()});
    }
  }

  log << "green: " << sweep.size() << " frequencies on " << grid.size() << " nodes (h = "
      << grid.spacing() << "), source at z = " << grid.node(source)
      << ", max reciprocity error " << fmt("%.2e", reciprocity) << ", FDT residual "
      << fmt("%.2e", fdt.relative()) << " at w = " << mid.omega << '\n'
      << "  -> " << csv.path().string() << ", " << spectrum.path().string() << ", "
      << heat.path().string() << '\n';
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  const MaterialLibrary library = config.materials();
  const SimulateSpec& s = config.simulate;
  const MaterialModel& m = library.at(s.material);
  const LayerStack stack = LayerStack::slab(m, s.slab_thickness);
  const Grid1D grid(s.domain_left, s.spacing,
                    static_cast<std::size_t>(std::llround((s.domain_right - s.domain_left) / s.spacing)) + 1);
  const auto system = tdsim::System::from_stack(stack, grid, config.units, {s.modes, s.cut_factor});
  const double dt = s.dt > 0.0 ? s.dt : system.max_stable_dt();
  system.check_dt(dt);  // refuses to start outside the stability bound

  const double duration = s.steps > 0 ? static_cast<double>(s.steps) * dt
                                      : s.periods * 2.0 * std::numbers::pi / s.period_omega;
  const double horizon = system.reservoir().recurrence_horizon(2.0 * m.max_resonance());
  log << "simulate: " << grid.size() << " nodes, " << system.reservoir().modes()
      << " reservoir modes, dt = " << dt << ", run " << duration << ", recurrence horizon "
      << horizon << '\n';
  if (duration > horizon) {
    log << "warning: run extends past the recurrence horizon; late-time absorption is not "
           "irreversible\n";
  }

  auto state = system.init_pulse(
      {s.pulse_center, s.pulse_width, s.pulse_amplitude, s.pulse_carrier, true});
  const auto steps =
      s.steps > 0 ? s.steps : static_cast<std::size_t>(std::llround(duration / dt));
  CsvWriter energy(output_path(config, "energy.csv"), config.hash(), config.units_name,
                   "simulate", {"t", "em_energy", "reservoir_energy", "interaction_energy", "total"});
  std::unique_ptr<CsvWriter> snapshots;
  if (s.snapshot_every > 0) {
    snapshots = std::make_unique<CsvWriter>(output_path(config, "fields.csv"), config.hash(),
                                            config.units_name, "simulate",
                                            std::vector<std::string>{"t", "z", "E", "P"});
  }
  const auto record = [&] {
    const auto e = system.energy(state);
    energy.row({state.time, e.electromagnetic, e.reservoir, e.interaction, e.total()});
  };
  const auto snapshot = [&] {
    const auto e = system.electric_field(state);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      snapshots->row({state.time, grid.node(i), e[i], system.polarization(state, i)});
    }
  };
  const double e0 = system.total_energy(state);
  record();
  if (snapshots) snapshot();
  for (std::size_t k = 1; k <= steps; ++k) {
    system.step(state, dt);
    if (k % s.record_every == 0 || k == steps) record();
    if (snapshots && k % s.snapshot_every == 0) snapshot();
  }
  const auto end = system.energy(state);
  log << "  energy " << fmt("%.8g", e0) << " -> " << fmt("%.8g", end.total())
      << " (relative change " << fmt("%.2e", (end.total() - e0) / e0) << "), field share "
      << fmt("%.4f", end.electromagnetic / end.total()) << "\n  -> " << energy.path().string()
      << '\n';
  return kExitOk;
}

int cmd_verify_identities(const RunConfig& config, std::ostream& log) {
  const PoleSettings settings = VerifySettings::from_json(config.verify).poles;
  const double tol = config.tolerances["pole_identity"];
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> draw(0.0, settings.omega_range);
  CsvWriter csv(output_path(config, "pole_identities.csv"), config.hash(), config.units_name,
                "verify-identities",
                {"omega", "omega_p", "omega_pp", "eta", "a1", "a2", "a3", "a4", "b1", "b2", "b3",
                 "b4"});
  std::vector<std::array<double, 3>> triples(settings.triples);
  for (auto& t : triples) t = {draw(rng), draw(rng), draw(rng)};
  double worst = 0.0;
  for (double eta : settings.etas) {
    for (const auto& [w, wp, wpp] : triples) {
      const auto a = pvquad::pole_identity_A(w, wp, wpp, eta);
      pvquad::IdentityResiduals b;
      try {
        b = pvquad::pole_identity_B(w, wp, wpp, eta);
      } catch (const DegeneratePair&) {
        b = pvquad::pole_identity_B(w, wp, wpp, eta, pvquad::IdentitySubset::SumDenominatorsOnly);
      }
      const auto cell = [](const pvquad::IdentityResiduals& r, std::size_t k) {
        return r.evaluated[k] ? r.residual[k] : std::numeric_limits<double>::quiet_NaN();
      };
      csv.row({w, wp, wpp, eta, cell(a, 0), cell(a, 1), cell(a, 2), cell(a, 3), cell(b, 0),
               cell(b, 1), cell(b, 2), cell(b, 3)});
      worst = std::max({worst, a.max(), b.max()});
    }
  }
  const bool ok = worst <= tol;
  log << (ok ? "PASS" : "FAIL") << "  pole identities: " << triples.size() << " triples x "
      << settings.etas.size() << " eta values, max residual " << fmt("%.3e", worst) << " (limit "
      << fmt("%.1e", tol) << ") -> " << csv.path().string() << '\n';
  return exit_code_for_failures(ok ? 0 : 1);
}

Json report_to_json(const CheckReport& report, const RunConfig& config) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json j{{"group", c.group},  {"name", c.name},     {"passed", c.passed},
           {"limit", c.limit_text()}, {"detail", c.detail}, {"seconds", c.seconds}};
    j["value"] = std::isfinite(c.value) ? Json(c.value) : Json(nullptr);
    checks.push_back(std::move(j));
  }
  Json diagnostics = Json::array();
  for (const auto& d : report.diagnostics) {
    Json j{{"name", d.name}, {"detail", d.detail}};
    j["value"] = std::isfinite(d.value) ? Json(d.value) : Json(nullptr);
    diagnostics.push_back(std::move(j));
  }
  return Json{{"config_hash", config.hash()},
              {"units", config.units_name},
              {"checks_total", report.checks.size()},
              {"checks_failed", report.failures()},
              {"exit_code", exit_code_for_failures(report.failures())},
              {"seconds", report.seconds},
              {"checks", std::move(checks)},
              {"diagnostics", std::move(diagnostics)}};
}

int cmd_verify(const RunConfig& config, std::ostream& log) {
  const CheckReport report = run_all_checks(config);
  for (const auto& c : report.checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%s  %-13s %-34s %12.4e  %-20s %7.2fs", c.passed ? "PASS" : "FAIL",
                  c.group.c_str(), c.name.c_str(), c.value, c.limit_text().c_str(), c.seconds);
    log << line;
    if (!c.passed && !c.detail.empty()) log << "  (" << c.detail << ')';
    log << '\n';
  }
  for (const auto& d : report.diagnostics) {
    log << "INFO  " << d.name << " = " << fmt("%.6g", d.value);
    if (!d.detail.empty()) log << "  (" << d.detail << ')';
    log << '\n';
  }
  const fs::path summary = output_path(config, "verify_summary.json");
  fs::create_directories(summary.parent_path());
  std::ofstream(summary) << report_to_json(report, config).dump(2) << '\n';
  log << report.failures() << " of " << report.checks.size() << " checks failed in "
      << fmt("%.1f", report.seconds) << " s -> " << summary.string() << '\n';
  return exit_code_for_failures(report.failures());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"maxqed: macroscopic QED in absorbing 1D media, verification and simulation"};
  app.name("maxqed");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path = MAXQED_DEFAULT_CONFIG;
  std::string out_dir;
  std::string units;
  std::size_t jobs = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (MAXQED_OUT overrides)");
  app.add_option("--units", units, "unit system")->check(CLI::IsMember({"natural", "si"}));
  app.add_option("--jobs", jobs, "worker threads for sweeps and check groups")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol-override", overrides, "KEY=VALUE tolerance override (repeatable)");

  auto* kk = app.add_subcommand("kk-check", "Kramers-Kronig audit of one material over the sweep");
  auto* green = app.add_subcommand("green", "Green function slices, spectra and FDT residual");
  auto* simulate = app.add_subcommand("simulate", "time-domain pulse run with an energy audit");
  auto* identities =
      app.add_subcommand("verify-identities", "residual table of the pole-product identities");
  auto* verify = app.add_subcommand("verify", "run every check and write a JSON summary");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  RunConfig config;
  try {
    if (config_path.empty()) {
      throw ValidationError("no --config given and no default config available");
    }
    config = load_config(config_path);
    if (!units.empty()) {
      config.units_name = units;
      config.units = UnitsSystem::from_name(units);
    }
    if (jobs > 0) config.jobs = jobs;
    for (const auto& o : overrides) config.tolerances.apply_override(o);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (const char* env = std::getenv("MAXQED_OUT"); env != nullptr && *env != '\0') {
      config.output_dir = env;
    }
  } catch (const std::exception& e) {
    err << "maxqed: invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (kk->parsed()) return cmd_kk_check(config, out);
    if (green->parsed()) return cmd_green(config, out);
    if (simulate->parsed()) return cmd_simulate(config, out);
    if (identities->parsed()) return cmd_verify_identities(config, out);
    if (verify->parsed()) return cmd_verify(config, out);
  } catch (const ValidationError& e) {
    err << "maxqed: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const GridMismatch& e) {
    err << "maxqed: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const StabilityViolation& e) {
    err << "maxqed: refusing to start: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    err << "maxqed: malformed input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "maxqed: " << e.what() << '\n';
    return exit_code_for_failures(1);
  }
  return kExitInvalid;
}

}  // namespace maxqed::cli
