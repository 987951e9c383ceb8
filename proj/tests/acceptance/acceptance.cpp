// Acceptance run: one PASS/FAIL line per criterion, each judged on its
// numerical checks and on its wall-clock budget. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "maxqed/cli/checks.hpp"
#include "maxqed/cli/config.hpp"

using namespace maxqed;
using namespace maxqed::cli;

namespace {

struct Criterion {
  int number;
  const char* title;
  double budget_seconds;
  std::function<CheckReport()> run;
};

void print(const Criterion& c, const CheckReport& report, double seconds) {
  const bool in_time = seconds < c.budget_seconds;
  const bool ok = report.failures() == 0 && !report.checks.empty() && in_time;
  std::printf("%s  criterion %d: %s  [%zu checks, %zu failed, %.2f s of %.0f s]\n",
              ok ? "PASS" : "FAIL", c.number, c.title, report.checks.size(), report.failures(),
              seconds, c.budget_seconds);
  for (const auto& r : report.checks) {
    if (!r.passed || !ok) {
      std::printf("        %s %s.%s = %.4e (%s) %s\n", r.passed ? "ok  " : "FAIL", r.group.c_str(),
                  r.name.c_str(), r.value, r.limit_text().c_str(), r.detail.c_str());
    }
  }
  if (!in_time) std::printf("        over the time budget\n");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : MAXQED_DEFAULT_CONFIG;
  const RunConfig config = load_config(path);
  const MaterialLibrary library = config.materials();
  const LayerStack stack = config.stack(library);
  VerifySettings s = VerifySettings::from_json(config.verify);
  s.energy.run = config.simulate;
  const auto& tol = config.tolerances;
  const auto& u = config.units;

  const std::vector<Criterion> criteria{
      {1, "Kramers-Kronig reconstruction of the Lorentz presets", 10.0,
       [&] {
         KKSettings electric = s.kk;
         electric.magnetic_presets.clear();
         return check_kk(library, electric, tol);
       }},
      {2, "pole-product identities over random triples", 1.0,
       [&] { return check_pole_identities(s.poles, tol); }},
      {3, "Green solver convergence, reciprocity and reflection", 30.0,
       [&] {
         return check_green(library, stack, config.sweep.frequencies(), config.grid, s.green, u,
                            tol);
       }},
      {4, "emergent permittivity from the reservoir simulation", 300.0,
       [&] { return check_emergent(library, s.emergent, u, tol, false); }},
      {5, "Hamiltonian conservation during absorption", 120.0,
       [&] { return check_energy(library, s.energy, u, tol); }},
      {6, "fluctuation-dissipation chain on three slabs", 60.0,
       [&] { return check_fdt(library, s.fdt, u, tol); }},
      {7, "discrete charge conservation", 1.0,
       [&] { return check_conservation(s.conservation, u, tol); }},
      {8, "full verify suite on the shipped configuration", 600.0,
       [&] { return run_all_checks(config); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    const CheckReport report = c.run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    print(c, report, seconds);
    if (report.failures() != 0 || report.checks.empty() || seconds >= c.budget_seconds) ++failed;
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}
