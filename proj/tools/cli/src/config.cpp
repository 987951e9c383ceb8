#include "maxqed/cli/config.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>

#include "maxqed/errors.hpp"

namespace maxqed::cli {

namespace fs = std::filesystem;

namespace {

// Thresholds of every check the tool runs, keyed by the name used in configs
// and --tol-override.
const std::map<std::string, double, std::less<>>& default_tolerances() {
  static const std::map<std::string, double, std::less<>> table{
      {"kk_relative", 1e-3},
      {"pole_identity", 1e-10},
      {"green_order_low", 1.8},
      {"green_order_high", 2.2},
      {"reciprocity", 1e-10},
      {"reflection", 1e-8},
      {"green_residual", 1e-8},
      {"fdt_relative", 1e-6},
      {"fdt_order_low", 1.8},
      {"fdt_order_high", 2.2},
      {"mode_equation", 1e-8},
      {"normalization", 1e-12},
      {"noise_psd", 1e-12},
      {"charge_conservation", 1e-12},
      {"free_current", 1e-10},
      {"energy_drift", 1e-4},
      {"energy_order_low", 1.8},
      {"energy_order_high", 2.2},
      {"pulse_energy", 1e-2},
      {"absorption_ripple", 0.1},
      {"emergent_coarse", 2e-2},
      {"emergent_fine", 1e-2},
      {"transmission", 3e-2},
      {"advection", 1e-2},
      {"horizon_fraction", 0.75},
  };
  return table;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

LorentzPole pole_from_json(const Json& j) {
  LorentzPole p;
  if (!j.is_object() || !j.contains("wp") || !j.contains("wt") || !j.contains("gamma")) {
    throw ValidationError("a pole needs 'wp', 'wt' and 'gamma'");
  }
  p.plasma = j.at("wp").get<double>();
  p.resonance = j.at("wt").get<double>();
  p.damping = j.at("gamma").get<double>();
  return p;
}

std::vector<LorentzPole> poles_from_json(const Json& j, const char* key) {
  std::vector<LorentzPole> poles;
  if (!j.contains(key)) return poles;
  if (!j.at(key).is_array()) throw ValidationError(std::string("'") + key + "' must be a list");
  for (const auto& p : j.at(key)) poles.push_back(pole_from_json(p));
  return poles;
}

}  // namespace

Tolerances::Tolerances() : values_(default_tolerances()) {}

double Tolerances::operator[](std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown tolerance '" + std::string(key) + "'");
  return it->second;
}

void Tolerances::set(std::string_view key, double value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown tolerance '" + std::string(key) + "'");
  if (!std::isfinite(value)) {
    throw ValidationError("tolerance '" + std::string(key) + "' must be finite");
  }
  it->second = value;
}

void Tolerances::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override must look like KEY=VALUE, got '" + std::string(assignment) +
                          "'");
  }
  const std::string_view text = assignment.substr(eq + 1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ValidationError("override value '" + std::string(text) + "' is not a number");
  }
  set(assignment.substr(0, eq), value);
}

void SweepSpec::validate() const {
  if (!(omega_min > 0.0) || !(omega_max > omega_min) || !std::isfinite(omega_max)) {
    throw ValidationError("sweep bounds must satisfy 0 < omega_min < omega_max");
  }
  if (count < 2) throw ValidationError("sweep needs at least two points");
}

std::vector<double> SweepSpec::frequencies() const {
  validate();
  std::vector<double> w(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    w[k] = spacing == Spacing::Linear
               ? omega_min + t * (omega_max - omega_min)
               : omega_min * std::pow(omega_max / omega_min, t);
  }
  w.back() = omega_max;
  return w;
}

void GridSpec::validate() const {
  if (!(spacing > 0.0) || !(padding > 0.0)) {
    throw ValidationError("grid spacing and padding must be positive");
  }
}

Grid1D GridSpec::build(const LayerStack& stack) const {
  const Grid1D grid = nodes > 0 ? Grid1D(origin, spacing, nodes)
                                : Grid1D::covering(stack, spacing, padding);
  const auto interfaces = stack.interfaces();
  if (grid.node(0) >= interfaces.front() || grid.node(grid.size() - 1) <= interfaces.back()) {
    throw GridMismatch("grid [" + std::to_string(grid.node(0)) + ", " +
                       std::to_string(grid.node(grid.size() - 1)) +
                       "] does not enclose the stack interfaces");
  }
  if (!grid.interfaces_on_nodes(stack)) {
    throw GridMismatch("an interface falls between nodes; layer thicknesses must be "
                       "multiples of the spacing " + std::to_string(spacing));
  }
  return grid;
}

MaterialLibrary MaterialLibrary::from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("material library must be a JSON object");
  MaterialLibrary lib;
  for (const auto& [name, spec] : j.items()) {
    if (!spec.is_object()) throw ValidationError("material '" + name + "' must be an object");
    try {
      lib.materials_.emplace(name, MaterialModel(poles_from_json(spec, "electric_poles"),
                                                 poles_from_json(spec, "magnetic_poles")));
    } catch (const ValidationError& e) {
      throw ValidationError("material '" + name + "': " + e.what());
    }
  }
  return lib;
}

MaterialLibrary MaterialLibrary::load(const fs::path& path) { return from_json(read_json(path)); }

const MaterialModel& MaterialLibrary::at(std::string_view name) const {
  const auto it = materials_.find(name);
  if (it == materials_.end()) {
    throw ValidationError("unknown material '" + std::string(name) + "'");
  }
  return it->second;
}

bool MaterialLibrary::contains(std::string_view name) const {
  return materials_.find(name) != materials_.end();
}

std::vector<std::string> MaterialLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : materials_) out.push_back(name);
  return out;
}

LayerStack stack_from_json(const Json& j, const MaterialLibrary& library) {
  if (!j.is_object() || !j.contains("layers") || !j.at("layers").is_array()) {
    throw ValidationError("stack descriptor needs a 'layers' list");
  }
  std::vector<Layer> layers;
  for (const auto& entry : j.at("layers")) {
    Layer layer;
    if (entry.contains("halfspace")) {
      layer.material = library.at(entry.at("halfspace").get<std::string>());
    } else {
      if (!entry.contains("d") || !entry.contains("material")) {
        throw ValidationError("finite layers need 'd' and 'material'");
      }
      layer.thickness = entry.at("d").get<double>();
      layer.material = library.at(entry.at("material").get<std::string>());
    }
    layers.push_back(std::move(layer));
  }
  return LayerStack(std::move(layers), get_or(j, "origin", 0.0));
}

LayerStack load_stack(const fs::path& path, const MaterialLibrary& library) {
  return stack_from_json(read_json(path), library);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  Json tol = Json::object();
  for (const auto& [k, v] : tolerances.values()) tol[k] = v;
  const std::string canonical = raw.dump() + tol.dump() + units_name;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

MaterialLibrary RunConfig::materials() const {
  if (materials_path.empty()) throw ValidationError("config names no material library");
  return MaterialLibrary::load(materials_path);
}

LayerStack RunConfig::stack(const MaterialLibrary& library) const {
  if (stack_path.empty()) throw ValidationError("config names no stack");
  return load_stack(stack_path, library);
}

RunConfig config_from_json(const Json& j, const fs::path& base) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig c;
  c.raw = j;
  if (j.contains("materials")) c.materials_path = resolve(base, j.at("materials").get<std::string>());
  if (j.contains("stack")) c.stack_path = resolve(base, j.at("stack").get<std::string>());
  for (const auto* p : {&c.materials_path, &c.stack_path}) {
    if (!p->empty() && !fs::exists(*p)) {
      throw ValidationError("referenced file does not exist: " + p->string());
    }
  }
  c.output_dir = get_or<std::string>(j, "output", c.output_dir.string());
  c.units_name = get_or<std::string>(j, "units", c.units_name);
  try {
    c.units = UnitsSystem::from_name(c.units_name);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  c.material = get_or<std::string>(j, "material", c.material);

  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    c.sweep.omega_min = get_or(s, "omega_min", c.sweep.omega_min);
    c.sweep.omega_max = get_or(s, "omega_max", c.sweep.omega_max);
    c.sweep.count = get_or(s, "count", c.sweep.count);
    const auto spacing = get_or<std::string>(s, "spacing", "linear");
    if (spacing == "linear") {
      c.sweep.spacing = SweepSpec::Spacing::Linear;
    } else if (spacing == "log") {
      c.sweep.spacing = SweepSpec::Spacing::Log;
    } else {
      throw ValidationError("sweep spacing must be 'linear' or 'log'");
    }
  }
  c.sweep.validate();

  if (j.contains("grid")) {
    c.grid.spacing = get_or(j.at("grid"), "spacing", c.grid.spacing);
    c.grid.padding = get_or(j.at("grid"), "padding", c.grid.padding);
    c.grid.origin = get_or(j.at("grid"), "origin", c.grid.origin);
    c.grid.nodes = get_or(j.at("grid"), "nodes", c.grid.nodes);
  }
  c.grid.validate();
  if (j.contains("green")) c.green_source = get_or(j.at("green"), "source", c.green_source);

  if (j.contains("simulate")) {
    const Json& s = j.at("simulate");
    auto& t = c.simulate;
    t.material = get_or(s, "material", t.material);
    t.slab_thickness = get_or(s, "slab_thickness", t.slab_thickness);
    t.spacing = get_or(s, "spacing", t.spacing);
    t.domain_left = get_or(s, "domain_left", t.domain_left);
    t.domain_right = get_or(s, "domain_right", t.domain_right);
    t.dt = get_or(s, "dt", t.dt);
    t.periods = get_or(s, "periods", t.periods);
    t.period_omega = get_or(s, "period_omega", t.period_omega);
    t.steps = get_or(s, "steps", t.steps);
    t.record_every = get_or(s, "record_every", t.record_every);
    t.snapshot_every = get_or(s, "snapshot_every", t.snapshot_every);
    t.modes = get_or(s, "modes", t.modes);
    t.cut_factor = get_or(s, "cut_factor", t.cut_factor);
    if (s.contains("pulse")) {
      const Json& p = s.at("pulse");
      t.pulse_center = get_or(p, "center", t.pulse_center);
      t.pulse_width = get_or(p, "width", t.pulse_width);
      t.pulse_amplitude = get_or(p, "amplitude", t.pulse_amplitude);
      t.pulse_carrier = get_or(p, "carrier", t.pulse_carrier);
    }
    if (!(t.spacing > 0.0) || !(t.domain_right > t.domain_left) || !(t.periods > 0.0) ||
        !(t.period_omega > 0.0) || t.dt < 0.0 || t.record_every == 0) {
      throw ValidationError("simulate section has out-of-range values");
    }
  }
  if (j.contains("verify")) c.verify = j.at("verify");
  if (j.contains("tolerances")) {
    for (const auto& [key, value] : j.at("tolerances").items()) {
      c.tolerances.set(key, value.get<double>());
    }
  }
  c.jobs = get_or<std::size_t>(j, "jobs", c.jobs);
  return c;
}

RunConfig load_config(const fs::path& path) {
  RunConfig c = config_from_json(read_json(path), path.parent_path());
  c.source = path;
  return c;
}

}  // namespace maxqed::cli
