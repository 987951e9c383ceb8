#pragma once

// Run configuration for the maxqed command-line tool: JSON config files, the
// material library and stack descriptors they reference, and the central
// tolerance table.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maxqed/green1d.hpp"
#include "maxqed/materials.hpp"
#include "maxqed/units.hpp"

namespace maxqed::cli {

using Json = nlohmann::json;

/// Named tolerances with their default values. Every threshold used by the
/// tool lives here so that configs and --tol-override can change it.
class Tolerances {
 public:
  Tolerances();

  double operator[](std::string_view key) const;
  /// Throws ValidationError for unknown keys or non-finite values.
  void set(std::string_view key, double value);
  /// Parses KEY=VAL.
  void apply_override(std::string_view assignment);
  const std::map<std::string, double, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, double, std::less<>> values_;
};

/// Frequency sweep. Nodes are omega_min .. omega_max inclusive.
struct SweepSpec {
  enum class Spacing { Linear, Log };
  double omega_min = 0.1;
  double omega_max = 5.0;
  std::size_t count = 100;
  Spacing spacing = Spacing::Linear;

  /// Throws ValidationError unless 0 < omega_min < omega_max and count >= 2.
  void validate() const;
  std::vector<double> frequencies() const;
};

/// Either an explicit grid (nodes > 0) or one covering the stack with
/// `padding` of outer material on both sides.
struct GridSpec {
  double spacing = 0.02;
  double padding = 2.0;
  double origin = 0.0;
  std::size_t nodes = 0;
  void validate() const;
  /// Throws GridMismatch when an explicit grid does not enclose the stack or
  /// when an interface falls between nodes.
  Grid1D build(const LayerStack& stack) const;
};

/// Name -> material, loaded from a JSON object of
///   {"name": {"electric_poles": [{"wp": p, "wt": w, "gamma": g}, ...],
///             "magnetic_poles": [...]}, ...}.
class MaterialLibrary {
 public:
  static MaterialLibrary from_json(const Json& j);
  static MaterialLibrary load(const std::filesystem::path& path);

  const MaterialModel& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, MaterialModel, std::less<>> materials_;
};

/// Stack descriptor {"origin": z0, "layers": [{"halfspace": "name"},
/// {"d": thickness, "material": "name"}, ..., {"halfspace": "name"}]}.
LayerStack stack_from_json(const Json& j, const MaterialLibrary& library);
LayerStack load_stack(const std::filesystem::path& path, const MaterialLibrary& library);

/// Settings of `maxqed simulate`.
struct SimulateSpec {
  std::string material = "absorber";
  double slab_thickness = 2.0;
  double spacing = 0.05;
  double domain_left = -25.0;
  double domain_right = 27.0;
  double dt = 0.0;  ///< 0 selects the largest stable step
  double periods = 10.0;
  double period_omega = 1.0;  ///< one optical period is 2 pi / period_omega
  std::size_t steps = 0;      ///< when nonzero, replaces the run length set by `periods`
  std::size_t record_every = 10;
  std::size_t snapshot_every = 0;  ///< 0 disables field snapshots
  std::size_t modes = 200;
  double cut_factor = 8.0;
  double pulse_center = -10.0;
  double pulse_width = 1.0;
  double pulse_amplitude = 1.0;
  double pulse_carrier = 1.0;
};

struct RunConfig {
  std::filesystem::path source;  ///< config file, empty for built-in defaults
  std::filesystem::path materials_path;
  std::filesystem::path stack_path;
  std::filesystem::path output_dir = "maxqed-out";
  std::string units_name = "natural";
  UnitsSystem units = UnitsSystem::natural();
  std::string material = "lorentz_narrow";  ///< model used by kk-check
  SweepSpec sweep;
  GridSpec grid;
  double green_source = 0.5;  ///< source position of exported Green slices
  SimulateSpec simulate;
  Json verify = Json::object();  ///< raw section, read by the verify workflow
  Tolerances tolerances;
  Json raw = Json::object();  ///< the document the config was built from
  std::size_t jobs = 1;

  /// FNV-1a 64 of the canonical dump of `raw` plus applied overrides, as hex.
  std::string hash() const;

  MaterialLibrary materials() const;
  LayerStack stack(const MaterialLibrary& library) const;
};

/// Builds a config from a document; relative paths resolve against `base`.
/// Throws ValidationError on malformed input or missing referenced files.
RunConfig config_from_json(const Json& j, const std::filesystem::path& base);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a digest of a byte string.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace maxqed::cli
