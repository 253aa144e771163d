#pragma once

#include <stripeforge/bench_shell.hpp>
#include <stripeforge/design.hpp>
#include <stripeforge/optimizer.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stripeforge::cli {

using nlohmann::json;

struct MeshSpec {
  std::string type = "obj";  // obj | grid | cylinder
  std::filesystem::path path;
  int nx = 8, ny = 8;
  double lx = 1.0, ly = 1.0;
  double radius = 1.0, angle = kPi, length = 1.0;
  int na = 16;
};

struct FieldSpec {
  std::string type = "constant";  // constant | concentric | noise | file
  double angle = 0.0;
  double base = 0.0;
  double amplitude = 0.5;
  std::filesystem::path path;
};

struct RunConfig {
  json effective;  // defaults filled, relative paths as given
  std::filesystem::path base_dir;

  std::optional<MeshSpec> mesh;
  std::optional<std::array<Vec3, 2>> lattice;

  double h = 0.01;
  std::optional<fem::Material> soft, stiff;

  double frequency = 2.0 * kPi;
  double a1 = 0.05, a2 = 0.0;
  FieldSpec field;
  double theta = 0.0;
  int pin = -1;

  inverse::DesignObjective objective;
  bool isotropic_targets = false;  // targets = mean initial stiffness
  std::filesystem::path target_mesh;

  double load_angle = 0.0, load_stretch = 1.05;
  std::vector<double> homogenize_angles;
  double homogenize_strain = 0.01;

  sim::HomogenizationOptions homogenization;
  opt::OptOptions optimizer;
  bool optimize_theta = true;

  int probes = 10;
  double check_tol = 1e-4, check_step = 1e-4, check_floor = 1e-3;

  sim::BenchShellOptions bench;

  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
};

/// Every key the schema accepts, as dotted paths.
const std::vector<std::string>& known_keys();

/// Closest known key to `key` (dotted), or empty when nothing is near.
std::string suggest_key(const std::string& key);

/// Validates against the schema and fills defaults. Throws ValidationError
/// with a dotted field path.
RunConfig parse_config(const json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Stable 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
/// Hash of the effective config without the output location.
std::string config_hash(const json& effective);

}  // namespace stripeforge::cli
