#include "config.hpp"

#include <Eigen/Geometry>

#include <stripeforge/error.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace stripeforge::cli {

namespace {

// child keys accepted below each object path
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"mesh", "lattice", "materials", "stripes", "objective", "load", "homogenize", "solver",
            "optimizer", "grad_check", "bench_shell", "seed", "output"}},
      {"mesh", {"type", "path", "nx", "ny", "lx", "ly", "radius", "angle", "length", "na"}},
      {"materials", {"h", "soft", "stiff"}},
      {"materials.soft", {"mu", "lambda", "young", "poisson", "beta_f", "n_f"}},
      {"materials.stiff", {"mu", "lambda", "young", "poisson", "beta_f", "n_f"}},
      {"stripes", {"frequency", "a1", "a2", "dhat", "field", "theta", "pin"}},
      {"stripes.field", {"type", "angle", "base", "amplitude", "path"}},
      {"objective",
       {"kind", "weight", "w_sing", "w_sm", "angles", "targets", "strain", "load_angle", "load_stretch", "target_mesh"}},
      {"load", {"angle", "stretch"}},
      {"homogenize", {"angles", "strain"}},
      {"solver", {"tol", "max_iterations", "perturb", "perturb_scale"}},
      {"optimizer",
       {"method", "memory", "max_iterations", "initial_step", "grad_tol", "stagnation_tol", "armijo", "max_backtracks",
        "optimize_theta"}},
      {"grad_check", {"probes", "tol", "step", "floor"}},
      {"bench_shell", {"radius", "h", "length", "width", "young", "poisson", "ny", "resolutions"}},
  };
  return s;
}

json defaults() {
  return json{
      {"materials", {{"h", 0.01}}},
      {"stripes", {{"frequency", 2.0 * kPi}, {"a1", 0.05}, {"a2", 0.0}, {"dhat", 0.1}, {"theta", 0.0}, {"pin", -1}}},
      {"objective",
       {{"kind", "stiffness_profile"},
        {"weight", 1.0},
        {"w_sing", 1.0},
        {"w_sm", 0.0},
        {"angles", 8},
        {"targets", "isotropic"},
        {"strain", 0.01},
        {"load_angle", 0.0},
        {"load_stretch", 1.05}}},
      {"load", {{"angle", 0.0}, {"stretch", 1.05}}},
      {"homogenize", {{"angles", 8}, {"strain", 0.01}}},
      {"solver", {{"tol", 1e-8}, {"max_iterations", 100}, {"perturb", true}, {"perturb_scale", 1e-6}}},
      {"optimizer",
       {{"method", "lbfgs"},
        {"memory", 10},
        {"max_iterations", 100},
        {"initial_step", 0.1},
        {"grad_tol", 1e-8},
        {"stagnation_tol", 1e-10},
        {"armijo", 1e-4},
        {"max_backtracks", 30},
        {"optimize_theta", true}}},
      {"grad_check", {{"probes", 10}, {"tol", 1e-4}, {"step", 1e-4}, {"floor", 1e-3}}},
      {"bench_shell",
       {{"radius", 0.1},
        {"h", 0.6e-3},
        {"length", 0.07},
        {"width", 0.07},
        {"young", 1e6},
        {"poisson", 0.0},
        {"ny", 2},
        {"resolutions", {32, 64, 128, 256, 512, 1024}}}},
      {"seed", 1},
      {"output", "out"},
  };
}

size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ValidationError(path + ": " + what); }

void check_keys(const json& j, const std::string& path) {
  const auto& s = schema();
  const auto it = s.find(path);
  if (it == s.end()) return;
  if (!j.is_object()) {
    if (path == "mesh" && j.is_string()) return;
    fail(path, "expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!it->second.count(key)) {
      const std::string full = join(path, key);
      std::string msg = "unknown key '" + full + "'";
      const std::string hint = suggest_key(full);
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      throw ValidationError(msg);
    }
    check_keys(value, join(path, key));
  }
}

void fill_defaults(json& j, const json& d) {
  for (const auto& [key, value] : d.items()) {
    if (!j.contains(key)) {
      j[key] = value;
    } else if (value.is_object() && j[key].is_object()) {
      fill_defaults(j[key], value);
    }
  }
}

const json& at(const json& j, const std::string& path) {
  const json* cur = &j;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!cur->is_object() || !cur->contains(part)) fail(path, "required");
    cur = &(*cur)[part];
  }
  return *cur;
}

double number(const json& j, const std::string& path) {
  const json& v = at(j, path);
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) {
    std::ostringstream msg;
    msg << "must be positive (got " << v << ")";
    fail(path, msg.str());
  }
  return v;
}

double non_negative(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v >= 0.0)) fail(path, "must be non-negative");
  return v;
}

int integer(const json& j, const std::string& path) {
  const json& v = at(j, path);
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  const json& v = at(j, path);
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  const json& v = at(j, path);
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() < 2 || v.size() > 3) fail(path, "expected [x, y] or [x, y, z]");
  Vec3 out = Vec3::Zero();
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path, "expected numbers");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

// integer n -> n angles k pi / n on [0, pi); list -> as given, strictly increasing
std::vector<double> angles(const json& j, const std::string& path) {
  const json& v = at(j, path);
  std::vector<double> out;
  if (v.is_number_integer()) {
    const int n = v.get<int>();
    if (n < 1) fail(path, "needs at least one angle");
    for (int k = 0; k < n; ++k) out.push_back(kPi * k / n);
    return out;
  }
  if (!v.is_array() || v.empty()) fail(path, "expected a count or a non-empty list of angles");
  for (const auto& a : v) {
    if (!a.is_number()) fail(path, "expected numbers");
    out.push_back(a.get<double>());
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) fail(path, "angles must be strictly increasing");
  }
  return out;
}

fem::Material phase(const json& j, const std::string& path) {
  const json& v = at(j, path);
  fem::Material m;
  const bool lame = v.contains("mu") || v.contains("lambda");
  const bool engineering = v.contains("young") || v.contains("poisson");
  if (lame == engineering) fail(path, "give either (mu, lambda) or (young, poisson)");
  if (lame) {
    m.mu = positive(j, path + ".mu");
    m.lambda = non_negative(j, path + ".lambda");
  } else {
    const double E = positive(j, path + ".young");
    const double nu = number(j, path + ".poisson");
    if (!(nu >= 0.0 && nu < 0.5)) fail(path + ".poisson", "must lie in [0, 0.5)");
    m = fem::from_young_poisson(E, nu);
  }
  if (v.contains("beta_f")) m.beta_f = non_negative(j, path + ".beta_f");
  if (v.contains("n_f")) {
    const Vec3 n = vec3(v["n_f"], path + ".n_f");
    if (!(n.norm() > 0.0)) fail(path + ".n_f", "must be nonzero");
    m.n_f = n.normalized();
  }
  return m;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [path, children] : schema()) {
      for (const auto& c : children) k.push_back(join(path, c));
    }
    return k;
  }();
  return keys;
}

std::string suggest_key(const std::string& key) {
  const auto dot = key.rfind('.');
  const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
  std::string best;
  size_t best_d = std::max<size_t>(2, leaf.size() / 3) + 1;
  // prefer the same section, then any section with the same leaf
  for (const std::string& k : known_keys()) {
    const auto kd = k.rfind('.');
    const std::string kleaf = kd == std::string::npos ? k : k.substr(kd + 1);
    const bool same_section = k.substr(0, kd == std::string::npos ? 0 : kd) ==
                              key.substr(0, dot == std::string::npos ? 0 : dot);
    const size_t d = edit_distance(leaf, kleaf) + (same_section ? 0 : 1);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

RunConfig parse_config(const json& user, const std::filesystem::path& base_dir) {
  if (!user.is_object()) throw ValidationError("config: expected a JSON object");
  check_keys(user, "");
  json j = user;
  fill_defaults(j, defaults());

  RunConfig c;
  c.base_dir = base_dir;

  if (j.contains("mesh")) {
    MeshSpec m;
    const json& mj = j["mesh"];
    if (mj.is_string()) {
      m.path = mj.get<std::string>();
    } else {
      m.type = mj.contains("type") ? string(j, "mesh.type") : std::string("obj");
      if (m.type == "obj") {
        m.path = string(j, "mesh.path");
      } else if (m.type == "grid") {
        json& g = j["mesh"];
        if (!g.contains("nx")) g["nx"] = 8;
        if (!g.contains("ny")) g["ny"] = g["nx"];
        if (!g.contains("lx")) g["lx"] = 1.0;
        if (!g.contains("ly")) g["ly"] = g["lx"];
        m.nx = integer(j, "mesh.nx");
        m.ny = integer(j, "mesh.ny");
        if (m.nx < 1 || m.ny < 1) fail("mesh", "grid needs nx, ny >= 1");
        m.lx = positive(j, "mesh.lx");
        m.ly = positive(j, "mesh.ly");
      } else if (m.type == "cylinder") {
        m.radius = positive(j, "mesh.radius");
        m.angle = positive(j, "mesh.angle");
        m.length = positive(j, "mesh.length");
        m.na = integer(j, "mesh.na");
        m.ny = integer(j, "mesh.ny");
        if (m.na < 1 || m.ny < 1) fail("mesh", "cylinder needs na, ny >= 1");
      } else {
        fail("mesh.type", "expected obj, grid or cylinder");
      }
    }
    if (m.type == "obj" && !m.path.is_absolute()) m.path = base_dir / m.path;
    if (m.type == "obj" && !std::filesystem::is_regular_file(m.path))
      fail(mj.is_string() ? "mesh" : "mesh.path", "file not found (" + m.path.string() + ")");
    c.mesh = m;
  }

  if (j.contains("lattice")) {
    const json& l = j["lattice"];
    if (!l.is_array() || l.size() != 2) fail("lattice", "expected two vectors");
    std::array<Vec3, 2> lat{vec3(l[0], "lattice[0]"), vec3(l[1], "lattice[1]")};
    if (!(lat[0].cross(lat[1]).norm() > 0.0)) fail("lattice", "vectors must be independent");
    c.lattice = lat;
  }

  c.h = positive(j, "materials.h");
  if (j["materials"].contains("soft")) c.soft = phase(j, "materials.soft");
  if (j["materials"].contains("stiff")) c.stiff = phase(j, "materials.stiff");

  c.frequency = positive(j, "stripes.frequency");
  c.a1 = number(j, "stripes.a1");
  if (!(c.a1 > 0.0 && c.a1 <= 1.0)) fail("stripes.a1", "must lie in (0, 1]");
  c.a2 = number(j, "stripes.a2");
  c.theta = number(j, "stripes.theta");
  c.pin = integer(j, "stripes.pin");
  {
    json& f = j["stripes"]["field"];
    if (f.is_null()) f = json{{"type", "constant"}};
    if (!f.contains("type")) f["type"] = "constant";
    c.field.type = string(j, "stripes.field.type");
    if (c.field.type == "constant") {
      if (!f.contains("angle")) f["angle"] = 0.0;
      c.field.angle = number(j, "stripes.field.angle");
    } else if (c.field.type == "noise") {
      if (!f.contains("base")) f["base"] = 0.0;
      if (!f.contains("amplitude")) f["amplitude"] = 0.5;
      c.field.base = number(j, "stripes.field.base");
      c.field.amplitude = non_negative(j, "stripes.field.amplitude");
    } else if (c.field.type == "file") {
      c.field.path = string(j, "stripes.field.path");
      if (!c.field.path.is_absolute()) c.field.path = base_dir / c.field.path;
    } else if (c.field.type != "concentric") {
      fail("stripes.field.type", "expected constant, concentric, noise or file");
    }
  }

  auto& o = c.objective;
  const std::string kind = string(j, "objective.kind");
  if (kind == "stiffness_profile") {
    o.kind = inverse::ObjectiveKind::kStiffnessProfile;
  } else if (kind == "generalized_stiffness") {
    o.kind = inverse::ObjectiveKind::kGeneralizedStiffness;
  } else if (kind == "target_deformation") {
    o.kind = inverse::ObjectiveKind::kTargetDeformation;
  } else {
    fail("objective.kind", "expected stiffness_profile, generalized_stiffness or target_deformation");
  }
  o.weight = non_negative(j, "objective.weight");
  o.w_sing = non_negative(j, "objective.w_sing");
  o.w_sm = non_negative(j, "objective.w_sm");
  o.dhat = positive(j, "stripes.dhat");
  o.angles = angles(j, "objective.angles");
  {
    const json& t = j["objective"]["targets"];
    if (t.is_string()) {
      if (t.get<std::string>() != "isotropic") fail("objective.targets", "expected a list or \"isotropic\"");
      c.isotropic_targets = true;
      o.targets.assign(o.angles.size(), 0.0);
    } else if (t.is_number()) {
      o.targets.assign(o.angles.size(), t.get<double>());
    } else if (t.is_array()) {
      for (const auto& v : t) {
        if (!v.is_number()) fail("objective.targets", "expected numbers");
        o.targets.push_back(v.get<double>());
      }
      if (o.targets.size() != o.angles.size()) fail("objective.targets", "needs one value per objective angle");
    } else {
      fail("objective.targets", "expected a list, a number or \"isotropic\"");
    }
  }
  o.strain = number(j, "objective.strain");
  if (!(o.strain > -1.0) || o.strain == 0.0) fail("objective.strain", "must be nonzero and above -1");
  o.load_angle = number(j, "objective.load_angle");
  o.load_stretch = positive(j, "objective.load_stretch");
  if (j["objective"].contains("target_mesh")) {
    c.target_mesh = string(j, "objective.target_mesh");
    if (!c.target_mesh.is_absolute()) c.target_mesh = base_dir / c.target_mesh;
  }

  c.load_angle = number(j, "load.angle");
  c.load_stretch = positive(j, "load.stretch");
  c.homogenize_angles = angles(j, "homogenize.angles");
  c.homogenize_strain = number(j, "homogenize.strain");
  if (!(c.homogenize_strain > -1.0) || c.homogenize_strain == 0.0)
    fail("homogenize.strain", "must be nonzero and above -1");

  c.homogenization.newton.tol = positive(j, "solver.tol");
  c.homogenization.newton.max_iterations = integer(j, "solver.max_iterations");
  if (c.homogenization.newton.max_iterations < 1) fail("solver.max_iterations", "must be at least 1");
  c.homogenization.perturb = boolean(j, "solver.perturb");
  c.homogenization.perturb_scale = non_negative(j, "solver.perturb_scale");

  auto& op = c.optimizer;
  const std::string method = string(j, "optimizer.method");
  if (method == "lbfgs") {
    op.method = opt::Method::kLbfgs;
  } else if (method == "steepest_descent") {
    op.method = opt::Method::kSteepestDescent;
  } else {
    fail("optimizer.method", "expected lbfgs or steepest_descent");
  }
  op.memory = integer(j, "optimizer.memory");
  if (op.memory < 1) fail("optimizer.memory", "must be at least 1");
  op.max_iterations = integer(j, "optimizer.max_iterations");
  if (op.max_iterations < 0) fail("optimizer.max_iterations", "must be non-negative");
  op.initial_step = positive(j, "optimizer.initial_step");
  op.grad_tol = non_negative(j, "optimizer.grad_tol");
  op.stagnation_tol = non_negative(j, "optimizer.stagnation_tol");
  op.armijo = positive(j, "optimizer.armijo");
  op.max_backtracks = integer(j, "optimizer.max_backtracks");
  if (op.max_backtracks < 0) fail("optimizer.max_backtracks", "must be non-negative");
  c.optimize_theta = boolean(j, "optimizer.optimize_theta");

  c.probes = integer(j, "grad_check.probes");
  if (c.probes < 1) fail("grad_check.probes", "must be at least 1");
  c.check_tol = positive(j, "grad_check.tol");
  c.check_step = positive(j, "grad_check.step");
  c.check_floor = non_negative(j, "grad_check.floor");

  auto& b = c.bench;
  b.radius = positive(j, "bench_shell.radius");
  b.h = positive(j, "bench_shell.h");
  b.length = positive(j, "bench_shell.length");
  b.width = positive(j, "bench_shell.width");
  b.young = positive(j, "bench_shell.young");
  b.poisson = number(j, "bench_shell.poisson");
  if (!(b.poisson >= 0.0 && b.poisson < 0.5)) fail("bench_shell.poisson", "must lie in [0, 0.5)");
  b.ny = integer(j, "bench_shell.ny");
  if (b.ny < 1) fail("bench_shell.ny", "must be at least 1");
  {
    const json& r = j["bench_shell"]["resolutions"];
    if (!r.is_array() || r.empty()) fail("bench_shell.resolutions", "expected a non-empty list");
    b.resolutions.clear();
    for (const auto& v : r) {
      if (!v.is_number_integer() || v.get<int>() < 2 || v.get<int>() % 2 != 0)
        fail("bench_shell.resolutions", "entries must be even integers >= 2");
      b.resolutions.push_back(v.get<int>());
    }
  }

  const json& seed = j["seed"];
  if (!seed.is_number_integer() || seed.get<long long>() < 0) fail("seed", "expected a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  c.homogenization.seed = c.seed;
  c.output = string(j, "output");
  if (!c.output.is_absolute()) c.output = base_dir / c.output;

  c.effective = j;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const json& effective) {
  json j = effective;
  if (j.is_object()) j.erase("output");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace stripeforge::cli
