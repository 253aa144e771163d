#include "commands.hpp"

#include <stripeforge/error.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace stripeforge;
using namespace stripeforge::cli;

namespace {

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a(ss.str()));
}

void apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("STRIPEFORGE_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ValidationError("STRIPEFORGE_SEED: expected an unsigned integer (got '" + std::string(env) + "')");
  cfg.seed = s;
  cfg.homogenization.seed = s;
  cfg.effective["seed"] = s;
}

json manifest(const std::string& cmd, const Context& ctx, int code, const std::string& status,
              const std::vector<std::string>& files) {
  json m;
  m["tool"] = "stripeforge";
  m["version"] = kVersion;
  m["command"] = cmd;
  if (ctx.cfg.effective.is_object()) m["config_hash"] = config_hash(ctx.cfg.effective);
  m["seed"] = ctx.cfg.seed;
  m["threads"] = ctx.threads;
  m["exit_code"] = code;
  m["status"] = status;
  m["outputs"] = files;
  if (ctx.cfg.mesh && ctx.cfg.mesh->type == "obj") m["mesh_fnv1a"] = file_hash(ctx.cfg.mesh->path);
  if (ctx.cfg.effective.is_object()) m["config"] = ctx.cfg.effective;
  return m;
}

int run(const std::string& cmd, const std::string& config_path, const std::string& out_dir, int threads,
        bool dump_periodic, bool dump_prisms) {
  Context ctx;
  ctx.threads = threads;
  ctx.log = &std::cout;
  ctx.dump_periodic = dump_periodic;
  ctx.dump_prisms = dump_prisms;
  std::unique_ptr<Artifacts> out;
  int code = kOk;
  std::string status = "ok";
  json error;
  try {
    ctx.cfg = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
    apply_seed_override(ctx.cfg);
    if (threads < 1) throw ValidationError("--threads: must be at least 1");
    const std::filesystem::path dir = out_dir.empty() ? ctx.cfg.output : std::filesystem::path(out_dir);
    out = std::make_unique<Artifacts>(dir);
    ctx.out = out.get();
    ctx.out->write_json("config.effective.json", ctx.cfg.effective);
    code = run_command(cmd, ctx);
    if (code == kGradCheckFailed) status = "grad_check_failed";
  } catch (const ValidationError& e) {
    code = kValidationFailure;
    status = "validation_error";
    error = {{"type", "validation_error"}, {"message", e.what()}};
  } catch (const IoError& e) {
    code = kValidationFailure;
    status = "io_error";
    error = {{"type", "io_error"}, {"message", e.what()}};
  } catch (const RepinRequired& e) {
    code = kSolverFailure;
    status = "repin_required";
    error = {{"type", "repin_required"}, {"message", e.what()}};
  } catch (const SolverError& e) {
    code = kSolverFailure;
    status = "solver_error";
    error = {{"type", "solver_error"}, {"message", e.what()}};
  } catch (const json::exception& e) {
    code = kValidationFailure;
    status = "validation_error";
    error = {{"type", "validation_error"}, {"message", std::string("config: ") + e.what()}};
  }
  if (!error.is_null()) {
    std::cerr << "stripeforge " << cmd << ": " << error["message"].get<std::string>() << '\n';
    error["command"] = cmd;
    error["exit_code"] = code;
  }
  if (!out) {
    // config failed before the output directory was known; fall back to --out
    if (out_dir.empty()) return code;
    try {
      out = std::make_unique<Artifacts>(out_dir);
    } catch (const IoError&) {
      return code;
    }
  }
  try {
    if (!error.is_null()) out->write_json("error.json", error);
    std::vector<std::string> files = out->files();
    files.push_back("manifest.json");
    out->write_json("manifest.json", manifest(cmd, ctx, code, status, files));
  } catch (const IoError& e) {
    std::cerr << "stripeforge " << cmd << ": " << e.what() << '\n';
    if (code == kOk) code = kValidationFailure;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stripe-pattern bi-material shells: synthesis, homogenization, inverse design"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config, out;
  int threads = 1;
  bool dump_periodic = false, dump_prisms = false;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-periodic-map", dump_periodic, "write periodic_map.json");
    sub->add_flag("--dump-subprisms", dump_prisms, "write subprisms.obj");
    sub->callback([&, name] {
      throw CLI::RuntimeError(run(name, config, out, threads, dump_periodic, dump_prisms));
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationFailure;
  }
  return 0;
}
