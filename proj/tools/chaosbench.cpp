// chaosbench command-line front end.
//
//   chaosbench [--config F] [--seed S] [--out DIR] [--jobs N] [--quiet] <experiment>
//   chaosbench presets list
//
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 divergence, 4 resource guard.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <future>
#include <iostream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "chaosbench/experiments.hpp"

namespace cb = chaosbench;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitResource = 4;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

Failure classify(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const cb::ConfigError& x) {
    return {kExitConfig, "config", x.what()};
  } catch (const cb::InvalidInput& x) {
    return {kExitConfig, "invalid-input", x.what()};
  } catch (const cb::DivergedTrajectory& x) {
    return {kExitDiverged, "diverged", x.what()};
  } catch (const cb::ResourceExceeded& x) {
    return {kExitResource, "resource", x.what()};
  } catch (const std::bad_alloc&) {
    return {kExitResource, "resource", "out of memory"};
  } catch (const std::exception& x) {
    return {kExitOther, "error", x.what()};
  } catch (...) {
    return {kExitOther, "error", "unknown failure"};
  }
}

int report(const Failure& f, const std::optional<std::filesystem::path>& dir) {
  const cb::Json j{{"error", {{"exit_code", f.code}, {"kind", f.kind}, {"message", f.message}}}};
  std::cerr << j.dump() << std::endl;
  if (dir && std::filesystem::is_directory(*dir)) {
    std::ofstream os(*dir / "error.json", std::ios::trunc);
    os << j.dump(2) << "\n";
  }
  return f.code;
}

void list_presets() {
  for (const auto& p : cb::presets()) {
    std::cout << p.name << "\t" << p.system.kind() << "\t" << p.description << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaotic-dynamics benchmarks: precision horizons, entropy curves, noisy analog device"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "base seed (overrides run.seed)");
  app.add_option("--out", out_dir, "output root (default $CHAOSBENCH_OUT or ./runs)");
  app.add_option("--jobs", jobs, "worker threads, 0 = all cores")->default_val(0);
  app.add_flag("--quiet", quiet, "print nothing on success");

  std::optional<cb::ExperimentKind> chosen;
  for (auto kind : cb::all_experiments()) {
    auto* sub = app.add_subcommand(std::string(cb::experiment_name(kind)));
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  auto* presets = app.add_subcommand("presets", "named parameter presets");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "list presets")->callback(list_presets);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitConfig;
  }
  if (!chosen) return 0;

  std::optional<cb::ExperimentConfig> cfg;
  cb::RunOptions opts;
  try {
    cfg.emplace(*chosen);
    if (!config_path.empty()) cfg->merge_file(config_path);
    if (seed) cfg->set("run.seed", std::to_string(*seed));
    if (out_dir.empty()) {
      const char* env = std::getenv("CHAOSBENCH_OUT");
      out_dir = env && *env ? env : "runs";
    }
    opts.out_root = out_dir;
    opts.jobs = jobs;
    opts.timestamp = utc_timestamp();
    opts.log = quiet ? nullptr : &std::cout;
  } catch (...) {
    return report(classify(std::current_exception()), std::nullopt);
  }
  const auto dir = cb::artifact_dir_for(*cfg, opts);

  double wall = 0.0;
  try {
    wall = cfg->real("guard.wall_seconds");
  } catch (...) {
    return report(classify(std::current_exception()), std::nullopt);
  }

  std::promise<std::exception_ptr> done;
  auto finished = done.get_future();
  std::thread worker([&] {
    try {
      cb::run_experiment(*cfg, opts);
      done.set_value(nullptr);
    } catch (...) {
      done.set_value(std::current_exception());
    }
  });
  if (wall > 0.0 && finished.wait_for(std::chrono::duration<double>(wall)) != std::future_status::ready) {
    const int code = report({kExitResource, "resource", "wall-clock limit of " + cb::to_decimal(wall) + " s exceeded"}, dir);
    std::cout.flush();
    std::_Exit(code);
  }
  worker.join();
  if (auto err = finished.get()) return report(classify(err), dir);
  if (!quiet) std::cout << "artifacts: " << dir.string() << "\n";
  return 0;
}
