#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deloc/config.hpp"
#include "deloc/errors.hpp"
#include "deloc/experiments.hpp"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unadjusted Langevin bias experiments: delocalization of discretization bias"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out_dir = "out";
  for (const auto& kind : deloc::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default: LANGEVIN_DELOC_THREADS or 1)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    const auto config = deloc::read_json_file(config_path);
    deloc::RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.seed = seed;
    ctx.threads = threads;
    const auto res = deloc::run_experiment(kind, config, ctx);
    std::printf("%s: wrote %s (%zu rows, %.1f s)\n", kind.c_str(), out_dir.c_str(), res.table.size(), res.wall_seconds);
    return 0;
  } catch (const deloc::ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeFailure;
  }
}
