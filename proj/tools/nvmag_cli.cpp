// nvmag: run a named scenario experiment and write its outputs.
//
//   nvmag <odmr|ramsey|sensitivity|phantom|accept> [--config PATH] [--seed N] [--out DIR] [--plot]
//
// Exit codes: 0 success / all criteria pass, 1 usage or config error,
// 2 acceptance failure.

#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nvmag/app/commands.hpp"

namespace app = nvmag::app;

int main(int argc, char** argv) {
  CLI::App cli{"NV-ensemble magnetometer simulator"};
  cli.set_version_flag("--version", std::string(app::kVersion));
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool plot = false;
  cli.add_option("--config", config_path, "scenario config (JSON); defaults are used when omitted")
      ->check(CLI::ExistingFile);
  cli.add_option("--seed", seed, "override the config seed");
  cli.add_option("--out", out_dir, "override the output directory");
  cli.add_flag("--plot", plot, "also write SVG plots");

  using Command = std::function<app::CommandResult(const app::Config&, const app::RunOptions&)>;
  const std::map<std::string, std::pair<Command, std::string>> commands{
      {"odmr", {app::cmd_odmr, "pulsed ODMR spectrum and resonance lines"}},
      {"ramsey", {app::cmd_ramsey, "SQ/DQ Ramsey fringes and T2* fits"}},
      {"sensitivity", {app::cmd_sensitivity, "slope, shot limit, response curve and synthesized ASDs"}},
      {"phantom", {app::cmd_phantom, "phantom field map, end-to-end recovery and SNR report"}},
      {"accept", {app::cmd_accept, "evaluate all acceptance criteria"}},
  };
  for (const auto& [name, entry] : commands) cli.add_subcommand(name, entry.second);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitUsage;
  }

  app::Config cfg;
  try {
    if (!config_path.empty()) cfg = app::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "nvmag: config error: " << e.what() << '\n';
    return app::kExitUsage;
  }

  const std::string name = cli.get_subcommands().front()->get_name();
  try {
    const auto result = commands.at(name).first(cfg, app::RunOptions{plot});
    app::write_outputs(cfg.output_dir, result.files);
    std::cout << result.summary;
    std::cout << "wrote " << result.files.size() << " files to " << cfg.output_dir << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "nvmag " << name << ": " << e.what() << '\n';
    return app::kExitUsage;
  }
}
