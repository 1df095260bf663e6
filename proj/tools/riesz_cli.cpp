#include <CLI11.hpp>

#include "riesz/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"riesz: spectral enclosure, projection and norm experiments"};
  app.require_subcommand(1);

  riesz::cli::Invocation inv;
  for (const auto& name : riesz::cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", inv.config_path, "JSON config file");
    sub->add_option("--set", inv.overrides, "override a dot path, e.g. truncation.levels=80")->allow_extra_args(false);
    sub->add_option("-o,--out", inv.out_dir, "output directory (default: output.directory, then $RIESZ_OUTPUT_DIR)");
    sub->callback([&inv, name] { inv.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return riesz::cli::kExitConfig;
  }
  return riesz::cli::run(inv);
}
