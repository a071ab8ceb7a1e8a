// ocap: batch front end.
//
//   ocap <scenario> --config FILE [--out DIR] [--threads N] [--seed N]
//
// Exit status: 0 ok, 2 configuration error, 3 non-convergence, 4 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ocap/config.hpp"
#include "ocap/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Orlicz capacity toolkit"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  for (const auto& name : ocap::scenarios()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ocap::exit_config;
  }
  const std::string scenario = app.get_subcommands().front()->get_name();

  try {
    auto cfg = ocap::resolve_config(ocap::parse_ini_file(config_path), scenario);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) cfg.seed = *seed;
    return ocap::run(cfg, threads);
  } catch (const ocap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ocap::exit_config;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ocap::exit_config;
  } catch (const ocap::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return ocap::exit_io;
  } catch (const ocap::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return ocap::exit_nonconvergence;
  }
}
