// mts: run multi-time-step coupling scenarios from a config file.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mts/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-time-step coupled Newmark scenarios"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one scenario and write its per-step CSV");
  run->add_option("config", run_config, "key=value config file")->required();

  std::string sweep_config;
  std::string axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a list of dt_system or eta values");
  sweep->add_option("config", sweep_config, "key=value config file")->required();
  sweep->add_option("--axis", axis, "dt_system | eta | subdomain.<k>.eta")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return mts::cli::run_command(run_config, std::cerr);
  return mts::cli::sweep_command(sweep_config, axis, values, std::cerr);
}
