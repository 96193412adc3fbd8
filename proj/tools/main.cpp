#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rabiflux/harness/config.hpp"
#include "rabiflux/harness/run.hpp"

namespace {

std::string usage() {
  std::string s = "usage: rabiflux <command> --config <path> [--out <dir>]\ncommands:";
  for (const auto& c : rabiflux::harness::command_names()) s += " " + c;
  return s + "\nRABIFLUX_OUT overrides the output directory.\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rabiflux::harness;
  CLI::App app{"Rabi oscillation, ESR and fluxon simulation toolkit"};
  std::string command, config_path, out;
  app.add_option("command", command, "command to run")->required();
  app.add_option("--config,-c", config_path, "key = value parameter file");
  app.add_option("--out,-o", out, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << usage();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << usage();
    return kExitInput;
  }

  const auto cmd = parse_command(command);
  if (!cmd) {
    std::cerr << "error: unknown command '" << command << "'\n" << usage();
    return kExitInput;
  }
  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("", *cmd) : load_config(config_path, *cmd);
  } catch (const rabiflux::input_error& e) {
    std::cerr << "input error: " << (config_path.empty() ? "" : config_path + ": ") << e.what() << "\n";
    return kExitInput;
  }
  cfg.output_dir = resolve_output_dir(out);
  return run(cfg, std::cerr);
}
