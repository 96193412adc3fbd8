#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rabiflux/errors.hpp"

namespace rabiflux::harness {

enum class Command { kSimulateJcm, kSimulateChain, kSimulateFluxon, kSynthEsr, kAnalyzeSpectrum, kReproduce };

std::optional<Command> parse_command(std::string_view name);
const char* to_string(Command c);
const std::vector<std::string>& command_names();

using Value = std::variant<double, long, bool, std::string, std::vector<double>>;

class config_error : public input_error {
 public:
  config_error(const std::string& what, int line) : input_error(format(what, line)), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& what, int line) {
    return line > 0 ? "line " + std::to_string(line) + ": " + what : what;
  }
  int line_;
};

struct RunConfig {
  Command command = Command::kReproduce;
  std::map<std::string, Value> values;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> input_paths;
  std::filesystem::path output_dir;
  std::filesystem::path source_dir;  // directory of the config file, for relative inputs
  std::uint64_t seed = 0;

  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  const std::vector<double>& list(const std::string& key) const;
};

// `key = value` lines, `#` comments. Unknown keys and type mismatches are errors with the
// offending line; duplicate keys keep the last value and add a warning.
RunConfig parse_config(std::string_view text, Command command);

RunConfig load_config(const std::filesystem::path& path, Command command);

// Keys accepted by a command, with their defaults rendered as config text.
std::vector<std::pair<std::string, std::string>> config_keys(Command command);

}  // namespace rabiflux::harness
