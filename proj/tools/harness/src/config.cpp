#include "rabiflux/harness/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rabiflux/constants.hpp"

namespace rabiflux::harness {
namespace {

enum class Type { kDouble, kInt, kBool, kString, kList };

struct KeySpec {
  const char* key;
  Type type;
  const char* fallback;  // config-text default; nullptr marks a required key
};

const char* type_name(Type t) {
  switch (t) {
    case Type::kDouble: return "number";
    case Type::kInt: return "integer";
    case Type::kBool: return "boolean";
    case Type::kString: return "string";
    case Type::kList: return "comma-separated number list";
  }
  return "?";
}

const std::vector<KeySpec>& schema(Command c) {
  static const std::vector<KeySpec> jcm = {
      {"nbar", Type::kDouble, "50"},       {"g", Type::kDouble, "1"},
      {"detuning", Type::kDouble, "0"},    {"phase", Type::kDouble, "0"},
      {"init", Type::kString, "ground"},   {"t_end", Type::kDouble, "60"},
      {"dt", Type::kDouble, "0.01"},       {"fock_start", Type::kInt, "0"},
  };
  static const std::vector<KeySpec> chain = {
      {"sites", Type::kInt, "64"},
      {"spacing", Type::kDouble, "1"},
      {"omega0", Type::kDouble, "1"},
      {"omega", Type::kDouble, "1"},
      {"synchronize", Type::kBool, "true"},  // omega chosen so the ground-initial family is synchronous
      {"k", Type::kDouble, "0.0981747704"},
      {"xi1", Type::kDouble, "-1"},
      {"xi2", Type::kDouble, "1"},
      {"g", Type::kDouble, "10"},
      {"depolarization_shift", Type::kDouble, "0"},
      {"nbar", Type::kDouble, "0"},
      {"n_min", Type::kInt, "0"},
      {"n_max", Type::kInt, "0"},
      {"lambda", Type::kDouble, "0"},
      {"variant", Type::kString, "space"},
      {"t1", Type::kDouble, "1"},
      {"light_speed", Type::kDouble, "1"},
      {"excited_center", Type::kDouble, "20"},
      {"excited_sigma", Type::kDouble, "8"},
      {"excited_weight", Type::kDouble, "1"},
      {"ground_center", Type::kDouble, "44"},
      {"ground_sigma", Type::kDouble, "8"},
      {"ground_weight", Type::kDouble, "0"},
      {"t_end", Type::kDouble, "40"},
      {"step", Type::kDouble, "0.001"},
      {"samples", Type::kInt, "200"},
  };
  static const std::vector<KeySpec> fluxon = {
      {"alpha", Type::kDouble, "0.05"},   {"beta", Type::kDouble, "0"},
      {"gamma", Type::kDouble, "0.2"},    {"length", Type::kDouble, "40"},
      {"grid_points", Type::kInt, "2000"}, {"dt", Type::kDouble, "0.01"},
      {"fluxons", Type::kInt, "1"},       {"u0", Type::kDouble, "0"},
      {"t_end", Type::kDouble, "200"},    {"snapshots", Type::kInt, "200"},
      {"gamma_sweep", Type::kList, ""},   {"steady_window", Type::kDouble, "50"},
      {"steady_tolerance", Type::kDouble, "0.0001"}, {"steady_max_time", Type::kDouble, "3000"},
  };
  static const std::vector<KeySpec> esr = {
      {"field_start", Type::kDouble, "3322.3"},
      {"field_end", Type::kDouble, "3323.8"},
      {"samples", Type::kInt, "15001"},
      {"sweep_rate", Type::kDouble, "0.00416666667"},
      {"direction", Type::kString, "up"},
      {"modulation_freq", Type::kDouble, "100000"},
      {"modulation_amplitude", Type::kDouble, "0"},
      {"time_constant", Type::kDouble, "0"},
      {"packet_g", Type::kDouble, "0.0782436"},
      {"nbar", Type::kDouble, "194.364"},
      {"center_field", Type::kDouble, "3322.80822"},
      {"g_factor", Type::kDouble, "2.00278"},
      {"hysteresis", Type::kDouble, "0"},
      {"packet_amplitude", Type::kDouble, "1"},
      {"chirp", Type::kDouble, "0"},
      {"revival_offsets", Type::kList, "0.40, 0.70"},
      {"revival_amplitudes", Type::kList, "0.4, 0.25"},
      {"line_centers", Type::kList, ""},
      {"line_width_pp", Type::kDouble, "0.01"},
      {"line_psi", Type::kDouble, "0"},
      {"line_amplitude", Type::kDouble, "1"},
      {"noise", Type::kDouble, "0"},
  };
  static const std::vector<KeySpec> analyze = {
      {"input", Type::kString, nullptr},
      {"prominence_fraction", Type::kDouble, "0.05"},
      {"gap_factor", Type::kDouble, "3"},
      {"microwave_freq", Type::kDouble, "0"},
      {"assumed_g_factor", Type::kDouble, "2.00278"},
  };
  static const std::vector<KeySpec> reproduce = {
      {"criteria", Type::kList, ""},
  };
  switch (c) {
    case Command::kSimulateJcm: return jcm;
    case Command::kSimulateChain: return chain;
    case Command::kSimulateFluxon: return fluxon;
    case Command::kSynthEsr: return esr;
    case Command::kAnalyzeSpectrum: return analyze;
    case Command::kReproduce: return reproduce;
  }
  return reproduce;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long> to_long(const std::string& s) {
  long v = 0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<Value> convert(Type type, std::string text) {
  switch (type) {
    case Type::kDouble:
      if (auto v = to_double(text)) return Value{*v};
      return std::nullopt;
    case Type::kInt:
      if (auto v = to_long(text)) return Value{*v};
      return std::nullopt;
    case Type::kBool: {
      std::transform(text.begin(), text.end(), text.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (text == "true" || text == "yes" || text == "on" || text == "1") return Value{true};
      if (text == "false" || text == "no" || text == "off" || text == "0") return Value{false};
      return std::nullopt;
    }
    case Type::kString:
      if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
        text = text.substr(1, text.size() - 2);
      return Value{text};
    case Type::kList: {
      if (text.size() >= 2 && text.front() == '[' && text.back() == ']')
        text = text.substr(1, text.size() - 2);
      std::vector<double> out;
      if (trim(text).empty()) return Value{out};
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto v = to_double(trim(item));
        if (!v) return std::nullopt;
        out.push_back(*v);
      }
      return Value{out};
    }
  }
  return std::nullopt;
}

const KeySpec* find_key(Command c, const std::string& key) {
  for (const auto& k : schema(c))
    if (key == k.key) return &k;
  if (key == "seed") {
    static const KeySpec seed{"seed", Type::kInt, "0"};
    return &seed;
  }
  return nullptr;
}

template <class T>
const T& fetch(const RunConfig& cfg, const std::string& key) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) throw config_error("missing key '" + key + "'", 0);
  if (const T* v = std::get_if<T>(&it->second)) return *v;
  throw config_error("key '" + key + "' has a different type", 0);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate-jcm",    "simulate-chain",
                                                 "simulate-fluxon", "synth-esr",
                                                 "analyze-spectrum", "reproduce"};
  return names;
}

std::optional<Command> parse_command(std::string_view name) {
  static constexpr std::array<Command, 6> all = {
      Command::kSimulateJcm, Command::kSimulateChain,   Command::kSimulateFluxon,
      Command::kSynthEsr,    Command::kAnalyzeSpectrum, Command::kReproduce};
  for (Command c : all)
    if (name == to_string(c)) return c;
  return std::nullopt;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::kSimulateJcm: return "simulate-jcm";
    case Command::kSimulateChain: return "simulate-chain";
    case Command::kSimulateFluxon: return "simulate-fluxon";
    case Command::kSynthEsr: return "synth-esr";
    case Command::kAnalyzeSpectrum: return "analyze-spectrum";
    case Command::kReproduce: return "reproduce";
  }
  return "?";
}

double RunConfig::num(const std::string& key) const { return fetch<double>(*this, key); }
long RunConfig::integer(const std::string& key) const { return fetch<long>(*this, key); }
bool RunConfig::flag(const std::string& key) const { return fetch<bool>(*this, key); }
const std::string& RunConfig::str(const std::string& key) const {
  return fetch<std::string>(*this, key);
}
const std::vector<double>& RunConfig::list(const std::string& key) const {
  return fetch<std::vector<double>>(*this, key);
}

RunConfig parse_config(std::string_view text, Command command) {
  RunConfig cfg;
  cfg.command = command;
  std::map<std::string, int> seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("expected 'key = value', got '" + line + "'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw config_error("empty key", line_no);

    const KeySpec* spec = find_key(command, key);
    if (!spec)
      throw config_error("unknown key '" + key + "' for command " + to_string(command), line_no);
    auto parsed = convert(spec->type, value);
    if (!parsed)
      throw config_error("key '" + key + "' expects a " + type_name(spec->type) + ", got '" +
                             value + "'",
                         line_no);

    if (const auto it = seen.find(key); it != seen.end())
      cfg.warnings.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                             "' overrides line " + std::to_string(it->second));
    seen[key] = line_no;
    cfg.values[key] = std::move(*parsed);
  }

  std::vector<KeySpec> keys = schema(command);
  keys.push_back({"seed", Type::kInt, "0"});
  for (const auto& k : keys) {
    if (cfg.values.count(k.key)) continue;
    if (!k.fallback) throw config_error(std::string("missing required key '") + k.key + "'", 0);
    cfg.values[k.key] = *convert(k.type, k.fallback);
  }
  const long seed = cfg.integer("seed");
  if (seed < 0) throw config_error("seed must be non-negative", seen.count("seed") ? seen["seed"] : 0);
  cfg.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Command command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config(buf.str(), command);
  cfg.source_dir = path.parent_path();
  if (command == Command::kAnalyzeSpectrum) {
    std::filesystem::path input = cfg.str("input");
    if (input.is_relative()) input = cfg.source_dir / input;
    cfg.input_paths.push_back(input);
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_keys(Command command) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : schema(command)) out.emplace_back(k.key, k.fallback ? k.fallback : "<required>");
  out.emplace_back("seed", "0");
  return out;
}

}  // namespace rabiflux::harness
