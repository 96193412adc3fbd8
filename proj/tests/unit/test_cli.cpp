#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "rabiflux/errors.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/harness/config.hpp"
#include "rabiflux/harness/io.hpp"
#include "rabiflux/harness/run.hpp"

using namespace rabiflux;
using namespace rabiflux::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rabiflux-unit-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("command names") {
  CHECK(parse_command("simulate-jcm") == Command::kSimulateJcm);
  CHECK(parse_command("analyze-spectrum") == Command::kAnalyzeSpectrum);
  CHECK_FALSE(parse_command("simulate-everything").has_value());
  CHECK(command_names().size() == 6);
  for (const auto& n : command_names()) CHECK(std::string(to_string(*parse_command(n))) == n);
}

TEST_CASE("empty config falls back to defaults") {
  const auto c = parse_config("", Command::kSimulateJcm);
  CHECK(c.num("nbar") == 50.0);
  CHECK(c.num("g") == 1.0);
  CHECK(c.seed == 0);
  CHECK(c.warnings.empty());
}

TEST_CASE("config values are typed") {
  const auto c = parse_config("# a comment\nnbar = 12.5\nseed = 9\n\nrevival_offsets = [0.1, 0.2]\n",
                              Command::kSynthEsr);
  CHECK(c.num("nbar") == 12.5);
  CHECK(c.seed == 9);
  CHECK(c.list("revival_offsets") == std::vector<double>{0.1, 0.2});
  const auto f = parse_config("synchronize = no\nsites = 16\n", Command::kSimulateChain);
  CHECK_FALSE(f.flag("synchronize"));
  CHECK(f.integer("sites") == 16);
}

TEST_CASE("type mismatch names its line") {
  try {
    parse_config("g = 1\nnbar = fifty\n", Command::kSimulateJcm);
    FAIL("expected a config error");
  } catch (const config_error& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("fifty") != std::string::npos);
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("bogus = 1\n", Command::kSimulateJcm), config_error);
  CHECK_THROWS_AS(parse_config("just words\n", Command::kSimulateJcm), config_error);
  CHECK_THROWS_AS(parse_config("seed = -3\n", Command::kSimulateJcm), input_error);
  CHECK_THROWS_AS(parse_config("", Command::kAnalyzeSpectrum), config_error);
  CHECK_THROWS_AS(parse_config("sites = 2.5\n", Command::kSimulateChain), config_error);
}

TEST_CASE("duplicate keys keep the last value with a warning") {
  const auto c = parse_config("nbar = 10\nnbar = 20\n", Command::kSimulateJcm);
  CHECK(c.num("nbar") == 20.0);
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("nbar") != std::string::npos);
}

TEST_CASE("analyze-spectrum input resolves against the config directory") {
  const auto dir = scratch("cfg");
  write_text(dir / "a.cfg", "input = data/s.csv\n");
  const auto c = load_config(dir / "a.cfg", Command::kAnalyzeSpectrum);
  REQUIRE(c.input_paths.size() == 1);
  CHECK(c.input_paths[0] == dir / "data/s.csv");
  CHECK_THROWS_AS(load_config(dir / "missing.cfg", Command::kSimulateJcm), input_error);
}

TEST_CASE("number formatting") {
  CHECK(fmt(0.0) == "0");
  CHECK(fmt(1.0 / 3.0) == "0.333333333");
  CHECK(fmt(123456789012.0) == "1.23456789e+11");
  CHECK(std::stod(fmt_exact(0.1 + 0.2)) == 0.1 + 0.2);
  CsvTable t({"a", "b"});
  t.comment("k", "v");
  t.row({1.0, 2.5});
  CHECK(t.str() == "# a,b\n# k=v\n1,2.5\n");
}

TEST_CASE("spectrum file round trip is bit-identical") {
  esr::ComposeInput in;
  in.sweep.field_start = 3322.0;
  in.sweep.field_end = 3323.0;
  in.sweep.sweep_rate = 0.004;
  in.sweep.samples = 777;
  in.sweep.direction = SweepDirection::kDown;
  esr::DysonLineSpec l;
  l.center = 3322.41;
  in.lines.push_back(l);
  in.noise_amplitude = 0.003;
  in.seed = 5;
  const auto s = esr::compose_spectrum(in).spectrum;
  const auto dir = scratch("spectrum");
  write_spectrum(dir / "s.csv", s);
  const auto back = ingest_spectrum(dir / "s.csv");
  CHECK(back.field == s.field);
  CHECK(back.amplitude == s.amplitude);
  CHECK(back.direction == SweepDirection::kDown);
}

TEST_CASE("spectrum parsing") {
  const auto down = parse_spectrum("# field_gauss,amplitude\n3.0,1\n2.0,2\n1.0,3\n");
  CHECK(down.direction == SweepDirection::kDown);
  try {
    parse_spectrum("# field_gauss,amplitude\n1.0,2.0\nabc,1.0\n");
    FAIL("expected a parse error");
  } catch (const input_error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_spectrum("1,2,3\n2,3,4\n"), shape_error);
  CHECK_THROWS_AS(parse_spectrum("1,2\n"), insufficient_data_error);
  CHECK_THROWS_AS(parse_spectrum("1,2\n3,1\n2,5\n"), input_error);
  CHECK_THROWS_AS(parse_spectrum("# direction=down\n1,2\n2,3\n"), shape_error);
}

TEST_CASE("svg output is self-contained") {
  Plot p{"trace", "x", "y", {{"a", {0, 1, 2}, {1, 0, 1}, false}}};
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("http://www.w3.org/2000/svg") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(svg == render_svg(p));
}

TEST_CASE("run maps failures onto exit codes") {
  const auto dir = scratch("run");
  std::ostringstream log;
  SUBCASE("success") {
    auto c = parse_config("nbar = 10\nt_end = 5\ndt = 0.05\n", Command::kSimulateJcm);
    c.output_dir = dir;
    CHECK(run(c, log) == kExitOk);
    CHECK(fs::exists(dir / "jcm_inversion.csv"));
    CHECK(fs::exists(dir / "jcm_inversion.svg"));
  }
  SUBCASE("CFL violation is a numerical failure") {
    auto c = parse_config("dt = 0.05\nt_end = 1\n", Command::kSimulateFluxon);
    c.output_dir = dir;
    CHECK(run(c, log) == kExitNumerical);
    CHECK(log.str().find("CFL") != std::string::npos);
  }
  SUBCASE("missing input file is an input error") {
    auto c = parse_config("input = nowhere.csv\n", Command::kAnalyzeSpectrum);
    c.output_dir = dir;
    CHECK(run(c, log) == kExitInput);
  }
  SUBCASE("invalid parameter is an input error") {
    auto c = parse_config("nbar = -4\n", Command::kSimulateJcm);
    c.output_dir = dir;
    CHECK(run(c, log) == kExitInput);
  }
}

TEST_CASE("output directory precedence") {
  ::unsetenv("RABIFLUX_OUT");
  CHECK(resolve_output_dir("") == fs::path("rabiflux-out"));
  CHECK(resolve_output_dir("mine") == fs::path("mine"));
  ::setenv("RABIFLUX_OUT", "from-env", 1);
  CHECK(resolve_output_dir("mine") == fs::path("from-env"));
  ::unsetenv("RABIFLUX_OUT");
}
