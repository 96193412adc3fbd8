#include <doctest.h>

#include <set>
#include <string>

#include "rabiflux/harness/acceptance.hpp"

using rabiflux::harness::property_suite;

namespace {

void run_module(const std::string& module) {
  int count = 0;
  for (const auto& p : property_suite()) {
    if (p.module != module) continue;
    ++count;
    const auto out = p.check();
    INFO(p.name << ": " << out.detail);
    CHECK(out.pass);
  }
  CHECK(count > 0);
}

}  // namespace

TEST_CASE("properties: field quantization") { run_module("field-quantization"); }
TEST_CASE("properties: jcm dynamics") { run_module("jcm-dynamics"); }
TEST_CASE("properties: rabi wave chain") { run_module("rabi-wave-chain"); }
TEST_CASE("properties: esr synthesis") { run_module("esr-signal-synth"); }
TEST_CASE("properties: spectrum analysis") { run_module("spectro-analysis"); }
TEST_CASE("properties: fluxon simulation") { run_module("fluxon-sim"); }
TEST_CASE("properties: command line") { run_module("cli-harness"); }

TEST_CASE("every property belongs to a known module") {
  const std::set<std::string> known{"field-quantization", "jcm-dynamics", "rabi-wave-chain", "esr-signal-synth",
                                    "spectro-analysis", "fluxon-sim", "cli-harness"};
  for (const auto& p : property_suite()) CHECK(known.count(p.module) == 1);
}
