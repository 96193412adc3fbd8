#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rabiflux::harness {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

// Runs the listed criteria (all when empty), printing one line per criterion as it finishes.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& which, std::ostream* progress);

std::string format_result(const CriterionResult& r);

struct PropertyOutcome {
  bool pass = false;
  std::string detail;
};

struct Property {
  std::string module;
  std::string name;
  std::function<PropertyOutcome()> check;
};

const std::vector<Property>& property_suite();

}  // namespace rabiflux::harness
