#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rabiflux {

enum class SweepDirection { kUp, kDown };

const char* to_string(SweepDirection d);
SweepDirection parse_direction(const std::string& s);

struct Spectrum {
  std::vector<double> field;      // gauss, in sweep (time) order
  std::vector<double> amplitude;  // a.u.
  SweepDirection direction = SweepDirection::kUp;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t size() const noexcept { return field.size(); }
  // Lengths equal, field strictly monotone in the stated direction.
  void validate() const;
  // Direction implied by the field column; throws if not strictly monotone.
  static SweepDirection infer_direction(const std::vector<double>& field);
  const std::string* meta(const std::string& key) const;
};

}  // namespace rabiflux
