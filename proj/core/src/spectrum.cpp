#include "rabiflux/spectrum.hpp"

#include <cmath>

#include "rabiflux/errors.hpp"

namespace rabiflux {

const char* to_string(SweepDirection d) { return d == SweepDirection::kUp ? "up" : "down"; }

SweepDirection parse_direction(const std::string& s) {
  if (s == "up") return SweepDirection::kUp;
  if (s == "down") return SweepDirection::kDown;
  throw input_error("sweep direction must be 'up' or 'down', got '" + s + "'");
}

SweepDirection Spectrum::infer_direction(const std::vector<double>& field) {
  if (field.size() < 2) return SweepDirection::kUp;
  const bool up = field[1] > field[0];
  for (std::size_t i = 1; i < field.size(); ++i) {
    const double d = field[i] - field[i - 1];
    if (!std::isfinite(d) || (up ? !(d > 0.0) : !(d < 0.0)))
      throw input_error("field axis is not strictly monotone at row " + std::to_string(i + 1));
  }
  return up ? SweepDirection::kUp : SweepDirection::kDown;
}

void Spectrum::validate() const {
  if (field.size() != amplitude.size()) throw input_error("field and amplitude lengths differ");
  if (field.size() < 2) return;
  if (infer_direction(field) != direction)
    throw input_error("field axis order contradicts the stated sweep direction");
}

const std::string* Spectrum::meta(const std::string& key) const {
  for (const auto& kv : metadata)
    if (kv.first == key) return &kv.second;
  return nullptr;
}

}  // namespace rabiflux
