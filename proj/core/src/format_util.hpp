#pragma once

#include <cstdio>
#include <string>

namespace rabiflux::util {

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace rabiflux::util
