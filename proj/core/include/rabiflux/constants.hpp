#pragma once

#include <numbers>

namespace rabiflux {

inline constexpr double kPi = std::numbers::pi;

// Zeeman conversion: nu [MHz] = 1.39961 * g * H [G].
inline constexpr double kMHzPerGauss = 1.39961;
inline constexpr double kHzPerGauss = kMHzPerGauss * 1e6;

// Flux quantum h/2e in Wb, at the precision used for ZFS voltages.
inline constexpr double kFluxQuantum = 2.07e-15;

}  // namespace rabiflux
