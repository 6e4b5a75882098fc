#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace swarmrx {

using cf64 = std::complex<double>;
using CVec = std::vector<cf64>;

// Ordered bits, each 0 or 1.
using BitStream = std::vector<std::uint8_t>;

using NodeIndex = std::uint16_t;

inline constexpr double kPi = std::numbers::pi;

}  // namespace swarmrx
