#pragma once

#include <cstdint>

namespace vtl {

// All simulation timestamps and durations are integer microseconds.
using SimTime = std::int64_t;

constexpr SimTime ms_to_us(std::int64_t ms) { return ms * 1000; }
constexpr SimTime s_to_us(std::int64_t s) { return s * 1'000'000; }
constexpr double us_to_ms(SimTime us) { return static_cast<double>(us) / 1000.0; }
constexpr double us_to_s(SimTime us) { return static_cast<double>(us) / 1e6; }

} // namespace vtl
