#pragma once

#include <cstdint>

#include "loadclean/series.hpp"

namespace loadclean {

// 2006-08-01T00:00:00Z
inline constexpr std::int64_t kBenchmarkStartEpoch = 1154390400;

// Hourly series with a 24-sample day: slots 0-7 draw N(0.8, 0.05^2), slots
// 8-23 draw N(1.7, 0.1^2), independently per sample. Negative draws clamp to 0.
LoadSeries canonical_benchmark(std::size_t periods, std::uint64_t seed = 42);

// canonical_benchmark with every period from `periods / 2` on scaled by
// `factor` (a second seasonal regime).
LoadSeries two_regime_benchmark(std::size_t periods = 365, std::uint64_t seed = 42,
                                double factor = 1.8);

inline constexpr std::size_t kNightSlots = 8;

}  // namespace loadclean
