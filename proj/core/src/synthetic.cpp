#include "loadclean/synthetic.hpp"

#include <algorithm>
#include <random>

#include "loadclean/error.hpp"

namespace loadclean {

LoadSeries canonical_benchmark(std::size_t periods, std::uint64_t seed) {
  if (periods < 1) throw InvalidInput("benchmark needs at least one period");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> night(0.8, 0.05);
  std::normal_distribution<double> day(1.7, 0.1);
  std::vector<double> v;
  v.reserve(periods * 24);
  for (std::size_t k = 0; k < periods; ++k) {
    for (std::size_t slot = 0; slot < 24; ++slot) {
      v.push_back(std::max(0.0, slot < kNightSlots ? night(rng) : day(rng)));
    }
  }
  return LoadSeries(kBenchmarkStartEpoch, 3600, std::move(v), {}, "synthetic");
}

LoadSeries two_regime_benchmark(std::size_t periods, std::uint64_t seed, double factor) {
  if (!(factor > 0.0)) throw InvalidInput("regime factor must be positive");
  const LoadSeries base = canonical_benchmark(periods, seed);
  std::vector<double> v(base.values().begin(), base.values().end());
  for (std::size_t i = (periods / 2) * 24; i < v.size(); ++i) v[i] *= factor;
  return base.with_values(std::move(v));
}

}  // namespace loadclean
