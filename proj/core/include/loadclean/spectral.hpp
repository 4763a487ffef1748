#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loadclean/series.hpp"

namespace loadclean {

// One-sided magnitude spectrum of a mean-removed series: bins k = 0..n/2 at
// k / (n * interval) Hz, unnormalised (|X_k| of the plain DFT sum). The mean
// itself is reported as `dc_magnitude` = |sum of the raw samples|.
struct Spectrum {
  std::vector<double> frequencies_hz;
  std::vector<double> magnitudes;
  double dc_magnitude = 0.0;
  std::size_t sample_count = 0;
};

struct PeriodInfo {
  std::size_t period_samples = 0;
  std::int64_t period_seconds = 0;
  double fundamental_frequency_hz = 0.0;
  std::size_t num_full_periods = 0;
  // n / k* before rounding to a whole sample count.
  double raw_period_samples = 0.0;
  // Peak magnitude over the median non-DC magnitude.
  double confidence = 0.0;
  std::vector<std::string> warnings;

  // For callers that already know the period.
  static PeriodInfo from_samples(std::size_t period_samples, const LoadSeries& s);
};

Spectrum fft_spectrum(const LoadSeries& s);
Spectrum fft_spectrum(std::span<const double> values, std::int64_t interval_seconds);

// Period of the strongest non-DC bin. Throws NoPeriodicity when that bin is
// below 5x the median magnitude, or when it spans fewer than two periods.
PeriodInfo fundamental_period(const LoadSeries& s);

struct PeriodSensitivity {
  double mean_period_seconds = 0.0;
  double variance_seconds2 = 0.0;  // unbiased; 0 with fewer than two trials
  std::size_t trials = 0;
  std::size_t skipped = 0;         // trials that raised NoPeriodicity
  std::vector<std::int64_t> detected_seconds;
};

// Runs fundamental_period on `trials` random contiguous windows whose length
// is uniform in [min_window_seconds, span]. Trial i draws from its own
// generator seeded with (rng_seed, i), so the result is order independent.
PeriodSensitivity period_sensitivity(const LoadSeries& s, std::size_t trials,
                                     std::int64_t min_window_seconds, std::uint64_t rng_seed);

}  // namespace loadclean
