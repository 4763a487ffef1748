#include "loadclean/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>

#include "loadclean/error.hpp"

namespace loadclean {

namespace {

constexpr double kNoiseFloorFactor = 5.0;
constexpr double kNonIntegerPeriodTolerance = 0.05;

// FFTW's planner is not reentrant; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct PlanDeleter {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

// |X_k| for k = 0..n/2 of the real input.
std::vector<double> real_dft_magnitudes(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  if (!in || !out) throw NumericFailure("fft: allocation failed");

  PlanPtr plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  if (!plan) throw NumericFailure("fft: planner failed for n = " + std::to_string(n));

  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.get());

  std::vector<double> mags(bins);
  for (std::size_t k = 0; k < bins; ++k) mags[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  return mags;
}

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

PeriodInfo PeriodInfo::from_samples(std::size_t period_samples, const LoadSeries& s) {
  if (period_samples < 1 || period_samples > s.size()) {
    throw InvalidInput("period: " + std::to_string(period_samples) +
                       " samples does not fit a series of length " + std::to_string(s.size()));
  }
  PeriodInfo p;
  p.period_samples = period_samples;
  p.period_seconds = static_cast<std::int64_t>(period_samples) * s.interval();
  p.fundamental_frequency_hz = 1.0 / static_cast<double>(p.period_seconds);
  p.num_full_periods = s.size() / period_samples;
  p.raw_period_samples = static_cast<double>(period_samples);
  return p;
}

Spectrum fft_spectrum(std::span<const double> values, std::int64_t interval_seconds) {
  const std::size_t n = values.size();
  if (n < 4) throw InvalidInput("fft_spectrum: at least 4 samples are required");
  if (interval_seconds <= 0) throw InvalidInput("fft_spectrum: interval must be positive");

  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  const double mean = sum / static_cast<double>(n);
  std::vector<double> centered(values.begin(), values.end());
  for (double& v : centered) v -= mean;

  Spectrum sp;
  sp.sample_count = n;
  sp.dc_magnitude = std::abs(sum);
  sp.magnitudes = real_dft_magnitudes(centered);
  sp.frequencies_hz.resize(sp.magnitudes.size());
  const double df = 1.0 / (static_cast<double>(n) * static_cast<double>(interval_seconds));
  for (std::size_t k = 0; k < sp.frequencies_hz.size(); ++k) {
    sp.frequencies_hz[k] = static_cast<double>(k) * df;
  }
  return sp;
}

Spectrum fft_spectrum(const LoadSeries& s) { return fft_spectrum(s.values(), s.interval()); }

PeriodInfo fundamental_period(const LoadSeries& s) {
  const Spectrum sp = fft_spectrum(s);
  const std::size_t n = sp.sample_count;

  std::size_t peak = 1;
  for (std::size_t k = 2; k < sp.magnitudes.size(); ++k) {
    if (sp.magnitudes[k] > sp.magnitudes[peak]) peak = k;
  }
  const double peak_mag = sp.magnitudes[peak];
  const double median_mag =
      median_of(std::vector<double>(sp.magnitudes.begin() + 1, sp.magnitudes.end()));

  if (!(peak_mag > 0.0) || peak_mag < kNoiseFloorFactor * median_mag) {
    throw NoPeriodicity("no significant periodicity: peak magnitude is " +
                        std::to_string(median_mag > 0.0 ? peak_mag / median_mag : 0.0) +
                        "x the median (needs 5x)");
  }
  if (peak < 2) {
    throw NoPeriodicity("no significant periodicity: the dominant component spans the whole "
                        "window (fewer than two periods)");
  }

  PeriodInfo p;
  p.raw_period_samples = static_cast<double>(n) / static_cast<double>(peak);
  p.period_samples = static_cast<std::size_t>(std::llround(p.raw_period_samples));
  p.period_seconds = static_cast<std::int64_t>(p.period_samples) * s.interval();
  p.fundamental_frequency_hz = sp.frequencies_hz[peak];
  p.num_full_periods = n / p.period_samples;
  p.confidence = median_mag > 0.0 ? peak_mag / median_mag
                                  : std::numeric_limits<double>::infinity();
  const double frac = std::abs(p.raw_period_samples - static_cast<double>(p.period_samples));
  if (frac > kNonIntegerPeriodTolerance) {
    p.warnings.push_back("non-integer period: " + std::to_string(p.raw_period_samples) +
                         " samples rounded to " + std::to_string(p.period_samples));
  }
  return p;
}

PeriodSensitivity period_sensitivity(const LoadSeries& s, std::size_t trials,
                                     std::int64_t min_window_seconds, std::uint64_t rng_seed) {
  if (trials < 1) throw InvalidInput("period_sensitivity: trials must be >= 1");
  const std::size_t n = s.size();
  const auto min_len = static_cast<std::size_t>(
      (min_window_seconds + s.interval() - 1) / std::max<std::int64_t>(s.interval(), 1));
  if (min_window_seconds <= 0 || min_len < 4 || min_len > n) {
    throw InvalidInput("period_sensitivity: minimum window must cover 4 samples and fit the "
                       "series");
  }

  PeriodSensitivity out;
  out.detected_seconds.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    std::mt19937_64 rng(seq);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(min_len, n)(rng);
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n - len)(rng);
    try {
      const PeriodInfo p = fundamental_period(s.slice(start, len));
      out.detected_seconds.push_back(p.period_seconds);
    } catch (const NoPeriodicity&) {
      ++out.skipped;
    }
  }
  out.trials = out.detected_seconds.size();
  if (out.trials == 0) {
    throw NoPeriodicity("period_sensitivity: no trial found a significant periodicity");
  }
  double mean = 0.0;
  for (auto v : out.detected_seconds) mean += static_cast<double>(v);
  mean /= static_cast<double>(out.trials);
  double ss = 0.0;
  for (auto v : out.detected_seconds) ss += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
  out.mean_period_seconds = mean;
  out.variance_seconds2 = out.trials > 1 ? ss / static_cast<double>(out.trials - 1) : 0.0;
  return out;
}

}  // namespace loadclean
