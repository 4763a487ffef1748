#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadclean/portrait.hpp"

namespace loadclean {

// One period of landscape data: samples [begin, end).
struct LandscapeBlock {
  std::size_t period_index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  CharacteristicVector chars;

  std::size_t size() const noexcept { return end - begin; }
};

struct Segmentation {
  std::vector<LandscapeBlock> blocks;  // full periods
  std::optional<LandscapeBlock> tail;  // partial final period, excluded from grouping
};

// floor(n / r) full blocks plus the partial tail, if any. Requires 1 <= r <= n.
Segmentation segment_periods(const LoadSeries& s, const PeriodInfo& p);

// A group of whole periods with similar characteristic vectors.
struct VirtualLandscape {
  std::vector<std::size_t> member_periods;  // ascending
  CharacteristicVector chars;               // over the pooled member values
};

struct VldResult {
  std::vector<VirtualLandscape> vlds;  // ordered by first member period
  double threshold = 0.0;
  std::optional<ThresholdScan> scan;
};

// Groups blocks with the portrait machinery (similarity graph, clique cover,
// elbow scan) applied to block characteristic vectors. The result does not
// depend on the order of `blocks`.
VldResult build_vlds(const LoadSeries& s, std::span<const LandscapeBlock> blocks,
                     ThresholdChoice choice = ThresholdChoice::automatic(),
                     const SimilarityMetric& metric = {});

// A portrait dataset that detection runs on.
struct DetectionGroup {
  std::size_t id = 0;
  std::optional<std::size_t> vld;  // owning VLD, when VLDs are in use
  PortraitSet portrait;            // sample indices refer to the full series
  bool low_power = false;          // built from a single period
};

struct GroupLayout {
  std::size_t period_samples = 0;
  std::vector<DetectionGroup> groups;
  std::vector<VirtualLandscape> vlds;  // empty without VLD pre-processing
  std::vector<std::size_t> owner;      // series index -> group id
  std::vector<double> thresholds;      // similarity threshold per VLD (one entry when stationary)
  std::vector<std::string> warnings;
};

// Layout for the stationary pipeline: one group per VPD.
GroupLayout stationary_layout(const LoadSeries& s, const VpdResult& vpds);

// Builds VPDs separately inside every VLD. Each VLD's periods are
// concatenated into a sub-series; the partial tail joins the VLD whose
// characteristic vector is most similar to it. Sample references in the
// result point back into `s`.
GroupLayout per_vld_pipeline(const LoadSeries& s, const PeriodInfo& p,
                             std::span<const VirtualLandscape> vlds,
                             ThresholdChoice choice = ThresholdChoice::automatic(),
                             const SimilarityMetric& metric = {});

}  // namespace loadclean
