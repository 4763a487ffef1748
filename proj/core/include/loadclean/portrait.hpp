#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "loadclean/series.hpp"
#include "loadclean/spectral.hpp"

namespace loadclean {

// (median, median absolute deviation) of a dataset.
struct CharacteristicVector {
  double theta = 0.0;
  double mad = 0.0;

  friend bool operator==(const CharacteristicVector&, const CharacteristicVector&) = default;
};

// Lower median and lower-median MAD. Throws InvalidInput on empty input.
CharacteristicVector characteristic_vector(std::span<const double> values);

// Per-coordinate divisors applied before the Euclidean distance. The default
// compares raw (theta, mad); `normalized` divides each coordinate by its MAD
// across the given vectors.
struct SimilarityMetric {
  double theta_scale = 1.0;
  double mad_scale = 1.0;

  static SimilarityMetric normalized(std::span<const CharacteristicVector> chars);
};

// +inf for identical vectors, otherwise 1 / ||a - b||.
double similarity(const CharacteristicVector& a, const CharacteristicVector& b,
                  const SimilarityMetric& metric = {});

enum class PortraitKind { basic, virtual_portrait };

// A basic (one phase slot) or virtual (several slots) portrait dataset.
struct PortraitSet {
  PortraitKind kind = PortraitKind::basic;
  std::vector<std::size_t> slots;           // phase indices in [0, r), ascending
  std::vector<std::size_t> sample_indices;  // positions in the source series, ascending
  CharacteristicVector chars;

  std::size_t span_samples() const noexcept { return slots.size(); }
  std::size_t size() const noexcept { return sample_indices.size(); }
};

// Values of `s` at the portrait's sample indices, in index order.
std::vector<double> member_values(const LoadSeries& s, const PortraitSet& p);

// (period k, slot) for every member, given r samples per period.
std::vector<std::pair<std::size_t, std::size_t>> sample_refs(const PortraitSet& p, std::size_t r);

// Undirected simple graph with an adjacency matrix for O(1) edge tests and
// sorted adjacency lists for iteration.
class Graph {
 public:
  explicit Graph(std::size_t vertex_count);

  std::size_t size() const noexcept { return n_; }
  void add_edge(std::size_t u, std::size_t v);
  bool adjacent(std::size_t u, std::size_t v) const noexcept { return matrix_[u * n_ + v] != 0; }
  std::size_t degree(std::size_t v) const noexcept { return adjacency_[v].size(); }
  std::span<const std::size_t> neighbors(std::size_t v) const noexcept { return adjacency_[v]; }
  std::size_t edge_count() const noexcept { return edges_; }

 private:
  std::size_t n_;
  std::size_t edges_ = 0;
  std::vector<std::uint8_t> matrix_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

struct SimilarityGraph {
  std::vector<CharacteristicVector> vertex_chars;
  double threshold = 0.0;
  Graph graph{0};
};

// Edge (i, j) iff similarity(chars[i], chars[j]) >= s0. Requires s0 > 0.
SimilarityGraph build_similarity_graph(std::span<const CharacteristicVector> chars, double s0,
                                       const SimilarityMetric& metric = {});

using Clique = std::vector<std::size_t>;

struct CoverCounters {
  std::uint64_t operations = 0;  // vertex scans + adjacency tests + degree updates
};

// Greedy clique cover. Each round seeds a clique with the uncovered vertex of
// highest degree among uncovered vertices (ties: lowest index), then scans its
// uncovered neighbours in ascending order and keeps every vertex adjacent to
// all members so far. Returned cliques partition the vertex set.
std::vector<Clique> greedy_clique_cover(const Graph& g, CoverCounters* counters = nullptr);

struct MeanDistance {
  double value = 0.0;
  bool degenerate = false;  // some pair is identical, value is +inf
};

// Average pairwise similarity over the C(n, 2) pairs. Requires n >= 2.
MeanDistance mean_distance(std::span<const CharacteristicVector> chars,
                           const SimilarityMetric& metric = {});

// Result of sweeping the similarity threshold. Entry i holds the cover size
// and the mean distance of the merged datasets at thresholds[i]; mean
// distance is NaN when everything merges into one dataset.
struct ThresholdScan {
  std::vector<double> thresholds;
  std::vector<std::size_t> cluster_counts;
  std::vector<double> mean_distances;
  std::size_t selected_index = 0;
  bool degenerate = false;      // all characteristic vectors identical
  bool low_confidence = false;  // elbow barely stands out of the curve
  // Second difference of log mean distance at each curve point used by the
  // elbow, keyed by cluster count.
  std::vector<std::pair<std::size_t, double>> elbow_curve;

  double selected_threshold() const { return thresholds.at(selected_index); }
  std::size_t selected_count() const { return cluster_counts.at(selected_index); }
};

inline constexpr std::size_t kMaxThresholdCandidates = 512;

// Elbow scan over merge thresholds. `vertex_values[i]` holds the raw values of
// vertex i; merged datasets get characteristic vectors from pooled values.
ThresholdScan select_threshold(std::span<const std::vector<double>> vertex_values,
                               const SimilarityMetric& metric = {});
ThresholdScan select_threshold(const LoadSeries& s, std::span<const PortraitSet> bpds,
                               const SimilarityMetric& metric = {});

// r basic portrait datasets: BPD i holds samples i, i + r, i + 2r, ...
// (a trailing partial period included). Requires 1 <= r <= size / 2.
std::vector<PortraitSet> build_bpds(const LoadSeries& s, const PeriodInfo& p);

// Fixed similarity threshold, or automatic selection when empty.
struct ThresholdChoice {
  std::optional<double> fixed;

  static ThresholdChoice automatic() { return {}; }
  static ThresholdChoice at(double s0) { return {s0}; }
};

struct VpdResult {
  std::vector<PortraitSet> bpds;
  std::vector<PortraitSet> vpds;  // ordered by smallest slot
  double threshold = 0.0;
  std::optional<ThresholdScan> scan;
};

// Merges the BPDs of each clique into one dataset, recomputing the
// characteristic vector from the union of raw member values.
std::vector<PortraitSet> merge_portraits(const LoadSeries& s, std::span<const PortraitSet> bpds,
                                         std::span<const Clique> cliques);

// build_bpds -> (select_threshold) -> similarity graph -> clique cover -> merge.
VpdResult build_vpds(const LoadSeries& s, const PeriodInfo& p,
                     ThresholdChoice choice = ThresholdChoice::automatic(),
                     const SimilarityMetric& metric = {});

namespace detail {
// BPDs without the two-period length check; used for short VLD sub-series.
std::vector<PortraitSet> build_bpds_unchecked(const LoadSeries& s, std::size_t r);
VpdResult build_vpds_from_bpds(const LoadSeries& s, std::vector<PortraitSet> bpds,
                               ThresholdChoice choice, const SimilarityMetric& metric);
}  // namespace detail

}  // namespace loadclean
