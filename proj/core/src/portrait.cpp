#include "loadclean/portrait.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadclean/error.hpp"
#include "loadclean/stats.hpp"

namespace loadclean {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLowConfidenceRatio = 2.0;

}  // namespace

CharacteristicVector characteristic_vector(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("characteristic vector of an empty dataset");
  CharacteristicVector c;
  c.theta = stats::lower_median(values);
  c.mad = stats::median_abs_deviation(values, c.theta);
  return c;
}

SimilarityMetric SimilarityMetric::normalized(std::span<const CharacteristicVector> chars) {
  SimilarityMetric m;
  if (chars.empty()) return m;
  std::vector<double> thetas, mads;
  for (const auto& c : chars) {
    thetas.push_back(c.theta);
    mads.push_back(c.mad);
  }
  const double st = stats::median_abs_deviation(thetas, stats::lower_median(thetas));
  const double sm = stats::median_abs_deviation(mads, stats::lower_median(mads));
  m.theta_scale = st > 0.0 ? st : 1.0;
  m.mad_scale = sm > 0.0 ? sm : 1.0;
  return m;
}

double similarity(const CharacteristicVector& a, const CharacteristicVector& b,
                  const SimilarityMetric& metric) {
  if (a == b) return kInf;
  const double dt = (a.theta - b.theta) / metric.theta_scale;
  const double dm = (a.mad - b.mad) / metric.mad_scale;
  const double d = std::hypot(dt, dm);
  return d > 0.0 ? 1.0 / d : kInf;
}

std::vector<double> member_values(const LoadSeries& s, const PortraitSet& p) {
  std::vector<double> out;
  out.reserve(p.sample_indices.size());
  for (auto i : p.sample_indices) out.push_back(s.value(i));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_refs(const PortraitSet& p, std::size_t r) {
  if (r == 0) throw InvalidInput("sample_refs: period must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(p.sample_indices.size());
  for (auto i : p.sample_indices) out.emplace_back(i / r, i % r);
  return out;
}

Graph::Graph(std::size_t vertex_count)
    : n_(vertex_count), matrix_(vertex_count * vertex_count, 0), adjacency_(vertex_count) {}

void Graph::add_edge(std::size_t u, std::size_t v) {
  if (u >= n_ || v >= n_) throw InvalidInput("graph: vertex out of range");
  if (u == v || adjacent(u, v)) return;
  matrix_[u * n_ + v] = matrix_[v * n_ + u] = 1;
  auto insert_sorted = [](std::vector<std::size_t>& list, std::size_t x) {
    list.insert(std::lower_bound(list.begin(), list.end(), x), x);
  };
  insert_sorted(adjacency_[u], v);
  insert_sorted(adjacency_[v], u);
  ++edges_;
}

SimilarityGraph build_similarity_graph(std::span<const CharacteristicVector> chars, double s0,
                                       const SimilarityMetric& metric) {
  if (!(s0 > 0.0)) throw InvalidInput("similarity threshold must be positive");
  SimilarityGraph sg;
  sg.vertex_chars.assign(chars.begin(), chars.end());
  sg.threshold = s0;
  sg.graph = Graph(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    for (std::size_t j = i + 1; j < chars.size(); ++j) {
      if (similarity(chars[i], chars[j], metric) >= s0) sg.graph.add_edge(i, j);
    }
  }
  return sg;
}

std::vector<Clique> greedy_clique_cover(const Graph& g, CoverCounters* counters) {
  const std::size_t n = g.size();
  std::vector<char> uncovered(n, 1);
  std::vector<std::size_t> degree(n);
  for (std::size_t v = 0; v < n; ++v) degree[v] = g.degree(v);
  std::uint64_t ops = 0;

  std::vector<Clique> cover;
  std::size_t remaining = n;
  while (remaining > 0) {
    std::size_t seed = n;
    for (std::size_t v = 0; v < n; ++v) {
      ++ops;
      if (uncovered[v] && (seed == n || degree[v] > degree[seed])) seed = v;
    }

    Clique clique{seed};
    for (std::size_t w : g.neighbors(seed)) {
      ++ops;
      if (!uncovered[w]) continue;
      bool joins = true;
      for (std::size_t m : clique) {
        ++ops;
        if (!g.adjacent(w, m)) {
          joins = false;
          break;
        }
      }
      if (joins) clique.push_back(w);
    }

    for (std::size_t m : clique) uncovered[m] = 0;
    for (std::size_t m : clique) {
      for (std::size_t x : g.neighbors(m)) {
        ++ops;
        if (uncovered[x]) --degree[x];
      }
    }
    remaining -= clique.size();
    std::sort(clique.begin(), clique.end());
    cover.push_back(std::move(clique));
  }
  if (counters) counters->operations += ops;
  return cover;
}

MeanDistance mean_distance(std::span<const CharacteristicVector> chars,
                           const SimilarityMetric& metric) {
  const std::size_t n = chars.size();
  if (n < 2) throw InvalidInput("mean distance needs at least two datasets");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = similarity(chars[i], chars[j], metric);
      if (std::isinf(s)) return {kInf, true};
      sum += s;
    }
  }
  return {sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0), false};
}

namespace {

std::vector<CharacteristicVector> pooled_chars(std::span<const std::vector<double>> vertex_values,
                                               const std::vector<Clique>& cliques) {
  std::vector<CharacteristicVector> out;
  out.reserve(cliques.size());
  std::vector<double> pool;
  for (const auto& c : cliques) {
    pool.clear();
    for (auto v : c) pool.insert(pool.end(), vertex_values[v].begin(), vertex_values[v].end());
    out.push_back(characteristic_vector(pool));
  }
  return out;
}

// Candidate thresholds: the distinct finite pairwise similarities, thinned to
// evenly spaced order statistics when there are too many.
std::vector<double> candidate_thresholds(const std::vector<double>& sims) {
  std::vector<double> finite;
  for (double s : sims) {
    if (std::isfinite(s)) finite.push_back(s);
  }
  std::sort(finite.begin(), finite.end());
  finite.erase(std::unique(finite.begin(), finite.end()), finite.end());
  if (finite.size() <= kMaxThresholdCandidates) return finite;
  std::vector<double> thinned;
  const double step = static_cast<double>(finite.size() - 1) /
                      static_cast<double>(kMaxThresholdCandidates - 1);
  for (std::size_t i = 0; i < kMaxThresholdCandidates; ++i) {
    thinned.push_back(finite[static_cast<std::size_t>(std::llround(static_cast<double>(i) * step))]);
  }
  thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
  return thinned;
}

}  // namespace

ThresholdScan select_threshold(std::span<const std::vector<double>> vertex_values,
                               const SimilarityMetric& metric) {
  const std::size_t n = vertex_values.size();
  if (n == 0) throw InvalidInput("threshold selection needs at least one dataset");
  std::vector<CharacteristicVector> chars;
  chars.reserve(n);
  for (const auto& v : vertex_values) chars.push_back(characteristic_vector(v));

  std::vector<double> sims(n * n, kInf);
  std::vector<double> pair_sims;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sims[i * n + j] = sims[j * n + i] = similarity(chars[i], chars[j], metric);
      pair_sims.push_back(sims[i * n + j]);
    }
  }

  ThresholdScan scan;
  const std::vector<double> candidates = candidate_thresholds(pair_sims);
  if (candidates.empty()) {
    // Every pair is identical (or there is a single dataset): one cluster.
    scan.degenerate = n > 1;
    scan.thresholds = {kInf};
    scan.cluster_counts = {1};
    scan.mean_distances = {kNaN};
    return scan;
  }

  for (double t : candidates) {
    Graph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (sims[i * n + j] >= t) g.add_edge(i, j);
      }
    }
    const auto cover = greedy_clique_cover(g);
    scan.thresholds.push_back(t);
    scan.cluster_counts.push_back(cover.size());
    if (cover.size() < 2) {
      scan.mean_distances.push_back(kNaN);
    } else {
      scan.mean_distances.push_back(mean_distance(pooled_chars(vertex_values, cover), metric).value);
    }
  }

  // One curve point per cluster count: the largest threshold producing it.
  struct Point {
    std::size_t count;
    std::size_t index;
  };
  std::vector<Point> curve;
  {
    std::vector<std::size_t> last(n + 1, n * n + candidates.size());
    const std::size_t none = last[0];
    for (std::size_t i = 0; i < scan.thresholds.size(); ++i) {
      if (scan.cluster_counts[i] >= 2 && std::isfinite(scan.mean_distances[i])) {
        last[scan.cluster_counts[i]] = i;
      }
    }
    for (std::size_t c = 2; c <= n; ++c) {
      if (last[c] != none) curve.push_back({c, last[c]});
    }
  }

  if (curve.empty()) {
    // Only a single merged dataset (or identical merged datasets) is reachable.
    std::size_t pick = 0;
    for (std::size_t i = 0; i < scan.thresholds.size(); ++i) {
      if (scan.cluster_counts[i] == 1) pick = i;
    }
    scan.selected_index = pick;
    scan.low_confidence = true;
    return scan;
  }
  if (curve.size() == 1) {
    scan.selected_index = curve.front().index;
    scan.elbow_curve = {{curve.front().count, 0.0}};
    scan.low_confidence = true;
    return scan;
  }

  // Elbow: largest second difference of log mean distance, walking up in
  // cluster count. The first point uses a one-sided difference; the last has
  // no right neighbour and is not a candidate.
  std::vector<double> logd;
  for (const auto& p : curve) logd.push_back(std::log(scan.mean_distances[p.index]));
  std::size_t best = 0;
  double best_value = -kInf;
  std::vector<double> magnitudes;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double right = logd[i + 1] - logd[i];
    const double left = i > 0 ? logd[i] - logd[i - 1] : 0.0;
    const double second = right - left;
    scan.elbow_curve.emplace_back(curve[i].count, second);
    magnitudes.push_back(std::abs(second));
    if (second > best_value) {
      best_value = second;
      best = i;
    }
  }
  scan.selected_index = curve[best].index;
  scan.low_confidence = !(best_value >= kLowConfidenceRatio * stats::lower_median(magnitudes)) ||
                        best_value <= 0.0;
  return scan;
}

ThresholdScan select_threshold(const LoadSeries& s, std::span<const PortraitSet> bpds,
                               const SimilarityMetric& metric) {
  std::vector<std::vector<double>> values;
  values.reserve(bpds.size());
  for (const auto& p : bpds) values.push_back(member_values(s, p));
  return select_threshold(values, metric);
}

namespace detail {

std::vector<PortraitSet> build_bpds_unchecked(const LoadSeries& s, std::size_t r) {
  if (r < 1 || r > s.size()) throw InvalidInput("portrait: period does not fit the series");
  std::vector<PortraitSet> out(r);
  for (std::size_t i = 0; i < r; ++i) {
    out[i].kind = PortraitKind::basic;
    out[i].slots = {i};
    for (std::size_t k = i; k < s.size(); k += r) out[i].sample_indices.push_back(k);
    out[i].chars = characteristic_vector(member_values(s, out[i]));
  }
  return out;
}

VpdResult build_vpds_from_bpds(const LoadSeries& s, std::vector<PortraitSet> bpds,
                               ThresholdChoice choice, const SimilarityMetric& metric) {
  VpdResult res;
  if (choice.fixed) {
    if (!(*choice.fixed > 0.0)) throw InvalidInput("similarity threshold must be positive");
    res.threshold = *choice.fixed;
  } else {
    res.scan = select_threshold(s, bpds, metric);
    res.threshold = res.scan->selected_threshold();
  }
  std::vector<CharacteristicVector> chars;
  for (const auto& p : bpds) chars.push_back(p.chars);
  const SimilarityGraph g = build_similarity_graph(chars, res.threshold, metric);
  const auto cover = greedy_clique_cover(g.graph);
  res.vpds = merge_portraits(s, bpds, cover);
  res.bpds = std::move(bpds);
  return res;
}

}  // namespace detail

std::vector<PortraitSet> build_bpds(const LoadSeries& s, const PeriodInfo& p) {
  const std::size_t r = p.period_samples;
  if (r < 1 || r > s.size() / 2) {
    throw InvalidInput("portrait: period of " + std::to_string(r) +
                       " samples needs a series of at least two periods (have " +
                       std::to_string(s.size()) + " samples)");
  }
  return detail::build_bpds_unchecked(s, r);
}

std::vector<PortraitSet> merge_portraits(const LoadSeries& s, std::span<const PortraitSet> bpds,
                                         std::span<const Clique> cliques) {
  std::vector<PortraitSet> out;
  out.reserve(cliques.size());
  for (const auto& c : cliques) {
    if (c.empty()) throw InvalidInput("portrait: empty clique");
    PortraitSet v;
    v.kind = PortraitKind::virtual_portrait;
    for (auto b : c) {
      const PortraitSet& p = bpds[b];
      v.slots.insert(v.slots.end(), p.slots.begin(), p.slots.end());
      v.sample_indices.insert(v.sample_indices.end(), p.sample_indices.begin(),
                              p.sample_indices.end());
    }
    std::sort(v.slots.begin(), v.slots.end());
    std::sort(v.sample_indices.begin(), v.sample_indices.end());
    v.chars = characteristic_vector(member_values(s, v));
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(),
            [](const PortraitSet& a, const PortraitSet& b) { return a.slots.front() < b.slots.front(); });
  return out;
}

VpdResult build_vpds(const LoadSeries& s, const PeriodInfo& p, ThresholdChoice choice,
                     const SimilarityMetric& metric) {
  return detail::build_vpds_from_bpds(s, build_bpds(s, p), choice, metric);
}

}  // namespace loadclean
