#include "loadclean/stationarity.hpp"

#include <algorithm>
#include <cmath>

#include "loadclean/error.hpp"

namespace loadclean {

namespace {

LandscapeBlock make_block(const LoadSeries& s, std::size_t k, std::size_t begin, std::size_t end) {
  LandscapeBlock b;
  b.period_index = k;
  b.begin = begin;
  b.end = end;
  b.chars = characteristic_vector(s.values().subspan(begin, end - begin));
  return b;
}

std::vector<double> pooled(const LoadSeries& s, std::span<const LandscapeBlock> blocks,
                           std::span<const std::size_t> which) {
  std::vector<double> out;
  for (auto i : which) {
    auto v = s.values().subspan(blocks[i].begin, blocks[i].size());
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

Segmentation segment_periods(const LoadSeries& s, const PeriodInfo& p) {
  const std::size_t r = p.period_samples;
  if (r < 1 || r > s.size()) {
    throw InvalidInput("segment: period of " + std::to_string(r) +
                       " samples does not fit a series of length " + std::to_string(s.size()));
  }
  Segmentation seg;
  const std::size_t full = s.size() / r;
  for (std::size_t k = 0; k < full; ++k) seg.blocks.push_back(make_block(s, k, k * r, (k + 1) * r));
  if (full * r < s.size()) seg.tail = make_block(s, full, full * r, s.size());
  return seg;
}

VldResult build_vlds(const LoadSeries& s, std::span<const LandscapeBlock> blocks_in,
                     ThresholdChoice choice, const SimilarityMetric& metric) {
  if (blocks_in.empty()) throw InvalidInput("segment: at least one full period is required");
  std::vector<LandscapeBlock> blocks(blocks_in.begin(), blocks_in.end());
  std::sort(blocks.begin(), blocks.end(), [](const LandscapeBlock& a, const LandscapeBlock& b) {
    return a.period_index < b.period_index;
  });

  VldResult res;
  std::vector<CharacteristicVector> chars;
  for (const auto& b : blocks) chars.push_back(b.chars);
  if (choice.fixed) {
    if (!(*choice.fixed > 0.0)) throw InvalidInput("similarity threshold must be positive");
    res.threshold = *choice.fixed;
  } else {
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::size_t one[] = {i};
      values.push_back(pooled(s, blocks, one));
    }
    res.scan = select_threshold(values, metric);
    res.threshold = res.scan->selected_threshold();
  }

  const auto cover = greedy_clique_cover(build_similarity_graph(chars, res.threshold, metric).graph);
  for (const auto& clique : cover) {
    VirtualLandscape v;
    for (auto i : clique) v.member_periods.push_back(blocks[i].period_index);
    std::sort(v.member_periods.begin(), v.member_periods.end());
    v.chars = characteristic_vector(pooled(s, blocks, clique));
    res.vlds.push_back(std::move(v));
  }
  std::sort(res.vlds.begin(), res.vlds.end(), [](const VirtualLandscape& a, const VirtualLandscape& b) {
    return a.member_periods.front() < b.member_periods.front();
  });
  return res;
}

GroupLayout stationary_layout(const LoadSeries& s, const VpdResult& vpds) {
  GroupLayout layout;
  layout.period_samples = vpds.bpds.size();
  layout.owner.assign(s.size(), 0);
  layout.thresholds = {vpds.threshold};
  for (std::size_t g = 0; g < vpds.vpds.size(); ++g) {
    DetectionGroup grp;
    grp.id = g;
    grp.portrait = vpds.vpds[g];
    for (auto i : grp.portrait.sample_indices) layout.owner[i] = g;
    layout.groups.push_back(std::move(grp));
  }
  if (vpds.scan && vpds.scan->low_confidence) {
    layout.warnings.push_back("threshold selection is low-confidence: no clear elbow in the scan");
  }
  return layout;
}

GroupLayout per_vld_pipeline(const LoadSeries& s, const PeriodInfo& p,
                             std::span<const VirtualLandscape> vlds, ThresholdChoice choice,
                             const SimilarityMetric& metric) {
  const std::size_t r = p.period_samples;
  const std::size_t full = r > 0 ? s.size() / r : 0;
  if (r < 1 || full < 1) throw InvalidInput("segment: period does not fit the series");
  if (vlds.empty()) throw InvalidInput("segment: no virtual landscape datasets");

  std::vector<int> seen(full, 0);
  for (const auto& v : vlds) {
    for (auto k : v.member_periods) {
      if (k >= full) throw InvalidInput("segment: VLD references period " + std::to_string(k) +
                                        " beyond the series");
      ++seen[k];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw InvalidInput("segment: VLDs must partition the full periods");
  }

  // The partial tail rides along with the most similar VLD.
  std::optional<std::size_t> tail_owner;
  const std::size_t tail_begin = full * r;
  if (tail_begin < s.size()) {
    const auto tail_chars = characteristic_vector(s.values().subspan(tail_begin));
    double best = -1.0;
    for (std::size_t v = 0; v < vlds.size(); ++v) {
      const double sim = similarity(tail_chars, vlds[v].chars, metric);
      if (sim > best) {
        best = sim;
        tail_owner = v;
      }
    }
  }

  GroupLayout layout;
  layout.period_samples = r;
  layout.vlds.assign(vlds.begin(), vlds.end());
  layout.owner.assign(s.size(), 0);

  for (std::size_t v = 0; v < vlds.size(); ++v) {
    // Sub-series index j -> original index.
    std::vector<std::size_t> origin;
    for (auto k : vlds[v].member_periods) {
      for (std::size_t j = 0; j < r; ++j) origin.push_back(k * r + j);
    }
    if (tail_owner == v) {
      for (std::size_t i = tail_begin; i < s.size(); ++i) origin.push_back(i);
    }
    std::vector<double> values;
    std::vector<SampleState> states;
    for (auto i : origin) {
      values.push_back(s.value(i));
      states.push_back(s.state(i));
    }
    const LoadSeries sub(s.start_epoch(), s.interval(), std::move(values), std::move(states),
                         s.meta(), s.labels());

    VpdResult res;
    try {
      res = detail::build_vpds_from_bpds(sub, detail::build_bpds_unchecked(sub, r), choice, metric);
    } catch (const Error& e) {
      rethrow_with_context(e, "VLD " + std::to_string(v) + ": ");
    }
    layout.thresholds.push_back(res.threshold);
    const bool low_power = vlds[v].member_periods.size() < 2;
    if (low_power) {
      layout.warnings.push_back("VLD " + std::to_string(v) +
                                " holds a single period; its portraits have one sample per slot");
    }
    if (res.scan && res.scan->low_confidence) {
      layout.warnings.push_back("VLD " + std::to_string(v) +
                                ": threshold selection is low-confidence");
    }
    for (auto& vpd : res.vpds) {
      DetectionGroup grp;
      grp.id = layout.groups.size();
      grp.vld = v;
      grp.low_power = low_power;
      for (auto& i : vpd.sample_indices) i = origin[i];
      std::sort(vpd.sample_indices.begin(), vpd.sample_indices.end());
      grp.portrait = std::move(vpd);
      for (auto i : grp.portrait.sample_indices) layout.owner[i] = grp.id;
      layout.groups.push_back(std::move(grp));
    }
  }
  return layout;
}

}  // namespace loadclean
