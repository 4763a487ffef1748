#include "loadclean/cleanse.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "loadclean/error.hpp"
#include "loadclean/stats.hpp"

namespace loadclean {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_with_context(e, std::string(name) + ": ");
  }
}

const GroupStats& group_by_id(const DetectionReport& r, std::size_t id) {
  if (id < r.groups.size() && r.groups[id].id == id) return r.groups[id];
  for (const auto& g : r.groups) {
    if (g.id == id) return g;
  }
  throw InvalidInput("report references unknown group " + std::to_string(id));
}

void check_replacement(std::size_t index, double v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidInput("replacement for index " + std::to_string(index) +
                       " must be finite and >= 0 (got " + format_double(v) + ")");
  }
}

}  // namespace

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::portrait_median: return "portrait-median";
    case Policy::portrait_mean: return "portrait-mean";
    case Policy::gamma_mean: return "gamma-mean";
    case Policy::leave: return "leave";
  }
  return "leave";
}

Policy parse_policy(std::string_view name) {
  if (name == "portrait-median") return Policy::portrait_median;
  if (name == "portrait-mean") return Policy::portrait_mean;
  if (name == "gamma-mean") return Policy::gamma_mean;
  if (name == "leave") return Policy::leave;
  throw InvalidInput("unknown policy '" + std::string(name) +
                     "' (expected portrait-median, portrait-mean, gamma-mean or leave)");
}

std::string_view to_string(Action a) { return a == Action::keep ? "keep" : "replace"; }
std::string_view to_string(DecisionSource d) {
  return d == DecisionSource::automatic ? "auto" : "human";
}

void ReplacementPolicy::validate(Strategy detection_strategy) const {
  if ((missing_policy == Policy::gamma_mean || aberrant_policy == Policy::gamma_mean) &&
      detection_strategy != Strategy::gamma) {
    throw InvalidInput("gamma-mean replacement requires the gamma strategy");
  }
}

double policy_value(const GroupStats& g, Policy policy) {
  switch (policy) {
    case Policy::portrait_median: return g.theta;
    case Policy::portrait_mean: return g.mean;
    case Policy::gamma_mean:
      if (!g.gamma_shape || !g.gamma_scale) {
        throw InvalidInput("group " + std::to_string(g.id) + " has no gamma statistics");
      }
      return *g.gamma_shape * *g.gamma_scale;
    case Policy::leave: break;
  }
  throw InvalidInput("policy 'leave' prescribes no value");
}

CleanseResult impute_missing(const LoadSeries& s, const DetectionReport& report,
                             const ReplacementPolicy& policy) {
  CleanseResult out{s, {}, {}};
  if (policy.missing_policy == Policy::leave || s.missing_count() == 0) return out;

  std::vector<const GroupStats*> owner(s.size(), nullptr);
  for (const auto& g : report.groups) {
    for (auto i : g.members) {
      if (i < owner.size()) owner[i] = &g;
    }
  }
  std::optional<double> series_median;

  std::vector<double> values(s.values().begin(), s.values().end());
  std::vector<SampleState> states(s.states().begin(), s.states().end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (states[i] != SampleState::missing) continue;
    const GroupStats* g = owner[i];
    if (!g) throw InvalidInput("missing sample " + std::to_string(i) + " belongs to no group");

    AuditRow row;
    row.index = i;
    row.timestamp = s.timestamp(i);
    row.kind = "missing";
    row.action = "impute";
    row.old_value = values[i];
    row.group = g->id;
    row.decided_by = DecisionSource::automatic;

    double v;
    if (g->members.size() < 2) {
      if (g->vld && *g->vld < report.vlds.size()) {
        v = report.vlds[*g->vld].theta;
        row.note = "single-member portrait: used the VLD median";
      } else {
        if (!series_median) series_median = stats::lower_median(s.values());
        v = *series_median;
        row.note = "single-member portrait: used the series median";
      }
      out.warnings.push_back("index " + std::to_string(i) + ": " + row.note);
    } else if (policy.missing_policy == Policy::gamma_mean && !g->gamma_shape) {
      v = g->theta;
      row.note = "no gamma statistics for this portrait: used its median";
      out.warnings.push_back("index " + std::to_string(i) + ": " + row.note);
    } else {
      v = policy_value(*g, policy.missing_policy);
    }
    check_replacement(i, v);
    values[i] = v;
    states[i] = SampleState::imputed;
    row.new_value = v;
    out.audit.push_back(std::move(row));
  }
  out.series = s.with_values(std::move(values), std::move(states));
  return out;
}

CleanseResult apply_decisions(const LoadSeries& s, const DetectionReport& report,
                              std::span<const Decision> decisions, const ReplacementPolicy& policy) {
  if (report.series_length != s.size()) {
    throw InvalidInput("report covers " + std::to_string(report.series_length) +
                       " samples but the series has " + std::to_string(s.size()));
  }
  std::map<std::size_t, const Decision*> chosen;
  for (const auto& d : decisions) {
    if (!report.find(d.index)) {
      throw InvalidInput("decision for index " + std::to_string(d.index) + " which is not flagged");
    }
    if (d.action == Action::replace && d.value) check_replacement(d.index, *d.value);
    chosen[d.index] = &d;
  }
  if (policy.require_confirmation) {
    std::vector<std::size_t> undecided;
    for (const auto& f : report.flags) {
      if (!chosen.count(f.index)) undecided.push_back(f.index);
    }
    if (!undecided.empty()) {
      std::string list;
      for (std::size_t k = 0; k < undecided.size(); ++k) {
        if (k) list += ", ";
        list += std::to_string(undecided[k]);
      }
      throw InvalidInput(std::to_string(undecided.size()) + " flags are undecided: " + list);
    }
  }

  CleanseResult out{s, {}, {}};
  std::vector<double> values(s.values().begin(), s.values().end());
  std::vector<SampleState> states(s.states().begin(), s.states().end());
  for (const auto& f : report.flags) {
    const GroupStats& g = group_by_id(report, f.group);
    AuditRow row;
    row.index = f.index;
    row.timestamp = s.timestamp(f.index);
    row.kind = "aberrant";
    row.old_value = values[f.index];
    row.group = f.group;
    row.strategy = f.strategy;
    row.bounds = f.bounds;

    Action action;
    std::optional<double> value;
    if (auto it = chosen.find(f.index); it != chosen.end()) {
      action = it->second->action;
      value = it->second->value;
      row.decided_by = it->second->decided_by;
      row.note = it->second->note;
    } else {
      row.decided_by = DecisionSource::automatic;
      action = policy.aberrant_policy == Policy::leave ? Action::keep : Action::replace;
    }
    if (action == Action::replace && !value) value = policy_value(g, policy.aberrant_policy == Policy::leave
                                                                        ? Policy::portrait_median
                                                                        : policy.aberrant_policy);
    if (action == Action::replace) {
      check_replacement(f.index, *value);
      values[f.index] = *value;
      if (states[f.index] == SampleState::missing) states[f.index] = SampleState::imputed;
      row.action = "replace";
    } else {
      row.action = "keep";
    }
    row.new_value = values[f.index];
    out.audit.push_back(std::move(row));
  }
  out.series = s.with_values(std::move(values), std::move(states));
  return out;
}

CleanseResult cleanse(const LoadSeries& s, const DetectionReport& report,
                      std::span<const Decision> decisions, const ReplacementPolicy& policy) {
  CleanseResult applied = apply_decisions(s, report, decisions, policy);
  CleanseResult imputed = impute_missing(applied.series, report, policy);
  applied.series = std::move(imputed.series);
  applied.audit.insert(applied.audit.end(), imputed.audit.begin(), imputed.audit.end());
  applied.warnings.insert(applied.warnings.end(), imputed.warnings.begin(), imputed.warnings.end());
  return applied;
}

PipelineResult run_pipeline(std::string_view csv, const PipelineConfig& cfg) {
  LoadSeries raw = stage("ingest", [&] { return parse_series(csv, cfg.ingest); });
  return run_pipeline(raw, cfg);
}

PipelineResult run_pipeline(const LoadSeries& raw, const PipelineConfig& cfg) {
  stage("config", [&] {
    cfg.detection.validate();
    cfg.policy.validate(cfg.detection.strategy);
  });
  LoadSeries s = stage("default-fill", [&] { return fill_missing_defaults(raw, cfg.missing_sentinel); });
  PeriodInfo period = stage("period", [&] {
    return cfg.period_samples ? PeriodInfo::from_samples(*cfg.period_samples, s) : fundamental_period(s);
  });

  PipelineResult res{s, period, std::nullopt, std::nullopt, {}, {}, std::nullopt};

  bool stationary = true;
  if (cfg.vld_mode) {
    stage("segment", [&] {
      const Segmentation seg = segment_periods(s, period);
      std::vector<CharacteristicVector> chars;
      for (const auto& b : seg.blocks) chars.push_back(b.chars);
      const SimilarityMetric metric =
          cfg.normalized_similarity ? SimilarityMetric::normalized(chars) : SimilarityMetric{};
      res.vlds = build_vlds(s, seg.blocks, cfg.vld_threshold, metric);
    });
    // A single VLD is exactly the stationary case.
    stationary = res.vlds->vlds.size() < 2;
  }

  stage("portrait", [&] {
    const auto bpds = build_bpds(s, period);
    std::vector<CharacteristicVector> chars;
    for (const auto& b : bpds) chars.push_back(b.chars);
    const SimilarityMetric metric =
        cfg.normalized_similarity ? SimilarityMetric::normalized(chars) : SimilarityMetric{};
    if (stationary) {
      VpdResult vpds = detail::build_vpds_from_bpds(s, bpds, cfg.threshold, metric);
      res.scan = vpds.scan;
      res.layout = stationary_layout(s, vpds);
    } else {
      res.layout = per_vld_pipeline(s, period, res.vlds->vlds, cfg.threshold, metric);
    }
  });

  res.report = stage("detect", [&] { return detect(s, res.layout, cfg.detection); });
  for (const auto& w : period.warnings) res.report.warnings.push_back(w);

  if (!cfg.policy.require_confirmation) {
    res.cleansed = stage("cleanse", [&] { return cleanse(s, res.report, {}, cfg.policy); });
  }
  return res;
}

}  // namespace loadclean
