#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loadclean/detect.hpp"

namespace loadclean {

enum class Policy { portrait_median, portrait_mean, gamma_mean, leave };

std::string_view to_string(Policy p);
Policy parse_policy(std::string_view name);

struct ReplacementPolicy {
  Policy missing_policy = Policy::portrait_median;
  Policy aberrant_policy = Policy::portrait_median;
  // Flags must be decided by a person; nothing is applied automatically.
  bool require_confirmation = false;

  // gamma-mean needs gamma statistics, so it requires the gamma strategy.
  void validate(Strategy detection_strategy) const;
};

enum class Action { keep, replace };
enum class DecisionSource { automatic, human };

std::string_view to_string(Action a);
std::string_view to_string(DecisionSource d);

struct Decision {
  std::size_t index = 0;
  Action action = Action::keep;
  // Used with replace; the policy value is suggested when absent.
  std::optional<double> value;
  DecisionSource decided_by = DecisionSource::human;
  std::string note;
};

struct AuditRow {
  std::size_t index = 0;
  std::int64_t timestamp = 0;
  std::string kind;    // "aberrant" or "missing"
  std::string action;  // keep | replace | impute | leave
  double old_value = 0.0;
  double new_value = 0.0;
  DecisionSource decided_by = DecisionSource::automatic;
  std::optional<std::size_t> group;
  std::optional<Strategy> strategy;
  std::optional<Bounds> bounds;
  std::string note;
};

struct CleanseResult {
  LoadSeries series;
  std::vector<AuditRow> audit;
  std::vector<std::string> warnings;
};

// Value `policy` prescribes for a sample of group `g`. Throws InvalidInput
// for `leave` and for gamma-mean without gamma statistics.
double policy_value(const GroupStats& g, Policy policy);

// Replaces every missing sample with its group's statistic. A group with a
// single member falls back to the median of its VLD (or of the whole
// series) with a warning.
CleanseResult impute_missing(const LoadSeries& s, const DetectionReport& report,
                             const ReplacementPolicy& policy);

// Applies keep/replace decisions to flagged samples. Every decision must name
// a flagged index (the last decision per index wins). Undecided flags follow
// `aberrant_policy`, unless confirmation is required, in which case they are
// rejected. One audit row per flag.
CleanseResult apply_decisions(const LoadSeries& s, const DetectionReport& report,
                              std::span<const Decision> decisions, const ReplacementPolicy& policy);

// apply_decisions followed by impute_missing on whatever is still missing.
CleanseResult cleanse(const LoadSeries& s, const DetectionReport& report,
                      std::span<const Decision> decisions, const ReplacementPolicy& policy);

struct PipelineConfig {
  IngestConfig ingest;
  double missing_sentinel = 0.0;
  std::optional<std::size_t> period_samples;  // skip detection when set
  ThresholdChoice threshold;
  bool normalized_similarity = false;
  bool vld_mode = false;
  ThresholdChoice vld_threshold;
  OutlierParams detection;
  ReplacementPolicy policy;
};

struct PipelineResult {
  LoadSeries input;  // after default filling
  PeriodInfo period;
  std::optional<ThresholdScan> scan;
  std::optional<VldResult> vlds;
  GroupLayout layout;
  DetectionReport report;
  // Absent when the policy requires confirmation.
  std::optional<CleanseResult> cleansed;
};

// ingest -> default fill -> period -> (VLDs) -> VPDs -> detect -> cleanse.
// Errors are re-thrown with the failing stage named.
PipelineResult run_pipeline(std::string_view csv, const PipelineConfig& cfg);
PipelineResult run_pipeline(const LoadSeries& raw, const PipelineConfig& cfg);

}  // namespace loadclean
