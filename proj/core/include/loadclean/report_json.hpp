#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loadclean/cleanse.hpp"

namespace loadclean {

// Report document: {strategy, params, series_length, period_samples,
// flags:[{index, value, vpd, lower, upper, strategy}], skipped_groups:[{vpd,
// reason}], groups:[...], vlds:[...], warnings:[...]}.
std::string report_to_json(const DetectionReport& r, int indent = 2);
DetectionReport report_from_json(std::string_view text);

std::string audit_row_to_json(const AuditRow& row);
// One compact JSON object per line, each line terminated by '\n'.
std::string audit_to_jsonl(std::span<const AuditRow> rows);
std::vector<AuditRow> audit_from_jsonl(std::string_view text);

std::string decision_to_json(const Decision& d);
Decision decision_from_json(std::string_view text);

}  // namespace loadclean
