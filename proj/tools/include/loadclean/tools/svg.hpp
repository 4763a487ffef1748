#pragma once

#include <span>
#include <string>

#include "loadclean/portrait.hpp"
#include "loadclean/series.hpp"

namespace loadclean::tools {

// Line chart of the series with flagged samples circled.
std::string series_svg(const LoadSeries& s, std::span<const std::size_t> flagged,
                       const std::string& title);

// Mean distance against cluster count, with the selected point marked.
std::string threshold_scan_svg(const ThresholdScan& scan, const std::string& title);

}  // namespace loadclean::tools
