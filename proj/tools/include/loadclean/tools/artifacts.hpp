#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "loadclean/cleanse.hpp"

namespace loadclean::tools {

// Throws InvalidInput when the file cannot be read or written.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view text);

// Cleansed CSV text; the one writer behind `cleanse` and review finalize.
std::string cleansed_csv(const CleanseResult& r, std::string_view missing_token = "NA");

}  // namespace loadclean::tools
