#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loadclean::tools {

// Flat `key = value` text. Blank lines and lines starting with '#' or ';' are
// ignored; surrounding whitespace and one pair of matching quotes around the
// value are stripped. Throws InvalidInput naming the line on malformed input.
std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text);

// Moves `--config FILE` (or `--config=FILE`) out of `args` and splices the
// file's entries in as `--key=value` right after the subcommand name, so
// explicit flags that follow take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args);

}  // namespace loadclean::tools
