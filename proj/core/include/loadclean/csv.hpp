#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace loadclean::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
// A UTF-8 byte-order mark at the start is skipped. Blank lines are dropped.
// `line_numbers`, when non-null, receives the 1-based physical line where
// each returned row starts.
std::vector<Row> parse(std::string_view text, char delimiter = ',',
                       std::vector<std::size_t>* line_numbers = nullptr);

// Quotes a field only when it contains the delimiter, a quote or a newline.
std::string escape(std::string_view field, char delimiter = ',');

std::string join(const Row& row, char delimiter = ',');

}  // namespace loadclean::csv
