#include "loadclean/tools/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "loadclean/error.hpp"

namespace loadclean::tools {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view text) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw InvalidInput("cannot write " + p.string());
}

std::string cleansed_csv(const CleanseResult& r, std::string_view missing_token) {
  return serialize_series(r.series, {}, missing_token);
}

}  // namespace loadclean::tools
