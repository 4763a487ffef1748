#include "loadclean/tools/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "loadclean/error.hpp"

namespace loadclean::tools {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.starts_with("--")) key.remove_prefix(2);
    if (key.empty()) throw InvalidInput("config line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InvalidInput("--config requires a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  std::ifstream in(*path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read config file " + *path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::vector<std::string> injected;
  for (const auto& [k, v] : parse_config(ss.str())) injected.push_back("--" + k + "=" + v);

  // The subcommand is the first argument that is not an option.
  std::size_t at = 0;
  while (at < args.size() && args[at].starts_with("-")) ++at;
  const auto pos = args.begin() + static_cast<std::ptrdiff_t>(std::min(at + 1, args.size()));
  args.insert(pos, injected.begin(), injected.end());
  return args;
}

}  // namespace loadclean::tools
