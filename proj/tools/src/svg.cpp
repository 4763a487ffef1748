#include "loadclean/tools/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace loadclean::tools {

namespace {

constexpr double kWidth = 960, kHeight = 360, kLeft = 60, kRight = 20, kTop = 30, kBottom = 40;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
  }
};

void open(std::ostringstream& o, const std::string& title, const Frame& f, const std::string& xlabel,
          const std::string& ylabel) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">" << escape(title) << "</text>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
    << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
    << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (kWidth / 2) << "\" y=\"" << kHeight - 8 << "\" text-anchor=\"middle\">" << escape(xlabel)
    << "</text>\n";
  o << "<text x=\"14\" y=\"" << (kHeight / 2) << "\" transform=\"rotate(-90 14 " << (kHeight / 2)
    << ")\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
      << "</text>\n";
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    o << "<text x=\"" << num(f.px(x)) << "\" y=\"" << kHeight - kBottom + 14 << "\" text-anchor=\"middle\">"
      << num(x) << "</text>\n";
  }
}

}  // namespace

std::string series_svg(const LoadSeries& s, std::span<const std::size_t> flagged, const std::string& title) {
  const auto v = s.values();
  Frame f{0, static_cast<double>(std::max<std::size_t>(s.size(), 2) - 1), 0, 1};
  if (!v.empty()) {
    f.y0 = std::min(0.0, *std::min_element(v.begin(), v.end()));
    f.y1 = *std::max_element(v.begin(), v.end());
    if (f.y1 <= f.y0) f.y1 = f.y0 + 1;
  }
  std::ostringstream o;
  open(o, title, f, "sample index", "load");
  o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"0.8\" points=\"";
  for (std::size_t i = 0; i < v.size(); ++i) o << num(f.px(static_cast<double>(i))) << ',' << num(f.py(v[i])) << ' ';
  o << "\"/>\n";
  for (auto i : flagged) {
    if (i >= v.size()) continue;
    o << "<circle cx=\"" << num(f.px(static_cast<double>(i))) << "\" cy=\"" << num(f.py(v[i]))
      << "\" r=\"3\" fill=\"none\" stroke=\"crimson\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string threshold_scan_svg(const ThresholdScan& scan, const std::string& title) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < scan.thresholds.size(); ++i) {
    const double d = scan.mean_distances[i];
    if (std::isfinite(d)) pts.emplace_back(static_cast<double>(scan.cluster_counts[i]), d);
  }
  std::sort(pts.begin(), pts.end());
  Frame f{1, 2, 0, 1};
  if (!pts.empty()) {
    f.x0 = pts.front().first;
    f.x1 = std::max(pts.back().first, f.x0 + 1);
    for (const auto& p : pts) f.y1 = std::max(f.y1, p.second);
  }
  std::ostringstream o;
  open(o, title, f, "number of datasets", "mean distance");
  o << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
  for (const auto& [x, y] : pts) o << num(f.px(x)) << ',' << num(f.py(y)) << ' ';
  o << "\"/>\n";
  if (!scan.thresholds.empty()) {
    const double x = static_cast<double>(scan.selected_count());
    const double y = scan.mean_distances[scan.selected_index];
    if (std::isfinite(y)) {
      o << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y))
        << "\" r=\"5\" fill=\"crimson\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace loadclean::tools
