#include "loadclean/detect.hpp"

#include <algorithm>
#include <cmath>

#include "loadclean/error.hpp"
#include "loadclean/quantile.hpp"
#include "loadclean/stats.hpp"

namespace loadclean {

namespace {

std::string fmt(double v) { return format_double(v); }

void flag_outside(std::span<const double> values, GroupDetection& d) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (d.bounds.outside(values[i])) d.flagged.push_back(i);
  }
}

bool degenerate_case(std::span<const double> values, GroupDetection& d) {
  if (d.chars.mad > 0.0) return false;
  d.degenerate = true;
  d.bounds = {d.chars.theta, d.chars.theta};
  d.warnings.push_back("MAD is zero: bounds collapse to theta = " + fmt(d.chars.theta));
  flag_outside(values, d);
  return true;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::normal: return "normal";
    case Strategy::gamma: return "gamma";
    case Strategy::iqr: return "iqr";
  }
  return "normal";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "normal") return Strategy::normal;
  if (name == "gamma") return Strategy::gamma;
  if (name == "iqr") return Strategy::iqr;
  throw InvalidInput("unknown strategy '" + std::string(name) + "' (expected normal, gamma or iqr)");
}

void OutlierParams::validate() const {
  if (strategy == Strategy::iqr) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidInput("rho must be a positive number");
    return;
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (!(sigma_scale > 0.0) || !std::isfinite(sigma_scale)) {
    throw InvalidInput("sigma scale must be a positive number");
  }
}

GroupDetection detect_normal(std::span<const double> values, double alpha, double sigma_scale) {
  if (values.empty()) throw InvalidInput("detect: empty dataset");
  GroupDetection d;
  d.chars = characteristic_vector(values);
  if (degenerate_case(values, d)) return d;
  const double half = normal_quantile(1.0 - alpha / 2.0) * sigma_scale * d.chars.mad;
  d.bounds = {d.chars.theta - half, d.chars.theta + half};
  flag_outside(values, d);
  return d;
}

GroupDetection detect_gamma(std::span<const double> values, double alpha, double sigma_scale) {
  if (values.empty()) throw InvalidInput("detect: empty dataset");
  GroupDetection d;
  d.chars = characteristic_vector(values);
  if (!(d.chars.theta > 0.0)) {
    throw StrategyInapplicable("gamma strategy needs a positive median (theta = " +
                               fmt(d.chars.theta) + ")");
  }
  if (degenerate_case(values, d)) return d;
  const double mu = d.chars.theta;
  const double sigma = sigma_scale * d.chars.mad;
  const double shape = mu * mu / (sigma * sigma);
  const double scale = sigma * sigma / mu;
  d.gamma_shape = shape;
  d.gamma_scale = scale;
  d.bounds = {gamma_quantile(alpha / 2.0, shape, scale), gamma_quantile(1.0 - alpha / 2.0, shape, scale)};
  flag_outside(values, d);
  return d;
}

GroupDetection detect_iqr(std::span<const double> values, double rho) {
  if (values.size() < 4) {
    throw StrategyInapplicable("iqr strategy needs at least 4 members (have " +
                               std::to_string(values.size()) + ")");
  }
  GroupDetection d;
  d.chars = characteristic_vector(values);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = stats::quantile_sorted(sorted, 0.25);
  const double q3 = stats::quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  d.bounds = {q1 - rho * iqr, q3 + rho * iqr};
  if (iqr == 0.0) {
    d.degenerate = true;
    d.warnings.push_back("IQR is zero: bounds collapse to " + fmt(q1));
  }
  flag_outside(values, d);
  return d;
}

GroupDetection detect_values(std::span<const double> values, const OutlierParams& params) {
  switch (params.strategy) {
    case Strategy::normal: return detect_normal(values, params.alpha, params.sigma_scale);
    case Strategy::gamma: return detect_gamma(values, params.alpha, params.sigma_scale);
    case Strategy::iqr: return detect_iqr(values, params.rho);
  }
  throw InvalidInput("unknown strategy");
}

const Flag* DetectionReport::find(std::size_t index) const {
  auto it = std::lower_bound(flags.begin(), flags.end(), index,
                             [](const Flag& f, std::size_t i) { return f.index < i; });
  return it != flags.end() && it->index == index ? &*it : nullptr;
}

std::vector<std::size_t> DetectionReport::flagged_indices() const {
  std::vector<std::size_t> out;
  out.reserve(flags.size());
  for (const auto& f : flags) out.push_back(f.index);
  return out;
}

const GroupStats* DetectionReport::owner(std::size_t index) const {
  for (const auto& g : groups) {
    if (std::binary_search(g.members.begin(), g.members.end(), index)) return &g;
  }
  return nullptr;
}

DetectionReport detect(const LoadSeries& s, const GroupLayout& layout, const OutlierParams& params) {
  params.validate();
  DetectionReport report;
  report.params = params;
  report.series_length = s.size();
  report.period_samples = layout.period_samples;
  report.warnings = layout.warnings;
  for (const auto& v : layout.vlds) {
    report.vlds.push_back({v.member_periods, v.chars.theta, v.chars.mad});
  }

  for (const auto& g : layout.groups) {
    GroupStats st;
    st.id = g.id;
    st.vld = g.vld;
    st.slots = g.portrait.slots;
    st.members = g.portrait.sample_indices;
    st.low_power = g.low_power;
    st.strategy = params.strategy;

    const std::vector<double> values = member_values(s, g.portrait);
    const CharacteristicVector c = characteristic_vector(values);
    st.theta = c.theta;
    st.mad = c.mad;
    double sum = 0.0;
    std::size_t count = 0;
    for (auto i : st.members) {
      if (!s.is_missing(i)) {
        sum += s.value(i);
        ++count;
      }
    }
    st.mean = count > 0 ? sum / static_cast<double>(count) : c.theta;

    GroupDetection d;
    try {
      d = detect_values(values, params);
    } catch (const StrategyInapplicable& e) {
      if (params.strategy == Strategy::gamma && params.gamma_fallback_to_normal) {
        d = detect_normal(values, params.alpha, params.sigma_scale);
        st.strategy = Strategy::normal;
        st.warnings.push_back(std::string("gamma inapplicable, fell back to normal: ") + e.what());
      } else {
        st.skipped = true;
        st.skip_reason = e.what();
        report.groups.push_back(std::move(st));
        continue;
      }
    }
    st.bounds = d.bounds;
    st.gamma_shape = d.gamma_shape;
    st.gamma_scale = d.gamma_scale;
    st.warnings.insert(st.warnings.end(), d.warnings.begin(), d.warnings.end());
    for (auto pos : d.flagged) {
      const std::size_t idx = st.members[pos];
      report.flags.push_back({idx, s.value(idx), st.id, d.bounds, st.strategy});
    }
    report.groups.push_back(std::move(st));
  }

  std::sort(report.flags.begin(), report.flags.end(),
            [](const Flag& a, const Flag& b) { return a.index < b.index; });
  return report;
}

}  // namespace loadclean
