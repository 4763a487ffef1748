#include "loadclean/metrics.hpp"

#include "loadclean/error.hpp"

namespace loadclean {

Metrics score(const std::vector<bool>& labels, std::span<const std::size_t> flagged) {
  const std::size_t n = labels.size();
  std::vector<bool> f(n, false);
  for (auto i : flagged) {
    if (i >= n) throw InvalidInput("score: flagged index " + std::to_string(i) + " out of range");
    f[i] = true;
  }
  Metrics m;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i]) (f[i] ? m.tp : m.fn)++;
    else (f[i] ? m.fp : m.tn)++;
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  m.accuracy = n > 0 ? d(m.tp + m.tn) / d(n) : 1.0;

  const std::size_t positives = m.tp + m.fn;
  const std::size_t predicted = m.tp + m.fp;
  if (positives == 0) {
    m.recall = 1.0;
    m.note = "no positive labels: recall reported as 1";
  } else {
    m.recall = d(m.tp) / d(positives);
  }
  if (predicted == 0) {
    m.precision = positives == 0 ? 1.0 : 0.0;
    if (!m.note.empty()) m.note += "; ";
    m.note += positives == 0 ? "no flags and no positives: precision reported as 1"
                             : "no flags: precision reported as 0";
  } else {
    m.precision = d(m.tp) / d(predicted);
  }
  const double pr = m.precision + m.recall;
  m.f_measure = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

}  // namespace loadclean
