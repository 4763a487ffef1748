#include "loadclean/bspline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "loadclean/error.hpp"
#include "loadclean/quantile.hpp"
#include "loadclean/stats.hpp"

namespace loadclean {

namespace {

// Index of the knot span containing x, clamped so that x = b lands in the
// last non-empty span.
std::size_t find_span(std::span<const double> t, int p, std::size_t nbasis, double x) {
  const auto deg = static_cast<std::size_t>(p);
  if (x >= t[nbasis]) return nbasis - 1;
  if (x <= t[deg]) return deg;
  const auto it = std::upper_bound(t.begin() + static_cast<std::ptrdiff_t>(deg),
                                   t.begin() + static_cast<std::ptrdiff_t>(nbasis) + 1, x);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

// The p + 1 non-zero basis values N_{span-p..span, p}(x).
void nonzero_basis(std::span<const double> t, int p, std::size_t span, double x, double* out) {
  std::vector<double> left(static_cast<std::size_t>(p) + 1), right(static_cast<std::size_t>(p) + 1);
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[span + 1 - static_cast<std::size_t>(j)];
    right[j] = t[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? out[r] / denom : 0.0;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

}  // namespace

void BsplineConfig::validate(std::size_t n) const {
  if (degree < 0) throw InvalidInput("bspline: degree must be >= 0");
  if (df < static_cast<std::size_t>(degree) + 1) {
    throw InvalidInput("bspline: df must be at least degree + 1");
  }
  if (df > n) {
    throw InvalidInput("bspline: df = " + std::to_string(df) + " exceeds the sample count " +
                       std::to_string(n));
  }
  if (!(residual_alpha > 0.0 && residual_alpha < 1.0)) {
    throw InvalidInput("bspline: residual alpha must lie in (0, 1)");
  }
}

std::vector<double> clamped_uniform_knots(double a, double b, std::size_t df, int degree) {
  if (!(b > a)) throw InvalidInput("bspline: empty domain");
  const auto p = static_cast<std::size_t>(degree);
  if (df < p + 1) throw InvalidInput("bspline: df must be at least degree + 1");
  std::vector<double> t;
  t.reserve(df + p + 1);
  for (std::size_t i = 0; i <= p; ++i) t.push_back(a);
  const std::size_t segments = df - p;
  for (std::size_t j = 1; j < segments; ++j) {
    t.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(segments));
  }
  for (std::size_t i = 0; i <= p; ++i) t.push_back(b);
  return t;
}

std::vector<double> bspline_basis(std::span<const double> knots, int degree, double x) {
  const auto p = static_cast<std::size_t>(degree);
  if (knots.size() < 2 * p + 2) throw InvalidInput("bspline: knot vector too short");
  const std::size_t nbasis = knots.size() - p - 1;
  std::vector<double> out(nbasis, 0.0);
  if (x < knots.front() || x > knots.back()) return out;
  const std::size_t span = find_span(knots, degree, nbasis, x);
  std::vector<double> nz(p + 1);
  nonzero_basis(knots, degree, span, x, nz.data());
  for (std::size_t r = 0; r <= p; ++r) out[span - p + r] = nz[r];
  return out;
}

std::vector<double> bspline_fit(std::span<const double> y, const BsplineConfig& cfg) {
  const std::size_t n = y.size();
  cfg.validate(n);
  if (n < 2) throw InvalidInput("bspline: at least two samples are required");
  for (double v : y) {
    if (!std::isfinite(v)) throw InvalidInput("bspline: series values must be finite");
  }
  const auto p = static_cast<std::size_t>(cfg.degree);
  const auto knots = clamped_uniform_knots(0.0, static_cast<double>(n - 1), cfg.df, cfg.degree);

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.df));
  std::vector<double> nz(p + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    const std::size_t span = find_span(knots, cfg.degree, cfg.df, x);
    nonzero_basis(knots, cfg.degree, span, x, nz.data());
    for (std::size_t r = 0; r <= p; ++r) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(span - p + r)) = nz[r];
    }
  }
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < static_cast<Eigen::Index>(cfg.df)) {
    throw InvalidInput("bspline: design matrix is rank deficient (rank " +
                       std::to_string(qr.rank()) + " < df " + std::to_string(cfg.df) + ")");
  }
  const Eigen::VectorXd coef = qr.solve(Y);
  const Eigen::VectorXd fit = X * coef;
  return std::vector<double>(fit.data(), fit.data() + fit.size());
}

std::vector<double> bspline_fit(const LoadSeries& s, const BsplineConfig& cfg) {
  return bspline_fit(s.values(), cfg);
}

std::vector<std::size_t> bspline_detect(std::span<const double> y, const BsplineConfig& cfg) {
  const std::vector<double> fit = bspline_fit(y, cfg);
  std::vector<double> e(y.size());
  double ymax = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    e[i] = y[i] - fit[i];
    ymax = std::max(ymax, std::abs(y[i]));
  }
  const double mad = stats::median_abs_deviation(e, stats::lower_median(e));
  const double cutoff = normal_quantile(1.0 - cfg.residual_alpha / 2.0) * cfg.sigma_scale * mad;
  const double tol = 1e-8 * ymax;
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (std::abs(e[i]) > cutoff && std::abs(e[i]) > tol) flagged.push_back(i);
  }
  return flagged;
}

std::vector<std::size_t> bspline_detect(const LoadSeries& s, const BsplineConfig& cfg) {
  return bspline_detect(s.values(), cfg);
}

}  // namespace loadclean
