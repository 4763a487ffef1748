#include "loadclean/quantile.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "loadclean/error.hpp"

namespace loadclean {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Acklam's rational approximation, relative error about 1.15e-9.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -acklam(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Series for P(a, x), good for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericFailure("incomplete gamma series did not converge (a = " + std::to_string(a) +
                       ", x = " + std::to_string(x) + ")");
}

// Continued fraction for Q(a, x) (modified Lentz), good for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw NumericFailure("incomplete gamma continued fraction did not converge (a = " +
                       std::to_string(a) + ", x = " + std::to_string(x) + ")");
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("incomplete gamma: shape must be > 0");
  if (!(x >= 0.0)) throw InvalidInput("incomplete gamma: x must be >= 0");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("normal_quantile: q must lie in (0, 1)");
  if (q > 0.5) return -normal_quantile(1.0 - q);
  if (q == 0.5) return 0.0;
  double x = acklam(q);
  // Halley steps against erfc; two are plenty from Acklam's start.
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - q;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    x -= u / (1.0 + x * u / 2.0);
  }
  return x;
}

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double gamma_cdf(double x, double shape, double scale) {
  if (!(scale > 0.0)) throw InvalidInput("gamma_cdf: scale must be > 0");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(shape, x / scale);
}

double gamma_quantile(double q, double shape, double scale) {
  if (!(shape > 0.0) || !std::isfinite(shape) || !(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidInput("gamma_quantile: shape and scale must be positive and finite");
  }
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("gamma_quantile: q must lie in (0, 1)");

  const double a = shape;
  const double lg = std::lgamma(a);
  // Residual in whichever tail keeps precision.
  auto residual = [&](double x) {
    if (x < a + 1.0) return gamma_p_series(a, x) - q;
    return (1.0 - q) - gamma_q_fraction(a, x);
  };
  auto density = [&](double x) { return std::exp((a - 1.0) * std::log(x) - x - lg); };

  // Wilson-Hilferty start, clamped to something positive.
  const double z = normal_quantile(q);
  const double t = 1.0 / (9.0 * a);
  double x = a * std::pow(1.0 - t + z * std::sqrt(t), 3.0);
  if (!(x > 0.0) || !std::isfinite(x)) {
    // Small-x asymptote P(a, x) ~ x^a / Gamma(a + 1).
    x = std::exp((std::log(q) + std::lgamma(a + 1.0)) / a);
  }
  if (!(x > 0.0) || !std::isfinite(x)) x = a;

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIterations; ++it) {
    const double f = residual(x);
    if (f == 0.0) return x * scale;
    if (f < 0.0) lo = std::max(lo, x);
    else hi = std::min(hi, x);

    const double fp = density(x);
    double next = x;
    if (fp > 0.0 && std::isfinite(fp)) {
      const double step = f / fp;
      // Halley correction using d/dx log density = (a - 1)/x - 1.
      const double curv = (a - 1.0) / x - 1.0;
      const double denom = 1.0 - 0.5 * step * curv;
      next = x - (std::abs(denom) > 0.5 ? step / denom : step);
    }
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      next = std::isinf(hi) ? std::max(2.0 * x, lo * 2.0 + kTiny) : 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4.0 * kEps * x) return next * scale;
    if (std::isfinite(hi) && hi - lo <= 4.0 * kEps * hi) return 0.5 * (lo + hi) * scale;
    x = next;
  }
  throw NumericFailure("gamma_quantile: no convergence after 200 iterations (q = " +
                       std::to_string(q) + ", shape = " + std::to_string(shape) + ")");
}

}  // namespace loadclean
