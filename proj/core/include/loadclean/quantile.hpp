#pragma once

namespace loadclean {

double normal_cdf(double x);

// Standard normal quantile. Throws InvalidInput unless 0 < q < 1.
double normal_quantile(double q);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double gamma_cdf(double x, double shape, double scale);

// x with P(shape, x / scale) = q. Throws InvalidInput on bad arguments and
// NumericFailure when the inversion does not converge in 200 iterations.
double gamma_quantile(double q, double shape, double scale);

}  // namespace loadclean
