#pragma once

#include <span>
#include <vector>

#include "loadclean/series.hpp"

namespace loadclean {

struct BsplineConfig {
  int degree = 3;
  std::size_t df = 0;           // number of basis functions
  double residual_alpha = 0.05; // two-sided level of the residual cutoff
  double sigma_scale = 1.4826;

  void validate(std::size_t n) const;
};

// Clamped knot vector on [a, b]: degree + 1 copies of each end and
// df - degree - 1 uniformly spaced interior knots.
std::vector<double> clamped_uniform_knots(double a, double b, std::size_t df, int degree);

// All df basis functions at x (Cox-de Boor). x = b belongs to the last span.
std::vector<double> bspline_basis(std::span<const double> knots, int degree, double x);

// Least-squares fit of y against the basis on x = 0 .. n-1. Throws
// InvalidInput when the design matrix is rank deficient.
std::vector<double> bspline_fit(std::span<const double> y, const BsplineConfig& cfg);
std::vector<double> bspline_fit(const LoadSeries& s, const BsplineConfig& cfg);

// Flags |e_i| > z * sigma_scale * MAD(e) for residuals e = y - fit, with z the
// 1 - alpha/2 normal quantile. Residuals within 1e-8 * max(1, max|y|) are
// treated as exact, so an interpolating fit flags nothing.
std::vector<std::size_t> bspline_detect(std::span<const double> y, const BsplineConfig& cfg);
std::vector<std::size_t> bspline_detect(const LoadSeries& s, const BsplineConfig& cfg);

}  // namespace loadclean
