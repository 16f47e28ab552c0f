#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extcam/micro_net.hpp"
#include "extcam/tensor.hpp"

namespace extcam {

/// Averaged input-gradient footprint of one feature-map cell (w x h),
/// scaled so that its maximum is 1.
struct ErfMap {
  Tensor values;
  std::size_t n_images = 0;
};

struct ErfOptions {
  /// Feature-map cell (i, j) to backpropagate from; the centre cell
  /// (floor(u/2), floor(v/2)) when unset.
  std::optional<std::pair<std::size_t, std::size_t>> cell;
  /// Keep the gradient sign instead of taking absolute values; the map is
  /// then divided by its largest magnitude.
  bool signed_gradient = false;
};

/// For each image, backpropagates sum_k A_{ci,cj,k} to the input, takes
/// |gradient| summed over input channels, averages over images and divides
/// by the maximum.
ErfMap estimate_erf(const Network& net, std::span<const Tensor> images, const ErfOptions& options = {});

/// Same aggregation for precomputed C x w x h input gradients (one per image).
ErfMap aggregate_erf(std::span<const Tensor> gradients, bool signed_gradient = false);

struct ErfFit {
  double amplitude = 0.0;
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double offset = 0.0;
  double r_squared = 0.0;
  std::size_t n_pixels_used = 0;

  // Solver diagnostics.
  std::size_t iterations = 0;
  double final_lambda = 0.0;
  std::vector<double> accepted_costs;  // cost after init, then after each accepted step

  double operator()(double x, double y) const;
};

struct FitOptions {
  bool ignore_negative = false;
  std::size_t max_iterations = 200;
  double initial_lambda = 1e-3;
  double relative_tolerance = 1e-10;
};

/// Least-squares fit of offset + amplitude * exp(-(x-mx)^2/2sx^2 - (y-my)^2/2sy^2)
/// by Levenberg-Marquardt with an analytic Jacobian. Sigmas are optimized
/// as log(sigma). Initial values come from intensity-weighted moments.
///
/// Throws ArgumentError with fewer than 6 usable pixels, NumericError for
/// a constant map or when max_iterations is reached without convergence.
ErfFit fit_gaussian2d(const Tensor& map, const FitOptions& options = {});
ErfFit fit_gaussian2d(const ErfMap& map, const FitOptions& options = {});

/// 1 - sum (o - p)^2 / sum (o - mean o)^2. Throws NumericError when the
/// observations are constant.
double r_squared(std::span<const double> observed, std::span<const double> predicted);
double r_squared(const Tensor& observed, const Tensor& predicted);

/// {amplitude, mu_x, mu_y, sigma_x, sigma_y, offset, r_squared, n_pixels_used}
std::string erf_fit_to_json(const ErfFit& fit);
ErfFit erf_fit_from_json(const std::string& text);

}  // namespace extcam
