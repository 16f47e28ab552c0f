#pragma once

#include <string_view>

#include "extcam/cam.hpp"
#include "extcam/tensor.hpp"

namespace extcam {

enum class Upsampler { bilinear, gaussian };

std::string_view upsampler_name(Upsampler u);
Upsampler parse_upsampler(std::string_view name);

/// Pixel-level saliency L_xy (w x h). x runs along the first axis.
struct SaliencyMap {
  Tensor values;
  int class_id = -1;
  Engine source_engine = Engine::extended_cam;
  Upsampler upsampler = Upsampler::gaussian;
  double sigma_x = 0.0;  // gaussian only
  double sigma_y = 0.0;

  std::size_t w() const { return values.dim(0); }
  std::size_t h() const { return values.dim(1); }
};

enum class GaussianPath { separable, direct };

struct GaussianOptions {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  /// Cell anchor is (w/u)(i + center_offset); 0 anchors at cell corners.
  double center_offset = 0.0;
  GaussianPath path = GaussianPath::separable;
};

/// Superposition of one unnormalized, untruncated 2D Gaussian per cell:
///   L_xy = sum_ij L_ij exp(-[(x - (w/u)(i+off))^2 / 2sx^2 + (y - (h/v)(j+off))^2 / 2sy^2])
/// The separable path evaluates Gx * L * Gy^T; the direct path is the
/// quadruple loop.
SaliencyMap gaussian_upsample(const SaliencyGrid& grid, std::size_t w, std::size_t h,
                              const GaussianOptions& options);

/// Align-corners bilinear interpolation: pixel x samples grid coordinate
/// x (u-1)/(w-1), so corner pixels equal corner cells.
SaliencyMap bilinear_upsample(const SaliencyGrid& grid, std::size_t w, std::size_t h);

/// Places L_ij at pixel ((w/u) i, (h/v) j) of a zero canvas and convolves
/// with the unnormalized Gaussian kernel over the full canvas. Requires
/// integral factors. Intended as an independent check of gaussian_upsample.
SaliencyMap zero_insertion_filter_reference(const SaliencyGrid& grid, std::size_t w, std::size_t h,
                                            double sigma_x, double sigma_y);

}  // namespace extcam
