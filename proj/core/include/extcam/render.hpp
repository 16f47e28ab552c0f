#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "extcam/tensor.hpp"
#include "extcam/upsample.hpp"

namespace extcam {

/// jet_like is piecewise linear through five anchors:
///   0.00 (0,0,255)  0.25 (0,255,255)  0.50 (0,255,0)  0.75 (255,255,0)  1.00 (255,0,0)
/// grayscale maps v to (255v, 255v, 255v). Channels are rounded to nearest.
enum class Colormap { jet_like, grayscale };

Colormap parse_colormap(std::string_view name);

struct RenderSpec {
  Colormap colormap = Colormap::jet_like;
  double overlay_alpha = 0.5;
  std::filesystem::path output_path;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

Rgb colormap_lookup(Colormap cmap, double value);

/// 8-bit RGB raster; rows run along the map's first axis (x).
struct RgbImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // rows * cols * 3

  Rgb at(std::size_t row, std::size_t col) const {
    const std::size_t o = (row * cols + col) * 3;
    return {pixels[o], pixels[o + 1], pixels[o + 2]};
  }
};

/// Min-max normalizes the map, colours it and, when an image (1 or 3
/// channels, values in [0, 1], clamped) is given, blends
/// alpha * heat + (1 - alpha) * image.
RgbImage render_rgb(const Tensor& map, const Tensor* image, const RenderSpec& spec);

void write_png(const RgbImage& img, const std::filesystem::path& path);

/// render_rgb followed by write_png to spec.output_path.
void render_heatmap(const SaliencyMap& map, const Tensor* image, const RenderSpec& spec);

}  // namespace extcam
