#include "extcam/render.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "extcam/error.hpp"

namespace extcam {

Colormap parse_colormap(std::string_view name) {
  if (name == "jet_like" || name == "jet") return Colormap::jet_like;
  if (name == "grayscale" || name == "gray") return Colormap::grayscale;
  throw ArgumentError("unknown colormap '" + std::string(name) + "'");
}

namespace {

struct Anchor {
  double at;
  double r, g, b;
};

constexpr std::array<Anchor, 5> kJet = {{
    {0.00, 0, 0, 255},
    {0.25, 0, 255, 255},
    {0.50, 0, 255, 0},
    {0.75, 255, 255, 0},
    {1.00, 255, 0, 0},
}};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

std::array<double, 3> lookup(Colormap cmap, double value) {
  const double v = std::clamp(value, 0.0, 1.0);
  if (cmap == Colormap::grayscale) return {255 * v, 255 * v, 255 * v};
  std::size_t k = 0;
  while (k + 2 < kJet.size() && v > kJet[k + 1].at) ++k;
  const Anchor& a = kJet[k];
  const Anchor& b = kJet[k + 1];
  const double t = (v - a.at) / (b.at - a.at);
  return {a.r + t * (b.r - a.r), a.g + t * (b.g - a.g), a.b + t * (b.b - a.b)};
}

}  // namespace

Rgb colormap_lookup(Colormap cmap, double value) {
  const auto c = lookup(cmap, value);
  return {to_byte(c[0]), to_byte(c[1]), to_byte(c[2])};
}

RgbImage render_rgb(const Tensor& map, const Tensor* image, const RenderSpec& spec) {
  if (map.rank() != 2) throw ShapeError("saliency map must be w x h, got " + shape_string(map.shape()));
  if (!(spec.overlay_alpha >= 0.0 && spec.overlay_alpha <= 1.0)) {
    throw ArgumentError("overlay_alpha must be in [0, 1]");
  }
  const std::size_t W = map.dim(0), H = map.dim(1);
  if (image) {
    if (image->rank() != 3 || image->dim(1) != W || image->dim(2) != H ||
        (image->dim(0) != 1 && image->dim(0) != 3)) {
      throw ShapeError("overlay image " + shape_string(image->shape()) + " does not match map " +
                       shape_string(map.shape()) + " (expected 1 or 3 channels)");
    }
  }
  const Tensor norm = minmax_normalize(map);
  RgbImage out{W, H, std::vector<std::uint8_t>(W * H * 3)};
  const double alpha = spec.overlay_alpha;
  for (std::size_t p = 0; p < W * H; ++p) {
    const auto heat = lookup(spec.colormap, norm[p]);
    for (std::size_t c = 0; c < 3; ++c) {
      double v = heat[c];
      if (image) {
        const std::size_t ch = image->dim(0) == 1 ? 0 : c;
        const double base = 255.0 * std::clamp((*image)[ch * W * H + p], 0.0, 1.0);
        v = alpha * heat[c] + (1.0 - alpha) * base;
      }
      out.pixels[p * 3 + c] = to_byte(v);
    }
  }
  return out;
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols), static_cast<png_uint_32>(img.rows), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < img.rows; ++r) {
    png_write_row(png, const_cast<png_bytep>(img.pixels.data() + r * img.cols * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void render_heatmap(const SaliencyMap& map, const Tensor* image, const RenderSpec& spec) {
  write_png(render_rgb(map.values, image, spec), spec.output_path);
}

}  // namespace extcam
