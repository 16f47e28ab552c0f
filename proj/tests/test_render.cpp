#include "doctest.h"

#include <png.h>

#include "extcam/error.hpp"
#include "extcam/render.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace extcam;

namespace {

RgbImage decode(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  REQUIRE(png_image_begin_read_from_file(&img, path.c_str()));
  img.format = PNG_FORMAT_RGB;
  RgbImage out{img.height, img.width, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(img))};
  REQUIRE(png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr));
  return out;
}

RenderSpec spec(Colormap c, double alpha) { return RenderSpec{c, alpha, {}}; }

}  // namespace

TEST_CASE("jet-like anchors") {
  CHECK(colormap_lookup(Colormap::jet_like, 0.0) == Rgb{0, 0, 255});
  CHECK(colormap_lookup(Colormap::jet_like, 0.25) == Rgb{0, 255, 255});
  CHECK(colormap_lookup(Colormap::jet_like, 0.5) == Rgb{0, 255, 0});
  CHECK(colormap_lookup(Colormap::jet_like, 0.75) == Rgb{255, 255, 0});
  CHECK(colormap_lookup(Colormap::jet_like, 1.0) == Rgb{255, 0, 0});
  CHECK(colormap_lookup(Colormap::jet_like, 0.125) == Rgb{0, 128, 255});
  CHECK(colormap_lookup(Colormap::jet_like, 0.875) == Rgb{255, 128, 0});
  CHECK(colormap_lookup(Colormap::grayscale, 0.5) == Rgb{128, 128, 128});
  CHECK(colormap_lookup(Colormap::grayscale, 1.0) == Rgb{255, 255, 255});
  CHECK(parse_colormap("gray") == Colormap::grayscale);
  CHECK_THROWS_AS(parse_colormap("viridis"), ArgumentError);
}

TEST_CASE("heatmap endpoints after normalisation") {
  const Tensor map({1, 3}, {-4, 1, 6});
  const RgbImage img = render_rgb(map, nullptr, spec(Colormap::jet_like, 1.0));
  CHECK(img.rows == 1);
  CHECK(img.cols == 3);
  CHECK(img.at(0, 0) == Rgb{0, 0, 255});
  CHECK(img.at(0, 1) == Rgb{0, 255, 0});
  CHECK(img.at(0, 2) == Rgb{255, 0, 0});
}

TEST_CASE("alpha 0 shows the image, alpha 1 the heatmap") {
  Xorshift64Star rng(1);
  const Tensor map = oracle::random_tensor({5, 6}, rng);
  const Tensor image = oracle::random_tensor({3, 5, 6}, rng, 0, 1);
  const RgbImage only_image = render_rgb(map, &image, spec(Colormap::jet_like, 0.0));
  const RgbImage only_heat = render_rgb(map, &image, spec(Colormap::jet_like, 1.0));
  const RgbImage bare = render_rgb(map, nullptr, spec(Colormap::jet_like, 0.5));
  CHECK(only_heat.pixels == bare.pixels);
  for (std::size_t x = 0; x < 5; ++x) {
    for (std::size_t y = 0; y < 6; ++y) {
      const Rgb p = only_image.at(x, y);
      CHECK(p.r == std::lround(255 * image.at(0, x, y)));
      CHECK(p.g == std::lround(255 * image.at(1, x, y)));
      CHECK(p.b == std::lround(255 * image.at(2, x, y)));
    }
  }
  const Tensor gray = oracle::random_tensor({1, 5, 6}, rng, 0, 1);
  const RgbImage g = render_rgb(map, &gray, spec(Colormap::jet_like, 0.0));
  CHECK(g.at(2, 3) == Rgb{static_cast<std::uint8_t>(std::lround(255 * gray.at(0, 2, 3))),
                          static_cast<std::uint8_t>(std::lround(255 * gray.at(0, 2, 3))),
                          static_cast<std::uint8_t>(std::lround(255 * gray.at(0, 2, 3)))});
}

TEST_CASE("rendering is invariant to positive scaling") {
  Xorshift64Star rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor map = oracle::random_tensor({12, 9}, rng);
    const auto base = render_rgb(map, nullptr, spec(Colormap::jet_like, 1.0)).pixels;
    for (double c : {0.5, 2.0, 1024.0, 3.7}) {
      CHECK(render_rgb(scaled(map, c), nullptr, spec(Colormap::jet_like, 1.0)).pixels == base);
    }
  }
}

TEST_CASE("render errors") {
  const Tensor map({4, 4});
  const Tensor wrong({3, 4, 5});
  const Tensor two_channel({2, 4, 4});
  CHECK_THROWS_AS(render_rgb(map, &wrong, spec(Colormap::jet_like, 0.5)), ShapeError);
  CHECK_THROWS_AS(render_rgb(map, &two_channel, spec(Colormap::jet_like, 0.5)), ShapeError);
  CHECK_THROWS_AS(render_rgb(map, nullptr, spec(Colormap::jet_like, 1.5)), ArgumentError);
  CHECK_THROWS_AS(render_heatmap(SaliencyMap{map}, nullptr, RenderSpec{Colormap::jet_like, 0.5, "/nonexistent/x.png"}),
                  IoError);
}

TEST_CASE("PNG round trip, x along rows") {
  ScratchDir dir("png");
  Xorshift64Star rng(3);
  const Tensor map = oracle::random_tensor({7, 11}, rng);
  const Tensor image = oracle::random_tensor({3, 7, 11}, rng, 0, 1);
  const RenderSpec s{Colormap::jet_like, 0.4, dir / "h.png"};
  render_heatmap(SaliencyMap{map}, &image, s);
  const RgbImage back = decode(dir / "h.png");
  const RgbImage want = render_rgb(map, &image, s);
  CHECK(back.rows == 7);
  CHECK(back.cols == 11);
  CHECK(back.pixels == want.pixels);
  const auto first = slurp(dir / "h.png");
  render_heatmap(SaliencyMap{map}, &image, s);
  CHECK(slurp(dir / "h.png") == first);
}
