#include "extcam/upsample.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "extcam/error.hpp"

namespace extcam {

std::string_view upsampler_name(Upsampler u) {
  return u == Upsampler::bilinear ? "bilinear" : "gaussian";
}

Upsampler parse_upsampler(std::string_view name) {
  if (name == "bilinear") return Upsampler::bilinear;
  if (name == "gaussian") return Upsampler::gaussian;
  throw ArgumentError("unknown upsampler '" + std::string(name) + "'");
}

namespace {

void check_target(const SaliencyGrid& grid, std::size_t w, std::size_t h) {
  if (grid.values.rank() != 2) throw ShapeError("saliency grid must be u x v, got " + shape_string(grid.values.shape()));
  if (w < grid.u() || h < grid.v()) {
    throw ArgumentError("target " + std::to_string(w) + "x" + std::to_string(h) +
                        " is smaller than the grid " + std::to_string(grid.u()) + "x" +
                        std::to_string(grid.v()));
  }
}

void check_sigma(double sx, double sy) {
  if (!(sx > 0.0) || !(sy > 0.0) || !std::isfinite(sx) || !std::isfinite(sy)) {
    throw ArgumentError("Gaussian sigmas must be positive and finite");
  }
}

// G[p * cells + c] = exp(-(p - step (c + off))^2 / 2 sigma^2)
std::vector<double> axis_weights(std::size_t pixels, std::size_t cells, double sigma, double off) {
  const double step = static_cast<double>(pixels) / static_cast<double>(cells);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> g(pixels * cells);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < cells; ++c) {
      const double d = static_cast<double>(p) - step * (static_cast<double>(c) + off);
      g[p * cells + c] = std::exp(-d * d * inv);
    }
  }
  return g;
}

SaliencyMap make_map(const SaliencyGrid& grid, Tensor values, Upsampler up, double sx, double sy) {
  return SaliencyMap{std::move(values), grid.class_id, grid.engine, up, sx, sy};
}

}  // namespace

SaliencyMap gaussian_upsample(const SaliencyGrid& grid, std::size_t w, std::size_t h,
                              const GaussianOptions& options) {
  if (grid.values.empty()) throw ArgumentError("degenerate 0-size grid");
  check_target(grid, w, h);
  check_sigma(options.sigma_x, options.sigma_y);
  const std::size_t U = grid.u(), V = grid.v();
  const auto L = grid.values.values();
  Tensor out({w, h});

  if (options.path == GaussianPath::direct) {
    const double step_x = static_cast<double>(w) / static_cast<double>(U);
    const double step_y = static_cast<double>(h) / static_cast<double>(V);
    const double inv_x = 1.0 / (2.0 * options.sigma_x * options.sigma_x);
    const double inv_y = 1.0 / (2.0 * options.sigma_y * options.sigma_y);
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t y = 0; y < h; ++y) {
        double s = 0.0;
        for (std::size_t i = 0; i < U; ++i) {
          const double dx = static_cast<double>(x) - step_x * (static_cast<double>(i) + options.center_offset);
          for (std::size_t j = 0; j < V; ++j) {
            const double dy = static_cast<double>(y) - step_y * (static_cast<double>(j) + options.center_offset);
            s += L[i * V + j] * std::exp(-(dx * dx * inv_x + dy * dy * inv_y));
          }
        }
        out.at(x, y) = s;
      }
    }
  } else {
    const auto gx = axis_weights(w, U, options.sigma_x, options.center_offset);
    const auto gy = axis_weights(h, V, options.sigma_y, options.center_offset);
    // t[i, y] = sum_j L[i, j] gy[y, j]
    std::vector<double> t(U * h, 0.0);
    for (std::size_t i = 0; i < U; ++i) {
      for (std::size_t y = 0; y < h; ++y) {
        double s = 0.0;
        for (std::size_t j = 0; j < V; ++j) s += L[i * V + j] * gy[y * V + j];
        t[i * h + y] = s;
      }
    }
    auto o = out.values();
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t i = 0; i < U; ++i) {
        const double gxi = gx[x * U + i];
        for (std::size_t y = 0; y < h; ++y) o[x * h + y] += gxi * t[i * h + y];
      }
    }
  }
  return make_map(grid, std::move(out), Upsampler::gaussian, options.sigma_x, options.sigma_y);
}

SaliencyMap bilinear_upsample(const SaliencyGrid& grid, std::size_t w, std::size_t h) {
  if (grid.values.empty()) throw ArgumentError("degenerate 0-size grid");
  check_target(grid, w, h);
  const std::size_t U = grid.u(), V = grid.v();

  struct Tap {
    std::size_t lo, hi;
    double t;
  };
  auto taps = [](std::size_t pixels, std::size_t cells) {
    std::vector<Tap> out(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
      if (cells == 1 || pixels == 1) {
        out[p] = {0, 0, 0.0};
        continue;
      }
      const double src = static_cast<double>(p * (cells - 1)) / static_cast<double>(pixels - 1);
      std::size_t lo = static_cast<std::size_t>(std::floor(src));
      if (lo > cells - 1) lo = cells - 1;
      const std::size_t hi = lo + 1 < cells ? lo + 1 : lo;
      out[p] = {lo, hi, src - static_cast<double>(lo)};
    }
    return out;
  };
  const auto tx = taps(w, U);
  const auto ty = taps(h, V);

  Tensor out({w, h});
  const Tensor& L = grid.values;
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) {
      const Tap& a = tx[x];
      const Tap& b = ty[y];
      const double top = L.at(a.lo, b.lo) + b.t * (L.at(a.lo, b.hi) - L.at(a.lo, b.lo));
      const double bottom = L.at(a.hi, b.lo) + b.t * (L.at(a.hi, b.hi) - L.at(a.hi, b.lo));
      out.at(x, y) = top + a.t * (bottom - top);
    }
  }
  return make_map(grid, std::move(out), Upsampler::bilinear, 0.0, 0.0);
}

SaliencyMap zero_insertion_filter_reference(const SaliencyGrid& grid, std::size_t w, std::size_t h,
                                            double sigma_x, double sigma_y) {
  if (grid.values.empty()) throw ArgumentError("degenerate 0-size grid");
  check_target(grid, w, h);
  check_sigma(sigma_x, sigma_y);
  const std::size_t U = grid.u(), V = grid.v();
  if (w % U != 0 || h % V != 0) {
    throw ArgumentError("zero insertion needs integral upsampling factors, got " + std::to_string(w) +
                        "/" + std::to_string(U) + " and " + std::to_string(h) + "/" + std::to_string(V));
  }
  const std::size_t fx = w / U, fy = h / V;

  std::vector<double> canvas(w * h, 0.0);
  for (std::size_t i = 0; i < U; ++i) {
    for (std::size_t j = 0; j < V; ++j) canvas[(i * fx) * h + j * fy] = grid.values.at(i, j);
  }

  // kernel taps for offsets -(n-1) .. n-1, stored at index d + n - 1
  auto kernel = [](std::size_t n, double sigma) {
    std::vector<double> k(2 * n - 1);
    for (std::size_t q = 0; q < k.size(); ++q) {
      const double d = static_cast<double>(q) - static_cast<double>(n - 1);
      k[q] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return k;
  };
  const auto kx = kernel(w, sigma_x);
  const auto ky = kernel(h, sigma_y);

  std::vector<double> rows(w * h, 0.0);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t xs = 0; xs < w; ++xs) {
      const double k = kx[x + (w - 1) - xs];
      for (std::size_t y = 0; y < h; ++y) rows[x * h + y] += k * canvas[xs * h + y];
    }
  }
  Tensor out({w, h});
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) {
      double s = 0.0;
      for (std::size_t ys = 0; ys < h; ++ys) s += ky[y + (h - 1) - ys] * rows[x * h + ys];
      out.at(x, y) = s;
    }
  }
  return make_map(grid, std::move(out), Upsampler::gaussian, sigma_x, sigma_y);
}

}  // namespace extcam
