#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Everything here is written as plain loops against the mathematical
// definitions and does not call the library routine it is checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "extcam/micro_net.hpp"
#include "extcam/random.hpp"
#include "extcam/tensor.hpp"

namespace oracle {

using extcam::Network;
using extcam::Shape;
using extcam::Tensor;
using extcam::Xorshift64Star;

inline Tensor random_tensor(const Shape& shape, Xorshift64Star& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

/// max |a - b| / max |b|, or max |a - b| when b is identically zero.
inline double normwise_rel_diff(const Tensor& a, const Tensor& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(got), std::abs(want));
  return scale > 0.0 ? std::abs(got - want) / scale : 0.0;
}

/// Relative error with an absolute floor, for finite-difference checks where
/// both values can be near zero.
inline double rel_err_floor(double got, double want, double floor = 1e-6) {
  return std::abs(got - want) / std::max({std::abs(got), std::abs(want), floor});
}

/// Records every ReLU sign and every max-pool winner along a forward pass.
/// Two inputs with equal signatures lie in the same linear region.
inline std::vector<std::int64_t> activation_signature(const Network& net, const extcam::NetActivations& acts) {
  std::vector<std::int64_t> sig;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Tensor& in = l == 0 ? acts.input : acts.outputs[l - 1];
    if (net.layers[l].kind == extcam::LayerKind::relu) {
      for (double v : in.values()) sig.push_back(v > 0.0 ? 1 : 0);
    } else if (net.layers[l].kind == extcam::LayerKind::maxpool) {
      const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t y = 0; y + 1 < H; y += 2) {
          for (std::size_t x = 0; x + 1 < W; x += 2) {
            std::int64_t best = 0;
            double bv = in.at(c, y, x);
            for (std::int64_t q = 1; q < 4; ++q) {
              const double v = in.at(c, y + static_cast<std::size_t>(q / 2), x + static_cast<std::size_t>(q % 2));
              if (v > bv) {
                bv = v;
                best = q;
              }
            }
            sig.push_back(best);
          }
        }
      }
    }
  }
  return sig;
}

inline std::vector<std::int64_t> activation_signature(const Network& net, const Tensor& image) {
  return activation_signature(net, extcam::forward(net, image));
}

struct FdResult {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

/// Central finite differences of the pre-softmax score y^c with respect to
/// every input element, compared against `analytic`. Elements whose +-h
/// probes land in a different linear region are skipped and counted.
inline FdResult finite_difference_check(const Network& net, const Tensor& image, std::size_t cls,
                                        const Tensor& analytic, double h = 1e-5) {
  FdResult r;
  const auto base_sig = activation_signature(net, image);
  Tensor probe = image;
  for (std::size_t e = 0; e < image.size(); ++e) {
    probe[e] = image[e] + h;
    const extcam::NetActivations plus = extcam::forward(net, probe);
    const double yp = plus.scores()[cls];
    probe[e] = image[e] - h;
    const extcam::NetActivations minus = extcam::forward(net, probe);
    const double ym = minus.scores()[cls];
    probe[e] = image[e];
    if (activation_signature(net, plus) != base_sig || activation_signature(net, minus) != base_sig) {
      ++r.skipped_kinks;
      continue;
    }
    const double fd = (yp - ym) / (2.0 * h);
    r.max_rel_err = std::max(r.max_rel_err, rel_err_floor(analytic[e], fd));
    ++r.checked;
  }
  return r;
}

/// n-fold self-convolution of a 3x3 box, evaluated on a size x size canvas
/// centred at (cx, cy), normalised to max 1.
inline Tensor box_power(std::size_t n, std::size_t size, std::size_t cx, std::size_t cy) {
  const std::size_t support = 2 * n + 1;
  std::vector<double> k(1, 1.0);
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<double> next(k.size() + 2, 0.0);
    for (std::size_t i = 0; i < k.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) next[i + d] += k[i];
    }
    k = std::move(next);
  }
  Tensor out({size, size});
  for (std::size_t x = 0; x < size; ++x) {
    for (std::size_t y = 0; y < size; ++y) {
      const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(x) - static_cast<std::ptrdiff_t>(cx) +
                                static_cast<std::ptrdiff_t>(n);
      const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(y) - static_cast<std::ptrdiff_t>(cy) +
                                static_cast<std::ptrdiff_t>(n);
      if (dx < 0 || dy < 0 || dx >= static_cast<std::ptrdiff_t>(support) ||
          dy >= static_cast<std::ptrdiff_t>(support)) {
        continue;
      }
      out.at(x, y) = k[static_cast<std::size_t>(dx)] * k[static_cast<std::size_t>(dy)];
    }
  }
  const double top = *std::max_element(out.values().begin(), out.values().end());
  for (double& v : out.values()) v /= top;
  return out;
}

/// Grad-CAM: L_ij = ReLU(sum_k mean_ab(g_abk) A_ijk).
inline Tensor grad_cam_direct(const Tensor& A, const Tensor& g) {
  const std::size_t K = A.dim(0), U = A.dim(1), V = A.dim(2);
  Tensor L({U, V});
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t a = 0; a < U; ++a) {
      for (std::size_t b = 0; b < V; ++b) s += g.at(k, a, b);
    }
    const double w = s / static_cast<double>(U * V);
    for (std::size_t i = 0; i < U; ++i) {
      for (std::size_t j = 0; j < V; ++j) L.at(i, j) += w * A.at(k, i, j);
    }
  }
  for (double& v : L.values()) v = std::max(0.0, v);
  return L;
}

/// Grad-CAM++ channel weights with alpha exactly as printed:
/// alpha = g2 / (2 g2 + (sum_ab A_abk) g3_ijk), 0 when the denominator is 0.
inline std::vector<double> grad_cam_pp_weights_direct(const Tensor& A, const Tensor& g1, const Tensor& g2,
                                                      const Tensor& g3) {
  const std::size_t K = A.dim(0), U = A.dim(1), V = A.dim(2);
  std::vector<double> w(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double sa = 0.0;
    for (std::size_t a = 0; a < U; ++a) {
      for (std::size_t b = 0; b < V; ++b) sa += A.at(k, a, b);
    }
    for (std::size_t i = 0; i < U; ++i) {
      for (std::size_t j = 0; j < V; ++j) {
        const double den = 2.0 * g2.at(k, i, j) + sa * g3.at(k, i, j);
        const double alpha = den == 0.0 ? 0.0 : g2.at(k, i, j) / den;
        w[k] += alpha * std::max(0.0, g1.at(k, i, j));
      }
    }
  }
  return w;
}

/// Align-corners bilinear interpolation evaluated pixel by pixel.
inline Tensor bilinear_direct(const Tensor& grid, std::size_t w, std::size_t h) {
  const std::size_t U = grid.dim(0), V = grid.dim(1);
  auto coord = [](std::size_t p, std::size_t pixels, std::size_t cells) {
    if (cells == 1 || pixels == 1) return 0.0;
    return static_cast<double>(p) * static_cast<double>(cells - 1) / static_cast<double>(pixels - 1);
  };
  Tensor out({w, h});
  for (std::size_t x = 0; x < w; ++x) {
    const double sx = coord(x, w, U);
    const std::size_t i0 = std::min(static_cast<std::size_t>(std::floor(sx)), U - 1);
    const std::size_t i1 = std::min(i0 + 1, U - 1);
    const double tx = sx - static_cast<double>(i0);
    for (std::size_t y = 0; y < h; ++y) {
      const double sy = coord(y, h, V);
      const std::size_t j0 = std::min(static_cast<std::size_t>(std::floor(sy)), V - 1);
      const std::size_t j1 = std::min(j0 + 1, V - 1);
      const double ty = sy - static_cast<double>(j0);
      const double top = grid.at(i0, j0) + (grid.at(i1, j0) - grid.at(i0, j0)) * tx;
      const double bot = grid.at(i0, j1) + (grid.at(i1, j1) - grid.at(i0, j1)) * tx;
      out.at(x, y) = top + (bot - top) * ty;
    }
  }
  return out;
}

/// Eq.-level Gaussian upsampling as a plain quadruple loop.
inline Tensor gaussian_direct(const Tensor& grid, std::size_t w, std::size_t h, double sx, double sy,
                              double offset = 0.0) {
  const std::size_t U = grid.dim(0), V = grid.dim(1);
  const double fx = static_cast<double>(w) / static_cast<double>(U);
  const double fy = static_cast<double>(h) / static_cast<double>(V);
  Tensor out({w, h});
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) {
      double acc = 0.0;
      for (std::size_t i = 0; i < U; ++i) {
        for (std::size_t j = 0; j < V; ++j) {
          const double dx = static_cast<double>(x) - fx * (static_cast<double>(i) + offset);
          const double dy = static_cast<double>(y) - fy * (static_cast<double>(j) + offset);
          acc += grid.at(i, j) * std::exp(-(dx * dx) / (2 * sx * sx) - (dy * dy) / (2 * sy * sy));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

/// Indices of the top ceil(f * N) values by a full stable sort (descending
/// value, ascending index on ties), returned ascending.
inline std::vector<std::size_t> top_fraction_by_sort(const Tensor& map, double f) {
  std::vector<std::size_t> idx(map.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return map[a] > map[b]; });
  const auto keep = static_cast<std::size_t>(std::ceil(f * static_cast<double>(map.size()) - 1e-9));
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// A network of `n` single-channel 3x3 all-ones convs (stride 1, pad 1).
inline Network box_stack(std::size_t n) {
  Network net;
  for (std::size_t i = 0; i < n; ++i) {
    net.layers.push_back(extcam::conv_layer(Tensor::filled({1, 1, 3, 3}, 1.0), 1, 1));
  }
  return net;
}

/// Smooth synthetic images: a few random Gaussian blobs per channel on a
/// dim background, values in [0, 1].
inline Tensor blob_image(const Shape& shape, Xorshift64Star& rng) {
  Tensor img(shape);
  const std::size_t C = shape[0], W = shape[1], H = shape[2];
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t x = 0; x < W; ++x) {
      for (std::size_t y = 0; y < H; ++y) img.at(c, x, y) = 0.1;
    }
  }
  const int blobs = 2 + static_cast<int>(rng.uniform() * 3.0);
  for (int b = 0; b < blobs; ++b) {
    const double mx = rng.uniform(0.0, static_cast<double>(W));
    const double my = rng.uniform(0.0, static_cast<double>(H));
    const double s = rng.uniform(1.5, 4.0);
    std::vector<double> color(C);
    for (double& v : color) v = rng.uniform(0.2, 0.9);
    for (std::size_t x = 0; x < W; ++x) {
      for (std::size_t y = 0; y < H; ++y) {
        const double d2 = (x - mx) * (x - mx) + (y - my) * (y - my);
        const double g = std::exp(-d2 / (2 * s * s));
        for (std::size_t c = 0; c < C; ++c) img.at(c, x, y) += color[c] * g;
      }
    }
  }
  for (double& v : img.values()) v = std::min(1.0, v);
  return img;
}

}  // namespace oracle
