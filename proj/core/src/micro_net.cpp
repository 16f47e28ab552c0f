#include "extcam/micro_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "extcam/error.hpp"
#include "extcam/npy.hpp"
#include "extcam/random.hpp"
#include "json.hpp"

namespace extcam {

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::gap: return "gap";
    case LayerKind::fc: return "fc";
    case LayerKind::flatten: return "flatten";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::conv, LayerKind::relu, LayerKind::maxpool, LayerKind::gap,
                      LayerKind::fc, LayerKind::flatten}) {
    if (layer_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

LayerSpec conv_layer(Tensor kernel, std::size_t stride, std::size_t padding,
                     std::optional<Tensor> bias) {
  return LayerSpec{LayerKind::conv, std::move(kernel), std::move(bias), stride, padding};
}

LayerSpec fc_layer(Tensor kernel, std::optional<Tensor> bias) {
  return LayerSpec{LayerKind::fc, std::move(kernel), std::move(bias), 1, 0};
}

LayerSpec relu_layer() { return LayerSpec{LayerKind::relu, {}, std::nullopt, 1, 0}; }
LayerSpec maxpool_layer() { return LayerSpec{LayerKind::maxpool, {}, std::nullopt, 2, 0}; }
LayerSpec gap_layer() { return LayerSpec{LayerKind::gap, {}, std::nullopt, 1, 0}; }
LayerSpec flatten_layer() { return LayerSpec{LayerKind::flatten, {}, std::nullopt, 1, 0}; }

std::size_t Network::feature_end() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerKind k = layers[i].kind;
    if (k == LayerKind::gap || k == LayerKind::flatten || k == LayerKind::fc) return i;
  }
  return layers.size();
}

const Tensor& NetActivations::last_feature_map() const {
  return feature_end == 0 ? input : outputs.at(feature_end - 1);
}

const Tensor& NetActivations::gap_output() const {
  if (feature_end >= outputs.size()) throw ArgumentError("network has no gap layer");
  return outputs[feature_end];
}

const Tensor& NetActivations::scores() const {
  if (feature_end >= outputs.size()) throw ArgumentError("network has no classifier head");
  return outputs.back();
}

namespace {

// Forward-mode tangent carrier. Nesting Dual<Dual<double>> gives the third
// diagonal derivative in the mixed eps1*eps2 coefficient.
template <class T>
struct Dual {
  T v{};
  T d{};
  Dual() = default;
  Dual(double x) : v(x), d(0.0) {}  // NOLINT: implicit lift of constants
  Dual(T value, T tangent) : v(std::move(value)), d(std::move(tangent)) {}
};

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
  a.v += b.v;
  a.d += b.d;
  return a;
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double k) {
  return {a.v * k, a.d * k};
}

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
  return primal(x.v);
}

template <class T>
struct Buffer {
  Shape shape;
  std::vector<T> data;
};

template <class T>
Buffer<T> zeros_like(const Shape& shape) {
  return Buffer<T>{shape, std::vector<T>(element_count(shape), T(0.0))};
}

Buffer<double> to_buffer(const Tensor& t) {
  return Buffer<double>{t.shape(), std::vector<double>(t.values().begin(), t.values().end())};
}

Tensor to_tensor(Buffer<double> b) { return Tensor(std::move(b.shape), std::move(b.data)); }

[[noreturn]] void layer_fail(std::size_t index, LayerKind kind, const std::string& what) {
  throw ShapeError("layer " + std::to_string(index) + " (" + std::string(layer_kind_name(kind)) +
                   "): " + what);
}

std::size_t conv_out(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Validates layer parameters against the incoming shape and returns the
// outgoing shape.
Shape output_shape(const LayerSpec& layer, const Shape& in, std::size_t index) {
  switch (layer.kind) {
    case LayerKind::conv: {
      if (in.size() != 3) layer_fail(index, layer.kind, "expects C x H x W input, got " + shape_string(in));
      if (layer.kernel.rank() != 4) layer_fail(index, layer.kind, "kernel must be [out, in, kh, kw]");
      if (layer.kernel.dim(1) != in[0]) {
        layer_fail(index, layer.kind,
                   "kernel expects " + std::to_string(layer.kernel.dim(1)) + " input channels, got " +
                       std::to_string(in[0]));
      }
      if (layer.stride == 0) layer_fail(index, layer.kind, "stride must be positive");
      const std::size_t kh = layer.kernel.dim(2);
      const std::size_t kw = layer.kernel.dim(3);
      if (in[1] + 2 * layer.padding < kh || in[2] + 2 * layer.padding < kw) {
        layer_fail(index, layer.kind, "kernel larger than padded input " + shape_string(in));
      }
      if (layer.bias && layer.bias->shape() != Shape{layer.kernel.dim(0)}) {
        layer_fail(index, layer.kind, "bias must have one entry per output channel");
      }
      return {layer.kernel.dim(0), conv_out(in[1], kh, layer.stride, layer.padding),
              conv_out(in[2], kw, layer.stride, layer.padding)};
    }
    case LayerKind::relu:
      return in;
    case LayerKind::maxpool:
      if (in.size() != 3) layer_fail(index, layer.kind, "expects C x H x W input, got " + shape_string(in));
      if (layer.stride != 2) layer_fail(index, layer.kind, "max-pool stride is fixed at 2");
      if (in[1] < 2 || in[2] < 2) layer_fail(index, layer.kind, "input smaller than the 2x2 window");
      return {in[0], in[1] / 2, in[2] / 2};
    case LayerKind::gap:
      if (in.size() != 3) layer_fail(index, layer.kind, "expects C x H x W input, got " + shape_string(in));
      return {in[0]};
    case LayerKind::flatten:
      return {element_count(in)};
    case LayerKind::fc:
      if (in.size() != 1) layer_fail(index, layer.kind, "expects a vector input, got " + shape_string(in));
      if (layer.kernel.rank() != 2) layer_fail(index, layer.kind, "kernel must be [out, in]");
      if (layer.kernel.dim(1) != in[0]) {
        layer_fail(index, layer.kind,
                   "kernel expects " + std::to_string(layer.kernel.dim(1)) + " inputs, got " +
                       std::to_string(in[0]));
      }
      if (layer.bias && layer.bias->shape() != Shape{layer.kernel.dim(0)}) {
        layer_fail(index, layer.kind, "bias must have one entry per output");
      }
      return {layer.kernel.dim(0)};
  }
  layer_fail(index, layer.kind, "unsupported layer");
}

template <class T>
Buffer<T> forward_layer(const LayerSpec& layer, const Buffer<T>& in, std::size_t index) {
  Buffer<T> out = zeros_like<T>(output_shape(layer, in.shape, index));
  switch (layer.kind) {
    case LayerKind::conv: {
      const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
      const std::size_t O = out.shape[0], OH = out.shape[1], OW = out.shape[2];
      const std::size_t KH = layer.kernel.dim(2), KW = layer.kernel.dim(3);
      const auto k = layer.kernel.values();
      for (std::size_t o = 0; o < O; ++o) {
        const double b = layer.bias ? (*layer.bias)[o] : 0.0;
        for (std::size_t y = 0; y < OH; ++y) {
          for (std::size_t x = 0; x < OW; ++x) {
            T acc(b);
            for (std::size_t c = 0; c < C; ++c) {
              for (std::size_t ky = 0; ky < KH; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * layer.stride + ky) -
                                          static_cast<std::ptrdiff_t>(layer.padding);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                for (std::size_t kx = 0; kx < KW; ++kx) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * layer.stride + kx) -
                                            static_cast<std::ptrdiff_t>(layer.padding);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                  acc += in.data[(c * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix)] *
                         k[((o * C + c) * KH + ky) * KW + kx];
                }
              }
            }
            out.data[(o * OH + y) * OW + x] = acc;
          }
        }
      }
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.data.size(); ++i) {
        out.data[i] = primal(in.data[i]) > 0.0 ? in.data[i] : T(0.0);
      }
      break;
    case LayerKind::maxpool: {
      const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
      const std::size_t OH = out.shape[1], OW = out.shape[2];
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t y = 0; y < OH; ++y) {
          for (std::size_t x = 0; x < OW; ++x) {
            std::size_t best = (c * H + 2 * y) * W + 2 * x;
            for (std::size_t dy = 0; dy < 2; ++dy) {
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t at = (c * H + 2 * y + dy) * W + 2 * x + dx;
                if (primal(in.data[at]) > primal(in.data[best])) best = at;
              }
            }
            out.data[(c * OH + y) * OW + x] = in.data[best];
          }
        }
      }
      break;
    }
    case LayerKind::gap: {
      const std::size_t C = in.shape[0], HW = in.shape[1] * in.shape[2];
      for (std::size_t c = 0; c < C; ++c) {
        T acc(0.0);
        for (std::size_t i = 0; i < HW; ++i) acc += in.data[c * HW + i];
        out.data[c] = acc;
      }
      break;
    }
    case LayerKind::flatten:
      out.data = in.data;
      break;
    case LayerKind::fc: {
      const std::size_t O = out.shape[0], N = in.shape[0];
      const auto k = layer.kernel.values();
      for (std::size_t o = 0; o < O; ++o) {
        T acc(layer.bias ? (*layer.bias)[o] : 0.0);
        for (std::size_t n = 0; n < N; ++n) acc += in.data[n] * k[o * N + n];
        out.data[o] = acc;
      }
      break;
    }
  }
  return out;
}

// Gradient of the loss with respect to this layer's input, given the
// forward input and the gradient at the output.
template <class T>
Buffer<T> backward_layer(const LayerSpec& layer, const Buffer<T>& in, const Buffer<T>& grad_out) {
  Buffer<T> g = zeros_like<T>(in.shape);
  switch (layer.kind) {
    case LayerKind::conv: {
      const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
      const std::size_t O = grad_out.shape[0], OH = grad_out.shape[1], OW = grad_out.shape[2];
      const std::size_t KH = layer.kernel.dim(2), KW = layer.kernel.dim(3);
      const auto k = layer.kernel.values();
      for (std::size_t o = 0; o < O; ++o) {
        for (std::size_t y = 0; y < OH; ++y) {
          for (std::size_t x = 0; x < OW; ++x) {
            const T& up = grad_out.data[(o * OH + y) * OW + x];
            for (std::size_t c = 0; c < C; ++c) {
              for (std::size_t ky = 0; ky < KH; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * layer.stride + ky) -
                                          static_cast<std::ptrdiff_t>(layer.padding);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                for (std::size_t kx = 0; kx < KW; ++kx) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * layer.stride + kx) -
                                            static_cast<std::ptrdiff_t>(layer.padding);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                  g.data[(c * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix)] +=
                      up * k[((o * C + c) * KH + ky) * KW + kx];
                }
              }
            }
          }
        }
      }
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.data.size(); ++i) {
        if (primal(in.data[i]) > 0.0) g.data[i] = grad_out.data[i];
      }
      break;
    case LayerKind::maxpool: {
      const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
      const std::size_t OH = grad_out.shape[1], OW = grad_out.shape[2];
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t y = 0; y < OH; ++y) {
          for (std::size_t x = 0; x < OW; ++x) {
            std::size_t best = (c * H + 2 * y) * W + 2 * x;
            for (std::size_t dy = 0; dy < 2; ++dy) {
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t at = (c * H + 2 * y + dy) * W + 2 * x + dx;
                if (primal(in.data[at]) > primal(in.data[best])) best = at;
              }
            }
            g.data[best] += grad_out.data[(c * OH + y) * OW + x];
          }
        }
      }
      break;
    }
    case LayerKind::gap: {
      const std::size_t C = in.shape[0], HW = in.shape[1] * in.shape[2];
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < HW; ++i) g.data[c * HW + i] = grad_out.data[c];
      }
      break;
    }
    case LayerKind::flatten:
      g.data = grad_out.data;
      break;
    case LayerKind::fc: {
      const std::size_t O = grad_out.shape[0], N = in.shape[0];
      const auto k = layer.kernel.values();
      for (std::size_t o = 0; o < O; ++o) {
        for (std::size_t n = 0; n < N; ++n) g.data[n] += grad_out.data[o] * k[o * N + n];
      }
      break;
    }
  }
  return g;
}

// Forward from layer `start` with input x, then reverse back to x seeded
// with the one-hot score gradient.
template <class T>
Buffer<T> score_gradient(const Network& net, std::size_t start, Buffer<T> x,
                         std::size_t target_class) {
  std::vector<Buffer<T>> inputs;
  inputs.reserve(net.layers.size() - start);
  for (std::size_t i = start; i < net.layers.size(); ++i) {
    Buffer<T> next = forward_layer(net.layers[i], x, i);
    inputs.push_back(std::move(x));
    x = std::move(next);
  }
  Buffer<T> g = zeros_like<T>(x.shape);
  g.data[target_class] = T(1.0);
  for (std::size_t i = net.layers.size(); i-- > start;) {
    g = backward_layer(net.layers[i], inputs[i - start], g);
  }
  return g;
}

Buffer<double> layer_input(const NetActivations& acts, std::size_t i) {
  return to_buffer(i == 0 ? acts.input : acts.outputs[i - 1]);
}

Tensor diagonal_derivative(const Network& net, std::size_t start, const Tensor& x,
                           std::size_t target_class, int order) {
  Tensor out(x.shape());
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (order == 2) {
      using D = Dual<double>;
      Buffer<D> b{x.shape(), {}};
      b.data.reserve(x.size());
      for (double v : x.values()) b.data.emplace_back(v);
      b.data[e].d = 1.0;
      out[e] = score_gradient(net, start, std::move(b), target_class).data[e].d;
    } else {
      using D = Dual<Dual<double>>;
      Buffer<D> b{x.shape(), {}};
      b.data.reserve(x.size());
      for (double v : x.values()) b.data.emplace_back(v);
      b.data[e].v.d = 1.0;
      b.data[e].d.v = 1.0;
      out[e] = score_gradient(net, start, std::move(b), target_class).data[e].d.d;
    }
  }
  return out;
}

}  // namespace

NetActivations forward(const Network& net, const Tensor& image) {
  NetActivations acts;
  acts.input = image;
  acts.feature_end = net.feature_end();
  acts.outputs.reserve(net.layers.size());
  Buffer<double> cur = to_buffer(image);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    cur = forward_layer(net.layers[i], cur, i);
    acts.outputs.push_back(Tensor(cur.shape, cur.data));
  }
  return acts;
}

Tensor backward(const Network& net, const NetActivations& acts, std::size_t target_class,
                GradTarget wrt, int order) {
  if (!net.has_head()) throw ArgumentError("backward needs a network with a classifier head");
  if (acts.outputs.size() != net.layers.size()) {
    throw ArgumentError("activations were not produced by this network");
  }
  const Tensor& scores = acts.scores();
  if (scores.rank() != 1 || target_class >= scores.size()) {
    throw ArgumentError("unknown class index " + std::to_string(target_class) + " (network has " +
                        std::to_string(scores.size()) + " classes)");
  }
  if (order < 1 || order > 3) throw ArgumentError("derivative order must be 1, 2 or 3");

  const std::size_t start = wrt == GradTarget::input ? 0 : acts.feature_end;
  if (order == 1) {
    Buffer<double> g = zeros_like<double>(scores.shape());
    g.data[target_class] = 1.0;
    for (std::size_t i = net.layers.size(); i-- > start;) {
      g = backward_layer(net.layers[i], layer_input(acts, i), g);
    }
    return to_tensor(std::move(g));
  }
  const Tensor& x = wrt == GradTarget::input ? acts.input : acts.last_feature_map();
  return diagonal_derivative(net, start, x, target_class, order);
}

Tensor input_gradient(const Network& net, const NetActivations& acts,
                      const Tensor& feature_map_seed) {
  if (acts.outputs.size() != net.layers.size()) {
    throw ArgumentError("activations were not produced by this network");
  }
  if (!feature_map_seed.same_shape(acts.last_feature_map())) {
    throw ShapeError("feature-map seed " + shape_string(feature_map_seed.shape()) +
                     " does not match the last feature map " +
                     shape_string(acts.last_feature_map().shape()));
  }
  Buffer<double> g = to_buffer(feature_map_seed);
  for (std::size_t i = acts.feature_end; i-- > 0;) {
    g = backward_layer(net.layers[i], layer_input(acts, i), g);
  }
  return to_tensor(std::move(g));
}

Tensor softmax(const Tensor& scores) {
  if (scores.empty()) throw ArgumentError("softmax of an empty tensor");
  const double top = max_value(scores);
  Tensor out(scores.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    total += out[i];
  }
  for (double& v : out.values()) v /= total;
  return out;
}

double confidence(const Network& net, const Tensor& image, std::size_t class_id) {
  const NetActivations acts = forward(net, image);
  const Tensor& s = acts.scores();
  if (class_id >= s.size()) throw ArgumentError("unknown class index " + std::to_string(class_id));
  return softmax(s)[class_id];
}

std::size_t argmax(const Tensor& t) {
  if (t.empty()) throw ArgumentError("argmax of an empty tensor");
  return static_cast<std::size_t>(std::max_element(t.values().begin(), t.values().end()) -
                                  t.values().begin());
}

namespace {

Tensor he_uniform(Shape shape, std::size_t fan_in, Xorshift64Star& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& v : t.values()) v = (2.0 * rng.uniform() - 1.0) * bound;
  return t;
}

void append_extractor(Network& net, Xorshift64Star& rng) {
  net.layers.push_back(conv_layer(he_uniform({4, 3, 3, 3}, 27, rng), 1, 1));
  net.layers.push_back(relu_layer());
  net.layers.push_back(maxpool_layer());
  net.layers.push_back(conv_layer(he_uniform({8, 4, 3, 3}, 36, rng), 1, 1));
  net.layers.push_back(relu_layer());
  net.layers.push_back(maxpool_layer());
  net.layers.push_back(conv_layer(he_uniform({8, 8, 3, 3}, 72, rng), 1, 1));
  net.layers.push_back(relu_layer());
}

}  // namespace

std::vector<std::string> builtin_architectures() { return {"micro-vgg", "micro-vgg-mlp"}; }

Shape architecture_input_shape(std::string_view arch_id) {
  for (const auto& a : builtin_architectures()) {
    if (a == arch_id) return {3, 28, 28};
  }
  throw ArgumentError("unknown architecture '" + std::string(arch_id) + "'");
}

Network seeded_init(std::string_view arch_id, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  Network net;
  if (arch_id == "micro-vgg") {
    append_extractor(net, rng);
    net.layers.push_back(gap_layer());
    net.layers.push_back(fc_layer(he_uniform({4, 8}, 8, rng)));
  } else if (arch_id == "micro-vgg-mlp") {
    append_extractor(net, rng);
    net.layers.push_back(flatten_layer());
    net.layers.push_back(fc_layer(he_uniform({16, 392}, 392, rng)));
    net.layers.push_back(relu_layer());
    net.layers.push_back(fc_layer(he_uniform({4, 16}, 16, rng)));
  } else {
    throw ArgumentError("unknown architecture '" + std::string(arch_id) + "'");
  }
  return net;
}

Network load_network(const std::filesystem::path& descriptor) {
  std::ifstream in(descriptor);
  if (!in) throw IoError("cannot open network descriptor '" + descriptor.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(descriptor.string() + ": " + e.what());
  }
  const auto base = descriptor.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  Network net;
  try {
    for (const auto& entry : doc.at("layers")) {
      LayerSpec layer;
      layer.kind = parse_layer_kind(entry.at("kind").get<std::string>());
      layer.stride = entry.value("stride", layer.kind == LayerKind::maxpool ? 2u : 1u);
      layer.padding = entry.value("padding", 0u);
      if (entry.contains("kernel_path") && !entry["kernel_path"].is_null()) {
        layer.kernel = read_tensor(resolve(entry["kernel_path"].get<std::string>()));
      }
      if (entry.contains("bias_path") && !entry["bias_path"].is_null()) {
        layer.bias = read_tensor(resolve(entry["bias_path"].get<std::string>()));
      }
      if ((layer.kind == LayerKind::conv || layer.kind == LayerKind::fc) && layer.kernel.empty()) {
        throw ConfigError("layer " + std::to_string(net.layers.size()) + " needs a kernel_path");
      }
      net.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(descriptor.string() + ": " + e.what());
  }
  return net;
}

void save_network(const Network& net, const std::filesystem::path& descriptor) {
  const auto base = descriptor.parent_path();
  if (!base.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) throw IoError("cannot create '" + base.string() + "': " + ec.message());
  }
  const std::string stem = descriptor.stem().string();
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    nlohmann::json entry = {{"kind", layer_kind_name(layer.kind)},
                            {"stride", layer.stride},
                            {"padding", layer.padding},
                            {"kernel_path", nullptr},
                            {"bias_path", nullptr}};
    const std::string prefix = stem + "_layer" + std::to_string(i);
    if (!layer.kernel.empty()) {
      write_tensor(layer.kernel, base / (prefix + "_kernel.npy"));
      entry["kernel_path"] = prefix + "_kernel.npy";
    }
    if (layer.bias) {
      write_tensor(*layer.bias, base / (prefix + "_bias.npy"));
      entry["bias_path"] = prefix + "_bias.npy";
    }
    layers.push_back(std::move(entry));
  }
  std::ofstream out(descriptor);
  if (!out) throw IoError("cannot open '" + descriptor.string() + "' for writing");
  out << nlohmann::json{{"layers", layers}}.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + descriptor.string() + "'");
}

}  // namespace extcam
