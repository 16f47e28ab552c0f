#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "extcam/tensor.hpp"

namespace extcam {

enum class LayerKind { conv, relu, maxpool, gap, fc, flatten };

std::string_view layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

/// One layer of a micro-net.
///
/// conv kernels are [out, in, kh, kw]; fc kernels are [out, in]; biases are
/// [out]. maxpool is always a 2x2 window with stride 2. gap sums over the
/// spatial axes (F_k = sum_ij A_ijk), it does not divide by the area.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  Tensor kernel;
  std::optional<Tensor> bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

LayerSpec conv_layer(Tensor kernel, std::size_t stride = 1, std::size_t padding = 0,
                     std::optional<Tensor> bias = std::nullopt);
LayerSpec fc_layer(Tensor kernel, std::optional<Tensor> bias = std::nullopt);
LayerSpec relu_layer();
LayerSpec maxpool_layer();
LayerSpec gap_layer();
LayerSpec flatten_layer();

/// A feature extractor (conv/relu/maxpool) followed by an optional
/// classifier head that starts at the first gap, flatten or fc layer.
struct Network {
  std::vector<LayerSpec> layers;

  /// Index of the first head layer, or layers.size() for extractor-only nets.
  std::size_t feature_end() const;
  bool has_head() const { return feature_end() < layers.size(); }
};

struct NetActivations {
  Tensor input;
  std::vector<Tensor> outputs;  // one per layer
  std::size_t feature_end = 0;

  /// A_ijk: output of the last extractor layer (the input when there is none).
  const Tensor& last_feature_map() const;
  /// F_k: output of the first gap layer.
  const Tensor& gap_output() const;
  /// Pre-softmax scores y^c.
  const Tensor& scores() const;
};

/// Runs every layer. Throws ShapeError naming the offending layer index.
NetActivations forward(const Network& net, const Tensor& image);

enum class GradTarget { input, last_feature_map };

/// Derivative of the pre-softmax score y^target_class with respect to the
/// input or the last feature map.
///
/// order 1 is the gradient. Orders 2 and 3 are the elementwise diagonal
/// derivatives d^n y / dX_e^n, obtained by propagating (nested) dual
/// numbers through the forward and reverse passes once per element. Every
/// supported layer is piecewise linear, so these are exactly zero away
/// from kinks; ReLU has derivative 0 at 0 and max-pool routes ties to the
/// first maximum in scan order.
Tensor backward(const Network& net, const NetActivations& acts, std::size_t target_class,
                GradTarget wrt, int order = 1);

/// Backpropagates an arbitrary upstream gradient given at the last feature
/// map down to the input image.
Tensor input_gradient(const Network& net, const NetActivations& acts,
                      const Tensor& feature_map_seed);

Tensor softmax(const Tensor& scores);

/// Softmax probability of `class_id` for `image`.
double confidence(const Network& net, const Tensor& image, std::size_t class_id);

std::size_t argmax(const Tensor& t);

/// Built-in architectures, all bias-free:
///   "micro-vgg"      3x28x28 -> [conv 3->4, relu, pool, conv 4->8, relu, pool,
///                    conv 8->8, relu] -> 8x7x7 -> gap -> fc 8->4  (10 layers)
///   "micro-vgg-mlp"  same extractor -> flatten -> fc 392->16 -> relu -> fc 16->4
/// Convolutions are 3x3, stride 1, padding 1. Kernels are drawn in layer
/// order, row-major, from one Xorshift64Star(seed) stream as
/// (2u - 1) * sqrt(6 / fan_in).
Network seeded_init(std::string_view arch_id, std::uint64_t seed);
std::vector<std::string> builtin_architectures();
Shape architecture_input_shape(std::string_view arch_id);

/// Architecture descriptor JSON plus one tensor file per kernel/bias:
/// {"layers":[{"kind","stride","padding","kernel_path","bias_path"}]}.
/// Relative paths are resolved against the descriptor's directory.
Network load_network(const std::filesystem::path& descriptor);
/// Writes the descriptor and one tensor file per weight next to it,
/// creating the descriptor's directory if needed.
void save_network(const Network& net, const std::filesystem::path& descriptor);

}  // namespace extcam
