#pragma once

#include <string_view>

#include "extcam/tensor.hpp"

namespace extcam {

enum class Engine { original_cam, grad_cam, grad_cam_pp, extended_cam };

std::string_view engine_name(Engine engine);
/// Accepts the canonical names and the short forms
/// original / grad / gradpp / extended.
Engine parse_engine(std::string_view name);

/// Grid-level saliency L_ij (u x v).
struct SaliencyGrid {
  Tensor values;
  int class_id = -1;
  Engine engine = Engine::extended_cam;

  std::size_t u() const { return values.dim(0); }
  std::size_t v() const { return values.dim(1); }
};

enum class WeightKind { per_channel, per_cell };

/// w_k (shape K) or w_ijk (shape K x u x v).
struct WeightTensor {
  Tensor values;
  WeightKind kind = WeightKind::per_channel;
};

struct AlphaTensor {
  Tensor values;  // K x u x v
};

/// L_ij = sum_k w_k A_ijk with w_k = fc_weights[class_id, k].
SaliencyGrid original_cam_map(const Tensor& feature_map, const Tensor& fc_weights, int class_id);

/// w_k = (1/Z) sum_ij grad1_ijk, Z = u * v.
WeightTensor grad_cam_weights(const Tensor& grad1);

struct GradCamPlusPlusWeights {
  WeightTensor weights;
  AlphaTensor alpha;
};

/// alpha_ijk = g2_ijk / (2 g2_ijk + (sum_ab A_abk) g3_ijk), 0 where the
/// denominator is exactly 0; w_k = sum_ij alpha_ijk max(0, g1_ijk).
GradCamPlusPlusWeights grad_cam_pp_weights(const Tensor& feature_map, const Tensor& grad1,
                                           const Tensor& grad2, const Tensor& grad3);

/// L_ij = sum_k grad1_ijk A_ijk, with no clipping anywhere.
SaliencyGrid extended_cam_map(const Tensor& feature_map, const Tensor& grad1, int class_id);

/// L_ij = sum_k w_k A_ijk (per_channel) or sum_k w_ijk A_ijk (per_cell);
/// negatives clipped to 0 when `relu_output` is set.
SaliencyGrid combine(const WeightTensor& w, const Tensor& feature_map, bool relu_output,
                     int class_id = -1, Engine engine = Engine::grad_cam);

/// Tensors an engine may draw on; unused ones may be null.
struct CamInputs {
  const Tensor* feature_map = nullptr;
  const Tensor* grad1 = nullptr;
  const Tensor* grad2 = nullptr;
  const Tensor* grad3 = nullptr;
  const Tensor* fc_weights = nullptr;
  int class_id = -1;
};

/// Grad-CAM and Grad-CAM++ clip their output (baseline behaviour);
/// original CAM and Extended-CAM do not. Throws ConfigError when a tensor
/// the engine needs is missing.
SaliencyGrid compute_grid(Engine engine, const CamInputs& in);

}  // namespace extcam
