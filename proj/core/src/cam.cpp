#include "extcam/cam.hpp"

#include <algorithm>
#include <string>

#include "extcam/error.hpp"

namespace extcam {

std::string_view engine_name(Engine engine) {
  switch (engine) {
    case Engine::original_cam: return "original_cam";
    case Engine::grad_cam: return "grad_cam";
    case Engine::grad_cam_pp: return "grad_cam_pp";
    case Engine::extended_cam: return "extended_cam";
  }
  return "?";
}

Engine parse_engine(std::string_view name) {
  if (name == "original_cam" || name == "original") return Engine::original_cam;
  if (name == "grad_cam" || name == "grad") return Engine::grad_cam;
  if (name == "grad_cam_pp" || name == "gradpp") return Engine::grad_cam_pp;
  if (name == "extended_cam" || name == "extended") return Engine::extended_cam;
  throw ArgumentError("unknown engine '" + std::string(name) + "'");
}

namespace {

void require_kuv(const Tensor& t, const char* what) {
  if (t.rank() != 3) throw ShapeError(std::string(what) + " must be K x u x v, got " + shape_string(t.shape()));
}

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + " shape " + shape_string(b.shape()) +
                     " does not match feature map " + shape_string(a.shape()));
  }
}

}  // namespace

SaliencyGrid original_cam_map(const Tensor& feature_map, const Tensor& fc_weights, int class_id) {
  require_kuv(feature_map, "feature map");
  if (fc_weights.rank() != 2) throw ShapeError("fc_weights must be num_classes x K");
  if (fc_weights.dim(1) != feature_map.dim(0)) {
    throw ShapeError("fc_weights has " + std::to_string(fc_weights.dim(1)) +
                     " channels, feature map has " + std::to_string(feature_map.dim(0)));
  }
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= fc_weights.dim(0)) {
    throw ArgumentError("class " + std::to_string(class_id) + " has no fc_weights row");
  }
  const std::size_t K = feature_map.dim(0);
  Tensor w({K});
  for (std::size_t k = 0; k < K; ++k) w[k] = fc_weights.at(class_id, k);
  return combine(WeightTensor{std::move(w), WeightKind::per_channel}, feature_map, false, class_id,
                 Engine::original_cam);
}

WeightTensor grad_cam_weights(const Tensor& grad1) {
  require_kuv(grad1, "grad1");
  const std::size_t K = grad1.dim(0), Z = grad1.dim(1) * grad1.dim(2);
  Tensor w({K});
  const auto g = grad1.values();
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t c = 0; c < Z; ++c) s += g[k * Z + c];
    w[k] = s / static_cast<double>(Z);
  }
  return WeightTensor{std::move(w), WeightKind::per_channel};
}

GradCamPlusPlusWeights grad_cam_pp_weights(const Tensor& feature_map, const Tensor& grad1,
                                           const Tensor& grad2, const Tensor& grad3) {
  require_kuv(feature_map, "feature map");
  require_same(feature_map, grad1, "grad1");
  require_same(feature_map, grad2, "grad2");
  require_same(feature_map, grad3, "grad3");
  const std::size_t K = feature_map.dim(0), Z = feature_map.dim(1) * feature_map.dim(2);
  const auto a = feature_map.values();
  const auto g1 = grad1.values();
  const auto g2 = grad2.values();
  const auto g3 = grad3.values();

  Tensor alpha(feature_map.shape());
  Tensor w({K});
  for (std::size_t k = 0; k < K; ++k) {
    double channel_sum = 0.0;
    for (std::size_t c = 0; c < Z; ++c) channel_sum += a[k * Z + c];
    double wk = 0.0;
    for (std::size_t c = 0; c < Z; ++c) {
      const std::size_t e = k * Z + c;
      const double denom = 2.0 * g2[e] + channel_sum * g3[e];
      const double al = denom == 0.0 ? 0.0 : g2[e] / denom;
      alpha[e] = al;
      wk += al * std::max(0.0, g1[e]);
    }
    w[k] = wk;
  }
  return {WeightTensor{std::move(w), WeightKind::per_channel}, AlphaTensor{std::move(alpha)}};
}

SaliencyGrid extended_cam_map(const Tensor& feature_map, const Tensor& grad1, int class_id) {
  require_kuv(feature_map, "feature map");
  require_same(feature_map, grad1, "grad1");
  return combine(WeightTensor{grad1, WeightKind::per_cell}, feature_map, false, class_id,
                 Engine::extended_cam);
}

SaliencyGrid combine(const WeightTensor& w, const Tensor& feature_map, bool relu_output,
                     int class_id, Engine engine) {
  require_kuv(feature_map, "feature map");
  const std::size_t K = feature_map.dim(0), U = feature_map.dim(1), V = feature_map.dim(2);
  const std::size_t Z = U * V;
  if (w.kind == WeightKind::per_channel) {
    if (w.values.shape() != Shape{K}) {
      throw ShapeError("per-channel weights " + shape_string(w.values.shape()) + " do not match " +
                       std::to_string(K) + " channels");
    }
  } else {
    require_same(feature_map, w.values, "per-cell weights");
  }

  Tensor L({U, V});
  const auto a = feature_map.values();
  const auto wv = w.values.values();
  for (std::size_t c = 0; c < Z; ++c) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double coeff = w.kind == WeightKind::per_channel ? wv[k] : wv[k * Z + c];
      s += coeff * a[k * Z + c];
    }
    L[c] = relu_output ? std::max(0.0, s) : s;
  }
  return SaliencyGrid{std::move(L), class_id, engine};
}

SaliencyGrid compute_grid(Engine engine, const CamInputs& in) {
  auto need = [&](const Tensor* t, const char* role) -> const Tensor& {
    if (!t) {
      throw ConfigError(std::string(engine_name(engine)) + " needs the '" + role + "' tensor");
    }
    return *t;
  };
  const Tensor& A = need(in.feature_map, "feature_map");
  switch (engine) {
    case Engine::original_cam:
      return original_cam_map(A, need(in.fc_weights, "fc_weights"), in.class_id);
    case Engine::grad_cam:
      require_same(A, need(in.grad1, "grad1"), "grad1");
      return combine(grad_cam_weights(*in.grad1), A, true, in.class_id, engine);
    case Engine::grad_cam_pp: {
      const auto pp = grad_cam_pp_weights(A, need(in.grad1, "grad1"), need(in.grad2, "grad2"),
                                          need(in.grad3, "grad3"));
      return combine(pp.weights, A, true, in.class_id, engine);
    }
    case Engine::extended_cam:
      return extended_cam_map(A, need(in.grad1, "grad1"), in.class_id);
  }
  throw ArgumentError("unsupported engine");
}

}  // namespace extcam
