#include "extcam/net_export.hpp"

#include <cstdio>

#include "extcam/error.hpp"
#include "extcam/npy.hpp"

namespace extcam {

std::optional<Tensor> linear_head_weights(const Network& net) {
  const std::size_t fe = net.feature_end();
  if (fe + 2 == net.layers.size() && net.layers[fe].kind == LayerKind::gap &&
      net.layers[fe + 1].kind == LayerKind::fc && !net.layers[fe + 1].bias) {
    return net.layers[fe + 1].kernel;
  }
  return std::nullopt;
}

std::vector<Sample> micro_net_samples(const Network& net, std::span<const Tensor> images,
                                      const ExportOptions& options) {
  const auto fc = linear_head_weights(net);
  std::vector<Sample> samples;
  samples.reserve(images.size());
  for (std::size_t n = 0; n < images.size(); ++n) {
    const NetActivations acts = forward(net, images[n]);
    const std::size_t cls = options.class_id ? *options.class_id : argmax(acts.scores());
    char id[24];
    std::snprintf(id, sizeof id, "s%03zu", n);

    Sample s;
    s.id = id;
    s.class_id = static_cast<int>(cls);
    s.image = images[n];
    s.feature_map = acts.last_feature_map();
    s.grad1 = backward(net, acts, cls, GradTarget::last_feature_map, 1);
    if (options.higher_order) {
      s.grad2 = backward(net, acts, cls, GradTarget::last_feature_map, 2);
      s.grad3 = backward(net, acts, cls, GradTarget::last_feature_map, 3);
    }
    s.scores = acts.scores();
    s.fc_weights = fc;
    samples.push_back(std::move(s));
  }
  return samples;
}

TensorManifest export_micro_net_samples(const Network& net, std::span<const Tensor> images,
                                        const std::filesystem::path& out_dir,
                                        const ExportOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  TensorManifest manifest;
  manifest.base_dir = out_dir;
  const auto samples = micro_net_samples(net, images, options);
  for (const Sample& s : samples) {
    auto put = [&](Role role, const Tensor& t) {
      const std::string file = s.id + "_" + std::string(role_name(role)) + ".npy";
      write_tensor(t, out_dir / file);
      ManifestEntry e{role, file, std::nullopt, s.id};
      if (role == Role::image) e.class_id = s.class_id;
      manifest.entries.push_back(std::move(e));
    };
    put(Role::image, s.image);
    put(Role::feature_map, s.feature_map);
    put(Role::grad1, s.grad1);
    if (s.grad2) put(Role::grad2, *s.grad2);
    if (s.grad3) put(Role::grad3, *s.grad3);
    put(Role::scores, *s.scores);
  }
  if (const auto fc = linear_head_weights(net)) {
    write_tensor(*fc, out_dir / "fc_weights.npy");
    manifest.entries.push_back(ManifestEntry{Role::fc_weights, "fc_weights.npy", std::nullopt, std::nullopt});
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace extcam
