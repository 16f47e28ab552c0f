#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extcam/manifest.hpp"
#include "extcam/micro_net.hpp"

namespace extcam {

struct ExportOptions {
  /// Class to explain; the predicted class when unset.
  std::optional<std::size_t> class_id;
  /// Also export grad2/grad3 (exactly zero for the built-in layer set).
  bool higher_order = true;
};

/// Runs the micro-net on each image and writes image, feature_map, grad1,
/// grad2, grad3 and scores tensors for it into `out_dir`, plus a shared
/// fc_weights entry when the head is exactly gap -> fc. Sample ids are
/// "s000", "s001", ... Writes `out_dir/manifest.json` and returns it.
TensorManifest export_micro_net_samples(const Network& net, std::span<const Tensor> images,
                                        const std::filesystem::path& out_dir,
                                        const ExportOptions& options = {});

/// In-memory equivalent of export + load_samples, without touching disk.
std::vector<Sample> micro_net_samples(const Network& net, std::span<const Tensor> images,
                                      const ExportOptions& options = {});

/// The fc kernel of a gap -> fc head, if the network has one.
std::optional<Tensor> linear_head_weights(const Network& net);

}  // namespace extcam
