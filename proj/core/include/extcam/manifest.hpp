#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "extcam/tensor.hpp"

namespace extcam {

enum class Role { image, feature_map, grad1, grad2, grad3, fc_weights, scores };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);

struct ManifestEntry {
  Role role = Role::image;
  std::filesystem::path path;
  std::optional<int> class_id;
  /// Entries without a sample id are shared by every sample (e.g. fc_weights).
  /// If no entry has one, the whole manifest is a single sample "s000".
  std::optional<std::string> sample_id;
};

/// JSON document {"entries":[{"sample_id","role","path","class_id"}, ...]}.
/// Relative paths resolve against `base_dir` (the manifest's directory).
struct TensorManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

TensorManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const TensorManifest& manifest, const std::filesystem::path& path);

/// All tensors belonging to one evaluation sample.
struct Sample {
  std::string id;
  int class_id = -1;
  Tensor image;
  Tensor feature_map;
  Tensor grad1;
  std::optional<Tensor> grad2;
  std::optional<Tensor> grad3;
  std::optional<Tensor> fc_weights;
  std::optional<Tensor> scores;

  bool has(Role role) const;
};

/// Loads every referenced tensor and groups entries by sample id, in first
/// appearance order. The class is the first explicit class_id of the
/// sample, else the argmax of its scores tensor.
///
/// Throws ConfigError for a sample without image, feature_map or grad1,
/// or without a resolvable class; IoError/FormatError from tensor reads;
/// ShapeError when feature map and gradients disagree.
std::vector<Sample> load_samples(const TensorManifest& manifest);

/// Throws ConfigError naming the first missing role.
void require_roles(const Sample& sample, std::span<const Role> roles);

}  // namespace extcam
