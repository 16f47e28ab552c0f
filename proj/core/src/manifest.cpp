#include "extcam/manifest.hpp"

#include <algorithm>
#include <fstream>

#include "extcam/error.hpp"
#include "extcam/micro_net.hpp"
#include "extcam/npy.hpp"
#include "json.hpp"

namespace extcam {

namespace {
constexpr Role kRoles[] = {Role::image, Role::feature_map, Role::grad1,  Role::grad2,
                           Role::grad3, Role::fc_weights,  Role::scores};
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::image: return "image";
    case Role::feature_map: return "feature_map";
    case Role::grad1: return "grad1";
    case Role::grad2: return "grad2";
    case Role::grad3: return "grad3";
    case Role::fc_weights: return "fc_weights";
    case Role::scores: return "scores";
  }
  return "?";
}

Role parse_role(std::string_view name) {
  for (Role r : kRoles) {
    if (role_name(r) == name) return r;
  }
  throw ConfigError("unknown manifest role '" + std::string(name) + "'");
}

std::filesystem::path TensorManifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

TensorManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  TensorManifest manifest;
  manifest.base_dir = path.parent_path();
  try {
    nlohmann::json doc;
    in >> doc;
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.role = parse_role(e.at("role").get<std::string>());
      entry.path = e.at("path").get<std::string>();
      if (e.contains("class_id") && !e["class_id"].is_null()) entry.class_id = e["class_id"].get<int>();
      if (e.contains("sample_id") && !e["sample_id"].is_null()) {
        entry.sample_id = e["sample_id"].get<std::string>();
      }
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return manifest;
}

void write_manifest(const TensorManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json j = {{"role", role_name(e.role)}, {"path", e.path.generic_string()}};
    if (e.sample_id) j["sample_id"] = *e.sample_id;
    if (e.class_id) j["class_id"] = *e.class_id;
    entries.push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << nlohmann::json{{"entries", entries}}.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

bool Sample::has(Role role) const {
  switch (role) {
    case Role::image: return !image.empty();
    case Role::feature_map: return !feature_map.empty();
    case Role::grad1: return !grad1.empty();
    case Role::grad2: return grad2.has_value();
    case Role::grad3: return grad3.has_value();
    case Role::fc_weights: return fc_weights.has_value();
    case Role::scores: return scores.has_value();
  }
  return false;
}

void require_roles(const Sample& sample, std::span<const Role> roles) {
  for (Role r : roles) {
    if (!sample.has(r)) {
      throw ConfigError("sample '" + sample.id + "' is missing required role '" +
                        std::string(role_name(r)) + "'");
    }
  }
}

namespace {

void assign(Sample& s, Role role, Tensor t) {
  switch (role) {
    case Role::image: s.image = std::move(t); break;
    case Role::feature_map: s.feature_map = std::move(t); break;
    case Role::grad1: s.grad1 = std::move(t); break;
    case Role::grad2: s.grad2 = std::move(t); break;
    case Role::grad3: s.grad3 = std::move(t); break;
    case Role::fc_weights: s.fc_weights = std::move(t); break;
    case Role::scores: s.scores = std::move(t); break;
  }
}

}  // namespace

std::vector<Sample> load_samples(const TensorManifest& manifest) {
  std::vector<Sample> samples;
  std::vector<const ManifestEntry*> shared;
  auto find = [&](const std::string& id) -> Sample& {
    auto it = std::find_if(samples.begin(), samples.end(), [&](const Sample& s) { return s.id == id; });
    if (it != samples.end()) return *it;
    samples.push_back(Sample{});
    samples.back().id = id;
    return samples.back();
  };

  for (const auto& e : manifest.entries) {
    if (!e.sample_id) {
      shared.push_back(&e);
      continue;
    }
    Sample& s = find(*e.sample_id);
    if (s.has(e.role)) {
      throw ConfigError("sample '" + s.id + "' lists role '" + std::string(role_name(e.role)) + "' twice");
    }
    assign(s, e.role, read_tensor(manifest.resolve(e.path)));
    if (e.class_id && s.class_id < 0) s.class_id = *e.class_id;
  }
  // A manifest without sample ids describes exactly one sample.
  if (samples.empty() && !shared.empty()) find("s000");
  if (samples.empty()) throw ConfigError("manifest contains no samples");

  for (const ManifestEntry* e : shared) {
    const Tensor t = read_tensor(manifest.resolve(e->path));
    for (Sample& s : samples) {
      if (!s.has(e->role)) assign(s, e->role, t);
      if (e->class_id && s.class_id < 0) s.class_id = *e->class_id;
    }
  }

  constexpr Role kRequired[] = {Role::image, Role::feature_map, Role::grad1};
  for (Sample& s : samples) {
    require_roles(s, kRequired);
    if (s.class_id < 0) {
      if (!s.scores) throw ConfigError("sample '" + s.id + "' has neither class_id nor scores");
      s.class_id = static_cast<int>(argmax(*s.scores));
    }
    if (s.image.rank() != 3) {
      throw ShapeError("sample '" + s.id + "': image must be C x w x h, got " + shape_string(s.image.shape()));
    }
    if (s.feature_map.rank() != 3) {
      throw ShapeError("sample '" + s.id + "': feature_map must be K x u x v, got " +
                       shape_string(s.feature_map.shape()));
    }
    for (const Tensor* g : {&s.grad1, s.grad2 ? &*s.grad2 : nullptr, s.grad3 ? &*s.grad3 : nullptr}) {
      if (g && !g->same_shape(s.feature_map)) {
        throw ShapeError("sample '" + s.id + "': gradient shape " + shape_string(g->shape()) +
                         " differs from feature map " + shape_string(s.feature_map.shape()));
      }
    }
  }
  return samples;
}

}  // namespace extcam
