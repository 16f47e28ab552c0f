#include "extcam/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "extcam/error.hpp"
#include "extcam/erf.hpp"
#include "extcam/npy.hpp"
#include "json.hpp"

namespace extcam {

std::string masking_label(const Masking& m) {
  if (m.mode == MaskingMode::soft) return "soft";
  char buf[48];
  std::snprintf(buf, sizeof buf, "relative(%g)", m.keep_fraction);
  return buf;
}

namespace {

void check_image_map(const Tensor& image, const Tensor& map) {
  if (image.rank() != 3) throw ShapeError("image must be C x w x h, got " + shape_string(image.shape()));
  if (map.rank() != 2 || map.dim(0) != image.dim(1) || map.dim(1) != image.dim(2)) {
    throw ShapeError("saliency map " + shape_string(map.shape()) + " does not match image " +
                     shape_string(image.shape()));
  }
}

double fill_for(std::span<const double> fill, std::size_t channel) {
  if (fill.empty()) return 0.0;
  return fill[channel];
}

void check_fill(const Tensor& image, std::span<const double> fill) {
  if (!fill.empty() && fill.size() != image.dim(0)) {
    throw ShapeError("fill has " + std::to_string(fill.size()) + " values for " +
                     std::to_string(image.dim(0)) + " channels");
  }
}

}  // namespace

Tensor soft_mask(const Tensor& image, const SaliencyMap& map, std::span<const double> fill) {
  check_image_map(image, map.values);
  check_fill(image, fill);
  const Tensor m = minmax_normalize(map.values);
  const std::size_t C = image.dim(0), P = m.size();
  Tensor out(image.shape());
  for (std::size_t c = 0; c < C; ++c) {
    const double f = fill_for(fill, c);
    for (std::size_t p = 0; p < P; ++p) {
      out[c * P + p] = f + (image[c * P + p] - f) * m[p];
    }
  }
  return out;
}

std::vector<std::size_t> relative_keep_set(const Tensor& map, double keep_fraction) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
    throw ArgumentError("keep_fraction must be in (0, 1]");
  }
  const std::size_t n = map.size();
  // ceil(f * n), ignoring representation error in the product (0.3 * 10)
  const double prod = keep_fraction * static_cast<double>(n);
  const double nearest = std::round(prod);
  const auto keep = static_cast<std::size_t>(
      std::abs(prod - nearest) <= 1e-9 * std::max(1.0, prod) ? nearest : std::ceil(prod));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto v = map.values();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  order.resize(std::min(keep, n));
  std::sort(order.begin(), order.end());
  return order;
}

Tensor relative_mask(const Tensor& image, const SaliencyMap& map, double keep_fraction,
                     std::span<const double> fill) {
  check_image_map(image, map.values);
  check_fill(image, fill);
  const auto kept = relative_keep_set(map.values, keep_fraction);
  const std::size_t C = image.dim(0), P = map.values.size();
  Tensor out(image.shape());
  for (std::size_t c = 0; c < C; ++c) {
    const double f = fill_for(fill, c);
    for (std::size_t p = 0; p < P; ++p) out[c * P + p] = f;
    for (std::size_t p : kept) out[c * P + p] = image[c * P + p];
  }
  return out;
}

namespace {

void check_records(std::span<const EvalRecord> records) {
  if (records.empty()) throw ArgumentError("no evaluation records");
  for (const EvalRecord& r : records) {
    if (!(r.y_original >= 0.0 && r.y_original <= 1.0) || !(r.y_masked >= 0.0 && r.y_masked <= 1.0)) {
      throw ArgumentError("confidences of sample '" + r.sample_id + "' must lie in [0, 1]");
    }
  }
}

}  // namespace

double average_drop_pct(std::span<const EvalRecord> records) {
  check_records(records);
  double total = 0.0;
  for (const EvalRecord& r : records) {
    if (r.y_original == 0.0) {
      throw ArgumentError("sample '" + r.sample_id + "' has zero original confidence");
    }
    total += std::max(0.0, r.y_original - r.y_masked) / r.y_original;
  }
  return 100.0 * total / static_cast<double>(records.size());
}

double pct_increase(std::span<const EvalRecord> records) {
  check_records(records);
  const auto up = std::count_if(records.begin(), records.end(),
                                [](const EvalRecord& r) { return r.y_masked > r.y_original; });
  return 100.0 * static_cast<double>(up) / static_cast<double>(records.size());
}

EvalConfig parse_eval_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  EvalConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& e : j.at("engines")) cfg.engines.push_back(parse_engine(e.get<std::string>()));
    for (const auto& u : j.at("upsamplers")) cfg.upsamplers.push_back(parse_upsampler(u.get<std::string>()));
    if (cfg.engines.empty() || cfg.upsamplers.empty()) {
      throw ConfigError("config needs at least one engine and one upsampler");
    }

    const bool needs_sigma =
        std::find(cfg.upsamplers.begin(), cfg.upsamplers.end(), Upsampler::gaussian) != cfg.upsamplers.end();
    if (j.contains("sigma")) {
      const auto& s = j["sigma"];
      const std::string source = s.value("source", std::string("explicit"));
      if (source == "explicit") {
        cfg.sigma_source = SigmaSource::explicit_value;
        cfg.sigma_x = s.at("sigma_x").get<double>();
        cfg.sigma_y = s.at("sigma_y").get<double>();
      } else if (source == "erf_fit") {
        cfg.sigma_source = SigmaSource::erf_fit;
        std::filesystem::path fit_path = s.at("fit_path").get<std::string>();
        if (fit_path.is_relative()) fit_path = base_dir / fit_path;
        std::ifstream in(fit_path);
        if (!in) throw IoError("cannot open ERF fit '" + fit_path.string() + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const ErfFit fit = erf_fit_from_json(buf.str());
        cfg.sigma_x = fit.sigma_x;
        cfg.sigma_y = fit.sigma_y;
      } else {
        throw ConfigError("unknown sigma source '" + source + "'");
      }
    } else if (needs_sigma) {
      throw ConfigError("gaussian upsampling requested but config has no 'sigma' block");
    }
    if (needs_sigma && (!(cfg.sigma_x > 0.0) || !(cfg.sigma_y > 0.0))) {
      throw ConfigError("sigma_x and sigma_y must be positive");
    }

    if (j.contains("masking")) {
      const auto& m = j["masking"];
      const std::string mode = m.value("mode", std::string("soft"));
      if (mode == "soft") {
        cfg.masking.mode = MaskingMode::soft;
      } else if (mode == "relative") {
        cfg.masking.mode = MaskingMode::relative;
        cfg.masking.keep_fraction = m.value("keep_fraction", 0.5);
        if (!(cfg.masking.keep_fraction > 0.0) || cfg.masking.keep_fraction > 1.0) {
          throw ConfigError("keep_fraction must be in (0, 1]");
        }
      } else {
        throw ConfigError("unknown masking mode '" + mode + "'");
      }
    }
    cfg.center_offset = j.value("center_offset", 0.0);
    if (j.contains("fill")) cfg.fill = j["fill"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid eval config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid eval config: ") + e.what());
  }
  return cfg;
}

EvalConfig read_eval_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open eval config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_eval_config(buf.str(), path.parent_path());
}

double NetScorer::confidence(std::string_view, const Tensor& image, int class_id) const {
  if (class_id < 0) throw ArgumentError("negative class id");
  return extcam::confidence(net_, image, static_cast<std::size_t>(class_id));
}

double TableScorer::confidence(std::string_view tag, const Tensor&, int) const {
  const auto it = table_.find(std::string(tag));
  if (it == table_.end()) throw ConfigError("no confidence recorded for '" + std::string(tag) + "'");
  return it->second;
}

std::map<std::string, double> read_confidences_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open confidences file '" + path.string() + "'");
  std::map<std::string, double> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("sample_id", 0) == 0) continue;
    std::stringstream ss(line);
    std::string id, cls, conf;
    if (!std::getline(ss, id, ',') || !std::getline(ss, cls, ',') || !std::getline(ss, conf)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected sample_id,class_id,confidence");
    }
    try {
      table[id] = std::stod(conf);
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad confidence '" + conf + "'");
    }
  }
  return table;
}

std::string masked_tag(std::string_view sample_id, Engine engine, Upsampler upsampler) {
  return std::string(sample_id) + "__" + std::string(engine_name(engine)) + "__" +
         std::string(upsampler_name(upsampler));
}

SaliencyMap saliency_for(const Sample& sample, Engine engine, Upsampler upsampler, const EvalConfig& config) {
  CamInputs in;
  in.feature_map = &sample.feature_map;
  in.grad1 = &sample.grad1;
  in.grad2 = sample.grad2 ? &*sample.grad2 : nullptr;
  in.grad3 = sample.grad3 ? &*sample.grad3 : nullptr;
  in.fc_weights = sample.fc_weights ? &*sample.fc_weights : nullptr;
  in.class_id = sample.class_id;
  const SaliencyGrid grid = compute_grid(engine, in);
  const std::size_t w = sample.image.dim(1), h = sample.image.dim(2);
  if (upsampler == Upsampler::bilinear) return bilinear_upsample(grid, w, h);
  GaussianOptions opt;
  opt.sigma_x = config.sigma_x;
  opt.sigma_y = config.sigma_y;
  opt.center_offset = config.center_offset;
  return gaussian_upsample(grid, w, h, opt);
}

Tensor masked_image(const Sample& sample, const SaliencyMap& map, const EvalConfig& config) {
  if (config.masking.mode == MaskingMode::soft) return soft_mask(sample.image, map, config.fill);
  return relative_mask(sample.image, map, config.masking.keep_fraction, config.fill);
}

namespace {

void validate_samples(std::span<const Sample> samples, const EvalConfig& config) {
  if (samples.empty()) throw ConfigError("no samples to evaluate");
  for (const Sample& s : samples) {
    for (Engine e : config.engines) {
      if (e == Engine::original_cam) {
        constexpr Role r[] = {Role::fc_weights};
        require_roles(s, r);
      } else if (e == Engine::grad_cam_pp) {
        constexpr Role r[] = {Role::grad2, Role::grad3};
        require_roles(s, r);
      }
    }
    if (s.image.shape() != samples.front().image.shape() ||
        s.feature_map.shape() != samples.front().feature_map.shape()) {
      throw ShapeError("sample '" + s.id + "' has shapes inconsistent with sample '" + samples.front().id + "'");
    }
  }
}

}  // namespace

std::vector<EvalReport> run_matrix(std::span<const Sample> samples, const EvalConfig& config,
                                   const Scorer& scorer) {
  validate_samples(samples, config);
  std::vector<double> original(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    original[n] = scorer.confidence(samples[n].id, samples[n].image, samples[n].class_id);
  }

  std::vector<EvalReport> reports;
  for (Engine engine : config.engines) {
    for (Upsampler up : config.upsamplers) {
      EvalReport rep;
      rep.engine = engine;
      rep.upsampler = up;
      rep.masking = config.masking;
      for (std::size_t n = 0; n < samples.size(); ++n) {
        const Sample& s = samples[n];
        const Tensor masked = masked_image(s, saliency_for(s, engine, up, config), config);
        const double y = scorer.confidence(masked_tag(s.id, engine, up), masked, s.class_id);
        rep.records.push_back(EvalRecord{s.id, s.class_id, original[n], y});
      }
      rep.n_samples = rep.records.size();
      rep.average_drop_pct = average_drop_pct(rep.records);
      rep.pct_increase = pct_increase(rep.records);
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

std::vector<EvalReport> run_matrix(const TensorManifest& manifest, const EvalConfig& config,
                                   const Scorer& scorer) {
  const auto samples = load_samples(manifest);
  return run_matrix(samples, config, scorer);
}

void emit_masked_images(std::span<const Sample> samples, const EvalConfig& config,
                        const std::filesystem::path& out_dir) {
  validate_samples(samples, config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  std::ofstream jobs(out_dir / "jobs.csv");
  if (!jobs) throw IoError("cannot write '" + (out_dir / "jobs.csv").string() + "'");
  jobs << "sample_id,class_id,path\n";
  auto emit = [&](const std::string& tag, int cls, const Tensor& t) {
    write_tensor(t, out_dir / (tag + ".npy"));
    jobs << tag << "," << cls << "," << tag << ".npy\n";
  };
  for (const Sample& s : samples) emit(s.id, s.class_id, s.image);
  for (Engine engine : config.engines) {
    for (Upsampler up : config.upsamplers) {
      for (const Sample& s : samples) {
        emit(masked_tag(s.id, engine, up), s.class_id,
             masked_image(s, saliency_for(s, engine, up, config), config));
      }
    }
  }
  if (!jobs) throw IoError("failed writing jobs.csv");
}

std::string reports_to_csv(std::span<const EvalReport> reports) {
  std::string out = "engine,upsampler,masking_mode,average_drop_pct,pct_increase,n_samples\n";
  char buf[256];
  for (const EvalReport& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6f,%.6f,%zu\n", std::string(engine_name(r.engine)).c_str(),
                  std::string(upsampler_name(r.upsampler)).c_str(), masking_label(r.masking).c_str(),
                  r.average_drop_pct, r.pct_increase, r.n_samples);
    out += buf;
  }
  return out;
}

std::string reports_to_json(std::span<const EvalReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const EvalReport& r : reports) {
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (const EvalRecord& rec : r.records) {
      recs.push_back({{"sample_id", rec.sample_id},
                      {"class_id", rec.class_id},
                      {"y_original", rec.y_original},
                      {"y_masked", rec.y_masked}});
    }
    nlohmann::ordered_json j;
    j["engine"] = engine_name(r.engine);
    j["upsampler"] = upsampler_name(r.upsampler);
    j["masking_mode"] = masking_label(r.masking);
    j["average_drop_pct"] = r.average_drop_pct;
    j["pct_increase"] = r.pct_increase;
    j["n_samples"] = r.n_samples;
    j["records"] = std::move(recs);
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["reports"] = std::move(arr);
  return doc.dump(2) + "\n";
}

}  // namespace extcam
