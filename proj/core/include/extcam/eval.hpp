#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "extcam/cam.hpp"
#include "extcam/manifest.hpp"
#include "extcam/micro_net.hpp"
#include "extcam/upsample.hpp"

namespace extcam {

struct EvalRecord {
  std::string sample_id;
  int class_id = -1;
  double y_original = 0.0;
  double y_masked = 0.0;
};

enum class MaskingMode { soft, relative };

struct Masking {
  MaskingMode mode = MaskingMode::soft;
  double keep_fraction = 0.5;  // relative only
};

/// "soft" or "relative(<fraction>)".
std::string masking_label(const Masking& m);

struct EvalReport {
  Engine engine = Engine::extended_cam;
  Upsampler upsampler = Upsampler::gaussian;
  Masking masking;
  double average_drop_pct = 0.0;
  double pct_increase = 0.0;
  std::size_t n_samples = 0;
  std::vector<EvalRecord> records;
};

/// E_cxy = fill_c + (I_cxy - fill_c) * normalize(map)_xy. With no fill
/// (the default, meaning 0) this is I * normalize(map).
Tensor soft_mask(const Tensor& image, const SaliencyMap& map, std::span<const double> fill = {});

/// Keeps the ceil(keep_fraction * w * h) pixels with the largest map values
/// (ties go to the lower scan index) and sets every other pixel to fill.
Tensor relative_mask(const Tensor& image, const SaliencyMap& map, double keep_fraction,
                     std::span<const double> fill = {});

/// Pixel indices x * h + y kept by relative_mask, ascending.
std::vector<std::size_t> relative_keep_set(const Tensor& map, double keep_fraction);

/// (100 / N) sum max(0, Y - O) / Y.
double average_drop_pct(std::span<const EvalRecord> records);
/// 100 * |{O > Y}| / N.
double pct_increase(std::span<const EvalRecord> records);

enum class SigmaSource { erf_fit, explicit_value };

/// EvalConfig JSON:
/// {"engines":[...], "upsamplers":[...],
///  "sigma":{"source":"explicit","sigma_x":20,"sigma_y":20} | {"source":"erf_fit","fit_path":"fit.json"},
///  "masking":{"mode":"soft"|"relative","keep_fraction":0.5},
///  "center_offset":0, "fill":[...]}
struct EvalConfig {
  std::vector<Engine> engines;
  std::vector<Upsampler> upsamplers;
  SigmaSource sigma_source = SigmaSource::explicit_value;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  Masking masking;
  double center_offset = 0.0;
  std::vector<double> fill;  // per-channel masked-fill value; empty means 0
};

/// Relative paths (fit_path) resolve against `base_dir`.
EvalConfig parse_eval_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
EvalConfig read_eval_config(const std::filesystem::path& path);

/// Computes softmax confidences for the scoring step. `tag` names the
/// image: the sample id for originals, masked_tag(...) for masked images.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double confidence(std::string_view tag, const Tensor& image, int class_id) const = 0;
};

/// In-process scoring with a micro-net.
class NetScorer final : public Scorer {
 public:
  explicit NetScorer(const Network& net) : net_(net) {}
  double confidence(std::string_view tag, const Tensor& image, int class_id) const override;

 private:
  const Network& net_;
};

/// Scores looked up by tag from a confidences file produced externally.
class TableScorer final : public Scorer {
 public:
  explicit TableScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
  double confidence(std::string_view tag, const Tensor& image, int class_id) const override;

 private:
  std::map<std::string, double> table_;
};

/// Reads a CSV with header "sample_id,class_id,confidence".
std::map<std::string, double> read_confidences_csv(const std::filesystem::path& path);

/// "<sample>__<engine>__<upsampler>"
std::string masked_tag(std::string_view sample_id, Engine engine, Upsampler upsampler);

/// Grid computation plus upsampling to the sample's image size.
SaliencyMap saliency_for(const Sample& sample, Engine engine, Upsampler upsampler, const EvalConfig& config);

/// Applies the configured masking to a sample's image.
Tensor masked_image(const Sample& sample, const SaliencyMap& map, const EvalConfig& config);

/// One report per (engine, upsampler), engine-major, records in sample order.
std::vector<EvalReport> run_matrix(std::span<const Sample> samples, const EvalConfig& config,
                                   const Scorer& scorer);
std::vector<EvalReport> run_matrix(const TensorManifest& manifest, const EvalConfig& config,
                                   const Scorer& scorer);

/// Round-trip mode, first half: writes every original and masked image as a
/// tensor file plus `jobs.csv` (sample_id,class_id,path) listing them.
void emit_masked_images(std::span<const Sample> samples, const EvalConfig& config,
                        const std::filesystem::path& out_dir);

/// engine,upsampler,masking_mode,average_drop_pct,pct_increase,n_samples
std::string reports_to_csv(std::span<const EvalReport> reports);
std::string reports_to_json(std::span<const EvalReport> reports);

}  // namespace extcam
