#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "extcam/error.hpp"
#include "extcam/erf.hpp"
#include "extcam/eval.hpp"
#include "extcam/manifest.hpp"
#include "extcam/micro_net.hpp"
#include "extcam/net_export.hpp"
#include "extcam/npy.hpp"
#include "extcam/render.hpp"
#include "extcam/upsample.hpp"

namespace extcam::cli {

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage error (unknown subcommand, missing or invalid flag)\n"
    "  3  I/O error (missing input file, unwritable output)\n"
    "  4  invalid config or manifest\n"
    "  5  malformed tensor file\n"
    "  6  shape mismatch\n"
    "  7  numerical failure (fit did not converge, degenerate map)\n"
    "  8  invalid argument value\n";

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kExitIo;
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::format: return kExitFormat;
    case ErrorKind::shape: return kExitShape;
    case ErrorKind::numeric: return kExitNumeric;
    case ErrorKind::argument: return kExitArgument;
  }
  return kExitArgument;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct SigmaArgs {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  std::string fit_path;
  double center_offset = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--sigma-x", sigma_x, "Gaussian sigma along x (pixels)");
    cmd->add_option("--sigma-y", sigma_y, "Gaussian sigma along y (pixels)");
    cmd->add_option("--fit", fit_path, "Take sigmas from an ERF fit JSON");
    cmd->add_option("--center-offset", center_offset, "Cell anchor offset in cells (0 = literal corners)");
  }

  GaussianOptions resolve() const {
    GaussianOptions opt;
    opt.center_offset = center_offset;
    if (!fit_path.empty()) {
      const ErfFit fit = erf_fit_from_json(read_text(fit_path));
      opt.sigma_x = fit.sigma_x;
      opt.sigma_y = fit.sigma_y;
    } else {
      opt.sigma_x = sigma_x;
      opt.sigma_y = sigma_y;
    }
    return opt;
  }
};

SaliencyMap upsample_grid(const SaliencyGrid& grid, Upsampler method, std::size_t w, std::size_t h,
                          const SigmaArgs& sigma) {
  if (method == Upsampler::bilinear) return bilinear_upsample(grid, w, h);
  return gaussian_upsample(grid, w, h, sigma.resolve());
}

const Sample& pick_sample(const std::vector<Sample>& samples, const std::string& id) {
  if (id.empty()) return samples.front();
  for (const Sample& s : samples) {
    if (s.id == id) return s;
  }
  throw ConfigError("manifest has no sample '" + id + "'");
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"CAM-family saliency maps with Gaussian upsampling, ERF fitting and masking metrics", "cam"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  // init
  std::string arch = "micro-vgg";
  std::uint64_t seed = 0;
  std::string init_out;
  auto* init = app.add_subcommand("init", "Write a seeded built-in micro-net (descriptor + weight tensors)");
  init->add_option("--arch", arch, "Architecture id (micro-vgg, micro-vgg-mlp)");
  init->add_option("--seed", seed, "PRNG seed")->required();
  init->add_option("--out", init_out, "Descriptor JSON path")->required();

  // export
  std::string net_path;
  std::vector<std::string> image_paths;
  std::string out_dir;
  int export_class = -1;
  bool no_higher = false;
  auto* exp = app.add_subcommand("export", "Run a micro-net on images and write tensors plus manifest.json");
  exp->add_option("--net", net_path, "Network descriptor")->required();
  exp->add_option("--images", image_paths, "Image tensors (C x w x h)")->required();
  exp->add_option("--out-dir", out_dir, "Output directory")->required();
  exp->add_option("--class", export_class, "Class to explain (default: predicted)");
  exp->add_flag("--no-higher-order", no_higher, "Skip grad2/grad3");

  // compute
  std::string engine_arg = "extended";
  std::string manifest_path;
  std::string sample_id;
  std::string out_path;
  auto* compute = app.add_subcommand("compute", "Compute a grid-level saliency map");
  compute->add_option("--engine", engine_arg, "original | grad | gradpp | extended");
  compute->add_option("--manifest", manifest_path, "Tensor manifest")->required();
  compute->add_option("--sample", sample_id, "Sample id (default: first)");
  compute->add_option("--out", out_path, "Output grid tensor (u x v)")->required();

  // upsample
  std::string grid_path;
  std::string method_arg = "gaussian";
  std::size_t width = 0, height = 0;
  SigmaArgs sigma;
  auto* up = app.add_subcommand("upsample", "Upsample a grid to pixel level");
  up->add_option("--grid", grid_path, "Grid tensor (u x v)")->required();
  up->add_option("--method", method_arg, "gaussian | bilinear");
  up->add_option("--width", width, "Target w (first axis)")->required();
  up->add_option("--height", height, "Target h (second axis)")->required();
  sigma.add_to(up);
  up->add_option("--out", out_path, "Output map tensor (w x h)")->required();

  // erf
  std::vector<std::string> gradient_paths;
  std::vector<std::size_t> cell;
  bool signed_grad = false;
  auto* erf = app.add_subcommand("erf", "Estimate the effective receptive field");
  auto* erf_net = erf->add_option("--net", net_path, "Network descriptor");
  erf->add_option("--images", image_paths, "Image tensors")->needs(erf_net);
  erf->add_option("--gradients", gradient_paths, "Precomputed input gradients");
  erf->add_option("--cell", cell, "Feature-map cell i j (default: centre)")->expected(2);
  erf->add_flag("--signed", signed_grad, "Keep gradient signs");
  erf->add_option("--out", out_path, "Output ERF tensor (w x h)")->required();

  // fit
  std::string erf_path;
  bool ignore_negative = false;
  auto* fit = app.add_subcommand("fit", "Fit a 2D Gaussian to an ERF map");
  fit->add_option("--erf", erf_path, "ERF tensor (w x h)")->required();
  fit->add_flag("--ignore-negative", ignore_negative, "Exclude negative pixels from the fit");
  fit->add_option("--out", out_path, "Output fit JSON")->required();

  // mask
  std::string image_path, map_path, mode_arg = "soft";
  double keep = 0.5;
  auto* mask = app.add_subcommand("mask", "Mask an image with a pixel-level saliency map");
  mask->add_option("--image", image_path, "Image tensor (C x w x h)")->required();
  mask->add_option("--map", map_path, "Map tensor (w x h)")->required();
  mask->add_option("--mode", mode_arg, "soft | relative");
  mask->add_option("--keep", keep, "Kept fraction for relative masking");
  mask->add_option("--out", out_path, "Output masked image")->required();

  // eval
  std::string config_path, confidences_path, emit_dir, json_out;
  auto* ev = app.add_subcommand("eval", "Run the engine x upsampler masking evaluation");
  ev->add_option("--config", config_path, "EvalConfig JSON")->required();
  ev->add_option("--manifest", manifest_path, "Tensor manifest")->required();
  auto* ev_net = ev->add_option("--net", net_path, "Score in-process with this micro-net");
  auto* ev_conf = ev->add_option("--confidences", confidences_path, "Scores CSV from an external model")
                      ;
  auto* ev_emit = ev->add_option("--emit-masked", emit_dir, "Write masked images for external scoring");
  ev_net->excludes(ev_conf)->excludes(ev_emit);
  ev_conf->excludes(ev_emit);
  ev->add_option("--out", out_path, "Report CSV");
  ev->add_option("--json", json_out, "Report JSON");

  // render
  std::string colormap_arg = "jet_like";
  double alpha = 0.5;
  auto* render = app.add_subcommand("render", "Render a saliency map (optionally over an image) to PNG");
  render->add_option("--map", map_path, "Map tensor (w x h)")->required();
  render->add_option("--image", image_path, "Overlay image (1 or 3 channels, [0,1])");
  render->add_option("--colormap", colormap_arg, "jet_like | grayscale");
  render->add_option("--alpha", alpha, "Heatmap opacity in [0,1]");
  render->add_option("--out", out_path, "Output PNG")->required();

  // pipeline
  std::string upsampler_arg = "gaussian";
  int pipe_class = -1;
  SigmaArgs pipe_sigma;
  auto* pipe = app.add_subcommand("pipeline", "Micro-net image -> grid -> map -> PNG in one step");
  pipe->add_option("--net", net_path, "Network descriptor")->required();
  pipe->add_option("--image", image_path, "Image tensor")->required();
  pipe->add_option("--class", pipe_class, "Class to explain (default: predicted)");
  pipe->add_option("--engine", engine_arg, "original | grad | gradpp | extended");
  pipe->add_option("--upsampler", upsampler_arg, "gaussian | bilinear");
  pipe_sigma.add_to(pipe);
  pipe->add_option("--colormap", colormap_arg, "jet_like | grayscale");
  pipe->add_option("--alpha", alpha, "Heatmap opacity in [0,1]");
  pipe->add_option("--out-dir", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*init) {
      save_network(seeded_init(arch, seed), init_out);
    } else if (*exp) {
      const Network net = load_network(net_path);
      std::vector<Tensor> images;
      for (const auto& p : image_paths) images.push_back(read_tensor(p));
      ExportOptions opt;
      if (export_class >= 0) opt.class_id = static_cast<std::size_t>(export_class);
      opt.higher_order = !no_higher;
      export_micro_net_samples(net, images, out_dir, opt);
    } else if (*compute) {
      const auto samples = load_samples(read_manifest(manifest_path));
      const Sample& s = pick_sample(samples, sample_id);
      CamInputs in{&s.feature_map, &s.grad1, s.grad2 ? &*s.grad2 : nullptr, s.grad3 ? &*s.grad3 : nullptr,
                   s.fc_weights ? &*s.fc_weights : nullptr, s.class_id};
      write_tensor(compute_grid(parse_engine(engine_arg), in).values, out_path);
    } else if (*up) {
      SaliencyGrid grid{read_tensor(grid_path), -1, Engine::extended_cam};
      write_tensor(upsample_grid(grid, parse_upsampler(method_arg), width, height, sigma).values, out_path);
    } else if (*erf) {
      ErfMap map;
      if (!gradient_paths.empty()) {
        std::vector<Tensor> grads;
        for (const auto& p : gradient_paths) grads.push_back(read_tensor(p));
        map = aggregate_erf(grads, signed_grad);
      } else {
        if (net_path.empty() || image_paths.empty()) {
          throw ArgumentError("erf needs either --gradients or --net with --images");
        }
        const Network net = load_network(net_path);
        std::vector<Tensor> images;
        for (const auto& p : image_paths) images.push_back(read_tensor(p));
        ErfOptions opt;
        opt.signed_gradient = signed_grad;
        if (cell.size() == 2) opt.cell = std::pair{cell[0], cell[1]};
        map = estimate_erf(net, images, opt);
      }
      write_tensor(map.values, out_path);
    } else if (*fit) {
      FitOptions opt;
      opt.ignore_negative = ignore_negative;
      write_text(out_path, erf_fit_to_json(fit_gaussian2d(read_tensor(erf_path), opt)));
    } else if (*mask) {
      const Tensor image = read_tensor(image_path);
      const SaliencyMap map{read_tensor(map_path)};
      Tensor out;
      if (mode_arg == "soft") {
        out = soft_mask(image, map);
      } else if (mode_arg == "relative") {
        out = relative_mask(image, map, keep);
      } else {
        throw ArgumentError("unknown masking mode '" + mode_arg + "'");
      }
      write_tensor(out, out_path);
    } else if (*ev) {
      const EvalConfig cfg = read_eval_config(config_path);
      const auto samples = load_samples(read_manifest(manifest_path));
      if (!emit_dir.empty()) {
        emit_masked_images(samples, cfg, emit_dir);
        return kExitOk;
      }
      std::vector<EvalReport> reports;
      if (!net_path.empty()) {
        const Network net = load_network(net_path);
        reports = run_matrix(samples, cfg, NetScorer(net));
      } else if (!confidences_path.empty()) {
        reports = run_matrix(samples, cfg, TableScorer(read_confidences_csv(confidences_path)));
      } else {
        throw ArgumentError("eval needs one of --net, --confidences or --emit-masked");
      }
      if (out_path.empty() && json_out.empty()) {
        std::cout << reports_to_csv(reports);
      }
      if (!out_path.empty()) write_text(out_path, reports_to_csv(reports));
      if (!json_out.empty()) write_text(json_out, reports_to_json(reports));
    } else if (*render) {
      RenderSpec spec{parse_colormap(colormap_arg), alpha, out_path};
      const SaliencyMap map{read_tensor(map_path)};
      if (image_path.empty()) {
        render_heatmap(map, nullptr, spec);
      } else {
        const Tensor image = read_tensor(image_path);
        render_heatmap(map, &image, spec);
      }
    } else if (*pipe) {
      const Network net = load_network(net_path);
      const Tensor image = read_tensor(image_path);
      ExportOptions opt;
      if (pipe_class >= 0) opt.class_id = static_cast<std::size_t>(pipe_class);
      const Engine engine = parse_engine(engine_arg);
      opt.higher_order = engine == Engine::grad_cam_pp;
      const auto samples = micro_net_samples(net, std::span(&image, 1), opt);
      const Sample& s = samples.front();
      CamInputs in{&s.feature_map, &s.grad1, s.grad2 ? &*s.grad2 : nullptr, s.grad3 ? &*s.grad3 : nullptr,
                   s.fc_weights ? &*s.fc_weights : nullptr, s.class_id};
      const SaliencyGrid grid = compute_grid(engine, in);
      const SaliencyMap map =
          upsample_grid(grid, parse_upsampler(upsampler_arg), image.dim(1), image.dim(2), pipe_sigma);
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
      const std::filesystem::path dir(out_dir);
      write_tensor(grid.values, dir / "grid.npy");
      write_tensor(map.values, dir / "map.npy");
      render_heatmap(map, &image, RenderSpec{parse_colormap(colormap_arg), alpha, dir / "heatmap.png"});
    }
  } catch (const Error& e) {
    std::cerr << "cam: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "cam: " << e.what() << "\n";
    return kExitArgument;
  }
  return kExitOk;
}

}  // namespace extcam::cli
