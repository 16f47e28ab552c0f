#include "extcam/erf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "extcam/error.hpp"
#include "json.hpp"

namespace extcam {

ErfMap aggregate_erf(std::span<const Tensor> gradients, bool signed_gradient) {
  if (gradients.empty()) throw ArgumentError("ERF needs at least one image");
  const Shape& shape = gradients.front().shape();
  if (shape.size() != 3) throw ShapeError("input gradients must be C x w x h, got " + shape_string(shape));
  const std::size_t C = shape[0], W = shape[1], H = shape[2];

  Tensor acc({W, H});
  for (const Tensor& g : gradients) {
    if (g.shape() != shape) {
      throw ShapeError("input gradient " + shape_string(g.shape()) + " differs from " + shape_string(shape));
    }
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t p = 0; p < W * H; ++p) {
        const double v = g[c * W * H + p];
        acc[p] += signed_gradient ? v : std::abs(v);
      }
    }
  }
  const double n = static_cast<double>(gradients.size());
  double peak = 0.0;
  for (double& v : acc.values()) {
    v /= n;
    peak = std::max(peak, signed_gradient ? std::abs(v) : v);
  }
  if (peak == 0.0) throw NumericError("ERF is identically zero");
  for (double& v : acc.values()) v /= peak;
  return ErfMap{std::move(acc), gradients.size()};
}

ErfMap estimate_erf(const Network& net, std::span<const Tensor> images, const ErfOptions& options) {
  if (images.empty()) throw ArgumentError("ERF needs at least one image");
  std::vector<Tensor> gradients;
  gradients.reserve(images.size());
  for (const Tensor& image : images) {
    if (image.shape() != images.front().shape()) {
      throw ShapeError("image " + shape_string(image.shape()) + " differs from " +
                       shape_string(images.front().shape()));
    }
    const NetActivations acts = forward(net, image);
    const Tensor& A = acts.last_feature_map();
    if (A.rank() != 3) throw ShapeError("last feature map must be K x u x v");
    const std::size_t K = A.dim(0), U = A.dim(1), V = A.dim(2);
    const auto [ci, cj] = options.cell.value_or(std::pair{U / 2, V / 2});
    if (ci >= U || cj >= V) throw ArgumentError("ERF cell outside the feature map");
    Tensor seed(A.shape());
    for (std::size_t k = 0; k < K; ++k) seed.at(k, ci, cj) = 1.0;
    gradients.push_back(input_gradient(net, acts, seed));
  }
  return aggregate_erf(gradients, options.signed_gradient);
}

double ErfFit::operator()(double x, double y) const {
  const double dx = x - mu_x, dy = y - mu_y;
  return offset + amplitude * std::exp(-(dx * dx) / (2 * sigma_x * sigma_x) - (dy * dy) / (2 * sigma_y * sigma_y));
}

double r_squared(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.size() != predicted.size()) throw ShapeError("r_squared inputs differ in length");
  if (observed.size() < 2) throw ArgumentError("r_squared needs at least two values");
  double mean = 0.0;
  for (double o : observed) mean += o;
  mean /= static_cast<double>(observed.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
  }
  const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
  if (*lo == *hi) throw NumericError("r_squared undefined for constant observations");
  return 1.0 - ss_res / ss_tot;
}

double r_squared(const Tensor& observed, const Tensor& predicted) {
  return r_squared(observed.values(), predicted.values());
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Parameter vector: amplitude, mu_x, mu_y, log sigma_x, log sigma_y, offset.
struct Pixel {
  double x, y, value;
};

double cost_of(const std::vector<Pixel>& px, const Vec6& p) {
  const double sx = std::exp(p[3]), sy = std::exp(p[4]);
  double c = 0.0;
  for (const Pixel& q : px) {
    const double dx = q.x - p[1], dy = q.y - p[2];
    const double m = p[5] + p[0] * std::exp(-(dx * dx) / (2 * sx * sx) - (dy * dy) / (2 * sy * sy));
    c += (q.value - m) * (q.value - m);
  }
  return c;
}

void normal_equations(const std::vector<Pixel>& px, const Vec6& p, Mat6& jtj, Vec6& jtr) {
  const double sx = std::exp(p[3]), sy = std::exp(p[4]);
  jtj.setZero();
  jtr.setZero();
  Vec6 j;
  for (const Pixel& q : px) {
    const double dx = q.x - p[1], dy = q.y - p[2];
    const double e = std::exp(-(dx * dx) / (2 * sx * sx) - (dy * dy) / (2 * sy * sy));
    const double ae = p[0] * e;
    j << e, ae * dx / (sx * sx), ae * dy / (sy * sy), ae * dx * dx / (sx * sx), ae * dy * dy / (sy * sy), 1.0;
    const double r = q.value - (p[5] + ae);
    jtj.selfadjointView<Eigen::Lower>().rankUpdate(j);
    jtr += j * r;
  }
  jtj = jtj.selfadjointView<Eigen::Lower>();
}

Vec6 moment_init(const std::vector<Pixel>& px) {
  double lo = px.front().value, hi = px.front().value;
  for (const Pixel& q : px) {
    lo = std::min(lo, q.value);
    hi = std::max(hi, q.value);
  }
  double w = 0.0, mx = 0.0, my = 0.0;
  for (const Pixel& q : px) {
    const double wt = q.value - lo;
    w += wt;
    mx += wt * q.x;
    my += wt * q.y;
  }
  mx /= w;
  my /= w;
  double vx = 0.0, vy = 0.0;
  for (const Pixel& q : px) {
    const double wt = q.value - lo;
    vx += wt * (q.x - mx) * (q.x - mx);
    vy += wt * (q.y - my) * (q.y - my);
  }
  // a single bright pixel has zero spread; start from half a pixel
  const double sx = std::max(std::sqrt(vx / w), 0.5);
  const double sy = std::max(std::sqrt(vy / w), 0.5);
  Vec6 p;
  p << hi - lo, mx, my, std::log(sx), std::log(sy), lo;
  return p;
}

}  // namespace

ErfFit fit_gaussian2d(const Tensor& map, const FitOptions& options) {
  if (map.rank() != 2) throw ShapeError("ERF map must be w x h, got " + shape_string(map.shape()));
  std::vector<Pixel> px;
  px.reserve(map.size());
  for (std::size_t x = 0; x < map.dim(0); ++x) {
    for (std::size_t y = 0; y < map.dim(1); ++y) {
      const double v = map.at(x, y);
      if (options.ignore_negative && v < 0.0) continue;
      px.push_back({static_cast<double>(x), static_cast<double>(y), v});
    }
  }
  if (px.size() < 6) {
    throw ArgumentError("Gaussian fit needs at least 6 usable pixels, got " + std::to_string(px.size()));
  }
  double mean = 0.0;
  for (const Pixel& q : px) mean += q.value;
  mean /= static_cast<double>(px.size());
  double ss_tot = 0.0;
  for (const Pixel& q : px) ss_tot += (q.value - mean) * (q.value - mean);
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end(),
                                            [](const Pixel& a, const Pixel& b) { return a.value < b.value; });
  if (lo->value == hi->value) throw NumericError("cannot fit a constant map");

  Vec6 p = moment_init(px);
  double cost = cost_of(px, p);
  double lambda = options.initial_lambda;
  ErfFit fit;
  fit.accepted_costs.push_back(cost);

  bool converged = false;
  std::size_t iter = 0;
  Mat6 jtj;
  Vec6 jtr;
  bool stale = true;
  while (iter < options.max_iterations) {
    ++iter;
    if (stale) {
      normal_equations(px, p, jtj, jtr);
      stale = false;
    }
    Mat6 damped = jtj;
    for (int k = 0; k < 6; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
    const Vec6 step = damped.ldlt().solve(jtr);
    const Vec6 trial = p + step;
    const double trial_cost = step.allFinite() ? cost_of(px, trial) : HUGE_VAL;

    if (std::isfinite(trial_cost) && trial_cost < cost) {
      const double rel = (cost - trial_cost) / cost;
      p = trial;
      cost = trial_cost;
      fit.accepted_costs.push_back(cost);
      lambda /= 10.0;
      stale = true;
      if (rel < options.relative_tolerance || cost == 0.0) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      // no descent direction left at working precision
      if (lambda > 1e16) {
        converged = true;
        break;
      }
    }
  }
  fit.iterations = iter;
  fit.final_lambda = lambda;
  if (!converged) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "Levenberg-Marquardt did not converge in %zu iterations (lambda %.3g, residual %.6g)",
                  iter, lambda, cost);
    throw NumericError(buf);
  }

  fit.amplitude = p[0];
  fit.mu_x = p[1];
  fit.mu_y = p[2];
  fit.sigma_x = std::exp(p[3]);
  fit.sigma_y = std::exp(p[4]);
  fit.offset = p[5];
  fit.n_pixels_used = px.size();
  fit.r_squared = 1.0 - cost / ss_tot;
  return fit;
}

ErfFit fit_gaussian2d(const ErfMap& map, const FitOptions& options) {
  return fit_gaussian2d(map.values, options);
}

std::string erf_fit_to_json(const ErfFit& fit) {
  nlohmann::ordered_json j;
  j["amplitude"] = fit.amplitude;
  j["mu_x"] = fit.mu_x;
  j["mu_y"] = fit.mu_y;
  j["sigma_x"] = fit.sigma_x;
  j["sigma_y"] = fit.sigma_y;
  j["offset"] = fit.offset;
  j["r_squared"] = fit.r_squared;
  j["n_pixels_used"] = fit.n_pixels_used;
  return j.dump(2) + "\n";
}

ErfFit erf_fit_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ErfFit fit;
    fit.amplitude = j.at("amplitude").get<double>();
    fit.mu_x = j.at("mu_x").get<double>();
    fit.mu_y = j.at("mu_y").get<double>();
    fit.sigma_x = j.at("sigma_x").get<double>();
    fit.sigma_y = j.at("sigma_y").get<double>();
    fit.offset = j.at("offset").get<double>();
    fit.r_squared = j.at("r_squared").get<double>();
    fit.n_pixels_used = j.value("n_pixels_used", std::size_t{0});
    if (!(fit.sigma_x > 0.0) || !(fit.sigma_y > 0.0)) throw ConfigError("ERF fit sigmas must be positive");
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid ERF fit JSON: ") + e.what());
  }
}

}  // namespace extcam
