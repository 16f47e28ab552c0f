#include "doctest.h"

#include "extcam/erf.hpp"
#include "extcam/error.hpp"
#include "extcam/upsample.hpp"
#include "oracles.hpp"

using namespace extcam;

namespace {

struct Truth {
  double amplitude, mu_x, mu_y, sigma_x, sigma_y, offset;
};

Tensor synthetic(const Truth& t, std::size_t w, std::size_t h) {
  Tensor m({w, h});
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) {
      const double dx = double(x) - t.mu_x, dy = double(y) - t.mu_y;
      m.at(x, y) = t.offset + t.amplitude * std::exp(-dx * dx / (2 * t.sigma_x * t.sigma_x) -
                                                     dy * dy / (2 * t.sigma_y * t.sigma_y));
    }
  }
  return m;
}

std::vector<Tensor> random_images(std::size_t n, const Shape& shape, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_tensor(shape, rng));
  return out;
}

}  // namespace

TEST_CASE("r_squared examples") {
  const std::vector<double> o{0, 1, 2};
  CHECK(r_squared(o, o) == 1.0);
  CHECK(r_squared(o, std::vector<double>{1, 1, 1}) == 0.0);
  CHECK(r_squared(o, std::vector<double>{0, 1, 1}) == 0.5);
  CHECK_THROWS_AS(r_squared(std::vector<double>{2, 2}, std::vector<double>{1, 2}), NumericError);
  CHECK_THROWS_AS(r_squared(o, std::vector<double>{1, 2}), ShapeError);
}

TEST_CASE("ERF of a 1x1 identity conv is a spike at the centre") {
  Network net;
  net.layers.push_back(conv_layer(Tensor::filled({1, 1, 1, 1}, 1.0)));
  const auto images = random_images(3, {1, 9, 8}, 1);
  const ErfMap erf = estimate_erf(net, images);
  CHECK(erf.n_images == 3);
  Tensor want({9, 8});
  want.at(4, 4) = 1.0;
  CHECK(erf.values == want);
}

TEST_CASE("ERF of stacked box convs equals the box self-convolution") {
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto images = random_images(2, {1, 21, 21}, n);
    const ErfMap erf = estimate_erf(oracle::box_stack(n), images);
    CHECK(max_value(erf.values) == 1.0);
    CHECK(oracle::normwise_rel_diff(erf.values, oracle::box_power(n, 21, 10, 10)) <= 1e-12);
  }
}

TEST_CASE("ERF with an explicit cell, signed mode and errors") {
  const auto images = random_images(2, {1, 11, 11}, 4);
  ErfOptions opt;
  opt.cell = std::pair<std::size_t, std::size_t>{2, 7};
  const ErfMap erf = estimate_erf(oracle::box_stack(1), images, opt);
  CHECK(erf.values.at(2, 7) == 1.0);
  CHECK(erf.values.at(1, 6) == 1.0);
  CHECK(erf.values.at(4, 7) == 0.0);

  Network neg;
  neg.layers.push_back(conv_layer(Tensor::filled({1, 1, 1, 1}, -2.0)));
  ErfOptions s;
  s.signed_gradient = true;
  CHECK(estimate_erf(neg, images, s).values.at(5, 5) == -1.0);
  CHECK(estimate_erf(neg, images).values.at(5, 5) == 1.0);

  CHECK_THROWS_AS(estimate_erf(oracle::box_stack(1), std::vector<Tensor>{}), ArgumentError);
  std::vector<Tensor> mixed{images[0], Tensor({1, 10, 11})};
  CHECK_THROWS_AS(estimate_erf(oracle::box_stack(1), mixed), ShapeError);
}

TEST_CASE("ERF is mirror symmetric for symmetric kernels") {
  Xorshift64Star rng(9);
  std::vector<Tensor> images, flipped;
  for (int i = 0; i < 3; ++i) {
    const Tensor img = oracle::random_tensor({1, 15, 15}, rng);
    Tensor f = img;
    for (std::size_t x = 0; x < 15; ++x) {
      for (std::size_t y = 0; y < 15; ++y) f.at(0, x, y) = img.at(0, x, 14 - y);
    }
    images.push_back(img);
    flipped.push_back(f);
  }
  Network net = oracle::box_stack(3);
  net.layers.insert(net.layers.begin() + 1, relu_layer());
  const Tensor a = estimate_erf(net, images).values;
  const Tensor b = estimate_erf(net, flipped).values;
  for (std::size_t x = 0; x < 15; ++x) {
    for (std::size_t y = 0; y < 15; ++y) CHECK(std::abs(a.at(x, y) - b.at(x, 14 - y)) <= 1e-12);
  }
}

TEST_CASE("noiseless Gaussian is recovered exactly") {
  const Truth t{1.0, 112, 112, 31.7797, 33.3606, 0.0};
  const ErfFit fit = fit_gaussian2d(synthetic(t, 224, 224));
  CHECK(std::abs(fit.amplitude - t.amplitude) <= 1e-6);
  CHECK(std::abs(fit.mu_x - t.mu_x) <= 1e-6);
  CHECK(std::abs(fit.mu_y - t.mu_y) <= 1e-6);
  CHECK(std::abs(fit.sigma_x - t.sigma_x) <= 1e-6);
  CHECK(std::abs(fit.sigma_y - t.sigma_y) <= 1e-6);
  CHECK(std::abs(fit.offset - t.offset) <= 1e-6);
  CHECK(fit.r_squared >= 1 - 1e-12);
  CHECK(fit.n_pixels_used == 224 * 224);
}

TEST_CASE("off-centre elliptical Gaussians with offsets") {
  Xorshift64Star rng(10);
  for (int trial = 0; trial < 8; ++trial) {
    const Truth t{rng.uniform(0.5, 3.0), rng.uniform(10, 30), rng.uniform(10, 30),
                  rng.uniform(2.0, 8.0),  rng.uniform(2.0, 8.0), rng.uniform(-0.5, 0.5)};
    const ErfFit fit = fit_gaussian2d(synthetic(t, 40, 40));
    CHECK(std::abs(fit.sigma_x - t.sigma_x) <= 1e-6);
    CHECK(std::abs(fit.sigma_y - t.sigma_y) <= 1e-6);
    CHECK(std::abs(fit.mu_x - t.mu_x) <= 1e-6);
    CHECK(std::abs(fit.offset - t.offset) <= 1e-6);
  }
}

TEST_CASE("accepted LM costs never increase") {
  Xorshift64Star rng(11);
  Tensor m = synthetic({1.0, 20, 18, 5, 7, 0.1}, 40, 40);
  for (double& v : m.values()) v += rng.uniform(-0.05, 0.05);
  const ErfFit fit = fit_gaussian2d(m);
  REQUIRE(fit.accepted_costs.size() >= 2);
  for (std::size_t i = 1; i < fit.accepted_costs.size(); ++i) {
    CHECK(fit.accepted_costs[i] <= fit.accepted_costs[i - 1]);
  }
}

TEST_CASE("fit is invariant to positive rescaling") {
  Xorshift64Star rng(12);
  Tensor m = synthetic({1.0, 15, 16, 4, 6, 0.05}, 32, 32);
  for (double& v : m.values()) v += rng.uniform(-0.02, 0.02);
  const ErfFit base = fit_gaussian2d(m);
  for (double c : {0.1, 7.0}) {
    const ErfFit f = fit_gaussian2d(scaled(m, c));
    CHECK(std::abs(f.sigma_x - base.sigma_x) <= 1e-9 * base.sigma_x);
    CHECK(std::abs(f.sigma_y - base.sigma_y) <= 1e-9 * base.sigma_y);
    CHECK(std::abs(f.mu_x - base.mu_x) <= 1e-9 * base.mu_x);
    CHECK(std::abs(f.mu_y - base.mu_y) <= 1e-9 * base.mu_y);
    CHECK(std::abs(f.r_squared - base.r_squared) <= 1e-9);
    CHECK(f.amplitude == doctest::Approx(c * base.amplitude).epsilon(1e-8));
  }
}

TEST_CASE("ignore_negative drops negative pixels") {
  Tensor m = synthetic({1.0, 10, 10, 3, 3, 0.0}, 21, 21);
  m.at(0, 0) = -0.7;
  m.at(20, 3) = -0.2;
  FitOptions opt;
  opt.ignore_negative = true;
  const ErfFit fit = fit_gaussian2d(m, opt);
  CHECK(fit.n_pixels_used == 21 * 21 - 2);
  CHECK(std::abs(fit.sigma_x - 3.0) <= 1e-6);
  CHECK(fit.r_squared >= 1 - 1e-12);
  CHECK(fit_gaussian2d(m).n_pixels_used == 21 * 21);
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_gaussian2d(Tensor::filled({10, 10}, 0.3)), NumericError);
  CHECK_THROWS_AS(fit_gaussian2d(Tensor({2, 2}, {1, 2, 3, 4})), ArgumentError);
  FitOptions opt;
  opt.ignore_negative = true;
  CHECK_THROWS_AS(fit_gaussian2d(Tensor({3, 3}, {-1, -1, -1, -1, 1, -1, -1, 2, -1}), opt), ArgumentError);
  FitOptions tight;
  tight.max_iterations = 1;
  Xorshift64Star rng(13);
  Tensor noisy = synthetic({1.0, 10, 12, 3, 5, 0.0}, 24, 24);
  for (double& v : noisy.values()) v += rng.uniform(-0.1, 0.1);
  CHECK_THROWS_AS(fit_gaussian2d(noisy, tight), NumericError);
}

TEST_CASE("fit JSON round trip") {
  const ErfFit fit = fit_gaussian2d(synthetic({1.0, 8, 9, 2, 3, 0.0}, 18, 18));
  const std::string text = erf_fit_to_json(fit);
  CHECK(text.find("\"sigma_x\"") != std::string::npos);
  CHECK(text.find("\"n_pixels_used\": 324") != std::string::npos);
  const ErfFit back = erf_fit_from_json(text);
  CHECK(back.sigma_x == fit.sigma_x);
  CHECK(back.sigma_y == fit.sigma_y);
  CHECK(back.mu_x == fit.mu_x);
  CHECK(back.r_squared == fit.r_squared);
  CHECK(back.n_pixels_used == fit.n_pixels_used);
  CHECK_THROWS_AS(erf_fit_from_json("{\"sigma_x\": 1}"), ConfigError);
}

TEST_CASE("fitted sigma drives a matching impulse response") {
  const auto images = random_images(2, {1, 28, 28}, 14);
  const ErfMap erf = estimate_erf(oracle::box_stack(6), images);
  const ErfFit fit = fit_gaussian2d(erf);
  CHECK(fit.r_squared > 0.95);
  CHECK(std::abs(fit.mu_x - 14.0) <= 1e-6);
  CHECK(std::abs(fit.mu_y - 14.0) <= 1e-6);

  Tensor impulse({28, 28});
  impulse.at(14, 14) = fit.amplitude;
  GaussianOptions opt;
  opt.sigma_x = fit.sigma_x;
  opt.sigma_y = fit.sigma_y;
  const Tensor m = gaussian_upsample(SaliencyGrid{impulse, 0, Engine::extended_cam}, 28, 28, opt).values;
  double ss_map = 0.0, ss_fit = 0.0;
  for (std::size_t x = 0; x < 28; ++x) {
    for (std::size_t y = 0; y < 28; ++y) {
      const double e = erf.values.at(x, y);
      ss_map += std::pow(m.at(x, y) + fit.offset - e, 2);
      ss_fit += std::pow(fit(double(x), double(y)) - e, 2);
    }
  }
  CHECK(std::sqrt(ss_map) <= std::sqrt(ss_fit) * (1 + 1e-6) + 1e-9);
}
