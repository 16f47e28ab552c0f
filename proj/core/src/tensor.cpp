#include "extcam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "extcam/error.hpp"

namespace extcam {

std::size_t element_count(const Shape& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + shape_string(shape) + " has a zero dimension");
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(element_count(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " needs " +
                     std::to_string(element_count(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::filled(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return a.size() == 0 ||
         std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](double v) { return std::isfinite(v); });
}

double sum(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  return s;
}

double min_value(const Tensor& t) {
  if (t.empty()) throw ArgumentError("min_value of an empty tensor");
  return *std::min_element(t.values().begin(), t.values().end());
}

double max_value(const Tensor& t) {
  if (t.empty()) throw ArgumentError("max_value of an empty tensor");
  return *std::max_element(t.values().begin(), t.values().end());
}

Tensor scaled(const Tensor& t, double factor) {
  Tensor out = t;
  for (double& v : out.values()) v *= factor;
  return out;
}

Tensor minmax_normalize(const Tensor& t) {
  if (t.empty()) throw ArgumentError("minmax_normalize of an empty tensor");
  const auto [lo_it, hi_it] = std::minmax_element(t.values().begin(), t.values().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Tensor out(t.shape());
  if (hi == lo) return out;
  const double range = hi - lo;
  auto src = t.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = (src[i] - lo) / range;
  }
  return out;
}

}  // namespace extcam
