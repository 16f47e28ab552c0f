#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace extcam {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles (last index fastest).
///
/// Feature maps and gradients are K x u x v, images are C x w x h and
/// saliency maps are w x h. A default-constructed tensor is empty and has
/// rank 0; every other tensor has only positive dimensions.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  template <class... Index>
  double& at(Index... index) {
    return data_[offset(index...)];
  }
  template <class... Index>
  double at(Index... index) const {
    return data_[offset(index...)];
  }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

  bool operator==(const Tensor& other) const = default;

 private:
  template <class... Index>
  std::size_t offset(Index... index) const {
    assert(sizeof...(Index) == shape_.size());
    const std::size_t idx[] = {static_cast<std::size_t>(index)...};
    std::size_t flat = 0;
    for (std::size_t a = 0; a < sizeof...(Index); ++a) {
      assert(idx[a] < shape_[a]);
      flat = flat * shape_[a] + idx[a];
    }
    return flat;
  }

  Shape shape_;
  std::vector<double> data_;
};

/// Bit-for-bit comparison of shape and payload.
bool bitwise_equal(const Tensor& a, const Tensor& b);

bool all_finite(const Tensor& t);
double sum(const Tensor& t);
double min_value(const Tensor& t);
double max_value(const Tensor& t);
Tensor scaled(const Tensor& t, double factor);

/// Affine map onto [0, 1]: (t - min) / (max - min). A constant tensor maps
/// to all zeros.
Tensor minmax_normalize(const Tensor& t);

}  // namespace extcam
