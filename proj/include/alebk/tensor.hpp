#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alebk {

/// Thrown when tensor shapes do not fit an operation. The message always
/// carries the offending shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of doubles. Images and activations are H x W x C,
/// conv kernels are 3 x 3 x Cin x Cout, dense weights are out x in.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* raw() noexcept { return data_.data(); }
  const double* raw() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  // Unchecked rank-3 access for H x W x C tensors.
  double& at(std::size_t y, std::size_t x, std::size_t c) noexcept {
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const noexcept {
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }

  /// Same data, new shape; the element count must not change.
  Tensor reshaped(Shape shape) const;
  void fill(double value);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Throws ShapeError naming `what` unless `t` has exactly `expected` shape.
void require_shape(const Tensor& t, const Shape& expected, const char* what);

}  // namespace alebk
