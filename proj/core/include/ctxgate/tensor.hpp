#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ctxgate {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major array. The shape is never empty and no dimension is zero.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() : shape_{1}, data_(1, T{0}) {}
  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);

  /// Builds a 2-D tensor from nested rows; all rows must have equal length.
  static BasicTensor from_rows(std::initializer_list<std::initializer_list<T>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const noexcept { return data_.size(); }
  /// Size of the last axis.
  std::size_t cols() const noexcept { return shape_.back(); }
  /// Product of every axis but the last.
  std::size_t rows() const noexcept { return data_.size() / shape_.back(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  T& at(std::size_t r, std::size_t c) noexcept { return data_[r * shape_.back() + c]; }
  const T& at(std::size_t r, std::size_t c) const noexcept { return data_[r * shape_.back() + c]; }

  std::span<T> row(std::size_t r) noexcept { return std::span<T>(data_).subspan(r * cols(), cols()); }
  std::span<const T> row(std::size_t r) const noexcept {
    return std::span<const T>(data_).subspan(r * cols(), cols());
  }

  /// Same data under a new shape with equal element count.
  BasicTensor reshaped(Shape shape) const&;
  BasicTensor reshaped(Shape shape) &&;

  void fill(T value);
  bool same_shape(const BasicTensor& other) const noexcept { return shape_ == other.shape_; }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// A trainable tensor with its gradient accumulator.
template <typename T>
struct Parameter {
  Parameter(std::string name_, Shape shape, bool decay_ = true)
      : name(std::move(name_)), value(shape), grad(shape), decay(decay_) {}

  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  /// False for biases and layer-norm parameters, which skip weight decay.
  bool decay = true;

  void zero_grad() { grad.fill(T{0}); }
};

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace ctxgate
