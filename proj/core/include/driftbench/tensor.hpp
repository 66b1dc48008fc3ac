#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace driftbench {

std::string shape_to_string(const std::vector<std::size_t>& shape);

/// Dense row-major array of real values. Shapes are arbitrary rank; most of
/// the engine works with rank 1 (vectors), rank 2 (matrices) and rank 3
/// (batched windows).
template <typename S>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count_(shape_), S(0)) {}

  TensorT(std::vector<std::size_t> shape, std::vector<S> data);

  static TensorT scalar(S value) { return TensorT({1}, {value}); }
  static TensorT full(std::vector<std::size_t> shape, S value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // 2-D convenience; valid only for rank-2 tensors.
  std::size_t rows() const { return shape_[0]; }
  std::size_t cols() const { return shape_[1]; }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  std::vector<S>& vec() { return data_; }
  const std::vector<S>& vec() const { return data_; }

  S& operator[](std::size_t i) { return data_[i]; }
  const S& operator[](std::size_t i) const { return data_[i]; }

  S& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const S& at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  S& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const S& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void fill(S value);
  bool all_finite() const;
  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

  /// Exact elementwise comparison, including shape.
  bool operator==(const TensorT& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

  template <typename To>
  TensorT<To> cast() const {
    std::vector<To> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<To>(data_[i]);
    return TensorT<To>(shape_, std::move(out));
  }

 private:
  static std::size_t count_(const std::vector<std::size_t>& shape);

  std::vector<std::size_t> shape_;
  std::vector<S> data_;
};

using Tensor = TensorT<float>;

/// Throws std::invalid_argument naming both shapes when they differ.
template <typename S>
void require_same_shape(const TensorT<S>& a, const TensorT<S>& b,
                        const char* what);

extern template class TensorT<float>;
extern template class TensorT<double>;

}  // namespace driftbench
