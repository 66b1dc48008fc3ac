#include "driftbench/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace driftbench {

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename S>
TensorT<S>::TensorT(std::vector<std::size_t> shape, std::vector<S> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (count_(shape_) != data_.size()) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }
}

template <typename S>
TensorT<S> TensorT<S>::full(std::vector<std::size_t> shape, S value) {
  TensorT t(std::move(shape));
  t.fill(value);
  return t;
}

template <typename S>
void TensorT<S>::fill(S value) {
  for (auto& v : data_) v = value;
}

template <typename S>
bool TensorT<S>::all_finite() const {
  for (const auto& v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename S>
std::size_t TensorT<S>::count_(const std::vector<std::size_t>& shape) {
  std::size_t n = shape.empty() ? 0 : 1;
  for (auto d : shape) {
    if (d == 0) throw std::invalid_argument("tensor shape has zero dimension");
    n *= d;
  }
  return n;
}

template <typename S>
void require_same_shape(const TensorT<S>& a, const TensorT<S>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                shape_to_string(a.shape()) + " vs " +
                                shape_to_string(b.shape()));
  }
}

template class TensorT<float>;
template class TensorT<double>;
template void require_same_shape<float>(const TensorT<float>&, const TensorT<float>&, const char*);
template void require_same_shape<double>(const TensorT<double>&, const TensorT<double>&, const char*);

}  // namespace driftbench
