#pragma once

#include <cstdint>
#include <vector>

#include "driftbench/tensor.hpp"

namespace driftbench {

/// Adam with bias correction. Moment tensors mirror the parameter list given
/// at construction; the step counter increases by one per step() call.
template <typename S>
class AdamT {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  AdamT(const std::vector<TensorT<S>*>& params, S learning_rate);

  void step(const std::vector<TensorT<S>*>& params,
            const std::vector<const TensorT<S>*>& grads);

  std::uint64_t steps() const { return steps_; }
  S learning_rate() const { return lr_; }
  const std::vector<TensorT<S>>& first_moments() const { return m_; }
  const std::vector<TensorT<S>>& second_moments() const { return v_; }

 private:
  S lr_;
  std::uint64_t steps_ = 0;
  std::vector<TensorT<S>> m_;
  std::vector<TensorT<S>> v_;
};

using Adam = AdamT<float>;

extern template class AdamT<float>;
extern template class AdamT<double>;

}  // namespace driftbench
