#pragma once

#include <functional>
#include <stdexcept>

#include "driftbench/tensor.hpp"

namespace driftbench {

/// Central-difference gradient estimate: (f(x + h e_i) - f(x - h e_i)) / 2h
/// for every coordinate. The verification oracle for reverse-mode gradients;
/// run it in double.
template <typename S>
TensorT<S> finite_diff_grad(const std::function<double(const TensorT<S>&)>& f,
                            const TensorT<S>& theta, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  TensorT<S> grad(theta.shape());
  TensorT<S> probe = theta;
  for (std::size_t i = 0; i < theta.numel(); ++i) {
    const S orig = probe[i];
    probe[i] = static_cast<S>(static_cast<double>(orig) + h);
    const double fp = f(probe);
    probe[i] = static_cast<S>(static_cast<double>(orig) - h);
    const double fm = f(probe);
    probe[i] = orig;
    grad[i] = static_cast<S>((fp - fm) / (2.0 * h));
  }
  return grad;
}

}  // namespace driftbench
