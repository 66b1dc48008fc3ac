#include "driftbench/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace driftbench {

template <typename S>
AdamT<S>::AdamT(const std::vector<TensorT<S>*>& params, S learning_rate)
    : lr_(learning_rate) {
  if (!(learning_rate > S(0)))
    throw std::invalid_argument("adam: learning rate must be positive");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto* p : params) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
}

template <typename S>
void AdamT<S>::step(const std::vector<TensorT<S>*>& params,
                    const std::vector<const TensorT<S>*>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("adam: parameter list changed size");
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bc1 = 1.0 - std::pow(kBeta1, t);
  const double bc2 = 1.0 - std::pow(kBeta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    const auto& g = *grads[k];
    require_same_shape(p, m_[k], "adam(param)");
    require_same_shape(p, g, "adam(grad)");
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = kBeta1 * static_cast<double>(m[i]) + (1.0 - kBeta1) * gi;
      const double vi = kBeta2 * static_cast<double>(v[i]) + (1.0 - kBeta2) * gi * gi;
      m[i] = static_cast<S>(mi);
      v[i] = static_cast<S>(vi);
      const double update =
          static_cast<double>(lr_) * (mi / bc1) / (std::sqrt(vi / bc2) + kEpsilon);
      p[i] = static_cast<S>(static_cast<double>(p[i]) - update);
    }
  }
}

template class AdamT<float>;
template class AdamT<double>;

}  // namespace driftbench
