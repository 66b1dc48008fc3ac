#pragma once

#include <cstdint>
#include <vector>

#include "driftbench/rng.hpp"
#include "driftbench/tape.hpp"
#include "driftbench/tensor.hpp"

namespace driftbench {

struct ModelConfig {
  int layers = 1;      // stacked LSTM depth
  int hidden = 32;     // hidden state size per layer
  int timesteps = 0;   // window length T
  int input_dim = 0;   // features per timestep D
  int num_classes = 0; // head width at construction
  float dropout_input = 0.2f;
  float dropout_hidden = 0.5f;
  std::uint64_t seed = 0;
};

/// Closed-form parameter count for a config: per layer 4*(S*(in+S)+S) with
/// in = D for the first layer and S afterwards, plus S*C + C for the head.
std::size_t param_count(const ModelConfig& cfg);

/// Gate weights are packed [in x 4S] / [S x 4S] / [4S] with gate order
/// input, forget, cell, output.
template <typename S>
struct LstmLayerT {
  TensorT<S> wx;
  TensorT<S> wh;
  TensorT<S> b;
};

template <typename S>
struct ForwardGraphT {
  VarT<S> logits;
  VarT<S> features;             // final top-layer hidden state
  std::vector<VarT<S>> params;  // leaves aligned with ModelT::parameters()
};

/// Stacked-LSTM sequence classifier. The final top-layer hidden state feeds a
/// linear head whose column count grows as new classes arrive; column j always
/// keeps the class it was created for.
template <typename S>
class ModelT {
 public:
  explicit ModelT(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  int num_classes() const { return cfg_.num_classes; }

  /// Appends n_new zero-history head columns initialized uniform in
  /// [-0.05, 0.05] from `seed`. Existing columns are preserved bit-exactly.
  void expand_head(int n_new, std::uint64_t seed);

  /// Declaration order: per layer wx, wh, b; then head weight, head bias.
  /// Checkpoints, Adam moments and flattened gradients all share this order.
  std::vector<TensorT<S>*> parameters();
  std::vector<const TensorT<S>*> parameters() const;
  std::size_t parameter_count() const;

  /// Builds the recurrence on the given tape. Parameters enter as gradient
  /// leaves; the batch enters as constants. Dropout masks (input 0.2 per
  /// timestep, 0.5 between layers and before the head, inverted scaling) are
  /// drawn from rng only when train_mode is set.
  ForwardGraphT<S> build_graph(TapeT<S>& tape, const TensorT<S>& batch,
                               bool train_mode, Rng* rng) const;

  TensorT<S> forward(const TensorT<S>& batch, bool train_mode, Rng* rng) const;

  /// Final top-layer hidden state, dropout disabled.
  TensorT<S> extract_features(const TensorT<S>& batch) const;

  template <typename To>
  ModelT<To> cast() const {
    ModelConfig cfg = cfg_;
    ModelT<To> out(cfg);
    auto src = parameters();
    auto dst = out.parameters();
    for (std::size_t i = 0; i < src.size(); ++i)
      *dst[i] = src[i]->template cast<To>();
    return out;
  }

  std::vector<LstmLayerT<S>>& lstm_layers() { return layers_; }
  const std::vector<LstmLayerT<S>>& lstm_layers() const { return layers_; }
  TensorT<S>& head_weight() { return head_w_; }
  const TensorT<S>& head_weight() const { return head_w_; }
  TensorT<S>& head_bias() { return head_b_; }
  const TensorT<S>& head_bias() const { return head_b_; }

 private:
  ModelConfig cfg_;
  std::vector<LstmLayerT<S>> layers_;
  TensorT<S> head_w_;  // [S x C]
  TensorT<S> head_b_;  // [C]
};

using Model = ModelT<float>;

extern template class ModelT<float>;
extern template class ModelT<double>;

}  // namespace driftbench
