#include "driftbench/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace driftbench {

namespace {

void validate_config(const ModelConfig& cfg) {
  if (cfg.layers < 1) throw std::invalid_argument("model: layers must be >= 1");
  if (cfg.hidden < 1) throw std::invalid_argument("model: hidden size must be >= 1");
  if (cfg.input_dim < 1) throw std::invalid_argument("model: input_dim must be >= 1");
  if (cfg.num_classes < 1) throw std::invalid_argument("model: num_classes must be >= 1");
  if (cfg.dropout_input < 0.0f || cfg.dropout_input >= 1.0f ||
      cfg.dropout_hidden < 0.0f || cfg.dropout_hidden >= 1.0f)
    throw std::invalid_argument("model: dropout rates must lie in [0, 1)");
}

template <typename S>
void fill_uniform(TensorT<S>& t, Rng& rng, double lo, double hi) {
  for (std::size_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<S>(rng.uniform(lo, hi));
}

/// Inverted-scaling dropout mask: 0 with probability rate, else 1/(1-rate).
template <typename S>
TensorT<S> dropout_mask(const std::vector<std::size_t>& shape, double rate, Rng& rng) {
  TensorT<S> mask(shape);
  const S keep = static_cast<S>(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < mask.numel(); ++i)
    mask[i] = rng.uniform() < rate ? S(0) : keep;
  return mask;
}

}  // namespace

std::size_t param_count(const ModelConfig& cfg) {
  const std::size_t s = static_cast<std::size_t>(cfg.hidden);
  std::size_t total = 0;
  for (int l = 0; l < cfg.layers; ++l) {
    const std::size_t in = l == 0 ? static_cast<std::size_t>(cfg.input_dim) : s;
    total += 4 * (s * (in + s) + s);
  }
  total += s * static_cast<std::size_t>(cfg.num_classes) +
           static_cast<std::size_t>(cfg.num_classes);
  return total;
}

template <typename S>
ModelT<S>::ModelT(const ModelConfig& cfg) : cfg_(cfg) {
  validate_config(cfg);
  const auto s = static_cast<std::size_t>(cfg.hidden);
  const auto c = static_cast<std::size_t>(cfg.num_classes);
  Rng rng(cfg.seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (int l = 0; l < cfg.layers; ++l) {
    const std::size_t in = l == 0 ? static_cast<std::size_t>(cfg.input_dim) : s;
    LstmLayerT<S> layer{TensorT<S>({in, 4 * s}), TensorT<S>({s, 4 * s}),
                        TensorT<S>({4 * s})};
    fill_uniform(layer.wx, rng, -bound, bound);
    fill_uniform(layer.wh, rng, -bound, bound);
    fill_uniform(layer.b, rng, -bound, bound);
    layers_.push_back(std::move(layer));
  }
  head_w_ = TensorT<S>({s, c});
  head_b_ = TensorT<S>({c});
  fill_uniform(head_w_, rng, -bound, bound);
  fill_uniform(head_b_, rng, -bound, bound);
}

template <typename S>
void ModelT<S>::expand_head(int n_new, std::uint64_t seed) {
  if (n_new < 1) throw std::invalid_argument("expand_head: must add at least one class");
  const auto s = static_cast<std::size_t>(cfg_.hidden);
  const auto old_c = static_cast<std::size_t>(cfg_.num_classes);
  const auto new_c = old_c + static_cast<std::size_t>(n_new);
  Rng rng(seed);

  TensorT<S> w({s, new_c});
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < old_c; ++j) w.at(i, j) = head_w_.at(i, j);
    for (std::size_t j = old_c; j < new_c; ++j)
      w.at(i, j) = static_cast<S>(rng.uniform(-0.05, 0.05));
  }
  TensorT<S> b({new_c});
  for (std::size_t j = 0; j < old_c; ++j) b[j] = head_b_[j];
  for (std::size_t j = old_c; j < new_c; ++j)
    b[j] = static_cast<S>(rng.uniform(-0.05, 0.05));

  head_w_ = std::move(w);
  head_b_ = std::move(b);
  cfg_.num_classes = static_cast<int>(new_c);
}

template <typename S>
std::vector<TensorT<S>*> ModelT<S>::parameters() {
  std::vector<TensorT<S>*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.wx);
    out.push_back(&layer.wh);
    out.push_back(&layer.b);
  }
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

template <typename S>
std::vector<const TensorT<S>*> ModelT<S>::parameters() const {
  std::vector<const TensorT<S>*> out;
  for (const auto& layer : layers_) {
    out.push_back(&layer.wx);
    out.push_back(&layer.wh);
    out.push_back(&layer.b);
  }
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

template <typename S>
std::size_t ModelT<S>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->numel();
  return n;
}

template <typename S>
ForwardGraphT<S> ModelT<S>::build_graph(TapeT<S>& tape, const TensorT<S>& batch,
                                        bool train_mode, Rng* rng) const {
  if (batch.rank() != 3 ||
      batch.dim(2) != static_cast<std::size_t>(cfg_.input_dim)) {
    throw std::invalid_argument("forward: batch shape " +
                                shape_to_string(batch.shape()) +
                                " does not match input_dim " +
                                std::to_string(cfg_.input_dim));
  }
  if (train_mode && rng == nullptr)
    throw std::invalid_argument("forward: train_mode requires an rng");

  const std::size_t b = batch.dim(0);
  const std::size_t t_steps = batch.dim(1);
  const std::size_t d = batch.dim(2);
  const std::size_t s = static_cast<std::size_t>(cfg_.hidden);
  const std::size_t n_layers = layers_.size();

  ForwardGraphT<S> g;
  std::vector<VarT<S>> wx(n_layers), wh(n_layers), bias(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    wx[l] = tape.leaf(layers_[l].wx);
    wh[l] = tape.leaf(layers_[l].wh);
    bias[l] = tape.leaf(layers_[l].b);
    g.params.push_back(wx[l]);
    g.params.push_back(wh[l]);
    g.params.push_back(bias[l]);
  }
  VarT<S> head_w = tape.leaf(head_w_);
  VarT<S> head_b = tape.leaf(head_b_);
  g.params.push_back(head_w);
  g.params.push_back(head_b);

  const TensorT<S> zero_state({b, s});
  std::vector<VarT<S>> h(n_layers), c(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    h[l] = tape.constant(zero_state);
    c[l] = tape.constant(zero_state);
  }

  for (std::size_t t = 0; t < t_steps; ++t) {
    // Timestep slice of the batch; inputs are constants, so input dropout is
    // applied directly to the values.
    TensorT<S> xt({b, d});
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j) xt.at(i, j) = batch.at(i, t, j);
    if (train_mode && cfg_.dropout_input > 0.0f) {
      const auto mask = dropout_mask<S>({b, d}, cfg_.dropout_input, *rng);
      for (std::size_t i = 0; i < xt.numel(); ++i) xt[i] *= mask[i];
    }
    VarT<S> input = tape.constant(xt);

    for (std::size_t l = 0; l < n_layers; ++l) {
      if (l > 0) {
        input = h[l - 1];
        if (train_mode && cfg_.dropout_hidden > 0.0f)
          input = mul_const(input, dropout_mask<S>({b, s}, cfg_.dropout_hidden, *rng));
      }
      VarT<S> z = add_bias(add(matmul(input, wx[l]), matmul(h[l], wh[l])), bias[l]);
      VarT<S> gi = sigmoid(slice_cols(z, 0, s));
      VarT<S> gf = sigmoid(slice_cols(z, s, s));
      VarT<S> gc = tanh_act(slice_cols(z, 2 * s, s));
      VarT<S> go = sigmoid(slice_cols(z, 3 * s, s));
      c[l] = add(mul(gf, c[l]), mul(gi, gc));
      h[l] = mul(go, tanh_act(c[l]));
    }
  }

  g.features = h[n_layers - 1];
  VarT<S> head_in = g.features;
  if (train_mode && cfg_.dropout_hidden > 0.0f)
    head_in = mul_const(head_in, dropout_mask<S>({b, s}, cfg_.dropout_hidden, *rng));
  g.logits = add_bias(matmul(head_in, head_w), head_b);
  return g;
}

template <typename S>
TensorT<S> ModelT<S>::forward(const TensorT<S>& batch, bool train_mode,
                              Rng* rng) const {
  TapeT<S> tape;
  return build_graph(tape, batch, train_mode, rng).logits.value();
}

template <typename S>
TensorT<S> ModelT<S>::extract_features(const TensorT<S>& batch) const {
  TapeT<S> tape;
  return build_graph(tape, batch, false, nullptr).features.value();
}

template class ModelT<float>;
template class ModelT<double>;

}  // namespace driftbench
