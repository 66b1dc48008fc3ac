#include "driftbench/ewc.hpp"

#include <stdexcept>

namespace driftbench {

Var ewc_penalty(Tape& tape, const std::vector<Var>& params,
                const std::vector<ConsolidationAnchor>& anchors, float lambda) {
  if (lambda < 0.0f) throw std::invalid_argument("ewc_penalty: lambda must be >= 0");
  if (lambda == 0.0f || anchors.empty())
    return tape.constant(Tensor::scalar(0.0f));

  Var total = tape.constant(Tensor::scalar(0.0f));
  bool first = true;
  for (const auto& anchor : anchors) {
    if (anchor.theta.size() != params.size() || anchor.fisher.size() != params.size())
      throw std::invalid_argument("ewc_penalty: anchor tensor count mismatch");
    for (std::size_t p = 0; p < params.size(); ++p) {
      Var term = quad_penalty(params[p], anchor.theta[p], anchor.fisher[p]);
      total = first ? term : add(total, term);
      first = false;
    }
  }
  return scale(total, lambda / 2.0f);
}

std::vector<Tensor> fisher_diagonal(std::size_t n_samples, std::size_t cap,
                                    const FisherSampleBuilder& build) {
  if (n_samples == 0) throw std::invalid_argument("fisher: empty data");
  const std::size_t used = cap == 0 ? n_samples : std::min(cap, n_samples);

  std::vector<TensorT<double>> acc;
  for (std::size_t s = 0; s < used; ++s) {
    Tape tape;
    auto [loss, params] = build(tape, s);
    tape.backward(loss);
    if (acc.empty()) {
      for (const auto& p : params) acc.emplace_back(p.value().shape());
    }
    if (params.size() != acc.size())
      throw std::invalid_argument("fisher: sample graphs disagree on parameter count");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& g = params[i].grad();
      for (std::size_t j = 0; j < g.numel(); ++j) {
        const double v = static_cast<double>(g[j]);
        acc[i][j] += v * v;
      }
    }
  }

  std::vector<Tensor> out;
  out.reserve(acc.size());
  for (auto& a : acc) {
    Tensor f(a.shape());
    for (std::size_t j = 0; j < a.numel(); ++j)
      f[j] = static_cast<float>(a[j] / static_cast<double>(used));
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Tensor> fisher_estimate(const Model& model, const Dataset& data,
                                    const std::vector<int>& label_cols,
                                    std::size_t cap) {
  if (data.size() == 0) throw std::invalid_argument("fisher_estimate: empty data");
  if (label_cols.size() != data.size())
    throw std::invalid_argument("fisher_estimate: label/window count mismatch");
  const Tensor unit_weights =
      Tensor::full({static_cast<std::size_t>(model.num_classes())}, 1.0f);

  return fisher_diagonal(
      data.size(), cap, [&](Tape& tape, std::size_t s) {
        auto graph = model.build_graph(tape, data.window_batch(s), false, nullptr);
        Var loss = weighted_softmax_xent(graph.logits,
                                         std::vector<int>{label_cols[s]}, unit_weights);
        return std::make_pair(loss, graph.params);
      });
}

std::vector<Tensor> online_ewc_merge(const std::vector<Tensor>& f_run,
                                     const std::vector<Tensor>& f_new, float gamma) {
  if (!(gamma > 0.0f && gamma <= 1.0f))
    throw std::invalid_argument("online_ewc_merge: gamma must lie in (0, 1]");
  if (f_run.size() != f_new.size())
    throw std::invalid_argument("online_ewc_merge: tensor count mismatch");
  std::vector<Tensor> out;
  out.reserve(f_run.size());
  for (std::size_t i = 0; i < f_run.size(); ++i) {
    require_same_shape(f_run[i], f_new[i], "online_ewc_merge");
    Tensor merged(f_run[i].shape());
    for (std::size_t j = 0; j < merged.numel(); ++j)
      merged[j] = gamma * f_run[i][j] + f_new[i][j];
    out.push_back(std::move(merged));
  }
  return out;
}

void EwcStrategy::before_task(const TaskView&, Model& model) {
  // Anchors created before a head expansion are padded up to the current
  // parameter shapes; the new columns carry zero Fisher, so they are free.
  const auto params = model.parameters();
  for (auto& anchor : anchors_) {
    for (std::size_t p = 0; p < params.size(); ++p) {
      anchor.theta[p] = pad_to_shape(anchor.theta[p], *params[p], 0.0f, true);
      anchor.fisher[p] = pad_to_shape(anchor.fisher[p], *params[p], 0.0f);
    }
  }
}

Var EwcStrategy::augment_loss(BatchContext& ctx) {
  if (opt_.lambda == 0.0f || anchors_.empty()) return ctx.base_loss;
  return add(ctx.base_loss, ewc_penalty(ctx.tape, ctx.params, anchors_, opt_.lambda));
}

void EwcStrategy::after_task(const TaskView& view, Model& model) {
  ConsolidationAnchor anchor;
  anchor.theta = copy_params(model);
  anchor.fisher = fisher_estimate(model, view.train, view.label_cols, opt_.fisher_cap);
  anchors_.push_back(std::move(anchor));
}

OnlineEwcStrategy::OnlineEwcStrategy(OnlineEwcOptions opt) : opt_(opt) {
  if (!(opt.gamma > 0.0f && opt.gamma <= 1.0f))
    throw std::invalid_argument("online ewc: gamma must lie in (0, 1]");
}

void OnlineEwcStrategy::before_task(const TaskView&, Model& model) {
  if (!has_anchor_) return;
  const auto params = model.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    theta_star_[p] = pad_to_shape(theta_star_[p], *params[p], 0.0f, true);
    fisher_run_[p] = pad_to_shape(fisher_run_[p], *params[p], 0.0f);
  }
}

Var OnlineEwcStrategy::augment_loss(BatchContext& ctx) {
  if (opt_.lambda == 0.0f || !has_anchor_) return ctx.base_loss;
  Var total = quad_penalty(ctx.params[0], theta_star_[0], fisher_run_[0]);
  for (std::size_t p = 1; p < ctx.params.size(); ++p)
    total = add(total, quad_penalty(ctx.params[p], theta_star_[p], fisher_run_[p]));
  return add(ctx.base_loss, scale(total, opt_.lambda / 2.0f));
}

void OnlineEwcStrategy::after_task(const TaskView& view, Model& model) {
  auto f_new = fisher_estimate(model, view.train, view.label_cols, opt_.fisher_cap);
  if (!has_anchor_) {
    fisher_run_ = std::move(f_new);
  } else {
    fisher_run_ = online_ewc_merge(fisher_run_, f_new, opt_.gamma);
  }
  theta_star_ = copy_params(model);
  has_anchor_ = true;
}

}  // namespace driftbench
