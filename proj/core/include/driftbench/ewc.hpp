#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "driftbench/strategy.hpp"

namespace driftbench {

/// A consolidated task: parameter snapshot and its diagonal Fisher weights,
/// both aligned with Model::parameters().
struct ConsolidationAnchor {
  std::vector<Tensor> theta;
  std::vector<Tensor> fisher;
};

/// lambda/2 * sum_j sum_p F_j[p] * (theta[p] - theta*_j[p])^2 as a scalar
/// node, differentiable in the parameter leaves.
Var ewc_penalty(Tape& tape, const std::vector<Var>& params,
                const std::vector<ConsolidationAnchor>& anchors, float lambda);

/// Builds the per-sample loss graph for Fisher estimation; returns the scalar
/// loss and the parameter leaves whose squared gradients are averaged.
using FisherSampleBuilder =
    std::function<std::pair<Var, std::vector<Var>>(Tape& tape, std::size_t sample)>;

/// Diagonal empirical Fisher: mean of squared per-sample gradients of
/// -log p(y_true | x) over the first min(cap, n_samples) samples.
std::vector<Tensor> fisher_diagonal(std::size_t n_samples, std::size_t cap,
                                    const FisherSampleBuilder& build);

/// Fisher of the model's classification likelihood over a dataset. label_cols
/// map each window's label to a head column.
std::vector<Tensor> fisher_estimate(const Model& model, const Dataset& data,
                                    const std::vector<int>& label_cols,
                                    std::size_t cap);

/// Decayed running-sum merge of Fisher diagonals: F_run' = gamma*F_run + F_new.
std::vector<Tensor> online_ewc_merge(const std::vector<Tensor>& f_run,
                                     const std::vector<Tensor>& f_new, float gamma);

struct EwcOptions {
  float lambda = 1.0f;
  std::size_t fisher_cap = 1024;
};

/// Quadratic anchoring to every completed task's parameters, weighted by that
/// task's Fisher diagonal. Anchors created before a head expansion carry zero
/// Fisher in the grown columns.
class EwcStrategy : public Strategy {
 public:
  explicit EwcStrategy(EwcOptions opt) : opt_(opt) {}

  MethodKind kind() const override { return MethodKind::kEwc; }
  void before_task(const TaskView&, Model& model) override;
  Var augment_loss(BatchContext& ctx) override;
  void after_task(const TaskView& view, Model& model) override;

  const std::vector<ConsolidationAnchor>& anchors() const { return anchors_; }

 private:
  EwcOptions opt_;
  std::vector<ConsolidationAnchor> anchors_;
};

struct OnlineEwcOptions {
  float lambda = 1.0f;
  float gamma = 1.0f;
  std::size_t fisher_cap = 1024;
};

/// Single latest anchor plus a gamma-decayed running sum of Fisher diagonals.
class OnlineEwcStrategy : public Strategy {
 public:
  explicit OnlineEwcStrategy(OnlineEwcOptions opt);

  MethodKind kind() const override { return MethodKind::kOnlineEwc; }
  void before_task(const TaskView&, Model& model) override;
  Var augment_loss(BatchContext& ctx) override;
  void after_task(const TaskView& view, Model& model) override;

  const std::vector<Tensor>& running_fisher() const { return fisher_run_; }

 private:
  OnlineEwcOptions opt_;
  std::vector<Tensor> theta_star_;
  std::vector<Tensor> fisher_run_;
  bool has_anchor_ = false;
};

}  // namespace driftbench
