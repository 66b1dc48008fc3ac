#pragma once

#include <vector>

#include "driftbench/strategy.hpp"

namespace driftbench {

/// w += (-grad) ⊙ delta, elementwise over the parameter list. Called once per
/// optimizer step with the pre-step gradient and the step displacement; a
/// positive contribution means the step reduced the loss along that axis.
void si_accumulate(std::vector<Tensor>& w, const std::vector<const Tensor*>& grads,
                   const std::vector<Tensor>& deltas);

/// End-of-task consolidation: omega += max(w, 0) / ((theta_end - theta_prev)^2
/// + damp); w resets to zero and theta_prev moves to theta_end. Negative path
/// contributions are clamped so importance never goes negative.
void si_consolidate(std::vector<Tensor>& w, std::vector<Tensor>& omega,
                    std::vector<Tensor>& theta_prev,
                    const std::vector<const Tensor*>& theta_end, float damp);

/// c * sum_p omega[p] * (theta*_p - theta_p)^2 as a scalar node.
Var si_penalty(Tape& tape, const std::vector<Var>& params,
               const std::vector<Tensor>& theta_star,
               const std::vector<Tensor>& omega, float c);

struct SiOptions {
  float c = 0.4f;      // regularization strength
  float damp = 0.1f;   // dampening against division by zero
};

/// Path-integral importance accumulated online during training, consolidated
/// at task boundaries.
class SiStrategy : public Strategy {
 public:
  explicit SiStrategy(SiOptions opt) : opt_(opt) {}

  MethodKind kind() const override { return MethodKind::kSi; }
  void before_task(const TaskView&, Model& model) override;
  Var augment_loss(BatchContext& ctx) override;
  bool wants_step_records() const override { return true; }
  void record_step(const StepRecord& rec) override;
  void after_task(const TaskView&, Model& model) override;

  const std::vector<Tensor>& omega() const { return omega_; }
  const std::vector<Tensor>& path_integral() const { return w_; }

 private:
  SiOptions opt_;
  std::vector<Tensor> w_;
  std::vector<Tensor> omega_;
  std::vector<Tensor> theta_prev_;
  bool consolidated_once_ = false;
};

}  // namespace driftbench
