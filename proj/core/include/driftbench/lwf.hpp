#pragma once

#include <optional>

#include "driftbench/strategy.hpp"

namespace driftbench {

/// Weight of the new-task loss after j-1 learned tasks: total loss is
/// (1/j) * new + (1 - 1/j) * distill. Only defined from the second task on.
Var lwf_total_loss(Tape& tape, Var new_task_loss, Var distill, int task_index);

struct LwfOptions {
  float temperature = 2.0f;
};

/// Distills the previous-task model's soft predictions on the current task's
/// inputs into the student while it learns the new classes. No state besides
/// the frozen teacher snapshot.
class LwfStrategy : public Strategy {
 public:
  explicit LwfStrategy(LwfOptions opt = {}) : opt_(opt) {}

  MethodKind kind() const override { return MethodKind::kLwf; }
  Var augment_loss(BatchContext& ctx) override;
  void after_task(const TaskView&, Model& model) override;

  bool has_teacher() const { return teacher_.has_value(); }

 private:
  LwfOptions opt_;
  std::optional<Model> teacher_;
};

}  // namespace driftbench
