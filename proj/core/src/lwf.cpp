#include "driftbench/lwf.hpp"

#include <numeric>
#include <stdexcept>

namespace driftbench {

Var lwf_total_loss(Tape& tape, Var new_task_loss, Var distill, int task_index) {
  (void)tape;
  if (task_index < 2)
    throw std::invalid_argument("lwf_total_loss: needs a completed previous task");
  const float new_weight = 1.0f / static_cast<float>(task_index);
  return add(scale(new_task_loss, new_weight), scale(distill, 1.0f - new_weight));
}

Var LwfStrategy::augment_loss(BatchContext& ctx) {
  if (!teacher_.has_value()) return ctx.base_loss;  // first task: nothing to replay
  const Tensor teacher_logits = teacher_->forward(ctx.inputs, false, nullptr);
  std::vector<int> old_columns(static_cast<std::size_t>(teacher_->num_classes()));
  std::iota(old_columns.begin(), old_columns.end(), 0);
  Var distill = distill_xent(ctx.logits, teacher_logits, old_columns, opt_.temperature);
  return lwf_total_loss(ctx.tape, ctx.base_loss, distill, ctx.task_index);
}

void LwfStrategy::after_task(const TaskView&, Model& model) { teacher_ = model; }

}  // namespace driftbench
