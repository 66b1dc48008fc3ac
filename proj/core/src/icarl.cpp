#include "driftbench/icarl.hpp"

#include <numeric>
#include <set>

#include "driftbench/lwf.hpp"

namespace driftbench {

Var icarl_task_loss(Tape& tape, Var classification_loss, Var student_logits,
                    const Tensor& teacher_logits, int n_old_columns,
                    float temperature, int task_index) {
  std::vector<int> old_columns(static_cast<std::size_t>(n_old_columns));
  std::iota(old_columns.begin(), old_columns.end(), 0);
  Var distill = distill_xent(student_logits, teacher_logits, old_columns, temperature);
  return lwf_total_loss(tape, classification_loss, distill, task_index);
}

Dataset IcarlStrategy::build_training_set(const Dataset& task_train) {
  if (store_.total_samples() == 0) return task_train;
  return concat_datasets(task_train, store_.as_dataset());
}

Var IcarlStrategy::augment_loss(BatchContext& ctx) {
  if (!teacher_.has_value()) return ctx.base_loss;  // first task: pure classification
  const Tensor teacher_logits = teacher_->forward(ctx.inputs, false, nullptr);
  return icarl_task_loss(ctx.tape, ctx.base_loss, ctx.logits, teacher_logits,
                         teacher_->num_classes(), opt_.temperature, ctx.task_index);
}

void IcarlStrategy::after_task(const TaskView& view, Model& model) {
  std::set<int> stored;
  for (int c : store_.stored_classes()) stored.insert(c);
  std::vector<int> new_classes;
  for (int c : view.train.classes)
    if (!stored.count(c)) new_classes.push_back(c);

  store_.update_after_task(model, view.train, new_classes);
  teacher_ = model;
  means_ = store_.compute_class_means(model);
}

}  // namespace driftbench
