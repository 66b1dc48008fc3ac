#pragma once

#include <optional>

#include "driftbench/strategy.hpp"

namespace driftbench {

/// Classification over every current column plus distillation over the old
/// ones, combined with the task-count weighting.
Var icarl_task_loss(Tape& tape, Var classification_loss, Var student_logits,
                    const Tensor& teacher_logits, int n_old_columns,
                    float temperature, int task_index);

struct IcarlOptions {
  std::size_t budget_samples = 0;  // global exemplar budget, in samples
  ExemplarStore::Policy policy = ExemplarStore::Policy::kHerding;
  std::uint64_t seed = 0;
  float temperature = 2.0f;
};

/// Herded exemplar replay with distillation; inference goes through the
/// nearest-class-mean rule over features, with means refreshed after every
/// task because the backbone drifts.
class IcarlStrategy : public Strategy {
 public:
  explicit IcarlStrategy(IcarlOptions opt)
      : opt_(opt), store_(opt.budget_samples, opt.policy, opt.seed) {}

  MethodKind kind() const override { return MethodKind::kIcarl; }

  /// Task training set joined with every stored exemplar.
  Dataset build_training_set(const Dataset& task_train) override;

  Var augment_loss(BatchContext& ctx) override;
  void after_task(const TaskView& view, Model& model) override;

  bool classifies_by_ncm() const override { return true; }
  const ExemplarStore* exemplar_store() const override { return &store_; }
  const ClassMeanSet* class_means() const override { return &means_; }

 private:
  IcarlOptions opt_;
  ExemplarStore store_;
  std::optional<Model> teacher_;
  ClassMeanSet means_;
};

}  // namespace driftbench
