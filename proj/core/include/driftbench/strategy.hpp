#pragma once

#include <string>
#include <vector>

#include "driftbench/dataset.hpp"
#include "driftbench/exemplar.hpp"
#include "driftbench/model.hpp"
#include "driftbench/tape.hpp"

namespace driftbench {

enum class MethodKind { kNone, kEwc, kOnlineEwc, kSi, kLwf, kIcarl, kGem, kJoint };

std::string method_name(MethodKind kind);
MethodKind parse_method(const std::string& name);  // throws on unknown method

/// Per-batch context for augment_loss. The base loss and logits live on the
/// tape; param leaves are aligned with Model::parameters().
struct BatchContext {
  Tape& tape;
  Var base_loss;
  Var logits;
  std::vector<Var>& params;
  const Tensor& inputs;  // [B x T x D], pre-dropout
  const std::vector<int>& label_cols;
  const Model& model;
  int task_index;  // 1-based
};

/// Per-task view for before_task / after_task. `train` is the effective
/// training set of the task (exemplar-merged for iCaRL); label_cols are the
/// labels mapped to head column indices.
struct TaskView {
  const Dataset& train;
  const std::vector<int>& label_cols;
  int task_index;  // 1-based
};

/// Snapshot of one optimizer step, handed to record_step after the update.
struct StepRecord {
  const std::vector<const Tensor*>& grads;   // pre-step gradients
  const std::vector<Tensor>& params_before;  // copies taken before the step
  const std::vector<const Tensor*>& params_after;
};

/// Hook contract around the plain training loop. The None baseline keeps
/// every hook an identity, and disabled methods (zero strength, no state yet)
/// must return the base loss object unchanged so trajectories stay
/// bit-identical to None.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual MethodKind kind() const = 0;

  /// Effective training set for a task; default is the task's own data.
  virtual Dataset build_training_set(const Dataset& task_train) { return task_train; }

  virtual void before_task(const TaskView&, Model&) {}
  virtual Var augment_loss(BatchContext& ctx) { return ctx.base_loss; }
  virtual bool wants_post_backward() const { return false; }
  virtual void post_backward(std::vector<float>&, Model&) {}
  virtual bool wants_step_records() const { return false; }
  virtual void record_step(const StepRecord&) {}
  virtual void after_task(const TaskView&, Model&) {}

  /// iCaRL classifies through class means instead of the head.
  virtual bool classifies_by_ncm() const { return false; }
  virtual const ExemplarStore* exemplar_store() const { return nullptr; }
  virtual const ClassMeanSet* class_means() const { return nullptr; }
};

class NoneStrategy : public Strategy {
 public:
  MethodKind kind() const override { return MethodKind::kNone; }
};

// ---- shared parameter-list helpers -----------------------------------------

std::vector<Tensor> copy_params(const Model& model);

std::vector<float> flatten(const std::vector<const Tensor*>& tensors);
void unflatten_into(const std::vector<float>& flat, std::vector<Tensor>& tensors);

/// Grows `stored` to the shape of `target`, preserving entries by index.
/// Shapes may differ only in the trailing dimension (the growable head axis).
/// New entries take `fill`, or the target's own values when fill_from_target.
Tensor pad_to_shape(const Tensor& stored, const Tensor& target, float fill,
                    bool fill_from_target = false);

}  // namespace driftbench
