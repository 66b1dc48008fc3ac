#pragma once

#include <functional>
#include <map>
#include <vector>

#include "driftbench/dataset.hpp"
#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/strategy.hpp"

namespace driftbench {

/// Bidirectional map between global class ids and head columns. Columns are
/// assigned in task order (sorted within a task) and never move.
class ClassIndex {
 public:
  /// Registers a task's classes; returns how many were new.
  int add_task(const std::vector<int>& task_classes);

  int columns() const { return static_cast<int>(classes_.size()); }
  int column_of(int class_id) const;  // throws on unseen class
  int class_at(int column) const;
  bool seen(int class_id) const { return col_of_.count(class_id) > 0; }
  const std::vector<int>& classes() const { return classes_; }

  std::vector<int> to_columns(const std::vector<int>& labels) const;

 private:
  std::vector<int> classes_;
  std::map<int, int> col_of_;
};

struct TrainOptions {
  int epochs = 20;
  float lr = 1e-3f;
  int batch_size = 32;
};

struct TaskTiming {
  double train_seconds = 0.0;  // plain loop
  double il_seconds = 0.0;     // strategy hooks
  double total() const { return train_seconds + il_seconds; }
};

/// The plain loop: epochs of forward / weighted loss / augment_loss /
/// backward / post_backward / adam_step / record_step. Task-boundary hooks
/// (before_task, after_task) are NOT called; use train_one_task for the full
/// protocol. Wall time is split between the plain loop and the per-batch
/// strategy hooks; the optional per-epoch callback is excluded from both.
TaskTiming train_epochs(Model& model, Strategy& strategy, const Dataset& train,
                        const std::vector<int>& label_cols, int task_index,
                        const TrainOptions& opt, Rng& rng,
                        const std::function<void(int)>& epoch_end = nullptr);

/// One task of the training protocol: before_task, the epoch loop, then
/// after_task once.
TaskTiming train_one_task(Model& model, Strategy& strategy, const Dataset& train,
                          const std::vector<int>& label_cols, int task_index,
                          const TrainOptions& opt, Rng& rng,
                          const std::function<void(int)>& epoch_end = nullptr);

/// Predicted global class ids: argmax over head columns, or the
/// nearest-class-mean rule for strategies that classify through features.
std::vector<int> predict_labels(const Model& model, const Strategy& strategy,
                                const Dataset& data, const ClassIndex& index);

/// Weighted F1 of the model on one task's test split. Every test label must
/// already be registered in the index.
double evaluate_task(const Model& model, const Strategy& strategy,
                     const Dataset& test, const ClassIndex& index);

/// Weighted F1 over the pooled predictions of several test splits.
double evaluate_union(const Model& model, const Strategy& strategy,
                      const std::vector<Dataset>& tests, std::size_t first_k,
                      const ClassIndex& index);

}  // namespace driftbench
