#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "driftbench/binio.hpp"
#include "driftbench/dataset.hpp"
#include "driftbench/model.hpp"

namespace driftbench {

/// floor(total_budget / n_classes). Callers treat 0 as "keep one exemplar per
/// class when any sample exists" so no class ever disappears from the store.
std::size_t budget_per_class(std::size_t total_budget, std::size_t n_classes);

/// Greedy herding order over unit-normalized feature rows: at step k pick the
/// index whose inclusion brings the running average closest to the class mean.
/// Returns m distinct indices; prefixes of the order are themselves the best
/// greedy subsets, which is what makes later truncation valid.
std::vector<std::size_t> herd_select(const Tensor& features, std::size_t m);

/// L2-normalizes each row in place; rows with near-zero norm are left as
/// zero vectors rather than producing NaN.
void l2_normalize_rows(Tensor& features);

struct ClassMeanSet {
  /// Unit-norm mean feature per class, ascending class id.
  std::vector<std::pair<int, Tensor>> means;

  bool empty() const { return means.empty(); }
};

/// Nearest-class-mean rule. Features are normalized before the distance, so
/// prediction is invariant to positive scaling; exact ties go to the lowest
/// class id.
std::vector<int> ncm_classify(const Tensor& features, const ClassMeanSet& means);

/// Per-class ordered exemplar lists under a global sample budget.
class ExemplarStore {
 public:
  enum class Policy { kHerding, kRandom };

  ExemplarStore(std::size_t total_budget, Policy policy, std::uint64_t seed)
      : budget_(total_budget), policy_(policy), seed_(seed) {}

  /// Re-balances the store for the classes introduced by a finished task:
  /// shrinks every stored class to the new per-class budget, then selects
  /// exemplars for each new class from the task's training windows.
  void update_after_task(const Model& model, const Dataset& task_train,
                         const std::vector<int>& new_classes);

  /// Truncates every class list to its first new_m entries, keeping at least
  /// one exemplar per class.
  void reduce(std::size_t new_m);

  std::size_t total_budget() const { return budget_; }
  Policy policy() const { return policy_; }
  std::size_t num_classes() const { return per_class_.size(); }
  std::size_t total_samples() const;
  std::vector<int> stored_classes() const;
  const std::vector<Tensor>& exemplars(int class_id) const;

  /// Bytes to persist the raw samples: samples * (T*D*4 + 2).
  std::size_t byte_size() const;

  /// Unit-norm mean feature vector per stored class, recomputed through the
  /// current backbone. Throws naming the class if one has no exemplars.
  ClassMeanSet compute_class_means(const Model& model) const;

  /// All exemplars as a training dataset (class-ascending, selection order).
  Dataset as_dataset() const;

  void serialize(ByteWriter& w) const;
  static ExemplarStore deserialize(ByteReader& r);

 private:
  std::size_t budget_;
  Policy policy_;
  std::uint64_t seed_;
  std::uint64_t selection_counter_ = 0;  // advances the random-policy stream
  std::map<int, std::vector<Tensor>> per_class_;  // each exemplar is [T x D]
};

}  // namespace driftbench
