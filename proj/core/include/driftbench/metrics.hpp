#pragma once

#include <cstddef>
#include <vector>

namespace driftbench {

/// Per-class F1 averaged with support weights. Classes absent from `labels`
/// are excluded; a present class with no true or predicted positives scores 0.
double weighted_f1(const std::vector<int>& predictions,
                   const std::vector<int>& labels);

/// Lower-triangular record a[k][j]: performance on task j after training task
/// k, for j <= k. Rows and tasks are 1-based in the accessors to match the
/// usual notation.
class AccuracyMatrix {
 public:
  void push_row(std::vector<double> row);

  std::size_t tasks() const { return rows_.size(); }
  /// a[k][j], 1-based, j <= k.
  double at(std::size_t k, std::size_t j) const;
  const std::vector<double>& row(std::size_t k) const;
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
};

/// Average performance after task k: mean of row k.
double metric_A(const AccuracyMatrix& m, std::size_t k);

struct ForgettingResult {
  double average;                // F_k
  std::vector<double> per_task;  // f_j^k for j = 1..k-1
};

/// Forgetting after task k >= 2: f_j^k = max_{l in [j, k-1]} a[l][j] - a[k][j].
ForgettingResult metric_F(const AccuracyMatrix& m, std::size_t k);

/// Intransigence: joint-model reference minus a[k][k]; negative when the
/// sequential model beats the joint one on the newest task.
double metric_I(double joint_score, double a_kk);

}  // namespace driftbench
