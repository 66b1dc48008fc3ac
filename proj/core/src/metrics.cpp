#include "driftbench/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace driftbench {

double weighted_f1(const std::vector<int>& predictions,
                   const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("weighted_f1: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(labels.size()) +
                                " labels");
  if (labels.empty()) throw std::invalid_argument("weighted_f1: empty labels");

  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<int, Counts> per_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    per_class[labels[i]].support += 1;
    if (predictions[i] == labels[i]) {
      per_class[labels[i]].tp += 1;
    } else {
      per_class[labels[i]].fn += 1;
      per_class[predictions[i]].fp += 1;
    }
  }

  double score = 0.0;
  for (const auto& [cls, c] : per_class) {
    (void)cls;
    if (c.support == 0) continue;  // prediction-only classes carry no weight
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(c.tp) / denom : 0.0;
    score += f1 * static_cast<double>(c.support) / static_cast<double>(labels.size());
  }
  return score;
}

void AccuracyMatrix::push_row(std::vector<double> row) {
  if (row.size() != rows_.size() + 1)
    throw std::invalid_argument("accuracy matrix: row " + std::to_string(rows_.size() + 1) +
                                " must have " + std::to_string(rows_.size() + 1) +
                                " entries, got " + std::to_string(row.size()));
  for (double v : row)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("accuracy matrix: entry outside [0, 1]");
  rows_.push_back(std::move(row));
}

double AccuracyMatrix::at(std::size_t k, std::size_t j) const {
  if (k < 1 || k > rows_.size() || j < 1 || j > k)
    throw std::out_of_range("accuracy matrix: a[" + std::to_string(k) + "][" +
                            std::to_string(j) + "] outside the recorded triangle");
  return rows_[k - 1][j - 1];
}

const std::vector<double>& AccuracyMatrix::row(std::size_t k) const {
  if (k < 1 || k > rows_.size())
    throw std::out_of_range("accuracy matrix: row " + std::to_string(k));
  return rows_[k - 1];
}

double metric_A(const AccuracyMatrix& m, std::size_t k) {
  const auto& row = m.row(k);  // throws when row k is absent
  double acc = 0.0;
  for (double v : row) acc += v;
  return acc / static_cast<double>(k);
}

ForgettingResult metric_F(const AccuracyMatrix& m, std::size_t k) {
  if (k < 2)
    throw std::invalid_argument("metric_F: forgetting is defined from task 2 on");
  if (k > m.tasks())
    throw std::out_of_range("metric_F: row " + std::to_string(k) + " not recorded");

  ForgettingResult out{0.0, {}};
  for (std::size_t j = 1; j < k; ++j) {
    double best = m.at(j, j);
    for (std::size_t l = j; l <= k - 1; ++l) best = std::max(best, m.at(l, j));
    out.per_task.push_back(best - m.at(k, j));
  }
  for (double f : out.per_task) out.average += f;
  out.average /= static_cast<double>(k - 1);
  return out;
}

double metric_I(double joint_score, double a_kk) { return joint_score - a_kk; }

}  // namespace driftbench
