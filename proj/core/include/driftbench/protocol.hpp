#pragma once

#include <cstdint>
#include <vector>

#include "driftbench/metrics.hpp"
#include "driftbench/trainer.hpp"

namespace driftbench {

struct RunOptions {
  int epochs = 20;
  float lr = 1e-3f;        // learning rate from the second task on
  float lr_first = 1e-3f;  // the first task always trains at the default rate
  int batch_size = 32;
  std::uint64_t seed = 0;  // drives shuffling, dropout and head-expansion init
};

struct RunResult {
  AccuracyMatrix matrix;             // per-task weighted F1 columns
  std::vector<double> union_scores;  // pooled-test score after each task
  std::vector<TaskTiming> timing;
  std::vector<int> seen_classes;     // head column -> global class id
  double first_task_best_q = 0.0;    // best per-epoch score on task 1
  int first_task_best_epoch = -1;
};

/// The canonical single run. The first task trains at the default learning
/// rate with per-epoch test scoring and keeps the best-epoch parameter
/// snapshot; consolidation then happens on the restored winner. Later tasks
/// train straight through at opt.lr and are scored once per task, both
/// per-task and on the pooled test set. The model must be constructed with a
/// head covering exactly the first task's classes.
RunResult run_single(Model& model, Strategy& strategy,
                     const std::vector<Dataset>& task_trains,
                     const std::vector<Dataset>& task_tests,
                     const RunOptions& opt);

/// Deterministic derivations of the per-run seed streams, shared by the
/// single-run and search paths so that a degenerate search reproduces a run
/// bit-exactly.
std::uint64_t model_seed(std::uint64_t seed, std::size_t arch_index);
std::uint64_t task_rng_seed(std::uint64_t seed, int task_index);
std::uint64_t expansion_seed(std::uint64_t seed, int task_index);
std::uint64_t strategy_seed(std::uint64_t seed);

}  // namespace driftbench
