#pragma once

#include <cstdint>
#include <vector>

#include "driftbench/strategy.hpp"
#include "driftbench/trainer.hpp"

namespace driftbench {

/// Storage footprint of a method in bytes, given the model size M (bytes),
/// the number of tasks T and the exemplar budget B (bytes):
///   ewc 2MT, online_ewc 2M, si 3M, lwf M, icarl M+B, gem TM+B.
/// The baselines (none, joint) store just the model.
std::uint64_t storage_bytes(MethodKind method, std::uint64_t model_bytes, int tasks,
                            std::uint64_t budget_bytes);

/// Model bytes at single precision: 4 bytes per parameter.
std::uint64_t model_bytes(std::size_t parameter_count);

struct LatencyProfile {
  std::vector<TaskTiming> per_task;
  double total_train_seconds = 0.0;
  double total_il_seconds = 0.0;
  double mean_train_seconds = 0.0;
  double mean_il_seconds = 0.0;
};

LatencyProfile profile(const std::vector<TaskTiming>& per_task);

}  // namespace driftbench
