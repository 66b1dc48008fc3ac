#include "driftbench/costs.hpp"

#include <stdexcept>

namespace driftbench {

std::uint64_t storage_bytes(MethodKind method, std::uint64_t model_bytes, int tasks,
                            std::uint64_t budget_bytes) {
  if (model_bytes == 0) throw std::invalid_argument("storage_bytes: model size is zero");
  if (tasks < 1) throw std::invalid_argument("storage_bytes: tasks must be >= 1");
  const auto t = static_cast<std::uint64_t>(tasks);
  switch (method) {
    case MethodKind::kEwc: return 2 * model_bytes * t;
    case MethodKind::kOnlineEwc: return 2 * model_bytes;
    case MethodKind::kSi: return 3 * model_bytes;
    case MethodKind::kLwf: return model_bytes;
    case MethodKind::kIcarl: return model_bytes + budget_bytes;
    case MethodKind::kGem: return t * model_bytes + budget_bytes;
    case MethodKind::kNone:
    case MethodKind::kJoint: return model_bytes;
  }
  throw std::invalid_argument("storage_bytes: unknown method");
}

std::uint64_t model_bytes(std::size_t parameter_count) {
  return static_cast<std::uint64_t>(parameter_count) * 4;
}

LatencyProfile profile(const std::vector<TaskTiming>& per_task) {
  LatencyProfile p;
  p.per_task = per_task;
  for (const auto& t : per_task) {
    p.total_train_seconds += t.train_seconds;
    p.total_il_seconds += t.il_seconds;
  }
  if (!per_task.empty()) {
    p.mean_train_seconds = p.total_train_seconds / static_cast<double>(per_task.size());
    p.mean_il_seconds = p.total_il_seconds / static_cast<double>(per_task.size());
  }
  return p;
}

}  // namespace driftbench
