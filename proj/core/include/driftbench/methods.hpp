#pragma once

#include <memory>

#include "driftbench/ewc.hpp"
#include "driftbench/gem.hpp"
#include "driftbench/icarl.hpp"
#include "driftbench/lwf.hpp"
#include "driftbench/si.hpp"
#include "driftbench/strategy.hpp"

namespace driftbench {

/// Resolved per-run method parameters; fields irrelevant to the chosen kind
/// are ignored.
struct MethodParams {
  MethodKind kind = MethodKind::kNone;
  float lambda = 1.0f;        // ewc, online_ewc
  float gamma = 1.0f;         // online_ewc
  float si_c = 0.4f;          // si
  float si_damp = 0.1f;       // si
  std::size_t fisher_cap = 1024;
  std::size_t budget_samples = 0;  // icarl, gem
  ExemplarStore::Policy policy = ExemplarStore::Policy::kHerding;
  float temperature = 2.0f;   // lwf, icarl
  std::uint64_t seed = 0;     // strategy-private randomness
};

std::unique_ptr<Strategy> make_strategy(const MethodParams& params);

}  // namespace driftbench
