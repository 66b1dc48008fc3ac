#include "driftbench/methods.hpp"

#include <stdexcept>

namespace driftbench {

std::unique_ptr<Strategy> make_strategy(const MethodParams& p) {
  switch (p.kind) {
    case MethodKind::kNone:
    case MethodKind::kJoint:
      return std::make_unique<NoneStrategy>();
    case MethodKind::kEwc:
      return std::make_unique<EwcStrategy>(EwcOptions{p.lambda, p.fisher_cap});
    case MethodKind::kOnlineEwc:
      return std::make_unique<OnlineEwcStrategy>(
          OnlineEwcOptions{p.lambda, p.gamma, p.fisher_cap});
    case MethodKind::kSi:
      return std::make_unique<SiStrategy>(SiOptions{p.si_c, p.si_damp});
    case MethodKind::kLwf:
      return std::make_unique<LwfStrategy>(LwfOptions{p.temperature});
    case MethodKind::kIcarl:
      return std::make_unique<IcarlStrategy>(
          IcarlOptions{p.budget_samples, p.policy, p.seed, p.temperature});
    case MethodKind::kGem:
      return std::make_unique<GemStrategy>(GemOptions{p.budget_samples, p.seed});
  }
  throw std::invalid_argument("make_strategy: unknown method kind");
}

}  // namespace driftbench
