#pragma once

#include <functional>
#include <vector>

#include "driftbench/strategy.hpp"

namespace driftbench {

/// Episodic memory of one completed task: raw windows plus their head-column
/// labels (columns never move once assigned, so these stay valid as the head
/// grows).
struct GemMemory {
  Tensor windows;  // [n x T x D]
  std::vector<int> label_cols;
};

/// Builds a scalar loss over a memory batch; parameter leaves are returned
/// through params_out in Model::parameters() order.
using GemLossFn = std::function<Var(Tape& tape, const Model& model,
                                    const Tensor& windows,
                                    const std::vector<int>& label_cols,
                                    std::vector<Var>& params_out)>;

/// Plain (unweighted) softmax cross-entropy over the current head columns.
GemLossFn gem_default_loss();

/// One flattened loss gradient per past task, evaluated at the model's
/// current parameters over that task's memory. Order follows `memories`.
std::vector<std::vector<float>> gem_reference_grads(
    const Model& model, const std::vector<GemMemory>& memories,
    const GemLossFn& loss_fn = gem_default_loss());

struct GemProjectOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 10000;
};

/// Projects g so that no reference inner product is negative. If g already
/// satisfies every constraint it is returned unchanged; otherwise
/// g~ = g + G^T v* with v* >= 0 minimizing 1/2 v^T G G^T v + (G g)^T v, solved
/// by accelerated projected gradient on v. Throws on non-convergence, naming
/// the residual.
std::vector<float> gem_project(const std::vector<float>& g,
                               const std::vector<std::vector<float>>& refs,
                               const GemProjectOptions& opt = {});

struct GemOptions {
  std::size_t budget_samples = 0;  // global episodic budget, in samples
  std::uint64_t seed = 0;
};

/// Constrains every gradient step to not increase the loss on any past task's
/// episodic memory. Memories are sampled uniformly at random; the memory for
/// task k holds floor(budget / k) samples and earlier memories are never
/// shrunk.
class GemStrategy : public Strategy {
 public:
  explicit GemStrategy(GemOptions opt) : opt_(opt) {}

  MethodKind kind() const override { return MethodKind::kGem; }
  bool wants_post_backward() const override { return true; }
  void post_backward(std::vector<float>& flat_grad, Model& model) override;
  void after_task(const TaskView& view, Model& model) override;

  const std::vector<GemMemory>& memories() const { return memories_; }

 private:
  GemOptions opt_;
  std::vector<GemMemory> memories_;
};

}  // namespace driftbench
