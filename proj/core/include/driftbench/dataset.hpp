#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftbench/tensor.hpp"

namespace driftbench {

/// Immutable collection of fixed-size windows with global class labels.
struct Dataset {
  Tensor windows;             // [N x T x D]
  std::vector<int> labels;    // N global class ids
  std::vector<int> classes;   // sorted class list; labels are a subset
  std::string split;          // "train" or "test"
  std::string provenance;

  std::size_t size() const { return windows.empty() ? 0 : windows.dim(0); }
  std::size_t timesteps() const { return windows.dim(1); }
  std::size_t dims() const { return windows.dim(2); }

  /// Window i as a [1 x T x D] batch of one.
  Tensor window_batch(std::size_t i) const;
  /// Windows at the given indices stacked into a [n x T x D] batch.
  Tensor gather(const std::vector<std::size_t>& indices) const;

  void validate() const;
};

struct NormStats {
  std::vector<float> mean;  // per feature dimension
  std::vector<float> std;   // floored at 1e-8
};

/// Computes per-dimension statistics on train only and applies them to both
/// splits.
NormStats normalize(Dataset& train, Dataset& test);

/// Ordered disjoint class groups, one per task.
struct TaskSplit {
  std::vector<std::vector<int>> tasks;

  std::size_t size() const { return tasks.size(); }
  const std::vector<int>& operator[](std::size_t i) const { return tasks[i]; }
};

/// Scenario 1: [N-1 classes, held-out class], the held-out one picked by seed.
/// Scenario 2: [floor(N/2), rest], membership shuffled by seed.
/// Scenario 3: [floor(N/2)] then one class per task, order shuffled by seed.
TaskSplit make_scenario(const std::vector<int>& classes, int scenario,
                        std::uint64_t variation_seed);

/// Windows whose label lies in `keep`, original order preserved. Throws when
/// nothing matches.
Dataset filter_by_classes(const Dataset& ds, const std::vector<int>& keep);

/// Stacks two datasets with identical window geometry; classes are unioned.
Dataset concat_datasets(const Dataset& a, const Dataset& b);

/// Inverse-frequency class weights over `labels` (values in [0, num_classes)),
/// normalized so the mean per-sample weight is one. Absent classes get 0.
Tensor class_weights(const std::vector<int>& labels, int num_classes);

struct SynthSpec {
  int n_classes = 6;
  int timesteps = 20;
  int dims = 6;
  int train_per_class = 100;
  int test_per_class = 33;
  double separation = 3.0;   // magnitude of the per-class offset
  double ar_coeff = 0.6;     // AR(1) coefficient, in (0, 1)
  double noise = 1.0;        // innovation scale
  std::uint64_t seed = 0;

  void validate() const;
};

/// AR(1) windows x_t = ar*x_{t-1} + noise*eta_t + mu_c, with mu_c a fixed
/// per-class direction of magnitude `separation`. Train and test draw from
/// disjoint seed streams; the whole output is a deterministic function of the
/// spec.
std::pair<Dataset, Dataset> synth_generate(const SynthSpec& spec);

// Binary dataset format "DBDS": magic, version u32, N,T,D,C u32 little-endian,
// then N*T*D f32 windows and N u16 labels.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// CSV import: one window per row, T*D feature columns then the label.
Dataset load_dataset_csv(const std::string& path, int timesteps, int dims);

}  // namespace driftbench
