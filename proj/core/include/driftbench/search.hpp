#pragma once

#include <string>
#include <vector>

#include "driftbench/methods.hpp"
#include "driftbench/protocol.hpp"

namespace driftbench {

struct ArchPoint {
  int layers;
  int hidden;
};

/// Hyper-parameter grids. Architecture and the task-1 learning rate are fixed
/// during stage 2; stage 2 sweeps the adaptable rate plus the method-specific
/// set (lambda for the consolidation methods, gamma for the online variant,
/// c for the path-integral method). Budgets are inputs, never swept.
struct SearchGrid {
  std::vector<ArchPoint> archs{{1, 32}, {1, 64}, {2, 32}, {2, 64}};
  std::vector<float> lrs{1e-3f, 1e-4f};
  std::vector<float> lambdas{1.0f, 10.0f, 100.0f, 1e3f, 1e4f, 1e5f, 1e6f};
  std::vector<float> gammas{0.5f, 1.0f};
  std::vector<float> si_cs{0.2f, 0.4f, 0.6f, 0.8f, 1.0f};
};

struct SearchOptions {
  SearchGrid grid;
  int epochs = 20;
  int batch_size = 32;
  float lr_first = 1e-3f;
  float dropout_input = 0.2f;
  float dropout_hidden = 0.5f;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct Stage1Entry {
  ArchPoint arch;
  double best_q;
  int best_epoch;
};

struct SearchPoint {
  float lr = 1e-3f;
  float lambda = 0.0f;
  float gamma = 0.0f;
  float si_c = 0.0f;
  bool has_lambda = false, has_gamma = false, has_si_c = false;

  std::string key() const;  // canonical serialization; the deterministic tiebreak
};

struct LeaderboardRow {
  SearchPoint point;
  double final_q = 0.0;
  RunResult run;
};

/// final_q descending, then serialized point ascending.
bool leaderboard_precedes(const LeaderboardRow& a, const LeaderboardRow& b);

struct SearchResult {
  std::vector<Stage1Entry> stage1;  // one entry per architecture, grid order
  std::size_t winner_arch_index = 0;
  std::vector<LeaderboardRow> leaderboard;  // sorted, winner first
};

/// Enumerates the stage-2 sweep for a method over the grid.
std::vector<SearchPoint> enumerate_points(MethodKind kind, const SearchGrid& grid);

/// Two-stage model selection: stage 1 picks the architecture by the best
/// per-epoch score on the first task; stage 2 re-runs the whole sequence from
/// the stage-1 winner for every point of the adaptable sweep and ranks by the
/// final pooled-test score.
SearchResult algorithm1_search(const std::vector<Dataset>& task_trains,
                               const std::vector<Dataset>& task_tests,
                               const MethodParams& base, const SearchOptions& opt);

struct JointResult {
  std::vector<double> a_star;                  // pooled-test score per k
  std::vector<std::vector<double>> task_rows;  // winner's per-task scores at k
  std::vector<ArchPoint> winner_arch;          // per k
};

/// Upper-bound reference: for each k a fresh model trained on the pooled data
/// of tasks 1..k, with the same architecture sweep and best-epoch rule as
/// stage 1.
JointResult joint_baseline(const std::vector<Dataset>& task_trains,
                           const std::vector<Dataset>& task_tests,
                           const SearchOptions& opt);

}  // namespace driftbench
