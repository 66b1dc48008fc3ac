#include "driftbench/search.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace driftbench {

namespace {

std::string fmt_float(float v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

ModelConfig arch_config(const ArchPoint& arch, const Dataset& data, int num_classes,
                        const SearchOptions& opt, std::size_t arch_index) {
  ModelConfig cfg;
  cfg.layers = arch.layers;
  cfg.hidden = arch.hidden;
  cfg.timesteps = static_cast<int>(data.timesteps());
  cfg.input_dim = static_cast<int>(data.dims());
  cfg.num_classes = num_classes;
  cfg.dropout_input = opt.dropout_input;
  cfg.dropout_hidden = opt.dropout_hidden;
  cfg.seed = model_seed(opt.seed, arch_index);
  return cfg;
}

/// Trains one task with per-epoch scoring and restores the best snapshot.
/// Used for stage 1 and for the joint reference.
Stage1Entry train_best_epoch(Model& model, Strategy& strategy, const Dataset& train,
                             const std::vector<int>& cols,
                             const std::function<double()>& score,
                             const TrainOptions& topt, Rng& rng, ArchPoint arch) {
  std::vector<Tensor> best_params;
  double best_q = -1.0;
  int best_epoch = -1;
  train_epochs(model, strategy, train, cols, 1, topt, rng, [&](int epoch) {
    const double q = score();
    if (q > best_q) {
      best_q = q;
      best_epoch = epoch;
      best_params = copy_params(model);
    }
  });
  if (!best_params.empty()) {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
  }
  if (best_epoch < 0) best_q = score();  // zero-epoch run: score as-is
  return Stage1Entry{arch, best_q, best_epoch};
}

}  // namespace

std::string SearchPoint::key() const {
  std::string s = "lr=" + fmt_float(lr);
  if (has_lambda) s += ",lambda=" + fmt_float(lambda);
  if (has_gamma) s += ",gamma=" + fmt_float(gamma);
  if (has_si_c) s += ",c=" + fmt_float(si_c);
  return s;
}

bool leaderboard_precedes(const LeaderboardRow& a, const LeaderboardRow& b) {
  if (a.final_q != b.final_q) return a.final_q > b.final_q;
  return a.point.key() < b.point.key();
}

std::vector<SearchPoint> enumerate_points(MethodKind kind, const SearchGrid& grid) {
  std::vector<SearchPoint> out;
  for (float lr : grid.lrs) {
    SearchPoint base;
    base.lr = lr;
    switch (kind) {
      case MethodKind::kEwc:
        for (float l : grid.lambdas) {
          SearchPoint p = base;
          p.lambda = l;
          p.has_lambda = true;
          out.push_back(p);
        }
        break;
      case MethodKind::kOnlineEwc:
        for (float l : grid.lambdas)
          for (float g : grid.gammas) {
            SearchPoint p = base;
            p.lambda = l;
            p.has_lambda = true;
            p.gamma = g;
            p.has_gamma = true;
            out.push_back(p);
          }
        break;
      case MethodKind::kSi:
        for (float c : grid.si_cs) {
          SearchPoint p = base;
          p.si_c = c;
          p.has_si_c = true;
          out.push_back(p);
        }
        break;
      default:
        out.push_back(base);
        break;
    }
  }
  return out;
}

SearchResult algorithm1_search(const std::vector<Dataset>& task_trains,
                               const std::vector<Dataset>& task_tests,
                               const MethodParams& base, const SearchOptions& opt) {
  if (task_trains.size() < 2)
    throw std::invalid_argument("algorithm1_search: needs at least two tasks");
  if (task_trains.size() != task_tests.size())
    throw std::invalid_argument("algorithm1_search: train/test task count mismatch");
  if (opt.grid.archs.empty() || opt.grid.lrs.empty())
    throw std::invalid_argument("algorithm1_search: empty grid");

  SearchResult result;

  // Stage 1: architecture sweep on the first task with plain training. The
  // per-batch hooks never alter the first-task trajectory (no consolidated
  // state exists yet), so the sweep is method-independent.
  ClassIndex index;
  index.add_task(task_trains[0].classes);
  {
    for (std::size_t a = 0; a < opt.grid.archs.size(); ++a) {
      ModelConfig cfg =
          arch_config(opt.grid.archs[a], task_trains[0], index.columns(), opt, a);
      Model model(cfg);
      NoneStrategy none;
      const std::vector<int> cols = index.to_columns(task_trains[0].labels);
      Rng rng(task_rng_seed(opt.seed, 1));
      TrainOptions topt{opt.epochs, opt.lr_first, opt.batch_size};
      result.stage1.push_back(train_best_epoch(
          model, none, task_trains[0], cols,
          [&] { return evaluate_task(model, none, task_tests[0], index); }, topt, rng,
          opt.grid.archs[a]));
    }
    result.winner_arch_index = 0;
    for (std::size_t a = 1; a < result.stage1.size(); ++a)
      if (result.stage1[a].best_q > result.stage1[result.winner_arch_index].best_q)
        result.winner_arch_index = a;
  }

  // Stage 2: every adaptable point replays the full sequence from the winning
  // architecture. The first-task replay is bit-identical to the stage-1
  // winner (same seeds, hooks trajectory-neutral), so the snapshot is shared
  // in effect without copying strategy internals across points.
  const auto points = enumerate_points(base.kind, opt.grid);
  std::vector<LeaderboardRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(points.size());

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        MethodParams params = base;
        if (points[i].has_lambda) params.lambda = points[i].lambda;
        if (points[i].has_gamma) params.gamma = points[i].gamma;
        if (points[i].has_si_c) params.si_c = points[i].si_c;

        ModelConfig cfg = arch_config(opt.grid.archs[result.winner_arch_index],
                                      task_trains[0], index.columns(), opt,
                                      result.winner_arch_index);
        Model model(cfg);
        auto strategy = make_strategy(params);
        RunOptions ro;
        ro.epochs = opt.epochs;
        ro.lr = points[i].lr;
        ro.lr_first = opt.lr_first;
        ro.batch_size = opt.batch_size;
        ro.seed = opt.seed;
        RunResult run = run_single(model, *strategy, task_trains, task_tests, ro);
        rows[i] = LeaderboardRow{points[i], run.union_scores.back(), std::move(run)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1 || points.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < std::min<int>(jobs, static_cast<int>(points.size())); ++t)
      threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::sort(rows.begin(), rows.end(), leaderboard_precedes);
  result.leaderboard = std::move(rows);
  return result;
}

JointResult joint_baseline(const std::vector<Dataset>& task_trains,
                           const std::vector<Dataset>& task_tests,
                           const SearchOptions& opt) {
  if (task_trains.empty() || task_trains.size() != task_tests.size())
    throw std::invalid_argument("joint_baseline: need matching train/test task lists");
  if (opt.grid.archs.empty())
    throw std::invalid_argument("joint_baseline: empty architecture grid");

  JointResult out;
  for (std::size_t k = 1; k <= task_trains.size(); ++k) {
    Dataset pooled = task_trains[0];
    for (std::size_t j = 1; j < k; ++j) pooled = concat_datasets(pooled, task_trains[j]);

    ClassIndex index;
    index.add_task(pooled.classes);
    const std::vector<int> cols = index.to_columns(pooled.labels);

    double best_q = -1.0;
    std::size_t best_arch = 0;
    std::vector<double> best_row;
    for (std::size_t a = 0; a < opt.grid.archs.size(); ++a) {
      ModelConfig cfg = arch_config(opt.grid.archs[a], pooled, index.columns(), opt,
                                    a + 16 * k);  // fresh init per (k, arch)
      Model model(cfg);
      NoneStrategy none;
      Rng rng(task_rng_seed(opt.seed, static_cast<int>(1000 + k)));
      TrainOptions topt{opt.epochs, opt.lr_first, opt.batch_size};
      const Stage1Entry entry = train_best_epoch(
          model, none, pooled, cols,
          [&] { return evaluate_union(model, none, task_tests, k, index); }, topt, rng,
          opt.grid.archs[a]);
      if (entry.best_q > best_q) {
        best_q = entry.best_q;
        best_arch = a;
        best_row.clear();
        for (std::size_t j = 1; j <= k; ++j)
          best_row.push_back(evaluate_task(model, none, task_tests[j - 1], index));
      }
    }
    out.a_star.push_back(best_q);
    out.task_rows.push_back(std::move(best_row));
    out.winner_arch.push_back(opt.grid.archs[best_arch]);
  }
  return out;
}

}  // namespace driftbench
