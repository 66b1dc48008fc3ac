#include "driftbench/protocol.hpp"

#include <chrono>
#include <stdexcept>

namespace driftbench {

namespace {
using Clock = std::chrono::steady_clock;
}

std::uint64_t model_seed(std::uint64_t seed, std::size_t arch_index) {
  return Rng(seed).split(101 + arch_index).seed();
}
std::uint64_t task_rng_seed(std::uint64_t seed, int task_index) {
  return Rng(seed).split(200 + static_cast<std::uint64_t>(task_index)).seed();
}
std::uint64_t expansion_seed(std::uint64_t seed, int task_index) {
  return Rng(seed).split(300 + static_cast<std::uint64_t>(task_index)).seed();
}
std::uint64_t strategy_seed(std::uint64_t seed) { return Rng(seed).split(400).seed(); }

RunResult run_single(Model& model, Strategy& strategy,
                     const std::vector<Dataset>& task_trains,
                     const std::vector<Dataset>& task_tests, const RunOptions& opt) {
  if (task_trains.empty() || task_trains.size() != task_tests.size())
    throw std::invalid_argument("run_single: need matching train/test task lists");

  ClassIndex index;
  index.add_task(task_trains[0].classes);
  if (model.num_classes() != index.columns())
    throw std::invalid_argument("run_single: model head covers " +
                                std::to_string(model.num_classes()) +
                                " classes but task 1 has " +
                                std::to_string(index.columns()));

  RunResult out;

  // ---- task 1: per-epoch scoring, best-epoch snapshot --------------------
  {
    TaskTiming timing;
    auto mark = Clock::now();
    auto charge_il = [&] {
      const auto now = Clock::now();
      timing.il_seconds += std::chrono::duration<double>(now - mark).count();
      mark = now;
    };

    Dataset effective = strategy.build_training_set(task_trains[0]);
    charge_il();
    const std::vector<int> cols = index.to_columns(effective.labels);
    {
      TaskView view{effective, cols, 1};
      mark = Clock::now();
      strategy.before_task(view, model);
      charge_il();
    }

    Rng rng(task_rng_seed(opt.seed, 1));
    TrainOptions topt{opt.epochs, opt.lr_first, opt.batch_size};

    std::vector<Tensor> best_params;
    double best_q = -1.0;
    int best_epoch = -1;
    const TaskTiming loop = train_epochs(
        model, strategy, effective, cols, 1, topt, rng, [&](int epoch) {
          const double q = evaluate_task(model, strategy, task_tests[0], index);
          if (q > best_q) {
            best_q = q;
            best_epoch = epoch;
            best_params = copy_params(model);
          }
        });
    timing.train_seconds += loop.train_seconds;
    timing.il_seconds += loop.il_seconds;

    if (!best_params.empty()) {
      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
    }
    out.first_task_best_q = best_q;
    out.first_task_best_epoch = best_epoch;

    {
      TaskView view{effective, cols, 1};
      mark = Clock::now();
      strategy.after_task(view, model);
      charge_il();
    }
    out.timing.push_back(timing);
    out.matrix.push_row({evaluate_task(model, strategy, task_tests[0], index)});
    out.union_scores.push_back(evaluate_union(model, strategy, task_tests, 1, index));
  }

  // ---- tasks 2..k: straight training, scored once per task ---------------
  for (std::size_t k = 2; k <= task_trains.size(); ++k) {
    const Dataset& train = task_trains[k - 1];
    index.add_task(train.classes);
    const int n_new = index.columns() - model.num_classes();
    if (n_new > 0)
      model.expand_head(n_new, expansion_seed(opt.seed, static_cast<int>(k)));

    TaskTiming timing;
    const auto merge_start = Clock::now();
    Dataset effective = strategy.build_training_set(train);
    timing.il_seconds +=
        std::chrono::duration<double>(Clock::now() - merge_start).count();

    const std::vector<int> cols = index.to_columns(effective.labels);
    Rng rng(task_rng_seed(opt.seed, static_cast<int>(k)));
    TrainOptions topt{opt.epochs, opt.lr, opt.batch_size};
    const TaskTiming t = train_one_task(model, strategy, effective, cols,
                                        static_cast<int>(k), topt, rng);
    timing.train_seconds += t.train_seconds;
    timing.il_seconds += t.il_seconds;
    out.timing.push_back(timing);

    std::vector<double> row;
    for (std::size_t j = 1; j <= k; ++j)
      row.push_back(evaluate_task(model, strategy, task_tests[j - 1], index));
    out.matrix.push_row(std::move(row));
    out.union_scores.push_back(evaluate_union(model, strategy, task_tests, k, index));
  }

  out.seen_classes = index.classes();
  return out;
}

}  // namespace driftbench
