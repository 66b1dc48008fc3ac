#include "driftbench/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "driftbench/adam.hpp"
#include "driftbench/exemplar.hpp"
#include "driftbench/metrics.hpp"

namespace driftbench {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kEvalChunk = 128;

}  // namespace

int ClassIndex::add_task(const std::vector<int>& task_classes) {
  std::vector<int> sorted = task_classes;
  std::sort(sorted.begin(), sorted.end());
  int added = 0;
  for (int c : sorted) {
    if (col_of_.count(c)) continue;
    col_of_[c] = static_cast<int>(classes_.size());
    classes_.push_back(c);
    ++added;
  }
  return added;
}

int ClassIndex::column_of(int class_id) const {
  auto it = col_of_.find(class_id);
  if (it == col_of_.end())
    throw std::invalid_argument("class " + std::to_string(class_id) +
                                " has not been seen by the model");
  return it->second;
}

int ClassIndex::class_at(int column) const {
  if (column < 0 || column >= columns())
    throw std::out_of_range("column " + std::to_string(column) + " outside head");
  return classes_[static_cast<std::size_t>(column)];
}

std::vector<int> ClassIndex::to_columns(const std::vector<int>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (int y : labels) out.push_back(column_of(y));
  return out;
}

TaskTiming train_epochs(Model& model, Strategy& strategy, const Dataset& train,
                        const std::vector<int>& label_cols, int task_index,
                        const TrainOptions& opt, Rng& rng,
                        const std::function<void(int)>& epoch_end) {
  if (opt.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (opt.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (label_cols.size() != train.size())
    throw std::invalid_argument("train: label/window count mismatch");

  TaskTiming timing;
  auto mark = Clock::now();
  auto charge = [&](double& bucket) {
    const auto now = Clock::now();
    bucket += std::chrono::duration<double>(now - mark).count();
    mark = now;
  };

  const Tensor weights = class_weights(label_cols, model.num_classes());
  Adam adam(model.parameters(), opt.lr);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  mark = Clock::now();
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t count =
          std::min(static_cast<std::size_t>(opt.batch_size), order.size() - start);
      std::vector<std::size_t> batch_idx(
          order.begin() + static_cast<std::ptrdiff_t>(start),
          order.begin() + static_cast<std::ptrdiff_t>(start + count));
      const Tensor inputs = train.gather(batch_idx);
      std::vector<int> batch_cols;
      batch_cols.reserve(count);
      for (auto i : batch_idx) batch_cols.push_back(label_cols[i]);

      Tape tape;
      auto graph = model.build_graph(tape, inputs, true, &rng);
      Var base_loss = weighted_softmax_xent(graph.logits, batch_cols, weights);
      charge(timing.train_seconds);

      BatchContext ctx{tape,   base_loss,  graph.logits, graph.params,
                       inputs, batch_cols, model,        task_index};
      Var total_loss = strategy.augment_loss(ctx);
      charge(timing.il_seconds);

      if (!std::isfinite(static_cast<double>(total_loss.value()[0])))
        throw std::runtime_error("train: loss became non-finite at task " +
                                 std::to_string(task_index) + ", epoch " +
                                 std::to_string(epoch + 1));
      tape.backward(total_loss);

      auto param_ptrs = model.parameters();
      std::vector<Tensor> grads;
      grads.reserve(graph.params.size());
      for (const auto& leaf : graph.params) grads.push_back(leaf.grad());
      charge(timing.train_seconds);

      if (strategy.wants_post_backward()) {
        std::vector<const Tensor*> grad_ptrs;
        for (const auto& g : grads) grad_ptrs.push_back(&g);
        std::vector<float> flat = flatten(grad_ptrs);
        strategy.post_backward(flat, model);
        unflatten_into(flat, grads);
        charge(timing.il_seconds);
      }

      std::vector<Tensor> params_before;
      if (strategy.wants_step_records()) {
        params_before = copy_params(model);
        charge(timing.il_seconds);
      }

      std::vector<const Tensor*> grad_ptrs;
      for (const auto& g : grads) grad_ptrs.push_back(&g);
      adam.step(param_ptrs, grad_ptrs);
      charge(timing.train_seconds);

      if (strategy.wants_step_records()) {
        std::vector<const Tensor*> after_ptrs;
        for (const auto* p : model.parameters()) after_ptrs.push_back(p);
        StepRecord rec{grad_ptrs, params_before, after_ptrs};
        strategy.record_step(rec);
        charge(timing.il_seconds);
      }
    }
    if (epoch_end) {
      charge(timing.train_seconds);
      epoch_end(epoch);
      mark = Clock::now();  // callback time belongs to neither bucket
    }
  }
  charge(timing.train_seconds);
  return timing;
}

TaskTiming train_one_task(Model& model, Strategy& strategy, const Dataset& train,
                          const std::vector<int>& label_cols, int task_index,
                          const TrainOptions& opt, Rng& rng,
                          const std::function<void(int)>& epoch_end) {
  TaskTiming timing;
  auto mark = Clock::now();
  auto charge_il = [&] {
    const auto now = Clock::now();
    timing.il_seconds += std::chrono::duration<double>(now - mark).count();
    mark = now;
  };

  {
    TaskView view{train, label_cols, task_index};
    strategy.before_task(view, model);
    charge_il();
  }
  const TaskTiming loop =
      train_epochs(model, strategy, train, label_cols, task_index, opt, rng, epoch_end);
  timing.train_seconds += loop.train_seconds;
  timing.il_seconds += loop.il_seconds;

  mark = Clock::now();
  {
    TaskView view{train, label_cols, task_index};
    strategy.after_task(view, model);
    charge_il();
  }
  return timing;
}

std::vector<int> predict_labels(const Model& model, const Strategy& strategy,
                                const Dataset& data, const ClassIndex& index) {
  for (int y : data.labels) index.column_of(y);  // reject unseen classes

  std::vector<int> out;
  out.reserve(data.size());
  const bool ncm = strategy.classifies_by_ncm() && strategy.class_means() != nullptr &&
                   !strategy.class_means()->empty();
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, data.size() - start);
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = start + i;
    const Tensor batch = data.gather(idx);
    if (ncm) {
      const Tensor features = model.extract_features(batch);
      for (int cls : ncm_classify(features, *strategy.class_means())) out.push_back(cls);
    } else {
      const Tensor logits = model.forward(batch, false, nullptr);
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c)
          if (logits.at(i, c) > logits.at(i, best)) best = c;
        out.push_back(index.class_at(static_cast<int>(best)));
      }
    }
  }
  return out;
}

double evaluate_task(const Model& model, const Strategy& strategy,
                     const Dataset& test, const ClassIndex& index) {
  return weighted_f1(predict_labels(model, strategy, test, index), test.labels);
}

double evaluate_union(const Model& model, const Strategy& strategy,
                      const std::vector<Dataset>& tests, std::size_t first_k,
                      const ClassIndex& index) {
  if (first_k == 0 || first_k > tests.size())
    throw std::invalid_argument("evaluate_union: bad task count");
  std::vector<int> preds, labels;
  for (std::size_t j = 0; j < first_k; ++j) {
    const auto p = predict_labels(model, strategy, tests[j], index);
    preds.insert(preds.end(), p.begin(), p.end());
    labels.insert(labels.end(), tests[j].labels.begin(), tests[j].labels.end());
  }
  return weighted_f1(preds, labels);
}

}  // namespace driftbench
