#include "driftbench/gem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftbench/rng.hpp"

namespace driftbench {

GemLossFn gem_default_loss() {
  return [](Tape& tape, const Model& model, const Tensor& windows,
            const std::vector<int>& label_cols, std::vector<Var>& params_out) {
    auto graph = model.build_graph(tape, windows, false, nullptr);
    params_out = graph.params;
    const Tensor unit =
        Tensor::full({static_cast<std::size_t>(model.num_classes())}, 1.0f);
    return weighted_softmax_xent(graph.logits, label_cols, unit);
  };
}

std::vector<std::vector<float>> gem_reference_grads(
    const Model& model, const std::vector<GemMemory>& memories,
    const GemLossFn& loss_fn) {
  if (memories.empty())
    throw std::invalid_argument("gem_reference_grads: no completed task memories");
  std::vector<std::vector<float>> refs;
  refs.reserve(memories.size());
  for (std::size_t k = 0; k < memories.size(); ++k) {
    const auto& mem = memories[k];
    if (mem.windows.empty() || mem.label_cols.empty())
      throw std::invalid_argument("gem_reference_grads: task " + std::to_string(k + 1) +
                                  " has an empty memory");
    Tape tape;
    std::vector<Var> params;
    Var loss = loss_fn(tape, model, mem.windows, mem.label_cols, params);
    tape.backward(loss);
    std::vector<const Tensor*> grads;
    grads.reserve(params.size());
    for (const auto& p : params) grads.push_back(&p.grad());
    refs.push_back(flatten(grads));
  }
  return refs;
}

namespace {

/// min_v 1/2 v^T A v + b^T v subject to v >= 0, A symmetric PSD. Accelerated
/// projected gradient with restart; stops on the unit-step fixed-point
/// residual ||v - max(0, v - (Av + b))||_inf <= tol * max(1, ||b||_inf).
std::vector<double> solve_nonneg_qp(const std::vector<std::vector<double>>& a,
                                    const std::vector<double>& b, double tol,
                                    std::size_t max_iters) {
  const std::size_t k = b.size();
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += std::fabs(a[i][j]);
    lipschitz = std::max(lipschitz, row);
  }
  if (lipschitz <= 0.0) return std::vector<double>(k, 0.0);
  const double step = 1.0 / lipschitz;

  double scale = 1.0;
  for (double x : b) scale = std::max(scale, std::fabs(x));

  auto grad_at = [&](const std::vector<double>& v) {
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) {
      double acc = b[i];
      for (std::size_t j = 0; j < k; ++j) acc += a[i][j] * v[j];
      g[i] = acc;
    }
    return g;
  };
  auto objective = [&](const std::vector<double>& v) {
    double q = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      lin += b[i] * v[i];
      for (std::size_t j = 0; j < k; ++j) q += v[i] * a[i][j] * v[j];
    }
    return 0.5 * q + lin;
  };
  auto residual_at = [&](const std::vector<double>& v) {
    const auto g = grad_at(v);
    double r = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      r = std::max(r, std::fabs(v[i] - std::max(0.0, v[i] - g[i])));
    return r;
  };

  std::vector<double> v(k, 0.0), y(k, 0.0), v_prev(k, 0.0);
  double momentum = 1.0;
  double last_obj = objective(v);
  double res = residual_at(v);
  for (std::size_t it = 0; it < max_iters; ++it) {
    if (res <= tol * scale) return v;
    const auto g = grad_at(y);
    v_prev = v;
    for (std::size_t i = 0; i < k; ++i) v[i] = std::max(0.0, y[i] - step * g[i]);

    const double obj = objective(v);
    if (obj > last_obj) {
      // restart the momentum sequence when acceleration overshoots
      momentum = 1.0;
      y = v;
    } else {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next;
      momentum = next;
      for (std::size_t i = 0; i < k; ++i)
        y[i] = std::max(0.0, v[i] + beta * (v[i] - v_prev[i]));
    }
    last_obj = std::min(last_obj, obj);
    res = residual_at(v);
  }
  if (res <= tol * scale) return v;
  throw std::runtime_error("gem_project: dual solver did not converge after " +
                           std::to_string(max_iters) +
                           " iterations (residual = " + std::to_string(res) + ")");
}

}  // namespace

std::vector<float> gem_project(const std::vector<float>& g,
                               const std::vector<std::vector<float>>& refs,
                               const GemProjectOptions& opt) {
  const std::size_t n = g.size();
  for (const auto& r : refs)
    if (r.size() != n)
      throw std::invalid_argument("gem_project: reference gradient length mismatch");
  if (refs.empty()) return g;

  const std::size_t k = refs.size();
  std::vector<double> dots(k, 0.0);
  bool violated = false;
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      acc += static_cast<double>(g[j]) * static_cast<double>(refs[i][j]);
    dots[i] = acc;
    violated = violated || acc < 0.0;
  }
  if (!violated) return g;  // feasible already: hand back g untouched

  std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        acc += static_cast<double>(refs[i][p]) * static_cast<double>(refs[j][p]);
      a[i][j] = acc;
      a[j][i] = acc;
    }
  }
  const std::vector<double> v =
      solve_nonneg_qp(a, dots, opt.tolerance, opt.max_iterations);

  std::vector<float> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = static_cast<double>(g[j]);
    for (std::size_t i = 0; i < k; ++i)
      acc += v[i] * static_cast<double>(refs[i][j]);
    out[j] = static_cast<float>(acc);
  }
  return out;
}

void GemStrategy::post_backward(std::vector<float>& flat_grad, Model& model) {
  if (memories_.empty()) return;
  const auto refs = gem_reference_grads(model, memories_);
  flat_grad = gem_project(flat_grad, refs);
}

void GemStrategy::after_task(const TaskView& view, Model& model) {
  (void)model;
  // Prospective split: the k-th task's memory gets floor(budget / k) samples;
  // earlier memories keep their size.
  const std::size_t share = std::max<std::size_t>(
      opt_.budget_samples / static_cast<std::size_t>(view.task_index), 1);
  const std::size_t take = std::min(share, view.train.size());

  std::vector<std::size_t> idx(view.train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng = Rng(opt_.seed).split(static_cast<std::uint64_t>(view.task_index));
  rng.shuffle(idx);
  idx.resize(take);

  GemMemory mem;
  mem.windows = view.train.gather(idx);
  mem.label_cols.reserve(take);
  for (std::size_t i : idx) mem.label_cols.push_back(view.label_cols[i]);
  memories_.push_back(std::move(mem));
}

}  // namespace driftbench
