#include "driftbench/si.hpp"

#include <algorithm>
#include <stdexcept>

namespace driftbench {

void si_accumulate(std::vector<Tensor>& w, const std::vector<const Tensor*>& grads,
                   const std::vector<Tensor>& deltas) {
  if (w.size() != grads.size() || w.size() != deltas.size())
    throw std::invalid_argument("si_accumulate: tensor count mismatch");
  for (std::size_t p = 0; p < w.size(); ++p) {
    require_same_shape(w[p], *grads[p], "si_accumulate(grad)");
    require_same_shape(w[p], deltas[p], "si_accumulate(delta)");
    for (std::size_t i = 0; i < w[p].numel(); ++i)
      w[p][i] += (-(*grads[p])[i]) * deltas[p][i];
  }
}

void si_consolidate(std::vector<Tensor>& w, std::vector<Tensor>& omega,
                    std::vector<Tensor>& theta_prev,
                    const std::vector<const Tensor*>& theta_end, float damp) {
  if (w.size() != omega.size() || w.size() != theta_prev.size() ||
      w.size() != theta_end.size())
    throw std::invalid_argument("si_consolidate: tensor count mismatch");
  for (std::size_t p = 0; p < w.size(); ++p) {
    for (std::size_t i = 0; i < w[p].numel(); ++i) {
      const float drift = (*theta_end[p])[i] - theta_prev[p][i];
      const float contribution = std::max(w[p][i], 0.0f);
      omega[p][i] += contribution / (drift * drift + damp);
      w[p][i] = 0.0f;
    }
    theta_prev[p] = *theta_end[p];
  }
}

Var si_penalty(Tape& tape, const std::vector<Var>& params,
               const std::vector<Tensor>& theta_star,
               const std::vector<Tensor>& omega, float c) {
  if (params.size() != theta_star.size() || params.size() != omega.size())
    throw std::invalid_argument("si_penalty: tensor count mismatch");
  Var total = quad_penalty(params[0], theta_star[0], omega[0]);
  for (std::size_t p = 1; p < params.size(); ++p)
    total = add(total, quad_penalty(params[p], theta_star[p], omega[p]));
  return scale(total, c);
}

void SiStrategy::before_task(const TaskView&, Model& model) {
  const auto params = model.parameters();
  if (w_.empty()) {
    // First task: importance starts at zero and drift is measured from the
    // initial parameters.
    for (const auto* p : params) {
      w_.emplace_back(p->shape());
      omega_.emplace_back(p->shape());
      theta_prev_.push_back(*p);
    }
    return;
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    w_[p] = pad_to_shape(w_[p], *params[p], 0.0f);
    omega_[p] = pad_to_shape(omega_[p], *params[p], 0.0f);
    // New head columns measure drift from their freshly initialized values.
    theta_prev_[p] = pad_to_shape(theta_prev_[p], *params[p], 0.0f, true);
  }
}

Var SiStrategy::augment_loss(BatchContext& ctx) {
  if (opt_.c == 0.0f || !consolidated_once_) return ctx.base_loss;
  return add(ctx.base_loss,
             si_penalty(ctx.tape, ctx.params, theta_prev_, omega_, opt_.c));
}

void SiStrategy::record_step(const StepRecord& rec) {
  if (w_.empty()) return;
  std::vector<Tensor> deltas;
  deltas.reserve(rec.params_before.size());
  for (std::size_t p = 0; p < rec.params_before.size(); ++p) {
    Tensor d(rec.params_before[p].shape());
    for (std::size_t i = 0; i < d.numel(); ++i)
      d[i] = (*rec.params_after[p])[i] - rec.params_before[p][i];
    deltas.push_back(std::move(d));
  }
  si_accumulate(w_, rec.grads, deltas);
}

void SiStrategy::after_task(const TaskView&, Model& model) {
  std::vector<const Tensor*> theta_end;
  for (const auto* p : model.parameters()) theta_end.push_back(p);
  si_consolidate(w_, omega_, theta_prev_, theta_end, opt_.damp);
  consolidated_once_ = true;
}

}  // namespace driftbench
