#include "driftbench/strategy.hpp"

#include <stdexcept>

namespace driftbench {

std::string method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::kNone: return "none";
    case MethodKind::kEwc: return "ewc";
    case MethodKind::kOnlineEwc: return "online_ewc";
    case MethodKind::kSi: return "si";
    case MethodKind::kLwf: return "lwf";
    case MethodKind::kIcarl: return "icarl";
    case MethodKind::kGem: return "gem";
    case MethodKind::kJoint: return "joint";
  }
  throw std::invalid_argument("method_name: unknown method kind");
}

MethodKind parse_method(const std::string& name) {
  if (name == "none") return MethodKind::kNone;
  if (name == "ewc") return MethodKind::kEwc;
  if (name == "online_ewc") return MethodKind::kOnlineEwc;
  if (name == "si") return MethodKind::kSi;
  if (name == "lwf") return MethodKind::kLwf;
  if (name == "icarl") return MethodKind::kIcarl;
  if (name == "gem") return MethodKind::kGem;
  if (name == "joint") return MethodKind::kJoint;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected none|ewc|online_ewc|si|lwf|icarl|gem|joint)");
}

std::vector<Tensor> copy_params(const Model& model) {
  std::vector<Tensor> out;
  for (const auto* p : model.parameters()) out.push_back(*p);
  return out;
}

std::vector<float> flatten(const std::vector<const Tensor*>& tensors) {
  std::size_t n = 0;
  for (const auto* t : tensors) n += t->numel();
  std::vector<float> flat;
  flat.reserve(n);
  for (const auto* t : tensors)
    flat.insert(flat.end(), t->vec().begin(), t->vec().end());
  return flat;
}

void unflatten_into(const std::vector<float>& flat, std::vector<Tensor>& tensors) {
  std::size_t offset = 0;
  for (auto& t : tensors) {
    if (offset + t.numel() > flat.size())
      throw std::invalid_argument("unflatten_into: flat vector too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + t.numel()),
              t.vec().begin());
    offset += t.numel();
  }
  if (offset != flat.size())
    throw std::invalid_argument("unflatten_into: flat vector length mismatch");
}

Tensor pad_to_shape(const Tensor& stored, const Tensor& target, float fill,
                    bool fill_from_target) {
  if (stored.same_shape(target)) return stored;
  if (stored.rank() != target.rank())
    throw std::invalid_argument("pad_to_shape: rank mismatch " +
                                shape_to_string(stored.shape()) + " vs " +
                                shape_to_string(target.shape()));
  const std::size_t r = stored.rank();
  for (std::size_t i = 0; i + 1 < r; ++i)
    if (stored.dim(i) != target.dim(i))
      throw std::invalid_argument("pad_to_shape: only the trailing dimension may grow (" +
                                  shape_to_string(stored.shape()) + " vs " +
                                  shape_to_string(target.shape()) + ")");
  const std::size_t old_last = stored.dim(r - 1), new_last = target.dim(r - 1);
  if (new_last < old_last)
    throw std::invalid_argument("pad_to_shape: target trailing dimension shrank");

  Tensor out(target.shape());
  const std::size_t outer = stored.numel() / old_last;
  for (std::size_t i = 0; i < outer; ++i) {
    for (std::size_t j = 0; j < old_last; ++j)
      out[i * new_last + j] = stored[i * old_last + j];
    for (std::size_t j = old_last; j < new_last; ++j)
      out[i * new_last + j] = fill_from_target ? target[i * new_last + j] : fill;
  }
  return out;
}

}  // namespace driftbench
