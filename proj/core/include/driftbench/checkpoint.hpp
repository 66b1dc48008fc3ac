#pragma once

#include <optional>
#include <string>

#include "driftbench/exemplar.hpp"
#include "driftbench/model.hpp"

namespace driftbench {

// Checkpoint format "DBMD": magic, version u32, config block (layers, hidden,
// timesteps, input_dim, num_classes as u32; dropout rates as f32; seed u64),
// parameter tensors as little-endian f32 in declaration order, then a u16
// flag and, when set, the serialized exemplar store.

struct Checkpoint {
  Model model;
  std::optional<ExemplarStore> store;
};

void save_checkpoint(const Model& model, const std::string& path,
                     const ExemplarStore* store = nullptr);
Checkpoint load_checkpoint(const std::string& path);

inline void save_model(const Model& model, const std::string& path) {
  save_checkpoint(model, path);
}
Model load_model(const std::string& path);

}  // namespace driftbench
