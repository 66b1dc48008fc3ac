#include "driftbench/checkpoint.hpp"

#include "driftbench/binio.hpp"

namespace driftbench {

namespace {
constexpr char kModelMagic[4] = {'D', 'B', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_checkpoint(const Model& model, const std::string& path,
                     const ExemplarStore* store) {
  const ModelConfig& cfg = model.config();
  ByteWriter w;
  w.put_magic(kModelMagic);
  w.put_u32(kModelVersion);
  w.put_u32(static_cast<std::uint32_t>(cfg.layers));
  w.put_u32(static_cast<std::uint32_t>(cfg.hidden));
  w.put_u32(static_cast<std::uint32_t>(cfg.timesteps));
  w.put_u32(static_cast<std::uint32_t>(cfg.input_dim));
  w.put_u32(static_cast<std::uint32_t>(cfg.num_classes));
  w.put_f32(cfg.dropout_input);
  w.put_f32(cfg.dropout_hidden);
  w.put_u64(cfg.seed);
  for (const auto* p : model.parameters())
    for (std::size_t i = 0; i < p->numel(); ++i) w.put_f32((*p)[i]);
  if (store != nullptr) {
    w.put_u16(1);
    store->serialize(w);
  } else {
    w.put_u16(0);
  }
  write_file(path, w.str());
}

Checkpoint load_checkpoint(const std::string& path) {
  ByteReader r(read_file(path));
  r.expect_magic(kModelMagic, "model checkpoint (DBMD)");
  const std::uint32_t version = r.get_u32("version");
  if (version != kModelVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version),
                      r.offset() - 4);

  ModelConfig cfg;
  cfg.layers = static_cast<int>(r.get_u32("layers"));
  cfg.hidden = static_cast<int>(r.get_u32("hidden"));
  cfg.timesteps = static_cast<int>(r.get_u32("timesteps"));
  cfg.input_dim = static_cast<int>(r.get_u32("input_dim"));
  cfg.num_classes = static_cast<int>(r.get_u32("num_classes"));
  cfg.dropout_input = r.get_f32("dropout_input");
  cfg.dropout_hidden = r.get_f32("dropout_hidden");
  cfg.seed = r.get_u64("seed");

  Checkpoint out{Model(cfg), std::nullopt};
  for (auto* p : out.model.parameters())
    for (std::size_t i = 0; i < p->numel(); ++i) (*p)[i] = r.get_f32("parameters");

  const std::uint16_t has_store = r.get_u16("store flag");
  if (has_store == 1)
    out.store = ExemplarStore::deserialize(r);
  else if (has_store != 0)
    throw FormatError("bad store flag", r.offset() - 2);
  if (r.remaining() != 0)
    throw FormatError("trailing bytes after checkpoint payload", r.offset());
  return out;
}

Model load_model(const std::string& path) { return load_checkpoint(path).model; }

}  // namespace driftbench
