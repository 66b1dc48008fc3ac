#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "driftbench/binio.hpp"
#include "driftbench/dataset.hpp"

namespace driftbench {

namespace {
constexpr char kDatasetMagic[4] = {'D', 'B', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;
}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  int max_class = 0;
  for (int c : ds.classes) max_class = std::max(max_class, c);
  const auto n_classes = static_cast<std::uint32_t>(max_class + 1);
  if (n_classes > 0xffff)
    throw std::invalid_argument("save_dataset: class ids exceed u16 range");

  ByteWriter w;
  w.put_magic(kDatasetMagic);
  w.put_u32(kDatasetVersion);
  w.put_u32(static_cast<std::uint32_t>(ds.size()));
  w.put_u32(static_cast<std::uint32_t>(ds.timesteps()));
  w.put_u32(static_cast<std::uint32_t>(ds.dims()));
  w.put_u32(n_classes);
  for (std::size_t i = 0; i < ds.windows.numel(); ++i) w.put_f32(ds.windows[i]);
  for (int y : ds.labels) w.put_u16(static_cast<std::uint16_t>(y));
  write_file(path, w.str());
}

Dataset load_dataset(const std::string& path) {
  ByteReader r(read_file(path));
  r.expect_magic(kDatasetMagic, "dataset (DBDS)");
  const std::uint32_t version = r.get_u32("version");
  if (version != kDatasetVersion)
    throw FormatError("unsupported dataset version " + std::to_string(version),
                      r.offset() - 4);
  const std::uint32_t n = r.get_u32("window count");
  const std::uint32_t t = r.get_u32("timesteps");
  const std::uint32_t d = r.get_u32("dims");
  const std::uint32_t c = r.get_u32("class count");
  if (n == 0 || t == 0 || d == 0 || c == 0)
    throw FormatError("dataset header has a zero dimension", r.offset() - 4);

  const std::size_t payload = static_cast<std::size_t>(n) * t * d;
  r.require(payload * 4 + static_cast<std::size_t>(n) * 2, "dataset payload");

  Dataset ds;
  ds.windows = Tensor({n, t, d});
  for (std::size_t i = 0; i < payload; ++i) ds.windows[i] = r.get_f32("window payload");
  ds.labels.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint16_t y = r.get_u16("labels");
    if (y >= c)
      throw FormatError("label " + std::to_string(y) + " >= class count " +
                            std::to_string(c),
                        r.offset() - 2);
    ds.labels.push_back(static_cast<int>(y));
  }
  if (r.remaining() != 0)
    throw FormatError("trailing bytes after dataset payload", r.offset());
  for (std::uint32_t i = 0; i < c; ++i) ds.classes.push_back(static_cast<int>(i));
  ds.split = "";
  ds.provenance = path;
  return ds;
}

Dataset load_dataset_csv(const std::string& path, int timesteps, int dims) {
  if (timesteps < 1 || dims < 1)
    throw std::invalid_argument("csv import: timesteps and dims must be >= 1");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file for reading: " + path);

  const std::size_t want = static_cast<std::size_t>(timesteps) * dims;
  std::vector<float> values;
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("csv import: line " + std::to_string(lineno) +
                                 ": cannot parse '" + cell + "'");
      }
    }
    if (row.size() != want + 1)
      throw std::runtime_error("csv import: line " + std::to_string(lineno) + ": got " +
                               std::to_string(row.size()) + " columns, expected " +
                               std::to_string(want + 1) + " (T*D features + label)");
    for (std::size_t i = 0; i < want; ++i) values.push_back(static_cast<float>(row[i]));
    const double y = row.back();
    if (y < 0 || y != static_cast<int>(y))
      throw std::runtime_error("csv import: line " + std::to_string(lineno) +
                               ": label must be a non-negative integer");
    labels.push_back(static_cast<int>(y));
  }
  if (labels.empty()) throw std::runtime_error("csv import: no rows in " + path);

  Dataset ds;
  ds.windows = Tensor({labels.size(), static_cast<std::size_t>(timesteps),
                       static_cast<std::size_t>(dims)},
                      std::move(values));
  ds.labels = std::move(labels);
  std::set<int> cls(ds.labels.begin(), ds.labels.end());
  const int max_class = *cls.rbegin();
  for (int c = 0; c <= max_class; ++c) ds.classes.push_back(c);
  ds.split = "";
  ds.provenance = path;
  return ds;
}

}  // namespace driftbench
