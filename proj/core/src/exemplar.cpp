#include "driftbench/exemplar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftbench/rng.hpp"

namespace driftbench {

std::size_t budget_per_class(std::size_t total_budget, std::size_t n_classes) {
  if (n_classes < 1) throw std::invalid_argument("budget_per_class: n_classes must be >= 1");
  return total_budget / n_classes;
}

void l2_normalize_rows(Tensor& features) {
  if (features.rank() != 2)
    throw std::invalid_argument("l2_normalize_rows: expected rank-2 tensor");
  const std::size_t n = features.rows(), d = features.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = features.at(i, j);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;  // zero vector stays zero
    for (std::size_t j = 0; j < d; ++j)
      features.at(i, j) = static_cast<float>(features.at(i, j) / norm);
  }
}

std::vector<std::size_t> herd_select(const Tensor& features, std::size_t m) {
  if (features.rank() != 2)
    throw std::invalid_argument("herd_select: features must be [n x d]");
  const std::size_t n = features.rows(), d = features.cols();
  if (m < 1 || m > n)
    throw std::invalid_argument("herd_select: m = " + std::to_string(m) +
                                " outside [1, " + std::to_string(n) + "]");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += features.at(i, j);
  for (auto& v : mean) v /= static_cast<double>(n);

  std::vector<std::size_t> order;
  std::vector<bool> taken(n, false);
  std::vector<double> sum(d, 0.0);  // sum of chosen feature rows
  for (std::size_t k = 1; k <= m; ++k) {
    double best = 0.0;
    std::size_t best_i = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff =
            mean[j] - (sum[j] + static_cast<double>(features.at(i, j))) /
                          static_cast<double>(k);
        dist += diff * diff;
      }
      if (best_i == n || dist < best) {
        best = dist;
        best_i = i;
      }
    }
    taken[best_i] = true;
    order.push_back(best_i);
    for (std::size_t j = 0; j < d; ++j) sum[j] += features.at(best_i, j);
  }
  return order;
}

std::vector<int> ncm_classify(const Tensor& features, const ClassMeanSet& means) {
  if (means.empty()) throw std::invalid_argument("ncm_classify: no class means");
  if (features.rank() != 2)
    throw std::invalid_argument("ncm_classify: features must be [B x S]");
  Tensor normed = features;
  l2_normalize_rows(normed);
  const std::size_t b = normed.rows(), d = normed.cols();

  std::vector<int> out;
  out.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    double best = 0.0;
    int best_class = -1;
    for (const auto& [cls, mean] : means.means) {
      if (mean.numel() != d)
        throw std::invalid_argument("ncm_classify: mean dimension mismatch");
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = normed.at(i, j) - mean[j];
        dist += diff * diff;
      }
      if (best_class < 0 || dist < best) {  // means ascend by id: ties keep lowest
        best = dist;
        best_class = cls;
      }
    }
    out.push_back(best_class);
  }
  return out;
}

namespace {

/// Features of the given dataset rows through the backbone, in chunks.
Tensor features_of(const Model& model, const Dataset& data,
                   const std::vector<std::size_t>& indices) {
  const auto s = static_cast<std::size_t>(model.config().hidden);
  Tensor out({indices.size(), s});
  constexpr std::size_t kChunk = 128;
  for (std::size_t start = 0; start < indices.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, indices.size() - start);
    std::vector<std::size_t> part(indices.begin() + start,
                                  indices.begin() + start + count);
    const Tensor feats = model.extract_features(data.gather(part));
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < s; ++j) out.at(start + i, j) = feats.at(i, j);
  }
  return out;
}

}  // namespace

void ExemplarStore::update_after_task(const Model& model, const Dataset& task_train,
                                      const std::vector<int>& new_classes) {
  std::vector<int> added;
  for (int c : new_classes)
    if (!per_class_.count(c)) added.push_back(c);
  std::sort(added.begin(), added.end());

  const std::size_t n_classes = per_class_.size() + added.size();
  if (n_classes == 0) return;
  std::size_t m = budget_per_class(budget_, n_classes);
  if (m == 0) m = 1;  // degeneracy guard: losing a class entirely would break NCM

  reduce(m);

  for (int cls : added) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < task_train.size(); ++i)
      if (task_train.labels[i] == cls) idx.push_back(i);
    if (idx.empty())
      throw std::invalid_argument("exemplar store: class " + std::to_string(cls) +
                                  " has no samples in the task data");
    const std::size_t k = std::min(m, idx.size());

    std::vector<std::size_t> chosen;
    if (policy_ == Policy::kHerding) {
      Tensor feats = features_of(model, task_train, idx);
      l2_normalize_rows(feats);
      for (std::size_t rank : herd_select(feats, k)) chosen.push_back(idx[rank]);
    } else {
      Rng rng = Rng(seed_).split(selection_counter_++);
      std::vector<std::size_t> shuffled = idx;
      rng.shuffle(shuffled);
      chosen.assign(shuffled.begin(), shuffled.begin() + k);
    }

    auto& list = per_class_[cls];
    const std::size_t t = task_train.timesteps(), d = task_train.dims();
    for (std::size_t i : chosen) {
      Tensor window({t, d});
      for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < d; ++b) window.at(a, b) = task_train.windows.at(i, a, b);
      list.push_back(std::move(window));
    }
  }
}

void ExemplarStore::reduce(std::size_t new_m) {
  const std::size_t keep = std::max<std::size_t>(new_m, 1);
  for (auto& [cls, list] : per_class_) {
    (void)cls;
    if (list.size() > keep) list.resize(keep);
  }
}

std::size_t ExemplarStore::total_samples() const {
  std::size_t n = 0;
  for (const auto& [cls, list] : per_class_) {
    (void)cls;
    n += list.size();
  }
  return n;
}

std::vector<int> ExemplarStore::stored_classes() const {
  std::vector<int> out;
  for (const auto& [cls, list] : per_class_) {
    (void)list;
    out.push_back(cls);
  }
  return out;
}

const std::vector<Tensor>& ExemplarStore::exemplars(int class_id) const {
  auto it = per_class_.find(class_id);
  if (it == per_class_.end())
    throw std::invalid_argument("exemplar store: class " + std::to_string(class_id) +
                                " is not stored");
  return it->second;
}

std::size_t ExemplarStore::byte_size() const {
  std::size_t bytes = 0;
  for (const auto& [cls, list] : per_class_) {
    (void)cls;
    for (const auto& w : list) bytes += w.numel() * 4 + 2;
  }
  return bytes;
}

ClassMeanSet ExemplarStore::compute_class_means(const Model& model) const {
  ClassMeanSet set;
  const auto s = static_cast<std::size_t>(model.config().hidden);
  for (const auto& [cls, list] : per_class_) {
    if (list.empty())
      throw std::invalid_argument("compute_class_means: class " + std::to_string(cls) +
                                  " has no exemplars");
    const std::size_t t = list.front().dim(0), d = list.front().dim(1);
    Tensor batch({list.size(), t, d});
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < d; ++b) batch.at(i, a, b) = list[i].at(a, b);

    Tensor feats({list.size(), s});
    constexpr std::size_t kChunk = 128;
    for (std::size_t start = 0; start < list.size(); start += kChunk) {
      const std::size_t count = std::min(kChunk, list.size() - start);
      Tensor part({count, t, d});
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t a = 0; a < t; ++a)
          for (std::size_t b = 0; b < d; ++b)
            part.at(i, a, b) = batch.at(start + i, a, b);
      const Tensor f = model.extract_features(part);
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < s; ++j) feats.at(start + i, j) = f.at(i, j);
    }
    l2_normalize_rows(feats);

    Tensor mean({s});
    for (std::size_t j = 0; j < s; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < list.size(); ++i) acc += feats.at(i, j);
      mean[j] = static_cast<float>(acc / static_cast<double>(list.size()));
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < s; ++j) norm += static_cast<double>(mean[j]) * mean[j];
    norm = std::sqrt(norm);
    if (norm >= 1e-12)
      for (std::size_t j = 0; j < s; ++j) mean[j] = static_cast<float>(mean[j] / norm);
    set.means.emplace_back(cls, std::move(mean));
  }
  return set;
}

Dataset ExemplarStore::as_dataset() const {
  if (total_samples() == 0)
    throw std::invalid_argument("exemplar store: empty store has no dataset view");
  const auto& first = per_class_.begin()->second.front();
  const std::size_t t = first.dim(0), d = first.dim(1);

  Dataset ds;
  ds.windows = Tensor({total_samples(), t, d});
  std::size_t w = 0;
  for (const auto& [cls, list] : per_class_) {
    for (const auto& window : list) {
      for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < d; ++b) ds.windows.at(w, a, b) = window.at(a, b);
      ds.labels.push_back(cls);
      ++w;
    }
  }
  ds.classes = stored_classes();
  ds.split = "train";
  ds.provenance = "exemplar-store";
  return ds;
}

void ExemplarStore::serialize(ByteWriter& w) const {
  std::size_t t = 0, d = 0;
  if (total_samples() > 0) {
    const auto& first = per_class_.begin()->second.front();
    t = first.dim(0);
    d = first.dim(1);
  }
  w.put_u32(static_cast<std::uint32_t>(t));
  w.put_u32(static_cast<std::uint32_t>(d));
  w.put_u64(budget_);
  w.put_u16(policy_ == Policy::kHerding ? 0 : 1);
  w.put_u64(seed_);
  w.put_u64(selection_counter_);
  w.put_u32(static_cast<std::uint32_t>(per_class_.size()));
  for (const auto& [cls, list] : per_class_) {
    w.put_u16(static_cast<std::uint16_t>(cls));
    w.put_u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& window : list)
      for (std::size_t i = 0; i < window.numel(); ++i) w.put_f32(window[i]);
  }
}

ExemplarStore ExemplarStore::deserialize(ByteReader& r) {
  const std::uint32_t t = r.get_u32("store timesteps");
  const std::uint32_t d = r.get_u32("store dims");
  const std::uint64_t budget = r.get_u64("store budget");
  const std::uint16_t policy = r.get_u16("store policy");
  if (policy > 1) throw FormatError("unknown exemplar policy", r.offset() - 2);
  const std::uint64_t seed = r.get_u64("store seed");
  const std::uint64_t counter = r.get_u64("store counter");
  const std::uint32_t n_classes = r.get_u32("store class count");

  ExemplarStore store(budget, policy == 0 ? Policy::kHerding : Policy::kRandom, seed);
  store.selection_counter_ = counter;
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    const int cls = static_cast<int>(r.get_u16("store class id"));
    const std::uint32_t count = r.get_u32("store exemplar count");
    auto& list = store.per_class_[cls];
    for (std::uint32_t i = 0; i < count; ++i) {
      Tensor window({t, d});
      for (std::size_t j = 0; j < window.numel(); ++j)
        window[j] = r.get_f32("store exemplar payload");
      list.push_back(std::move(window));
    }
  }
  return store;
}

}  // namespace driftbench
