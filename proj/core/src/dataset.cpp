#include "driftbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "driftbench/rng.hpp"

namespace driftbench {

Tensor Dataset::window_batch(std::size_t i) const {
  return gather({i});
}

Tensor Dataset::gather(const std::vector<std::size_t>& indices) const {
  const std::size_t t = timesteps(), d = dims();
  Tensor out({indices.size(), t, d});
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const float* src = windows.data() + indices[k] * t * d;
    float* dst = out.data() + k * t * d;
    std::copy(src, src + t * d, dst);
  }
  return out;
}

void Dataset::validate() const {
  if (windows.rank() != 3) throw std::invalid_argument("dataset: windows must be [N x T x D]");
  if (labels.size() != size())
    throw std::invalid_argument("dataset: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(size()) + " windows");
  std::set<int> cls(classes.begin(), classes.end());
  for (int y : labels)
    if (!cls.count(y))
      throw std::invalid_argument("dataset: label " + std::to_string(y) +
                                  " not in class list");
}

NormStats normalize(Dataset& train, Dataset& test) {
  if (train.size() == 0) throw std::invalid_argument("normalize: empty train split");
  const std::size_t d = train.dims();
  const std::size_t nt = train.size() * train.timesteps();

  NormStats stats;
  stats.mean.assign(d, 0.0f);
  stats.std.assign(d, 0.0f);

  std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
  for (std::size_t i = 0; i < train.windows.numel(); ++i) {
    const double v = train.windows[i];
    const std::size_t j = i % d;
    sum[j] += v;
    sumsq[j] += v * v;
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = sum[j] / static_cast<double>(nt);
    const double var = std::max(0.0, sumsq[j] / static_cast<double>(nt) - mean * mean);
    stats.mean[j] = static_cast<float>(mean);
    stats.std[j] = static_cast<float>(std::max(std::sqrt(var), 1e-8));
  }

  auto apply = [&](Dataset& ds) {
    for (std::size_t i = 0; i < ds.windows.numel(); ++i) {
      const std::size_t j = i % d;
      ds.windows[i] = (ds.windows[i] - stats.mean[j]) / stats.std[j];
    }
  };
  apply(train);
  if (test.size() > 0) {
    if (test.dims() != d)
      throw std::invalid_argument("normalize: train/test dimension mismatch");
    apply(test);
  }
  return stats;
}

TaskSplit make_scenario(const std::vector<int>& classes, int scenario,
                        std::uint64_t variation_seed) {
  if (scenario < 1 || scenario > 3)
    throw std::invalid_argument("make_scenario: scenario must be 1, 2 or 3");
  std::vector<int> cls = classes;
  std::sort(cls.begin(), cls.end());
  cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
  const std::size_t n = cls.size();
  const std::size_t min_n = scenario == 3 ? 4 : 2;
  if (n < min_n)
    throw std::invalid_argument("make_scenario: scenario " + std::to_string(scenario) +
                                " needs at least " + std::to_string(min_n) +
                                " classes, got " + std::to_string(n));

  TaskSplit split;
  if (scenario == 1) {
    // Seeds 0..N-1 enumerate the N possible held-out classes.
    const std::size_t held = static_cast<std::size_t>(variation_seed % n);
    std::vector<int> first;
    for (std::size_t i = 0; i < n; ++i)
      if (i != held) first.push_back(cls[i]);
    split.tasks.push_back(std::move(first));
    split.tasks.push_back({cls[held]});
    return split;
  }

  Rng rng(variation_seed);
  std::vector<int> order = cls;
  rng.shuffle(order);
  const std::size_t first_count = n / 2;

  std::vector<int> first(order.begin(), order.begin() + first_count);
  std::sort(first.begin(), first.end());
  split.tasks.push_back(std::move(first));

  if (scenario == 2) {
    std::vector<int> second(order.begin() + first_count, order.end());
    std::sort(second.begin(), second.end());
    split.tasks.push_back(std::move(second));
  } else {
    for (std::size_t i = first_count; i < n; ++i) split.tasks.push_back({order[i]});
  }
  return split;
}

Dataset filter_by_classes(const Dataset& ds, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("filter_by_classes: empty class set");
  std::set<int> wanted(keep.begin(), keep.end());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (wanted.count(ds.labels[i])) idx.push_back(i);
  if (idx.empty())
    throw std::invalid_argument("filter_by_classes: no windows match the class set");

  Dataset out;
  out.windows = ds.gather(idx);
  out.labels.reserve(idx.size());
  for (auto i : idx) out.labels.push_back(ds.labels[i]);
  out.classes.assign(wanted.begin(), wanted.end());
  out.split = ds.split;
  out.provenance = ds.provenance;
  return out;
}

Dataset concat_datasets(const Dataset& a, const Dataset& b) {
  if (a.timesteps() != b.timesteps() || a.dims() != b.dims())
    throw std::invalid_argument("concat_datasets: window geometry mismatch " +
                                shape_to_string(a.windows.shape()) + " vs " +
                                shape_to_string(b.windows.shape()));
  Dataset out;
  out.windows = Tensor({a.size() + b.size(), a.timesteps(), a.dims()});
  std::copy(a.windows.data(), a.windows.data() + a.windows.numel(), out.windows.data());
  std::copy(b.windows.data(), b.windows.data() + b.windows.numel(),
            out.windows.data() + a.windows.numel());
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  std::set<int> cls(a.classes.begin(), a.classes.end());
  cls.insert(b.classes.begin(), b.classes.end());
  out.classes.assign(cls.begin(), cls.end());
  out.split = a.split;
  out.provenance = a.provenance + "+" + b.provenance;
  return out;
}

Tensor class_weights(const std::vector<int>& labels, int num_classes) {
  if (labels.empty()) throw std::invalid_argument("class_weights: empty labels");
  if (num_classes < 1) throw std::invalid_argument("class_weights: num_classes must be >= 1");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes)
      throw std::out_of_range("class_weights: label " + std::to_string(y) +
                              " outside [0, " + std::to_string(num_classes) + ")");
    ++counts[static_cast<std::size_t>(y)];
  }
  std::size_t present = 0;
  for (auto c : counts)
    if (c > 0) ++present;

  // w_c = N / (K * count_c) gives sum_c w_c * count_c = N: mean sample weight 1.
  Tensor w({static_cast<std::size_t>(num_classes)});
  const double n = static_cast<double>(labels.size());
  const double k = static_cast<double>(present);
  for (std::size_t c = 0; c < counts.size(); ++c)
    w[c] = counts[c] == 0 ? 0.0f
                          : static_cast<float>(n / (k * static_cast<double>(counts[c])));
  return w;
}

void SynthSpec::validate() const {
  if (n_classes < 2) throw std::invalid_argument("synth: n_classes must be >= 2");
  if (timesteps < 1 || dims < 1)
    throw std::invalid_argument("synth: timesteps and dims must be >= 1");
  if (train_per_class < 1 || test_per_class < 1)
    throw std::invalid_argument("synth: per-class sample counts must be >= 1");
  if (!(separation >= 0.0)) throw std::invalid_argument("synth: separation must be >= 0");
  if (!(ar_coeff > 0.0 && ar_coeff < 1.0))
    throw std::invalid_argument("synth: ar_coeff must lie in (0, 1)");
  if (!(noise >= 0.0)) throw std::invalid_argument("synth: noise must be >= 0");
}

namespace {

/// Per-class offset directions. When the classes fit into the feature space
/// they are orthonormalized so that separation translates directly into
/// distance between class centroids; otherwise random unit vectors are used.
std::vector<std::vector<double>> class_directions(int n_classes, int dims, Rng rng) {
  std::vector<std::vector<double>> dirs;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<double> v(static_cast<std::size_t>(dims));
    for (auto& x : v) x = rng.normal();
    if (n_classes <= dims) {
      for (const auto& u : dirs) {
        double dot = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * u[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * u[i];
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-9) {
      v.assign(v.size(), 0.0);
      v[static_cast<std::size_t>(c) % v.size()] = 1.0;
    } else {
      for (auto& x : v) x /= norm;
    }
    dirs.push_back(std::move(v));
  }
  return dirs;
}

Dataset synth_split(const SynthSpec& spec, int per_class,
                    const std::vector<std::vector<double>>& dirs, Rng rng,
                    const char* tag) {
  const auto t = static_cast<std::size_t>(spec.timesteps);
  const auto d = static_cast<std::size_t>(spec.dims);
  const auto n = static_cast<std::size_t>(spec.n_classes) *
                 static_cast<std::size_t>(per_class);

  Dataset ds;
  ds.windows = Tensor({n, t, d});
  ds.labels.reserve(n);
  std::size_t w = 0;
  for (int c = 0; c < spec.n_classes; ++c) {
    const auto& dir = dirs[static_cast<std::size_t>(c)];
    for (int s = 0; s < per_class; ++s, ++w) {
      std::vector<double> x(d, 0.0);
      for (std::size_t step = 0; step < t; ++step) {
        for (std::size_t j = 0; j < d; ++j) {
          x[j] = spec.ar_coeff * x[j] + spec.noise * rng.normal() +
                 spec.separation * dir[j];
          ds.windows.at(w, step, j) = static_cast<float>(x[j]);
        }
      }
      ds.labels.push_back(c);
    }
  }
  for (int c = 0; c < spec.n_classes; ++c) ds.classes.push_back(c);
  ds.split = tag;
  ds.provenance = "synth(seed=" + std::to_string(spec.seed) + ")";
  return ds;
}

}  // namespace

std::pair<Dataset, Dataset> synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng root(spec.seed);
  const auto dirs = class_directions(spec.n_classes, spec.dims, root.split(2));
  Dataset train = synth_split(spec, spec.train_per_class, dirs, root.split(0), "train");
  Dataset test = synth_split(spec, spec.test_per_class, dirs, root.split(1), "test");
  return {std::move(train), std::move(test)};
}

}  // namespace driftbench
