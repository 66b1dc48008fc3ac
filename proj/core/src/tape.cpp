#include "driftbench/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace driftbench {

namespace {

// C (+)= A[m x k] * B[k x n], row-major raw arrays. A double row buffer keeps
// the reduction in double regardless of S.
template <typename S>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const S* a, const S* b,
             S* c, bool accumulate) {
  std::vector<double> row(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = 0.0;
    const S* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = static_cast<double>(ai[p]);
      const S* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * static_cast<double>(bp[j]);
    }
    S* ci = c + i * n;
    if (accumulate) {
      for (std::size_t j = 0; j < n; ++j) ci[j] += static_cast<S>(row[j]);
    } else {
      for (std::size_t j = 0; j < n; ++j) ci[j] = static_cast<S>(row[j]);
    }
  }
}

// C (+)= A[m x k] * B[n x k]^T
template <typename S>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const S* a, const S* b,
             S* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const S* ai = a + i * k;
    S* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const S* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p)
        acc += static_cast<double>(ai[p]) * static_cast<double>(bj[p]);
      if (accumulate)
        ci[j] += static_cast<S>(acc);
      else
        ci[j] = static_cast<S>(acc);
    }
  }
}

// C (+)= A[k x m]^T * B[k x n]
template <typename S>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const S* a, const S* b,
             S* c, bool accumulate) {
  std::vector<double> row(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = static_cast<double>(a[p * m + i]);
      const S* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += api * static_cast<double>(bp[j]);
    }
    S* ci = c + i * n;
    if (accumulate) {
      for (std::size_t j = 0; j < n; ++j) ci[j] += static_cast<S>(row[j]);
    } else {
      for (std::size_t j = 0; j < n; ++j) ci[j] = static_cast<S>(row[j]);
    }
  }
}

template <typename S>
void require_same_tape(const VarT<S>& a, const VarT<S>& b, const char* what) {
  if (a.tape != b.tape)
    throw std::invalid_argument(std::string(what) + ": operands live on different tapes");
}

template <typename S>
TensorT<S>& ensure_grad(TapeT<S>& tape, std::int32_t i) {
  auto& node = tape.node(i);
  if (node.grad.empty()) node.grad = TensorT<S>(node.value.shape());
  return node.grad;
}

// Ops push their output first, then install a closure that knows the output
// index. `install` receives that index and returns the backprop function.
template <typename S, typename F>
VarT<S> record(TapeT<S>& tape, TensorT<S> value, bool needs, F&& install) {
  VarT<S> out = tape.push(std::move(value), needs, nullptr);
  if (needs) tape.node(out.index).backprop = install(out.index);
  return out;
}

}  // namespace

template <typename S>
void TapeT<S>::backward(const VarT<S>& loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: loss from another tape");
  if (value(loss.index).numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_to_string(value(loss.index).shape()));

  // Zero-initialize gradient storage for every gradient-carrying node, so a
  // loss that does not depend on a leaf reads back an all-zero gradient.
  for (auto& n : nodes_) n.grad = n.needs_grad ? Tensor(n.value.shape()) : Tensor{};
  if (!node(loss.index).needs_grad) return;  // constant loss
  grad(loss.index).fill(S(1));

  for (std::int32_t i = loss.index; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.needs_grad && n.backprop) n.backprop(*this);
  }
}

template <typename S>
VarT<S> matmul(VarT<S> a, VarT<S> b) {
  require_same_tape(a, b, "matmul");
  auto& tape = *a.tape;
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    throw std::invalid_argument("matmul: incompatible shapes " +
                                shape_to_string(av.shape()) + " x " +
                                shape_to_string(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  TensorT<S> out({m, n});
  gemm_nn(m, n, k, av.data(), bv.data(), out.data(), false);

  const bool needs = tape.node(a.index).needs_grad || tape.node(b.index).needs_grad;
  const auto ai = a.index, bi = b.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, bi, oi, m, n, k](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      const auto& av2 = t.value(ai);
      const auto& bv2 = t.value(bi);
      if (t.node(ai).needs_grad) {
        // dA += dC * B^T
        gemm_nt(m, k, n, go.data(), bv2.data(), ensure_grad(t, ai).data(), true);
      }
      if (t.node(bi).needs_grad) {
        // dB += A^T * dC
        gemm_tn(k, n, m, av2.data(), go.data(), ensure_grad(t, bi).data(), true);
      }
    };
  });
}

template <typename S>
VarT<S> add(VarT<S> a, VarT<S> b) {
  require_same_tape(a, b, "add");
  auto& tape = *a.tape;
  const auto& av = a.value();
  const auto& bv = b.value();
  require_same_shape(av, bv, "add");
  TensorT<S> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] + bv[i];
  const bool needs = tape.node(a.index).needs_grad || tape.node(b.index).needs_grad;
  const auto ai = a.index, bi = b.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, bi, oi](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      if (t.node(ai).needs_grad) {
        auto& ga = ensure_grad(t, ai);
        for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
      }
      if (t.node(bi).needs_grad) {
        auto& gb = ensure_grad(t, bi);
        for (std::size_t i = 0; i < go.numel(); ++i) gb[i] += go[i];
      }
    };
  });
}

template <typename S>
VarT<S> add_bias(VarT<S> a, VarT<S> bias) {
  require_same_tape(a, bias, "add_bias");
  auto& tape = *a.tape;
  const auto& av = a.value();
  const auto& bv = bias.value();
  if (av.rank() != 2 || bv.rank() != 1 || bv.dim(0) != av.cols()) {
    throw std::invalid_argument("add_bias: incompatible shapes " +
                                shape_to_string(av.shape()) + " + " +
                                shape_to_string(bv.shape()));
  }
  const std::size_t m = av.rows(), n = av.cols();
  TensorT<S> out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = av.at(i, j) + bv[j];
  const bool needs = tape.node(a.index).needs_grad || tape.node(bias.index).needs_grad;
  const auto ai = a.index, bi = bias.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, bi, oi, m, n](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      if (t.node(ai).needs_grad) {
        auto& ga = ensure_grad(t, ai);
        for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
      }
      if (t.node(bi).needs_grad) {
        auto& gb = ensure_grad(t, bi);
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += static_cast<double>(go.at(i, j));
          gb[j] += static_cast<S>(acc);
        }
      }
    };
  });
}

template <typename S>
VarT<S> mul(VarT<S> a, VarT<S> b) {
  require_same_tape(a, b, "mul");
  auto& tape = *a.tape;
  const auto& av = a.value();
  const auto& bv = b.value();
  require_same_shape(av, bv, "mul");
  TensorT<S> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * bv[i];
  const bool needs = tape.node(a.index).needs_grad || tape.node(b.index).needs_grad;
  const auto ai = a.index, bi = b.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, bi, oi](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      const auto& av2 = t.value(ai);
      const auto& bv2 = t.value(bi);
      if (t.node(ai).needs_grad) {
        auto& ga = ensure_grad(t, ai);
        for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * bv2[i];
      }
      if (t.node(bi).needs_grad) {
        auto& gb = ensure_grad(t, bi);
        for (std::size_t i = 0; i < go.numel(); ++i) gb[i] += go[i] * av2[i];
      }
    };
  });
}

template <typename S>
VarT<S> mul_const(VarT<S> a, const TensorT<S>& m) {
  auto& tape = *a.tape;
  const auto& av = a.value();
  require_same_shape(av, m, "mul_const");
  TensorT<S> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * m[i];
  const bool needs = tape.node(a.index).needs_grad;
  const auto ai = a.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, oi, m](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      auto& ga = ensure_grad(t, ai);
      for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * m[i];
    };
  });
}

template <typename S>
VarT<S> scale(VarT<S> a, S k) {
  auto& tape = *a.tape;
  const auto& av = a.value();
  TensorT<S> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * k;
  const bool needs = tape.node(a.index).needs_grad;
  const auto ai = a.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, oi, k](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      auto& ga = ensure_grad(t, ai);
      for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * k;
    };
  });
}

template <typename S>
VarT<S> sigmoid(VarT<S> a) {
  auto& tape = *a.tape;
  const auto& av = a.value();
  TensorT<S> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const double x = static_cast<double>(av[i]);
    out[i] = static_cast<S>(1.0 / (1.0 + std::exp(-x)));
  }
  const bool needs = tape.node(a.index).needs_grad;
  const auto ai = a.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, oi](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      const auto& y = t.value(oi);
      auto& ga = ensure_grad(t, ai);
      for (std::size_t i = 0; i < go.numel(); ++i)
        ga[i] += go[i] * y[i] * (S(1) - y[i]);
    };
  });
}

template <typename S>
VarT<S> tanh_act(VarT<S> a) {
  auto& tape = *a.tape;
  const auto& av = a.value();
  TensorT<S> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = static_cast<S>(std::tanh(static_cast<double>(av[i])));
  const bool needs = tape.node(a.index).needs_grad;
  const auto ai = a.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, oi](TapeT<S>& t) {
      const auto& go = t.grad(oi);
      const auto& y = t.value(oi);
      auto& ga = ensure_grad(t, ai);
      for (std::size_t i = 0; i < go.numel(); ++i)
        ga[i] += go[i] * (S(1) - y[i] * y[i]);
    };
  });
}

template <typename S>
VarT<S> slice_cols(VarT<S> a, std::size_t start, std::size_t len) {
  auto& tape = *a.tape;
  const auto& av = a.value();
  if (av.rank() != 2 || start + len > av.cols() || len == 0) {
    throw std::invalid_argument("slice_cols: range [" + std::to_string(start) + ", " +
                                std::to_string(start + len) + ") out of " +
                                shape_to_string(av.shape()));
  }
  const std::size_t m = av.rows(), n = av.cols();
  TensorT<S> out({m, len});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < len; ++j) out.at(i, j) = av.at(i, start + j);
  const bool needs = tape.node(a.index).needs_grad;
  const auto ai = a.index;
  return record(tape, std::move(out), needs, [&](std::int32_t oi) {
    return [ai, oi, start, len, m, n](TapeT<S>& t) {
      (void)n;
      const auto& go = t.grad(oi);
      auto& ga = ensure_grad(t, ai);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < len; ++j) ga.at(i, start + j) += go.at(i, j);
    };
  });
}

template <typename S>
VarT<S> sum_all(VarT<S> a) {
  auto& tape = *a.tape;
  const auto& av = a.value();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) acc += static_cast<double>(av[i]);
  const bool needs = tape.node(a.index).needs_grad;
  const auto ai = a.index;
  return record(tape, TensorT<S>::scalar(static_cast<S>(acc)), needs,
                [&](std::int32_t oi) {
                  return [ai, oi](TapeT<S>& t) {
                    const S go = t.grad(oi)[0];
                    auto& ga = ensure_grad(t, ai);
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += go;
                  };
                });
}

template <typename S>
VarT<S> weighted_softmax_xent(VarT<S> logits, const std::vector<int>& labels,
                              const TensorT<S>& class_weights) {
  auto& tape = *logits.tape;
  const auto& lv = logits.value();
  if (lv.rank() != 2)
    throw std::invalid_argument("weighted_softmax_xent: logits must be rank 2");
  const std::size_t batch = lv.rows(), classes = lv.cols();
  if (labels.size() != batch)
    throw std::invalid_argument("weighted_softmax_xent: got " +
                                std::to_string(labels.size()) + " labels for batch " +
                                std::to_string(batch));
  if (class_weights.numel() != classes)
    throw std::invalid_argument("weighted_softmax_xent: weight count " +
                                std::to_string(class_weights.numel()) +
                                " != class count " + std::to_string(classes));
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw std::out_of_range("weighted_softmax_xent: label " + std::to_string(y) +
                              " outside [0, " + std::to_string(classes) + ")");

  TensorT<S> probs({batch, classes});
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double mx = static_cast<double>(lv.at(i, 0));
    for (std::size_t c = 1; c < classes; ++c)
      mx = std::max(mx, static_cast<double>(lv.at(i, c)));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c)
      z += std::exp(static_cast<double>(lv.at(i, c)) - mx);
    for (std::size_t c = 0; c < classes; ++c)
      probs.at(i, c) =
          static_cast<S>(std::exp(static_cast<double>(lv.at(i, c)) - mx) / z);
    const int y = labels[i];
    const double logp_y = static_cast<double>(lv.at(i, y)) - mx - std::log(z);
    loss -= static_cast<double>(class_weights[static_cast<std::size_t>(y)]) * logp_y;
  }
  loss /= static_cast<double>(batch);

  const bool needs = tape.node(logits.index).needs_grad;
  const auto li = logits.index;
  return record(
      tape, TensorT<S>::scalar(static_cast<S>(loss)), needs, [&](std::int32_t oi) {
        return [li, oi, labels, class_weights, probs, batch, classes](TapeT<S>& t) {
          const S go = t.grad(oi)[0];
          auto& gl = ensure_grad(t, li);
          for (std::size_t i = 0; i < batch; ++i) {
            const int y = labels[i];
            const S w = class_weights[static_cast<std::size_t>(y)];
            const S f = go * w / static_cast<S>(batch);
            for (std::size_t c = 0; c < classes; ++c) {
              S p = probs.at(i, c);
              if (static_cast<int>(c) == y) p -= S(1);
              gl.at(i, c) += f * p;
            }
          }
        };
      });
}

template <typename S>
VarT<S> distill_xent(VarT<S> student_logits, const TensorT<S>& teacher_logits,
                     const std::vector<int>& columns, S temperature) {
  auto& tape = *student_logits.tape;
  const auto& sv = student_logits.value();
  if (columns.empty()) throw std::invalid_argument("distill_xent: empty column subset");
  if (sv.rank() != 2 || teacher_logits.rank() != 2 ||
      teacher_logits.rows() != sv.rows())
    throw std::invalid_argument("distill_xent: batch mismatch " +
                                shape_to_string(sv.shape()) + " vs " +
                                shape_to_string(teacher_logits.shape()));
  for (int c : columns) {
    if (c < 0 || static_cast<std::size_t>(c) >= sv.cols() ||
        static_cast<std::size_t>(c) >= teacher_logits.cols())
      throw std::invalid_argument("distill_xent: column " + std::to_string(c) +
                                  " out of range");
  }
  const std::size_t batch = sv.rows(), k = columns.size();
  const double invT = 1.0 / static_cast<double>(temperature);

  // Softened teacher targets and softened student probabilities over the
  // subset; both computed with max-subtraction.
  TensorT<S> teacher_p({batch, k});
  TensorT<S> student_p({batch, k});
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double tmx = -1e300, smx = -1e300;
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = static_cast<std::size_t>(columns[j]);
      tmx = std::max(tmx, static_cast<double>(teacher_logits.at(i, c)) * invT);
      smx = std::max(smx, static_cast<double>(sv.at(i, c)) * invT);
    }
    double tz = 0.0, sz = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = static_cast<std::size_t>(columns[j]);
      tz += std::exp(static_cast<double>(teacher_logits.at(i, c)) * invT - tmx);
      sz += std::exp(static_cast<double>(sv.at(i, c)) * invT - smx);
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = static_cast<std::size_t>(columns[j]);
      const double tp =
          std::exp(static_cast<double>(teacher_logits.at(i, c)) * invT - tmx) / tz;
      const double slogp =
          static_cast<double>(sv.at(i, c)) * invT - smx - std::log(sz);
      teacher_p.at(i, j) = static_cast<S>(tp);
      student_p.at(i, j) = static_cast<S>(std::exp(slogp));
      loss -= tp * slogp;
    }
  }
  loss *= static_cast<double>(temperature) * static_cast<double>(temperature) /
          static_cast<double>(batch);

  const bool needs = tape.node(student_logits.index).needs_grad;
  const auto si = student_logits.index;
  return record(
      tape, TensorT<S>::scalar(static_cast<S>(loss)), needs, [&](std::int32_t oi) {
        return [si, oi, columns, teacher_p, student_p, batch, k,
                temperature](TapeT<S>& t) {
          const S go = t.grad(oi)[0];
          auto& gs = ensure_grad(t, si);
          // d/ds of T^2 * CE(p, softmax(s/T)) = T * (q - p)
          const S f = go * temperature / static_cast<S>(batch);
          for (std::size_t i = 0; i < batch; ++i)
            for (std::size_t j = 0; j < k; ++j)
              gs.at(i, static_cast<std::size_t>(columns[j])) +=
                  f * (student_p.at(i, j) - teacher_p.at(i, j));
        };
      });
}

template <typename S>
VarT<S> quad_penalty(VarT<S> theta, const TensorT<S>& anchor,
                     const TensorT<S>& coeff) {
  auto& tape = *theta.tape;
  const auto& tv = theta.value();
  require_same_shape(tv, anchor, "quad_penalty(anchor)");
  require_same_shape(tv, coeff, "quad_penalty(coeff)");
  double acc = 0.0;
  for (std::size_t i = 0; i < tv.numel(); ++i) {
    const double d = static_cast<double>(tv[i]) - static_cast<double>(anchor[i]);
    acc += static_cast<double>(coeff[i]) * d * d;
  }
  const bool needs = tape.node(theta.index).needs_grad;
  const auto ti = theta.index;
  return record(tape, TensorT<S>::scalar(static_cast<S>(acc)), needs,
                [&](std::int32_t oi) {
                  return [ti, oi, anchor, coeff](TapeT<S>& t) {
                    const S go = t.grad(oi)[0];
                    const auto& tv2 = t.value(ti);
                    auto& gt = ensure_grad(t, ti);
                    for (std::size_t i = 0; i < tv2.numel(); ++i)
                      gt[i] += go * S(2) * coeff[i] * (tv2[i] - anchor[i]);
                  };
                });
}

template <typename S>
TensorT<S> softmax_rows(const TensorT<S>& logits) {
  if (logits.rank() != 2)
    throw std::invalid_argument("softmax_rows: expected rank-2 tensor");
  TensorT<S> out(logits.shape());
  const std::size_t m = logits.rows(), n = logits.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double mx = static_cast<double>(logits.at(i, 0));
    for (std::size_t j = 1; j < n; ++j)
      mx = std::max(mx, static_cast<double>(logits.at(i, j)));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      z += std::exp(static_cast<double>(logits.at(i, j)) - mx);
    for (std::size_t j = 0; j < n; ++j)
      out.at(i, j) = static_cast<S>(std::exp(static_cast<double>(logits.at(i, j)) - mx) / z);
  }
  return out;
}

template class TapeT<float>;
template class TapeT<double>;

#define DRIFTBENCH_INSTANTIATE_OPS(S)                                                    \
  template VarT<S> matmul<S>(VarT<S>, VarT<S>);                                          \
  template VarT<S> add<S>(VarT<S>, VarT<S>);                                             \
  template VarT<S> add_bias<S>(VarT<S>, VarT<S>);                                        \
  template VarT<S> mul<S>(VarT<S>, VarT<S>);                                             \
  template VarT<S> mul_const<S>(VarT<S>, const TensorT<S>&);                             \
  template VarT<S> scale<S>(VarT<S>, S);                                                 \
  template VarT<S> sigmoid<S>(VarT<S>);                                                  \
  template VarT<S> tanh_act<S>(VarT<S>);                                                 \
  template VarT<S> slice_cols<S>(VarT<S>, std::size_t, std::size_t);                     \
  template VarT<S> sum_all<S>(VarT<S>);                                                  \
  template VarT<S> weighted_softmax_xent<S>(VarT<S>, const std::vector<int>&,            \
                                            const TensorT<S>&);                          \
  template VarT<S> distill_xent<S>(VarT<S>, const TensorT<S>&,                           \
                                   const std::vector<int>&, S);                          \
  template VarT<S> quad_penalty<S>(VarT<S>, const TensorT<S>&, const TensorT<S>&);       \
  template TensorT<S> softmax_rows<S>(const TensorT<S>&);

DRIFTBENCH_INSTANTIATE_OPS(float)
DRIFTBENCH_INSTANTIATE_OPS(double)
#undef DRIFTBENCH_INSTANTIATE_OPS

}  // namespace driftbench
