#include "autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"

namespace pcsod::ad {
namespace {

thread_local BranchTrace* active_trace = nullptr;

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapC = Eigen::Map<const RowMat<T>>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;

template <typename T>
Node<T>& parent(Node<T>& self, std::size_t i) {
  return *self.parents[i];
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw_data(msg);
}

template <typename T>
Shape with_cols(const Shape& shape, std::size_t cols) {
  Shape out = shape;
  if (out.empty()) out.push_back(cols);
  else out.back() = cols;
  return out;
}

template <typename T>
void check_grouped(const Tensor<T>& x, const char* op) {
  require(x.shape().size() == 3, std::string(op) + ": expected [M,k,C], got " + shape_string(x.shape()));
  require(x.shape()[1] >= 1, std::string(op) + ": neighbor count must be positive");
}

}  // namespace

template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w) {
  require(w.shape().size() == 2, "matmul: weight must be 2-D, got " + shape_string(w.shape()));
  const std::size_t k = w.shape()[0], c = w.shape()[1];
  require(x.cols() == k, "matmul: width mismatch " + shape_string(x.shape()) + " x " + shape_string(w.shape()));
  const std::size_t r = x.rows();
  std::vector<T> out(r * c);
  Map<T>(out.data(), r, c).noalias() = MapC<T>(x.data().data(), r, k) * MapC<T>(w.data().data(), k, c);
  return tape.record(with_cols<T>(x.shape(), c), std::move(out), {x, w}, [r, k, c](Node<T>& self) {
    MapC<T> dy(self.grad.data(), r, c);
    Node<T>& xn = parent(self, 0);
    Node<T>& wn = parent(self, 1);
    if (xn.requires_grad) {
      Map<T>(xn.ensure_grad().data(), r, k).noalias() += dy * MapC<T>(wn.value.data(), k, c).transpose();
    }
    if (wn.requires_grad) {
      Map<T>(wn.ensure_grad().data(), k, c).noalias() += MapC<T>(xn.value.data(), r, k).transpose() * dy;
    }
  });
}

template <typename T>
Tensor<T> add_bias(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& b) {
  const std::size_t r = x.rows(), c = x.cols();
  require(b.size() == c, "add_bias: bias length mismatch");
  std::vector<T> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += b.data()[j];
  }
  return tape.record(x.shape(), std::move(out), {x, b}, [r, c](Node<T>& self) {
    Node<T>& xn = parent(self, 0);
    Node<T>& bn = parent(self, 1);
    if (xn.requires_grad) {
      auto& g = xn.ensure_grad();
      for (std::size_t i = 0; i < r * c; ++i) g[i] += self.grad[i];
    }
    if (bn.requires_grad) {
      auto& g = bn.ensure_grad();
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) g[j] += self.grad[i * c + j];
      }
    }
  });
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return tape.record(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      Node<T>& n = parent(self, p);
      if (!n.requires_grad) continue;
      auto& g = n.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return tape.record(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& an = parent(self, 0);
    Node<T>& bn = parent(self, 1);
    if (an.requires_grad) {
      auto& g = an.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn.value[i];
    }
    if (bn.requires_grad) {
      auto& g = bn.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an.value[i];
    }
  });
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor;
  return tape.record(x.shape(), std::move(out), {x}, [factor](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(x.data()[i], T(0));
  if (active_trace) {
    for (std::size_t i = 0; i < out.size(); ++i) active_trace->mix(out[i] > T(0) ? 2 * i + 1 : 2 * i);
  }
  return tape.record(x.shape(), std::move(out), {x}, [](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (self.value[i] > T(0)) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> concat(Tape<T>& tape, const std::vector<Tensor<T>>& parts) {
  require(!parts.empty(), "concat: no inputs");
  const std::size_t r = parts[0].rows();
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape pl = p.shape();
    pl.pop_back();
    require(pl == lead, "concat: leading-dim mismatch " + shape_string(parts[0].shape()) + " vs " +
                            shape_string(p.shape()));
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<T> out(r * total);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const T* src = parts[p].data().data();
    const std::size_t w = widths[p];
    for (std::size_t i = 0; i < r; ++i) std::copy_n(src + i * w, w, &out[i * total + offset]);
    offset += w;
  }
  return tape.record(with_cols<T>(parts[0].shape(), total), std::move(out), parts,
                     [r, total, widths](Node<T>& self) {
                       std::size_t off = 0;
                       for (std::size_t p = 0; p < widths.size(); ++p) {
                         Node<T>& n = parent(self, p);
                         const std::size_t w = widths[p];
                         if (n.requires_grad) {
                           auto& g = n.ensure_grad();
                           for (std::size_t i = 0; i < r; ++i) {
                             const T* src = &self.grad[i * total + off];
                             T* dst = &g[i * w];
                             for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
                           }
                         }
                         off += w;
                       }
                     });
}

template <typename T>
Tensor<T> gather_rows(Tape<T>& tape, const Tensor<T>& x, std::span<const std::size_t> indices, Shape leading) {
  const std::size_t c = x.cols();
  const std::size_t rows_in = x.rows();
  require(element_count(leading) == indices.size(), "gather_rows: leading dims do not match index count");
  std::vector<T> out(indices.size() * c);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < rows_in, "gather_rows: index out of range");
    std::copy_n(&x.data()[indices[i] * c], c, &out[i * c]);
  }
  leading.push_back(c);
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return tape.record(std::move(leading), std::move(out), {x}, [idx = std::move(idx), c](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const T* src = &self.grad[i * c];
      T* dst = &g[idx[i] * c];
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

template <typename T>
Tensor<T> weighted_gather(Tape<T>& tape, const Tensor<T>& x, std::span<const std::size_t> indices,
                          std::span<const double> weights, std::size_t per_row) {
  require(per_row > 0 && indices.size() % per_row == 0 && weights.size() == indices.size(),
          "weighted_gather: bad index/weight table");
  const std::size_t c = x.cols();
  const std::size_t rows = indices.size() / per_row;
  std::vector<T> out(rows * c, T(0));
  for (std::size_t i = 0; i < rows; ++i) {
    T* dst = &out[i * c];
    for (std::size_t j = 0; j < per_row; ++j) {
      const std::size_t src_row = indices[i * per_row + j];
      require(src_row < x.rows(), "weighted_gather: index out of range");
      const T w = static_cast<T>(weights[i * per_row + j]);
      const T* src = &x.data()[src_row * c];
      for (std::size_t k = 0; k < c; ++k) dst[k] += w * src[k];
    }
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<T> wts(weights.begin(), weights.end());
  return tape.record({rows, c}, std::move(out), {x},
                     [idx = std::move(idx), wts = std::move(wts), rows, per_row, c](Node<T>& self) {
                       auto& g = parent(self, 0).ensure_grad();
                       for (std::size_t i = 0; i < rows; ++i) {
                         const T* src = &self.grad[i * c];
                         for (std::size_t j = 0; j < per_row; ++j) {
                           const T w = wts[i * per_row + j];
                           T* dst = &g[idx[i * per_row + j] * c];
                           for (std::size_t k = 0; k < c; ++k) dst[k] += w * src[k];
                         }
                       }
                     });
}

template <typename T>
Tensor<T> group_max(Tape<T>& tape, const Tensor<T>& x) {
  check_grouped(x, "group_max");
  const std::size_t m = x.shape()[0], k = x.shape()[1], c = x.shape()[2];
  std::vector<T> out(m * c);
  std::vector<std::uint32_t> arg(m * c);
  const T* in = x.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    T* o = &out[i * c];
    std::uint32_t* a = &arg[i * c];
    std::copy_n(in + i * k * c, c, o);
    std::fill_n(a, c, 0u);
    for (std::size_t j = 1; j < k; ++j) {
      const T* row = in + (i * k + j) * c;
      for (std::size_t ch = 0; ch < c; ++ch) {
        if (row[ch] > o[ch]) {
          o[ch] = row[ch];
          a[ch] = static_cast<std::uint32_t>(j);
        }
      }
    }
  }
  if (active_trace) {
    for (std::size_t i = 0; i < arg.size(); ++i) active_trace->mix(i * k + arg[i]);
  }
  return tape.record({m, c}, std::move(out), {x}, [arg = std::move(arg), m, k, c](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) g[(i * k + arg[i * c + ch]) * c + ch] += self.grad[i * c + ch];
    }
  });
}

template <typename T>
Tensor<T> group_sum(Tape<T>& tape, const Tensor<T>& x) {
  check_grouped(x, "group_sum");
  const std::size_t m = x.shape()[0], k = x.shape()[1], c = x.shape()[2];
  std::vector<T> out(m * c, T(0));
  const T* in = x.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const T* row = in + (i * k + j) * c;
      for (std::size_t ch = 0; ch < c; ++ch) out[i * c + ch] += row[ch];
    }
  }
  return tape.record({m, c}, std::move(out), {x}, [m, k, c](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        T* row = &g[(i * k + j) * c];
        for (std::size_t ch = 0; ch < c; ++ch) row[ch] += self.grad[i * c + ch];
      }
    }
  });
}

template <typename T>
Tensor<T> group_mean(Tape<T>& tape, const Tensor<T>& x) {
  check_grouped(x, "group_mean");
  return scale(tape, group_sum(tape, x), T(1) / static_cast<T>(x.shape()[1]));
}

template <typename T>
Tensor<T> group_softmax(Tape<T>& tape, const Tensor<T>& x) {
  check_grouped(x, "group_softmax");
  const std::size_t m = x.shape()[0], k = x.shape()[1], c = x.shape()[2];
  std::vector<T> out(x.size());
  const T* in = x.data().data();
  std::vector<T> peak(c), total(c);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(in + i * k * c, c, peak.begin());
    for (std::size_t j = 1; j < k; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) peak[ch] = std::max(peak[ch], in[(i * k + j) * c + ch]);
    }
    std::fill(total.begin(), total.end(), T(0));
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t at = (i * k + j) * c + ch;
        out[at] = std::exp(in[at] - peak[ch]);
        total[ch] += out[at];
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) out[(i * k + j) * c + ch] /= total[ch];
    }
  }
  return tape.record(x.shape(), std::move(out), {x}, [m, k, c](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    std::vector<T> dot(c);
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(dot.begin(), dot.end(), T(0));
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const std::size_t at = (i * k + j) * c + ch;
          dot[ch] += self.grad[at] * self.value[at];
        }
      }
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const std::size_t at = (i * k + j) * c + ch;
          g[at] += self.value[at] * (self.grad[at] - dot[ch]);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> softmax_rows(Tape<T>& tape, const Tensor<T>& x) {
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < r; ++i) {
    const T* in = &x.data()[i * c];
    T* o = &out[i * c];
    const T peak = *std::max_element(in, in + c);
    T total = 0;
    for (std::size_t j = 0; j < c; ++j) {
      o[j] = std::exp(in[j] - peak);
      total += o[j];
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= total;
  }
  return tape.record(x.shape(), std::move(out), {x}, [r, c](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      const T* y = &self.value[i * c];
      const T* dy = &self.grad[i * c];
      T dot = 0;
      for (std::size_t j = 0; j < c; ++j) dot += y[j] * dy[j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += y[j] * (dy[j] - dot);
    }
  });
}

template <typename T>
Tensor<T> cross_entropy(Tape<T>& tape, const Tensor<T>& logits, std::span<const std::uint8_t> labels) {
  const std::size_t r = logits.rows(), c = logits.cols();
  require(labels.size() == r, "cross_entropy: label count mismatch");
  require(r > 0, "cross_entropy: empty batch");
  std::vector<T> prob(r * c);
  double loss = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    require(labels[i] < c, "cross_entropy: label outside class range");
    const T* in = &logits.data()[i * c];
    const T peak = *std::max_element(in, in + c);
    T total = 0;
    for (std::size_t j = 0; j < c; ++j) {
      prob[i * c + j] = std::exp(in[j] - peak);
      total += prob[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) prob[i * c + j] /= total;
    loss += static_cast<double>(peak + std::log(total) - in[labels[i]]);
  }
  std::vector<std::uint8_t> lab(labels.begin(), labels.end());
  return tape.record({1}, {static_cast<T>(loss / static_cast<double>(r))}, {logits},
                     [prob = std::move(prob), lab = std::move(lab), r, c](Node<T>& self) {
                       auto& g = parent(self, 0).ensure_grad();
                       const T s = self.grad[0] / static_cast<T>(r);
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < c; ++j) {
                           g[i * c + j] += s * (prob[i * c + j] - (j == lab[i] ? T(1) : T(0)));
                         }
                       }
                     });
}

template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  return tape.record({1}, {total}, {x}, [](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> weighted_sum(Tape<T>& tape, const Tensor<T>& x, std::span<const T> weights) {
  require(weights.size() == x.size(), "weighted_sum: weight count mismatch");
  T total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x.data()[i] * weights[i];
  std::vector<T> w(weights.begin(), weights.end());
  return tape.record({1}, {total}, {x}, [w = std::move(w)](Node<T>& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * w[i];
  });
}

template <typename T>
Tensor<T> batch_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     BatchNormBuffers<T>& buffers, bool training, double momentum, double eps) {
  const std::size_t r = x.rows(), c = x.cols();
  require(gamma.size() == c && beta.size() == c, "batch_norm: parameter width mismatch");
  require(buffers.running_mean.size() == c && buffers.running_var.size() == c, "batch_norm: buffer width mismatch");
  require(r > 0, "batch_norm: empty input");
  const T* in = x.data().data();
  std::vector<T> mean(c), inv_std(c);
  if (training) {
    std::vector<double> s(c, 0.0), sq(c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      const T* row = in + i * c;
      for (std::size_t j = 0; j < c; ++j) s[j] += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) s[j] /= static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i) {
      const T* row = in + i * c;
      for (std::size_t j = 0; j < c; ++j) {
        const double d = row[j] - s[j];
        sq[j] += d * d;
      }
    }
    for (std::size_t j = 0; j < c; ++j) {
      const double var = sq[j] / static_cast<double>(r);
      mean[j] = static_cast<T>(s[j]);
      inv_std[j] = static_cast<T>(1.0 / std::sqrt(var + eps));
      const double unbiased = r > 1 ? sq[j] / static_cast<double>(r - 1) : var;
      buffers.running_mean[j] = static_cast<T>(momentum * buffers.running_mean[j] + (1.0 - momentum) * s[j]);
      buffers.running_var[j] = static_cast<T>(momentum * buffers.running_var[j] + (1.0 - momentum) * unbiased);
    }
  } else {
    for (std::size_t j = 0; j < c; ++j) {
      mean[j] = buffers.running_mean[j];
      inv_std[j] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(buffers.running_var[j]) + eps));
    }
  }
  std::vector<T> xhat(r * c), out(r * c);
  const T* gm = gamma.data().data();
  const T* bt = beta.data().data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const T h = (in[i * c + j] - mean[j]) * inv_std[j];
      xhat[i * c + j] = h;
      out[i * c + j] = gm[j] * h + bt[j];
    }
  }
  return tape.record(x.shape(), std::move(out), {x, gamma, beta},
                     [xhat = std::move(xhat), inv_std = std::move(inv_std), r, c, training](Node<T>& self) {
                       Node<T>& xn = parent(self, 0);
                       Node<T>& gn = parent(self, 1);
                       Node<T>& bn = parent(self, 2);
                       std::vector<T> dg(c, T(0)), db(c, T(0));
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < c; ++j) {
                           const T dy = self.grad[i * c + j];
                           db[j] += dy;
                           dg[j] += dy * xhat[i * c + j];
                         }
                       }
                       if (gn.requires_grad) {
                         auto& g = gn.ensure_grad();
                         for (std::size_t j = 0; j < c; ++j) g[j] += dg[j];
                       }
                       if (bn.requires_grad) {
                         auto& g = bn.ensure_grad();
                         for (std::size_t j = 0; j < c; ++j) g[j] += db[j];
                       }
                       if (!xn.requires_grad) return;
                       auto& g = xn.ensure_grad();
                       const T* gm = gn.value.data();
                       const T inv_r = T(1) / static_cast<T>(r);
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < c; ++j) {
                           const T dy = self.grad[i * c + j];
                           const T k = gm[j] * inv_std[j];
                           if (training) {
                             g[i * c + j] += k * (dy - inv_r * db[j] - inv_r * xhat[i * c + j] * dg[j]);
                           } else {
                             g[i * c + j] += k * dy;
                           }
                         }
                       }
                     });
}

#define PCSOD_INSTANTIATE_OPS(T)                                                                                \
  template Tensor<T> matmul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                                     \
  template Tensor<T> add_bias(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> add(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> mul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> scale(Tape<T>&, const Tensor<T>&, T);                                                      \
  template Tensor<T> relu(Tape<T>&, const Tensor<T>&);                                                          \
  template Tensor<T> concat(Tape<T>&, const std::vector<Tensor<T>>&);                                          \
  template Tensor<T> gather_rows(Tape<T>&, const Tensor<T>&, std::span<const std::size_t>, Shape);             \
  template Tensor<T> weighted_gather(Tape<T>&, const Tensor<T>&, std::span<const std::size_t>,                 \
                                     std::span<const double>, std::size_t);                                     \
  template Tensor<T> group_max(Tape<T>&, const Tensor<T>&);                                                     \
  template Tensor<T> group_mean(Tape<T>&, const Tensor<T>&);                                                    \
  template Tensor<T> group_sum(Tape<T>&, const Tensor<T>&);                                                     \
  template Tensor<T> group_softmax(Tape<T>&, const Tensor<T>&);                                                 \
  template Tensor<T> softmax_rows(Tape<T>&, const Tensor<T>&);                                                  \
  template Tensor<T> cross_entropy(Tape<T>&, const Tensor<T>&, std::span<const std::uint8_t>);                 \
  template Tensor<T> sum(Tape<T>&, const Tensor<T>&);                                                           \
  template Tensor<T> weighted_sum(Tape<T>&, const Tensor<T>&, std::span<const T>);                             \
  template Tensor<T> batch_norm(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                \
                                BatchNormBuffers<T>&, bool, double, double);

void set_branch_trace(BranchTrace* trace) { active_trace = trace; }

PCSOD_INSTANTIATE_OPS(float)
PCSOD_INSTANTIATE_OPS(double)

}  // namespace pcsod::ad
