#include "ctxgate/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ctxgate/errors.hpp"

namespace ctxgate {

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
          std::span<const T> b, std::span<T> c, bool accumulate) {
  if (a.size() < m * k || b.size() < k * n || c.size() < m * n) throw ShapeError("gemm: buffer too small");
  if (!accumulate) std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(m * n), T{0});
  const T* A = a.data();
  const T* B = b.data();
  T* C = c.data();
  if (!trans_a && !trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      T* ci = C + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const T aip = A[i * k + p];
        const T* bp = B + p * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
      }
    }
  } else if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      const T* ai = A + i * k;
      for (std::size_t j = 0; j < n; ++j) {
        const T* bj = B + j * k;
        T acc{0};
        for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
        C[i * n + j] += acc;
      }
    }
  } else if (trans_a && !trans_b) {
    for (std::size_t p = 0; p < k; ++p) {
      const T* ap = A + p * m;
      const T* bp = B + p * n;
      for (std::size_t i = 0; i < m; ++i) {
        const T api = ap[i];
        T* ci = C + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        T acc{0};
        for (std::size_t p = 0; p < k; ++p) acc += A[p * m + i] * B[j * k + p];
        C[i * n + j] += acc;
      }
  }
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  BasicTensor<T> c({m, n});
  gemm<T>(false, false, m, n, k, a.data(), b.data(), c.data(), false);
  return c;
}

template <typename T>
MatmulGrads<T> matmul_backward(const BasicTensor<T>& a, const BasicTensor<T>& b, const BasicTensor<T>& dc) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0) || dc.rank() != 2 || dc.dim(0) != a.dim(0) ||
      dc.dim(1) != b.dim(1)) {
    throw ShapeError("matmul_backward: incompatible shapes " + shape_to_string(a.shape()) + ", " +
                     shape_to_string(b.shape()) + ", " + shape_to_string(dc.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  MatmulGrads<T> g{BasicTensor<T>(a.shape()), BasicTensor<T>(b.shape())};
  gemm<T>(false, true, m, k, n, dc.data(), b.data(), g.da.data(), false);
  gemm<T>(true, false, k, n, m, a.data(), dc.data(), g.db.data(), false);
  return g;
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias) {
  if (w.rank() != 2 || x.cols() != w.dim(0) || bias.numel() != w.dim(1)) {
    throw ShapeError("linear: incompatible shapes x=" + shape_to_string(x.shape()) +
                     " w=" + shape_to_string(w.shape()) + " b=" + shape_to_string(bias.shape()));
  }
  const std::size_t rows = x.rows(), in = w.dim(0), out = w.dim(1);
  Shape shape = x.shape();
  shape.back() = out;
  BasicTensor<T> y(shape);
  for (std::size_t r = 0; r < rows; ++r) std::copy(bias.data().begin(), bias.data().end(), y.row(r).begin());
  gemm<T>(false, false, rows, out, in, x.data(), w.data(), y.data(), true);
  return y;
}

template <typename T>
BasicTensor<T> linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                               BasicTensor<T>& dw, BasicTensor<T>& dbias) {
  const std::size_t rows = x.rows(), in = w.dim(0), out = w.dim(1);
  if (dy.rows() != rows || dy.cols() != out || !dw.same_shape(w) || dbias.numel() != out) {
    throw ShapeError("linear_backward: incompatible shapes x=" + shape_to_string(x.shape()) +
                     " dy=" + shape_to_string(dy.shape()));
  }
  BasicTensor<T> dx(x.shape());
  gemm<T>(false, true, rows, in, out, dy.data(), w.data(), dx.data(), false);
  gemm<T>(true, false, in, out, rows, x.data(), dy.data(), dw.data(), true);
  for (std::size_t r = 0; r < rows; ++r) {
    auto dr = dy.row(r);
    for (std::size_t j = 0; j < out; ++j) dbias[j] += dr[j];
  }
  return dx;
}

template <typename T>
BasicTensor<T> softmax_rows(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const T mx = *std::max_element(in.begin(), in.end());
    if (mx == -std::numeric_limits<T>::infinity()) {
      // Every entry masked: no probability mass to distribute.
      std::fill(out.begin(), out.end(), T{0});
      continue;
    }
    T sum{0};
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
  }
  return y;
}

template <typename T>
BasicTensor<T> softmax_rows_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
  if (!y.same_shape(dy)) throw ShapeError("softmax_rows_backward: shape mismatch");
  BasicTensor<T> dx(y.shape());
  const std::size_t n = y.cols();
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto yr = y.row(r);
    auto dyr = dy.row(r);
    auto dxr = dx.row(r);
    T dot{0};
    for (std::size_t j = 0; j < n; ++j) dot += yr[j] * dyr[j];
    for (std::size_t j = 0; j < n; ++j) dxr[j] = yr[j] * (dyr[j] - dot);
  }
  return dx;
}

template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta, T eps,
                          LayerNormCache<T>* cache) {
  const std::size_t d = x.cols();
  if (gamma.numel() != d || beta.numel() != d) {
    throw ShapeError("layer_norm: gamma/beta size does not match last axis of " + shape_to_string(x.shape()));
  }
  if (!(eps > T{0})) throw ArgumentError("layer_norm: eps must be positive");
  BasicTensor<T> y(x.shape());
  BasicTensor<T> xhat(x.shape());
  std::vector<T> rstds(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    T mean{0};
    for (auto v : in) mean += v;
    mean /= static_cast<T>(d);
    T var{0};
    for (auto v : in) var += (v - mean) * (v - mean);
    var /= static_cast<T>(d);
    const T rstd = T{1} / std::sqrt(var + eps);
    rstds[r] = rstd;
    auto nr = xhat.row(r);
    auto out = y.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      nr[j] = (in[j] - mean) * rstd;
      out[j] = nr[j] * gamma[j] + beta[j];
    }
  }
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->rstd = std::move(rstds);
  }
  return y;
}

template <typename T>
LayerNormGrads<T> layer_norm_backward(const LayerNormCache<T>& cache, const BasicTensor<T>& gamma,
                                      const BasicTensor<T>& dy) {
  const auto& xhat = cache.normalized;
  if (!xhat.same_shape(dy)) throw ShapeError("layer_norm_backward: shape mismatch");
  const std::size_t d = dy.cols();
  LayerNormGrads<T> g{BasicTensor<T>(dy.shape()), BasicTensor<T>({d}), BasicTensor<T>({d})};
  std::vector<T> dxhat(d);
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    auto dyr = dy.row(r);
    auto nr = xhat.row(r);
    T mean_d{0}, mean_dn{0};
    for (std::size_t j = 0; j < d; ++j) {
      g.dgamma[j] += dyr[j] * nr[j];
      g.dbeta[j] += dyr[j];
      dxhat[j] = dyr[j] * gamma[j];
      mean_d += dxhat[j];
      mean_dn += dxhat[j] * nr[j];
    }
    mean_d /= static_cast<T>(d);
    mean_dn /= static_cast<T>(d);
    auto dxr = g.dx.row(r);
    const T rstd = cache.rstd[r];
    for (std::size_t j = 0; j < d; ++j) dxr[j] = rstd * (dxhat[j] - mean_d - nr[j] * mean_dn);
  }
  return g;
}

template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const T v = x[i];
    y[i] = T{0.5} * v * (T{1} + std::erf(v * inv_sqrt2));
  }
  return y;
}

template <typename T>
BasicTensor<T> gelu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy) {
  if (!x.same_shape(dy)) throw ShapeError("gelu_backward: shape mismatch");
  BasicTensor<T> dx(x.shape());
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  const T inv_sqrt2pi = static_cast<T>(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const T v = x[i];
    const T cdf = T{0.5} * (T{1} + std::erf(v * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T{-0.5} * v * v);
    dx[i] = dy[i] * (cdf + v * pdf);
  }
  return dx;
}

template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool train_mode, Rng& rng,
                       std::optional<BasicTensor<T>>* mask) {
  if (!(p >= 0.0 && p < 1.0)) throw ArgumentError("dropout: p must be in [0, 1), got " + std::to_string(p));
  if (mask) mask->reset();
  if (!train_mode || p == 0.0) return x;
  BasicTensor<T> m(x.shape());
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < m.numel(); ++i) m[i] = rng.uniform() < p ? T{0} : scale;
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = x[i] * m[i];
  if (mask) *mask = std::move(m);
  return y;
}

template <typename T>
BasicTensor<T> dropout_backward(const std::optional<BasicTensor<T>>& mask, const BasicTensor<T>& dy) {
  if (!mask) return dy;
  if (!mask->same_shape(dy)) throw ShapeError("dropout_backward: shape mismatch");
  BasicTensor<T> dx(dy.shape());
  for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] = dy[i] * (*mask)[i];
  return dx;
}

template <typename T>
CrossEntropyResult<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                    std::optional<std::pair<double, double>> class_weights) {
  if (logits.rank() != 2) throw ShapeError("cross_entropy: logits must be [B,C], got " + shape_to_string(logits.shape()));
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw ArgumentError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                        std::to_string(batch));
  }
  if (class_weights && classes != 2) throw ArgumentError("cross_entropy: class weights require two classes");
  for (std::size_t r = 0; r < batch; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
      throw ArgumentError("cross_entropy: label " + std::to_string(labels[r]) + " out of range in row " +
                          std::to_string(r));
    }
  }
  auto weight_of = [&](int label) -> T {
    if (!class_weights) return T{1};
    return static_cast<T>(label == 0 ? class_weights->first : class_weights->second);
  };
  T total_weight{0};
  for (std::size_t r = 0; r < batch; ++r) total_weight += weight_of(labels[r]);
  if (!(total_weight > T{0})) throw ArgumentError("cross_entropy: class weights sum to zero over the batch");

  BasicTensor<T> probs = softmax_rows(logits);
  CrossEntropyResult<T> out{T{0}, BasicTensor<T>(logits.shape())};
  for (std::size_t r = 0; r < batch; ++r) {
    auto lr = logits.row(r);
    // log_z - x_y = (mx - x_y) + log1p(sum of the non-max terms): stays
    // accurate when a confident row's loss is far below 1.
    const auto top = static_cast<std::size_t>(std::max_element(lr.begin(), lr.end()) - lr.begin());
    const T mx = lr[top];
    T rest{0};
    for (std::size_t c = 0; c < classes; ++c)
      if (c != top) rest += std::exp(lr[c] - mx);
    const auto y = static_cast<std::size_t>(labels[r]);
    const T w = weight_of(labels[r]) / total_weight;
    out.loss += w * ((mx - lr[y]) + std::log1p(rest));
    auto pr = probs.row(r);
    auto dr = out.dlogits.row(r);
    for (std::size_t c = 0; c < classes; ++c) dr[c] = w * (pr[c] - (c == y ? T{1} : T{0}));
  }
  return out;
}

template <typename T>
BasicTensor<T> finite_diff_grad(const std::function<T(const BasicTensor<T>&)>& f, const BasicTensor<T>& x, T h) {
  if (!(h > T{0})) throw ArgumentError("finite_diff_grad: h must be positive");
  BasicTensor<T> g(x.shape());
  BasicTensor<T> probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const T orig = probe[i];
    probe[i] = orig + h;
    const T up = f(probe);
    probe[i] = orig - h;
    const T down = f(probe);
    probe[i] = orig;
    g[i] = (up - down) / (T{2} * h);
  }
  return g;
}

#define CTXGATE_INSTANTIATE_OPS(T)                                                                              \
  template void gemm<T>(bool, bool, std::size_t, std::size_t, std::size_t, std::span<const T>,                 \
                        std::span<const T>, std::span<T>, bool);                                               \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                                 \
  template MatmulGrads<T> matmul_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> linear_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,  \
                                          BasicTensor<T>&, BasicTensor<T>&);                                    \
  template BasicTensor<T> softmax_rows(const BasicTensor<T>&);                                                  \
  template BasicTensor<T> softmax_rows_backward(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> layer_norm(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, T,    \
                                     LayerNormCache<T>*);                                                       \
  template LayerNormGrads<T> layer_norm_backward(const LayerNormCache<T>&, const BasicTensor<T>&,               \
                                                 const BasicTensor<T>&);                                        \
  template BasicTensor<T> gelu(const BasicTensor<T>&);                                                          \
  template BasicTensor<T> gelu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                          \
  template BasicTensor<T> dropout(const BasicTensor<T>&, double, bool, Rng&, std::optional<BasicTensor<T>>*);   \
  template BasicTensor<T> dropout_backward(const std::optional<BasicTensor<T>>&, const BasicTensor<T>&);        \
  template CrossEntropyResult<T> cross_entropy(const BasicTensor<T>&, std::span<const int>,                     \
                                               std::optional<std::pair<double, double>>);                       \
  template BasicTensor<T> finite_diff_grad(const std::function<T(const BasicTensor<T>&)>&, const BasicTensor<T>&, T);

CTXGATE_INSTANTIATE_OPS(float)
CTXGATE_INSTANTIATE_OPS(double)

#undef CTXGATE_INSTANTIATE_OPS

}  // namespace ctxgate
