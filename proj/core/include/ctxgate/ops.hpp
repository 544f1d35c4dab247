#pragma once

// Differentiable primitives. Every forward op has a paired explicit backward;
// gradient-check suites instantiate these at double precision.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ctxgate/rng.hpp"
#include "ctxgate/tensor.hpp"

namespace ctxgate {

/// C = op(A) * op(B), with op = transpose when the flag is set. A is m x k
/// after op, B is k x n after op. When accumulate is true C is added to.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
          std::span<const T> b, std::span<T> c, bool accumulate);

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
struct MatmulGrads {
  BasicTensor<T> da;
  BasicTensor<T> db;
};

/// dA = dC * B^T, dB = A^T * dC.
template <typename T>
MatmulGrads<T> matmul_backward(const BasicTensor<T>& a, const BasicTensor<T>& b, const BasicTensor<T>& dc);

/// y = x * w + bias over the last axis of x. w is [in, out], bias is [out].
template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias);

/// Returns dx and accumulates into dw and dbias.
template <typename T>
BasicTensor<T> linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                               BasicTensor<T>& dw, BasicTensor<T>& dbias);

template <typename T>
BasicTensor<T> softmax_rows(const BasicTensor<T>& x);

/// Gradient through softmax given its output y and upstream dy.
template <typename T>
BasicTensor<T> softmax_rows_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

template <typename T>
struct LayerNormCache {
  BasicTensor<T> normalized;  // (x - mean) * rstd
  std::vector<T> rstd;        // one per row
};

template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta, T eps,
                          LayerNormCache<T>* cache = nullptr);

template <typename T>
struct LayerNormGrads {
  BasicTensor<T> dx;
  BasicTensor<T> dgamma;
  BasicTensor<T> dbeta;
};

template <typename T>
LayerNormGrads<T> layer_norm_backward(const LayerNormCache<T>& cache, const BasicTensor<T>& gamma,
                                      const BasicTensor<T>& dy);

/// Exact GELU, x * Phi(x).
template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> gelu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy);

/// Inverted dropout. In train mode each element survives with probability
/// 1 - p and is scaled by 1 / (1 - p); the applied multipliers are written to
/// mask when given. Eval mode returns x unchanged and leaves mask empty.
template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool train_mode, Rng& rng,
                       std::optional<BasicTensor<T>>* mask = nullptr);

template <typename T>
BasicTensor<T> dropout_backward(const std::optional<BasicTensor<T>>& mask, const BasicTensor<T>& dy);

template <typename T>
struct CrossEntropyResult {
  T loss;
  BasicTensor<T> dlogits;
};

/// Mean negative log-likelihood over the batch. With class weights the mean is
/// weighted: sum(w_y * nll) / sum(w_y).
template <typename T>
CrossEntropyResult<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                    std::optional<std::pair<double, double>> class_weights = std::nullopt);

/// Central-difference gradient of f at x, one element at a time.
template <typename T>
BasicTensor<T> finite_diff_grad(const std::function<T(const BasicTensor<T>&)>& f, const BasicTensor<T>& x, T h);

}  // namespace ctxgate
