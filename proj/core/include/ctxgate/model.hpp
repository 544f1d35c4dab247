#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxgate/ops.hpp"
#include "ctxgate/rng.hpp"
#include "ctxgate/tensor.hpp"
#include "ctxgate/tokenizer.hpp"

namespace ctxgate {

enum class Mode { kEval, kTrain };

struct ModelConfig {
  std::size_t vocab_size = 1000;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t d_ff = 256;
  std::size_t max_len = 64;
  double dropout_p = 0.1;
  std::size_t n_classes = 2;
  double layer_norm_eps = 1e-12;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
  std::size_t head_dim() const { return d_model / n_heads; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct AttentionParams {
  AttentionParams(const std::string& prefix, std::size_t d_model);

  Parameter<T> q_weight, q_bias;
  Parameter<T> k_weight, k_bias;
  Parameter<T> v_weight, v_bias;
  Parameter<T> o_weight, o_bias;
};

template <typename T>
struct EncoderLayerParams {
  EncoderLayerParams(const std::string& prefix, const ModelConfig& config);

  Parameter<T> ln1_gamma, ln1_beta;
  AttentionParams<T> attn;
  Parameter<T> ln2_gamma, ln2_beta;
  Parameter<T> ff_in_weight, ff_in_bias;
  Parameter<T> ff_out_weight, ff_out_bias;
};

/// Encoder plus two-class linear head. Parameters are enumerable in a stable
/// order (parameters()) that doubles as the checkpoint order.
template <typename T>
class CaBertModel {
 public:
  /// Zero-valued parameters with shapes derived from config.
  explicit CaBertModel(const ModelConfig& config);

  /// Truncated-normal(0.02) weights and embeddings, zero biases, unit
  /// layer-norm gain. Deterministic in seed.
  static CaBertModel init(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  void zero_grad();
  std::size_t parameter_count() const;

  template <typename U>
  CaBertModel<U> cast() const {
    CaBertModel<U> out(config_);
    auto dst = out.parameters();
    auto src = parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value.template cast<U>();
    return out;
  }

  Parameter<T> token_embedding;
  Parameter<T> position_embedding;
  std::vector<EncoderLayerParams<T>> layers;
  Parameter<T> classifier_weight;
  Parameter<T> classifier_bias;

 private:
  ModelConfig config_;
};

template <typename T>
struct AttentionCache {
  BasicTensor<T> input;    // [B*L, d]
  BasicTensor<T> q, k, v;  // [B*L, d]
  BasicTensor<T> probs;    // [B, H, L, L]
  BasicTensor<T> context;  // [B*L, d], heads concatenated
  std::size_t batch = 0;
  std::size_t len = 0;
};

/// Scaled dot-product attention over n_heads heads, scale 1/sqrt(d/n_heads).
/// x is [B, L, d]; mask holds B*L flags and masked keys get -inf scores.
template <typename T>
BasicTensor<T> multi_head_attention(const BasicTensor<T>& x, std::span<const std::uint8_t> mask,
                                    const AttentionParams<T>& params, std::size_t n_heads,
                                    AttentionCache<T>* cache = nullptr);

/// Accumulates parameter gradients into params and returns dx.
template <typename T>
BasicTensor<T> multi_head_attention_backward(const AttentionCache<T>& cache, AttentionParams<T>& params,
                                             std::size_t n_heads, const BasicTensor<T>& dout);

template <typename T>
struct EncoderLayerCache {
  LayerNormCache<T> ln1;
  AttentionCache<T> attn;
  std::optional<BasicTensor<T>> attn_dropout;
  LayerNormCache<T> ln2;
  BasicTensor<T> ln2_out;
  BasicTensor<T> ff_pre;
  BasicTensor<T> ff_act;
  std::optional<BasicTensor<T>> ff_dropout;
};

/// Pre-norm block: h1 = h + Dropout(MHA(LN1(h))), out = h1 + Dropout(FF(LN2(h1))).
template <typename T>
BasicTensor<T> encoder_block(const BasicTensor<T>& h, std::span<const std::uint8_t> mask,
                             const EncoderLayerParams<T>& params, const ModelConfig& config, Mode mode, Rng& rng,
                             EncoderLayerCache<T>* cache = nullptr);

template <typename T>
BasicTensor<T> encoder_block_backward(const EncoderLayerCache<T>& cache, EncoderLayerParams<T>& params,
                                      const ModelConfig& config, const BasicTensor<T>& dout);

/// Activations retained by forward() for backward().
template <typename T>
struct ForwardTrace {
  std::size_t batch = 0;
  std::size_t len = 0;  // effective length after trimming trailing padding
  std::vector<TokenId> ids;
  std::vector<EncoderLayerCache<T>> layers;
  BasicTensor<T> cls;
  std::optional<BasicTensor<T>> cls_dropout;
  BasicTensor<T> cls_dropped;
};

/// Raw logits [B, 2]. Every sequence must have length config.max_len and ids
/// below vocab_size. Columns past the longest true_length in the batch are
/// padding for every row and are not computed: masked keys contribute exact
/// zeros, so the CLS output is unaffected.
template <typename T>
BasicTensor<T> forward(const CaBertModel<T>& model, std::span<const TokenSequence> batch, Mode mode, Rng& rng,
                       ForwardTrace<T>* trace = nullptr);

/// Eval-mode forward; no RNG is consumed.
template <typename T>
BasicTensor<T> forward_eval(const CaBertModel<T>& model, std::span<const TokenSequence> batch);

/// Accumulates gradients of the loss into model parameters.
template <typename T>
void backward(CaBertModel<T>& model, const ForwardTrace<T>& trace, const BasicTensor<T>& dlogits);

struct Prediction {
  int label = 0;
  double p_context = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// argmax with ties toward label 0; p_context is the class-1 probability.
template <typename T>
std::vector<Prediction> predict(const BasicTensor<T>& logits);

extern template class CaBertModel<float>;
extern template class CaBertModel<double>;

}  // namespace ctxgate
