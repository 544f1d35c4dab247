#include "ctxgate/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctxgate/errors.hpp"

namespace ctxgate {

void ModelConfig::validate() const {
  if (vocab_size < kReservedTokens) throw ConfigError("vocab_size must be at least 4");
  if (d_model == 0) throw ConfigError("d_model must be positive");
  if (n_heads == 0) throw ConfigError("n_heads must be positive");
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" +
                      std::to_string(n_heads) + ")");
  }
  if (n_layers == 0) throw ConfigError("n_layers must be positive");
  if (d_ff == 0) throw ConfigError("d_ff must be positive");
  if (max_len < 2) throw ConfigError("max_len must be at least 2");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must be in [0, 1)");
  if (n_classes != 2) throw ConfigError("n_classes must be 2");
  if (!(layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
}

template <typename T>
AttentionParams<T>::AttentionParams(const std::string& prefix, std::size_t d)
    : q_weight(prefix + "q.weight", {d, d}),
      q_bias(prefix + "q.bias", {d}, false),
      k_weight(prefix + "k.weight", {d, d}),
      k_bias(prefix + "k.bias", {d}, false),
      v_weight(prefix + "v.weight", {d, d}),
      v_bias(prefix + "v.bias", {d}, false),
      o_weight(prefix + "o.weight", {d, d}),
      o_bias(prefix + "o.bias", {d}, false) {}

template <typename T>
EncoderLayerParams<T>::EncoderLayerParams(const std::string& prefix, const ModelConfig& c)
    : ln1_gamma(prefix + "ln1.gamma", {c.d_model}, false),
      ln1_beta(prefix + "ln1.beta", {c.d_model}, false),
      attn(prefix + "attn.", c.d_model),
      ln2_gamma(prefix + "ln2.gamma", {c.d_model}, false),
      ln2_beta(prefix + "ln2.beta", {c.d_model}, false),
      ff_in_weight(prefix + "ff.in.weight", {c.d_model, c.d_ff}),
      ff_in_bias(prefix + "ff.in.bias", {c.d_ff}, false),
      ff_out_weight(prefix + "ff.out.weight", {c.d_ff, c.d_model}),
      ff_out_bias(prefix + "ff.out.bias", {c.d_model}, false) {}

namespace {

ModelConfig checked(const ModelConfig& c) {
  c.validate();
  return c;
}

}  // namespace

template <typename T>
CaBertModel<T>::CaBertModel(const ModelConfig& config)
    : token_embedding("embeddings.token", {checked(config).vocab_size, config.d_model}),
      position_embedding("embeddings.position", {config.max_len, config.d_model}),
      classifier_weight("classifier.weight", {config.d_model, config.n_classes}),
      classifier_bias("classifier.bias", {config.n_classes}, false),
      config_(config) {
  layers.reserve(config.n_layers);
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    layers.emplace_back("encoder." + std::to_string(i) + ".", config);
    layers.back().ln1_gamma.value.fill(T{1});
    layers.back().ln2_gamma.value.fill(T{1});
  }
}

template <typename T>
CaBertModel<T> CaBertModel<T>::init(const ModelConfig& config, std::uint64_t seed) {
  CaBertModel model(config);
  Rng rng(seed);
  for (auto* p : model.parameters()) {
    // Only matrices are drawn; vectors are biases or layer-norm terms.
    if (p->value.rank() < 2) continue;
    for (auto& v : p->value.data()) v = static_cast<T>(rng.truncated_normal(0.02));
  }
  return model;
}

template <typename T>
std::vector<const Parameter<T>*> CaBertModel<T>::parameters() const {
  std::vector<const Parameter<T>*> out{&token_embedding, &position_embedding};
  for (const auto& l : layers) {
    out.insert(out.end(), {&l.ln1_gamma, &l.ln1_beta, &l.attn.q_weight, &l.attn.q_bias, &l.attn.k_weight,
                           &l.attn.k_bias, &l.attn.v_weight, &l.attn.v_bias, &l.attn.o_weight, &l.attn.o_bias,
                           &l.ln2_gamma, &l.ln2_beta, &l.ff_in_weight, &l.ff_in_bias, &l.ff_out_weight,
                           &l.ff_out_bias});
  }
  out.push_back(&classifier_weight);
  out.push_back(&classifier_bias);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> CaBertModel<T>::parameters() {
  auto cp = std::as_const(*this).parameters();
  std::vector<Parameter<T>*> out;
  out.reserve(cp.size());
  for (auto* p : cp) out.push_back(const_cast<Parameter<T>*>(p));
  return out;
}

template <typename T>
void CaBertModel<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
std::size_t CaBertModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.numel();
  return n;
}

namespace {

template <typename T>
void softmax_inplace(std::span<T> row) {
  const T mx = *std::max_element(row.begin(), row.end());
  T sum{0};
  for (auto& v : row) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : row) v /= sum;
}

// Copies head h of rows [b*L, (b+1)*L) of a [B*L, d] buffer into a [L, hd] buffer.
template <typename T>
void gather_head(const BasicTensor<T>& src, std::size_t b, std::size_t h, std::size_t len, std::size_t hd,
                 std::vector<T>& dst) {
  const std::size_t d = src.cols();
  dst.resize(len * hd);
  for (std::size_t i = 0; i < len; ++i) {
    const T* s = src.data().data() + (b * len + i) * d + h * hd;
    std::copy(s, s + hd, dst.begin() + static_cast<std::ptrdiff_t>(i * hd));
  }
}

template <typename T>
void scatter_head(const std::vector<T>& src, std::size_t b, std::size_t h, std::size_t len, std::size_t hd,
                  BasicTensor<T>& dst) {
  const std::size_t d = dst.cols();
  for (std::size_t i = 0; i < len; ++i) {
    T* out = dst.data().data() + (b * len + i) * d + h * hd;
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(i * hd),
              src.begin() + static_cast<std::ptrdiff_t>((i + 1) * hd), out);
  }
}

template <typename T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b) {
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] += b[i];
}

template <typename T>
void accumulate(Parameter<T>& p, const BasicTensor<T>& g) {
  for (std::size_t i = 0; i < g.numel(); ++i) p.grad[i] += g[i];
}

}  // namespace

template <typename T>
BasicTensor<T> multi_head_attention(const BasicTensor<T>& x, std::span<const std::uint8_t> mask,
                                    const AttentionParams<T>& params, std::size_t n_heads,
                                    AttentionCache<T>* cache) {
  if (x.rank() != 3) throw ShapeError("multi_head_attention: expected [B,L,d], got " + shape_to_string(x.shape()));
  const std::size_t batch = x.dim(0), len = x.dim(1), d = x.dim(2);
  if (mask.size() != batch * len) {
    throw ShapeError("multi_head_attention: mask has " + std::to_string(mask.size()) + " entries for input " +
                     shape_to_string(x.shape()));
  }
  if (n_heads == 0 || d % n_heads != 0) {
    throw ShapeError("multi_head_attention: width " + std::to_string(d) + " not divisible by " +
                     std::to_string(n_heads) + " heads");
  }
  if (params.q_weight.value.dim(0) != d) {
    throw ShapeError("multi_head_attention: projection " + shape_to_string(params.q_weight.value.shape()) +
                     " does not match input " + shape_to_string(x.shape()));
  }
  const std::size_t hd = d / n_heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  constexpr T kNegInf = -std::numeric_limits<T>::infinity();

  BasicTensor<T> x2 = x.reshaped({batch * len, d});
  BasicTensor<T> q = linear(x2, params.q_weight.value, params.q_bias.value);
  BasicTensor<T> k = linear(x2, params.k_weight.value, params.k_bias.value);
  BasicTensor<T> v = linear(x2, params.v_weight.value, params.v_bias.value);
  BasicTensor<T> probs({batch, n_heads, len, len});
  BasicTensor<T> context({batch * len, d});

  std::vector<T> qh, kh, vh, ctxh(len * hd);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < n_heads; ++h) {
      gather_head(q, b, h, len, hd, qh);
      gather_head(k, b, h, len, hd, kh);
      gather_head(v, b, h, len, hd, vh);
      std::span<T> p = probs.data().subspan((b * n_heads + h) * len * len, len * len);
      gemm<T>(false, true, len, len, hd, qh, kh, p, false);
      for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j < len; ++j) {
          T& s = p[i * len + j];
          s = mask[b * len + j] ? s * scale : kNegInf;
        }
        softmax_inplace(p.subspan(i * len, len));
      }
      gemm<T>(false, false, len, hd, len, std::span<const T>(p), vh, ctxh, false);
      scatter_head(ctxh, b, h, len, hd, context);
    }
  }
  BasicTensor<T> out = linear(context, params.o_weight.value, params.o_bias.value);
  if (cache) {
    cache->input = std::move(x2);
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
    cache->batch = batch;
    cache->len = len;
  }
  return std::move(out).reshaped({batch, len, d});
}

template <typename T>
BasicTensor<T> multi_head_attention_backward(const AttentionCache<T>& cache, AttentionParams<T>& params,
                                             std::size_t n_heads, const BasicTensor<T>& dout) {
  const std::size_t batch = cache.batch, len = cache.len, d = cache.input.cols();
  if (dout.numel() != batch * len * d) throw ShapeError("multi_head_attention_backward: gradient shape mismatch");
  const std::size_t hd = d / n_heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));

  BasicTensor<T> dout2 = dout.reshaped({batch * len, d});
  BasicTensor<T> dctx = linear_backward(cache.context, params.o_weight.value, dout2, params.o_weight.grad,
                                        params.o_bias.grad);
  BasicTensor<T> dq({batch * len, d}), dk({batch * len, d}), dv({batch * len, d});
  std::vector<T> qh, kh, vh, dctxh, dp(len * len), dqh(len * hd), dkh(len * hd), dvh(len * hd);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < n_heads; ++h) {
      gather_head(cache.q, b, h, len, hd, qh);
      gather_head(cache.k, b, h, len, hd, kh);
      gather_head(cache.v, b, h, len, hd, vh);
      gather_head(dctx, b, h, len, hd, dctxh);
      std::span<const T> p = cache.probs.data().subspan((b * n_heads + h) * len * len, len * len);
      gemm<T>(false, true, len, len, hd, dctxh, vh, dp, false);
      gemm<T>(true, false, len, hd, len, p, dctxh, dvh, false);
      for (std::size_t i = 0; i < len; ++i) {
        T dot{0};
        for (std::size_t j = 0; j < len; ++j) dot += p[i * len + j] * dp[i * len + j];
        for (std::size_t j = 0; j < len; ++j) dp[i * len + j] = p[i * len + j] * (dp[i * len + j] - dot) * scale;
      }
      gemm<T>(false, false, len, hd, len, dp, kh, dqh, false);
      gemm<T>(true, false, len, hd, len, dp, qh, dkh, false);
      scatter_head(dqh, b, h, len, hd, dq);
      scatter_head(dkh, b, h, len, hd, dk);
      scatter_head(dvh, b, h, len, hd, dv);
    }
  }
  BasicTensor<T> dx = linear_backward(cache.input, params.q_weight.value, dq, params.q_weight.grad, params.q_bias.grad);
  add_inplace(dx, linear_backward(cache.input, params.k_weight.value, dk, params.k_weight.grad, params.k_bias.grad));
  add_inplace(dx, linear_backward(cache.input, params.v_weight.value, dv, params.v_weight.grad, params.v_bias.grad));
  return std::move(dx).reshaped({batch, len, d});
}

template <typename T>
BasicTensor<T> encoder_block(const BasicTensor<T>& h, std::span<const std::uint8_t> mask,
                             const EncoderLayerParams<T>& params, const ModelConfig& config, Mode mode, Rng& rng,
                             EncoderLayerCache<T>* cache) {
  if (h.rank() != 3 || h.dim(2) != config.d_model) {
    throw ShapeError("encoder_block: expected [B,L," + std::to_string(config.d_model) + "], got " +
                     shape_to_string(h.shape()));
  }
  const std::size_t batch = h.dim(0), len = h.dim(1), d = h.dim(2);
  const bool train = mode == Mode::kTrain;
  const T eps = static_cast<T>(config.layer_norm_eps);
  EncoderLayerCache<T> local;
  EncoderLayerCache<T>& c = cache ? *cache : local;

  BasicTensor<T> h2 = h.reshaped({batch * len, d});
  BasicTensor<T> a = layer_norm(h2, params.ln1_gamma.value, params.ln1_beta.value, eps, cache ? &c.ln1 : nullptr);
  BasicTensor<T> m = multi_head_attention(std::move(a).reshaped({batch, len, d}), mask, params.attn, config.n_heads,
                                          cache ? &c.attn : nullptr)
                         .reshaped({batch * len, d});
  m = dropout(m, config.dropout_p, train, rng, &c.attn_dropout);
  BasicTensor<T> h1 = std::move(h2);
  for (std::size_t i = 0; i < h1.numel(); ++i) h1[i] += m[i];

  BasicTensor<T> n2 = layer_norm(h1, params.ln2_gamma.value, params.ln2_beta.value, eps, cache ? &c.ln2 : nullptr);
  BasicTensor<T> pre = linear(n2, params.ff_in_weight.value, params.ff_in_bias.value);
  BasicTensor<T> act = gelu(pre);
  BasicTensor<T> f = linear(act, params.ff_out_weight.value, params.ff_out_bias.value);
  f = dropout(f, config.dropout_p, train, rng, &c.ff_dropout);
  for (std::size_t i = 0; i < h1.numel(); ++i) h1[i] += f[i];
  if (cache) {
    c.ln2_out = std::move(n2);
    c.ff_pre = std::move(pre);
    c.ff_act = std::move(act);
  }
  return std::move(h1).reshaped({batch, len, d});
}

template <typename T>
BasicTensor<T> encoder_block_backward(const EncoderLayerCache<T>& c, EncoderLayerParams<T>& params,
                                      const ModelConfig& config, const BasicTensor<T>& dout) {
  const std::size_t batch = c.attn.batch, len = c.attn.len, d = config.d_model;
  BasicTensor<T> dh1 = dout.reshaped({batch * len, d});

  BasicTensor<T> df = dropout_backward(c.ff_dropout, dh1);
  BasicTensor<T> dact = linear_backward(c.ff_act, params.ff_out_weight.value, df, params.ff_out_weight.grad,
                                        params.ff_out_bias.grad);
  BasicTensor<T> dpre = gelu_backward(c.ff_pre, dact);
  BasicTensor<T> dn2 = linear_backward(c.ln2_out, params.ff_in_weight.value, dpre, params.ff_in_weight.grad,
                                       params.ff_in_bias.grad);
  auto ln2 = layer_norm_backward(c.ln2, params.ln2_gamma.value, dn2);
  accumulate(params.ln2_gamma, ln2.dgamma);
  accumulate(params.ln2_beta, ln2.dbeta);
  add_inplace(dh1, ln2.dx);

  BasicTensor<T> dm = dropout_backward(c.attn_dropout, dh1);
  BasicTensor<T> da = multi_head_attention_backward(c.attn, params.attn, config.n_heads,
                                                    std::move(dm).reshaped({batch, len, d}));
  auto ln1 = layer_norm_backward(c.ln1, params.ln1_gamma.value, std::move(da).reshaped({batch * len, d}));
  accumulate(params.ln1_gamma, ln1.dgamma);
  accumulate(params.ln1_beta, ln1.dbeta);
  add_inplace(dh1, ln1.dx);
  return std::move(dh1).reshaped({batch, len, d});
}

template <typename T>
BasicTensor<T> forward(const CaBertModel<T>& model, std::span<const TokenSequence> batch, Mode mode, Rng& rng,
                       ForwardTrace<T>* trace) {
  const ModelConfig& cfg = model.config();
  if (batch.empty()) throw ArgumentError("forward: empty batch");
  std::size_t len = 1;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& seq = batch[s];
    if (seq.ids.size() != cfg.max_len || seq.attention_mask.size() != cfg.max_len) {
      throw InputError(s, "length " + std::to_string(seq.ids.size()) + " does not match max_len " +
                              std::to_string(cfg.max_len));
    }
    if (seq.true_length < 1 || seq.true_length > cfg.max_len) throw InputError(s, "invalid true_length");
    for (auto id : seq.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
        throw InputError(s, "token id " + std::to_string(id) + " outside vocabulary of size " +
                                std::to_string(cfg.vocab_size));
      }
    }
    len = std::max(len, seq.true_length);
  }
  const std::size_t nb = batch.size(), d = cfg.d_model;

  BasicTensor<T> h({nb, len, d});
  std::vector<std::uint8_t> mask(nb * len);
  std::vector<TokenId> ids(nb * len);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < len; ++i) {
      const TokenId id = batch[b].ids[i];
      ids[b * len + i] = id;
      mask[b * len + i] = batch[b].attention_mask[i];
      auto tok = model.token_embedding.value.row(static_cast<std::size_t>(id));
      auto pos = model.position_embedding.value.row(i);
      T* out = h.data().data() + (b * len + i) * d;
      for (std::size_t j = 0; j < d; ++j) out[j] = tok[j] + pos[j];
    }
  }

  if (trace) {
    trace->batch = nb;
    trace->len = len;
    trace->ids = ids;
    trace->layers.assign(cfg.n_layers, EncoderLayerCache<T>{});
  }
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    h = encoder_block(h, mask, model.layers[l], cfg, mode, rng, trace ? &trace->layers[l] : nullptr);
  }

  BasicTensor<T> cls({nb, d});
  for (std::size_t b = 0; b < nb; ++b) {
    const T* src = h.data().data() + b * len * d;
    std::copy(src, src + d, cls.row(b).begin());
  }
  std::optional<BasicTensor<T>> cls_mask;
  BasicTensor<T> dropped = dropout(cls, cfg.dropout_p, mode == Mode::kTrain, rng, &cls_mask);
  BasicTensor<T> logits = linear(dropped, model.classifier_weight.value, model.classifier_bias.value);
  if (trace) {
    trace->cls = std::move(cls);
    trace->cls_dropout = std::move(cls_mask);
    trace->cls_dropped = std::move(dropped);
  }
  return logits;
}

template <typename T>
BasicTensor<T> forward_eval(const CaBertModel<T>& model, std::span<const TokenSequence> batch) {
  Rng unused(0);
  return forward(model, batch, Mode::kEval, unused);
}

template <typename T>
void backward(CaBertModel<T>& model, const ForwardTrace<T>& trace, const BasicTensor<T>& dlogits) {
  const ModelConfig& cfg = model.config();
  const std::size_t nb = trace.batch, len = trace.len, d = cfg.d_model;
  if (dlogits.rank() != 2 || dlogits.dim(0) != nb || dlogits.dim(1) != cfg.n_classes) {
    throw ShapeError("backward: dlogits shape " + shape_to_string(dlogits.shape()) + " does not match batch");
  }
  BasicTensor<T> dcls = linear_backward(trace.cls_dropped, model.classifier_weight.value, dlogits,
                                        model.classifier_weight.grad, model.classifier_bias.grad);
  dcls = dropout_backward(trace.cls_dropout, dcls);

  BasicTensor<T> dh({nb, len, d});
  for (std::size_t b = 0; b < nb; ++b) {
    auto src = dcls.row(b);
    std::copy(src.begin(), src.end(), dh.data().begin() + static_cast<std::ptrdiff_t>(b * len * d));
  }
  for (std::size_t l = cfg.n_layers; l-- > 0;) {
    dh = encoder_block_backward(trace.layers[l], model.layers[l], cfg, dh);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < len; ++i) {
      const T* g = dh.data().data() + (b * len + i) * d;
      auto tok = model.token_embedding.grad.row(static_cast<std::size_t>(trace.ids[b * len + i]));
      auto pos = model.position_embedding.grad.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        tok[j] += g[j];
        pos[j] += g[j];
      }
    }
  }
}

template <typename T>
std::vector<Prediction> predict(const BasicTensor<T>& logits) {
  if (logits.rank() != 2 || logits.dim(1) != 2) {
    throw ShapeError("predict: expected [B,2] logits, got " + shape_to_string(logits.shape()));
  }
  std::vector<Prediction> out(logits.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    const double l0 = static_cast<double>(logits.at(b, 0));
    const double l1 = static_cast<double>(logits.at(b, 1));
    const double p1 = 1.0 / (1.0 + std::exp(l0 - l1));
    // Thresholding the probability keeps label and p_context consistent even
    // when the logit gap is below double resolution.
    out[b] = Prediction{p1 > 0.5 ? 1 : 0, p1};
  }
  return out;
}

#define CTXGATE_INSTANTIATE_MODEL(T)                                                                               \
  template struct AttentionParams<T>;                                                                              \
  template struct EncoderLayerParams<T>;                                                                           \
  template class CaBertModel<T>;                                                                                   \
  template BasicTensor<T> multi_head_attention(const BasicTensor<T>&, std::span<const std::uint8_t>,               \
                                               const AttentionParams<T>&, std::size_t, AttentionCache<T>*);        \
  template BasicTensor<T> multi_head_attention_backward(const AttentionCache<T>&, AttentionParams<T>&,             \
                                                        std::size_t, const BasicTensor<T>&);                       \
  template BasicTensor<T> encoder_block(const BasicTensor<T>&, std::span<const std::uint8_t>,                      \
                                        const EncoderLayerParams<T>&, const ModelConfig&, Mode, Rng&,              \
                                        EncoderLayerCache<T>*);                                                    \
  template BasicTensor<T> encoder_block_backward(const EncoderLayerCache<T>&, EncoderLayerParams<T>&,              \
                                                 const ModelConfig&, const BasicTensor<T>&);                       \
  template BasicTensor<T> forward(const CaBertModel<T>&, std::span<const TokenSequence>, Mode, Rng&,               \
                                  ForwardTrace<T>*);                                                               \
  template BasicTensor<T> forward_eval(const CaBertModel<T>&, std::span<const TokenSequence>);                     \
  template void backward(CaBertModel<T>&, const ForwardTrace<T>&, const BasicTensor<T>&);                          \
  template std::vector<Prediction> predict(const BasicTensor<T>&);

CTXGATE_INSTANTIATE_MODEL(float)
CTXGATE_INSTANTIATE_MODEL(double)

#undef CTXGATE_INSTANTIATE_MODEL

}  // namespace ctxgate
