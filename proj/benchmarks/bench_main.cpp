#include <benchmark/benchmark.h>

#include "ctxgate/ops.hpp"
#include "ctxgate/optimizer.hpp"
#include "ctxgate/synth.hpp"
#include "ctxgate/tokenizer.hpp"
#include "ctxgate/trainer.hpp"

namespace {

using namespace ctxgate;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = static_cast<float>(rng.normal());
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(768);

struct Fixture {
  Vocabulary vocab;
  std::vector<LabeledSequence> data;
  ModelConfig config;

  Fixture() {
    const auto records = synthesize(2000, 7);
    std::vector<std::string> corpus;
    for (const auto& r : records) corpus.push_back(r.chat);
    vocab = Vocabulary::build(corpus, 8000);
    config.vocab_size = vocab.size();
    data = encode_examples(window(records, 2), vocab, config.max_len);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<TokenSequence> first_batch(std::size_t n) {
  std::vector<TokenSequence> batch;
  for (std::size_t i = 0; i < n; ++i) batch.push_back(fixture().data[i].seq);
  return batch;
}

void BM_ForwardEval(benchmark::State& state) {
  const auto model = CaBertModel<float>::init(fixture().config, 1);
  const auto batch = first_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_eval(model, std::span<const TokenSequence>(batch)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch.size()));
}
BENCHMARK(BM_ForwardEval)->Arg(1)->Arg(16)->Arg(64);

// One optimizer step: forward, loss, backward, clip, AdamW.
void BM_TrainStep(benchmark::State& state) {
  auto model = CaBertModel<float>::init(fixture().config, 1);
  const auto batch = first_batch(16);
  std::vector<int> labels;
  for (std::size_t i = 0; i < 16; ++i) labels.push_back(fixture().data[i].label);
  auto params = model.parameters();
  AdamState<float> adam;
  Rng rng(2);
  ForwardTrace<float> trace;
  for (auto _ : state) {
    model.zero_grad();
    const auto logits = forward(model, std::span<const TokenSequence>(batch), Mode::kTrain, rng, &trace);
    backward(model, trace, cross_entropy(logits, std::span<const int>(labels)).dlogits);
    clip_grad_norm(std::span<Parameter<float>* const>(params), 1.0);
    adamw_step(std::span<Parameter<float>* const>(params), adam, 1e-3, {});
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 16));
}
BENCHMARK(BM_TrainStep);

void BM_Encode(benchmark::State& state) {
  const std::vector<std::string> turns{"Tell me about the museum in Paris.", "What about its opening hours on Sunday?"};
  for (auto _ : state) benchmark::DoNotOptimize(encode(turns, fixture().vocab, 64));
}
BENCHMARK(BM_Encode);

}  // namespace

BENCHMARK_MAIN();
