#include <cmath>
#include <map>

#include "ctxgate/errors.hpp"
#include "ctxgate/trainer.hpp"

namespace ctxgate {

namespace {

std::vector<int> labels_of(std::span<const Example> set) {
  std::vector<int> out;
  out.reserve(set.size());
  for (const auto& e : set) out.push_back(e.label);
  return out;
}

std::string joined(const Example& e) {
  std::string out;
  for (const auto& t : e.turns) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

using SparseCounts = std::vector<std::pair<TokenId, double>>;

SparseCounts featurize(const Example& e, const Vocabulary& vocab) {
  std::map<TokenId, double> counts;
  for (const auto& tok : basic_tokenize(joined(e))) {
    const TokenId id = vocab.id_of(tok);
    if (id != kUnkId) counts[id] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

MetricsReport baseline_majority(std::span<const Example> train_set, std::span<const Example> eval_set) {
  if (train_set.empty() || eval_set.empty()) throw ArgumentError("baseline_majority: empty dataset");
  std::size_t ones = 0;
  for (const auto& e : train_set) ones += e.label == 1;
  const int majority = ones * 2 > train_set.size() ? 1 : 0;
  const auto truth = labels_of(eval_set);
  const std::vector<int> guess(truth.size(), majority);
  return report(confusion(truth, guess));
}

MetricsReport baseline_bow(std::span<const Example> train_set, std::span<const Example> eval_set,
                           std::uint64_t seed, const BowOptions& opts) {
  if (train_set.empty() || eval_set.empty()) throw ArgumentError("baseline_bow: empty dataset");
  std::vector<std::string> corpus;
  corpus.reserve(train_set.size());
  for (const auto& e : train_set) corpus.push_back(joined(e));
  const Vocabulary vocab = Vocabulary::build(corpus, opts.max_vocab, 1);

  std::vector<SparseCounts> features;
  features.reserve(train_set.size());
  for (const auto& e : train_set) features.push_back(featurize(e, vocab));

  std::vector<double> w(vocab.size(), 0.0);
  double bias = 0.0;
  Rng rng(seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (auto i : order) {
      double z = bias;
      for (const auto& [id, c] : features[i]) z += w[static_cast<std::size_t>(id)] * c;
      const double err = sigmoid(z) - static_cast<double>(train_set[i].label);
      for (const auto& [id, c] : features[i]) {
        auto& wi = w[static_cast<std::size_t>(id)];
        wi -= opts.learning_rate * (err * c + opts.l2 * wi);
      }
      bias -= opts.learning_rate * err;
    }
  }

  const auto truth = labels_of(eval_set);
  std::vector<int> guess;
  guess.reserve(eval_set.size());
  for (const auto& e : eval_set) {
    double z = bias;
    for (const auto& [id, c] : featurize(e, vocab)) z += w[static_cast<std::size_t>(id)] * c;
    guess.push_back(sigmoid(z) > 0.5 ? 1 : 0);
  }
  return report(confusion(truth, guess));
}

}  // namespace ctxgate
