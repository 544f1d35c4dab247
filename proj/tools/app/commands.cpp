#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <ostream>

#include "ctxgate/checkpoint.hpp"
#include "ctxgate/dataset.hpp"
#include "ctxgate/errors.hpp"
#include "ctxgate/metrics.hpp"
#include "ctxgate/synth.hpp"
#include "ctxgate/trainer.hpp"
#include "gate.hpp"

namespace ctxgate::app {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
  return std::filesystem::path(p.string() + suffix);
}

}  // namespace

TrainArtifacts artifacts_for(const std::filesystem::path& checkpoint) {
  return {checkpoint, with_suffix(checkpoint, ".vocab"), with_suffix(checkpoint, ".history.json"),
          with_suffix(checkpoint, ".train.csv"), with_suffix(checkpoint, ".val.csv")};
}

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.n == 0) {
    err << "synth: --n must be at least 1\n";
    return kExitUsage;
  }
  try {
    const auto records = synthesize(opts.n, opts.seed, opts.context_rate);
    write_dataset(opts.out, records, format_for_path(opts.out));
    out << format_stats(class_stats(records));
    return kExitOk;
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    TrainConfig cfg = opts.config ? load_train_config(*opts.config) : TrainConfig{};
    if (opts.learning_rate) cfg.learning_rate = *opts.learning_rate;
    if (opts.epochs) cfg.epochs = *opts.epochs;
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.validate();
    spdlog::info("train config: lr={} epochs={} batch={} warmup={} seed={}", cfg.learning_rate, cfg.epochs,
                 cfg.batch_size, cfg.warmup_fraction, cfg.seed);

    const auto records = load_dataset(opts.data);
    auto [train_records, val_records] = split(records, opts.train_fraction, cfg.seed);
    const auto arts = artifacts_for(opts.out_checkpoint);
    write_dataset(arts.train_fold, train_records, DatasetFormat::kCsv);
    write_dataset(arts.val_fold, val_records, DatasetFormat::kCsv);
    spdlog::info("split {} records into {} train / {} validation", records.size(), train_records.size(),
                 val_records.size());

    const auto train_examples = window(train_records, opts.context_turns);
    const auto val_examples = window(val_records, opts.context_turns);

    std::vector<std::string> corpus;
    corpus.reserve(train_records.size());
    for (const auto& r : train_records) corpus.push_back(r.chat);
    const Vocabulary vocab = Vocabulary::build(corpus, opts.max_vocab, opts.min_freq);
    vocab.save(arts.vocab);

    ModelConfig mcfg = opts.model;
    mcfg.vocab_size = vocab.size();
    const auto train_set = encode_examples(train_examples, vocab, mcfg.max_len);
    const auto val_set = encode_examples(val_examples, vocab, mcfg.max_len);

    const CheckpointInfo info{arts.vocab.filename().string(), opts.context_turns};
    auto model = CaBertModel<float>::init(mcfg, cfg.seed);
    spdlog::info("model: {} parameters, vocabulary {}", model.parameter_count(), vocab.size());

    auto result = train(std::move(model), train_set, val_set, cfg, arts.checkpoint, info,
                        [&](std::size_t epoch, const EpochRecord& rec) {
                          out << "epoch " << epoch + 1 << "/" << cfg.epochs << " train_loss=" << rec.train_loss
                              << "\n"
                              << format_report(rec.validation) << "\n";
                        });
    {
      std::ofstream h(arts.history);
      h << result.history.to_json() << "\n";
      if (!h) throw std::runtime_error("cannot write history " + arts.history.string());
    }
    out << "best epoch: " << result.history.best_epoch + 1 << " (validation accuracy "
        << result.history.epochs[result.history.best_epoch].validation.accuracy << ")\n";

    if (opts.baselines) {
      out << "\nmajority baseline\n" << format_report(baseline_majority(train_examples, val_examples)) << "\n";
      out << "bag-of-words baseline\n" << format_report(baseline_bow(train_examples, val_examples, cfg.seed)) << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "train: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto gate = ContextGate::open(opts.checkpoint);
    const auto& ckpt = gate.checkpoint();
    const auto records = load_dataset(opts.data);
    if (records.empty()) throw std::runtime_error("dataset " + opts.data.string() + " has no records");
    const auto examples = window(records, ckpt.info.context_turns);
    const auto dataset = encode_examples(examples, gate.vocabulary(), ckpt.model.config().max_len);
    const auto r = evaluate(ckpt.model, dataset);
    if (opts.json) {
      out << report_to_json(r) << "\n";
    } else {
      out << format_report(r);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_predict(const PredictOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.turns.empty()) {
    err << "predict: at least one turn is required\n";
    return kExitUsage;
  }
  try {
    const auto gate = ContextGate::open(opts.checkpoint);
    out << to_json(gate.classify(opts.turns)) << "\n";
    return kExitOk;
  } catch (const ArgumentError& e) {
    err << "predict: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "predict: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ctxgate::app
