#include <CLI11.hpp>

#include <iostream>

#include "app/commands.hpp"
#include "app/logging.hpp"
#include "app/service.hpp"

using namespace ctxgate;

int main(int argc, char** argv) {
  CLI::App cli{"ctxgate: decides whether a chat turn needs additional context"};
  cli.require_subcommand(1);

  app::SynthOptions synth;
  auto* synth_cmd = cli.add_subcommand("synth", "Write a synthetic labeled corpus");
  synth_cmd->add_option("--n", synth.n, "Number of records")->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--out", synth.out, "Output file (.csv or .jsonl)")->required();
  synth_cmd->add_option("--context-rate", synth.context_rate, "Share of turns that need context");

  app::TrainOptions train;
  std::string config_path;
  double lr = 0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  auto* train_cmd = cli.add_subcommand("train", "Train a classifier and write the best checkpoint");
  train_cmd->add_option("--data", train.data, "Dataset (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", config_path, "key=value training config")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out_checkpoint, "Checkpoint path")->required();
  train_cmd->add_option("--context-turns,-K", train.context_turns, "Prior turns per example");
  train_cmd->add_option("--train-fraction", train.train_fraction, "Training share of records");
  auto* lr_opt = train_cmd->add_option("--lr", lr, "Override learning_rate");
  auto* epochs_opt = train_cmd->add_option("--epochs", epochs, "Override epochs");
  auto* seed_opt = train_cmd->add_option("--seed", seed, "Override seed");
  train_cmd->add_option("--d-model", train.model.d_model, "Hidden width");
  train_cmd->add_option("--heads", train.model.n_heads, "Attention heads");
  train_cmd->add_option("--layers", train.model.n_layers, "Encoder blocks");
  train_cmd->add_option("--d-ff", train.model.d_ff, "Feed-forward width");
  train_cmd->add_option("--max-len", train.model.max_len, "Sequence length");
  train_cmd->add_option("--dropout", train.model.dropout_p, "Dropout probability");
  train_cmd->add_option("--max-vocab", train.max_vocab, "Vocabulary size cap");
  train_cmd->add_option("--min-freq", train.min_freq, "Minimum token frequency");
  train_cmd->add_flag("--baselines", train.baselines, "Also report majority and bag-of-words baselines");

  app::EvalOptions eval;
  auto* eval_cmd = cli.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint path")->required();
  eval_cmd->add_option("--data", eval.data, "Dataset (.csv or .jsonl)")->required();
  eval_cmd->add_flag("--json", eval.json, "Emit the machine-readable report");

  app::PredictOptions predict;
  auto* predict_cmd = cli.add_subcommand("predict", "Classify one turn with optional prior turns");
  predict_cmd->add_option("--checkpoint", predict.checkpoint, "Checkpoint path")->required();
  predict_cmd->add_option("turns", predict.turns, "Turns, oldest first; the last is classified");

  std::filesystem::path serve_ckpt;
  std::string bind = "127.0.0.1:8080";
  auto* serve_cmd = cli.add_subcommand("serve", "Run the HTTP inference service");
  serve_cmd->add_option("--checkpoint", serve_ckpt, "Checkpoint path")->required();
  serve_cmd->add_option("--bind", bind, "host:port");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kExitUsage;
  }

  app::init_logging();
  if (*synth_cmd) return app::cmd_synth(synth, std::cout, std::cerr);
  if (*train_cmd) {
    if (!config_path.empty()) train.config = config_path;
    if (*lr_opt) train.learning_rate = lr;
    if (*epochs_opt) train.epochs = epochs;
    if (*seed_opt) train.seed = seed;
    return app::cmd_train(train, std::cout, std::cerr);
  }
  if (*eval_cmd) return app::cmd_eval(eval, std::cout, std::cerr);
  if (*predict_cmd) return app::cmd_predict(predict, std::cout, std::cerr);
  if (*serve_cmd) return app::serve(serve_ckpt, bind, std::cerr);
  return app::kExitUsage;
}
