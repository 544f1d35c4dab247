// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <httplib.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "app/commands.hpp"
#include "app/gate.hpp"
#include "app/service.hpp"
#include "ctxgate/checkpoint.hpp"
#include "ctxgate/dataset.hpp"
#include "ctxgate/metrics.hpp"
#include "ctxgate/ops.hpp"
#include "ctxgate/schedule.hpp"
#include "ctxgate/synth.hpp"
#include "ctxgate/train_config.hpp"
#include "ctxgate/trainer.hpp"
#include "test_util.hpp"

namespace {

using namespace ctxgate;
using Clock = std::chrono::steady_clock;
using testing::dot;
using testing::random_tensor;
using testing::rel_error;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;  // keep the first failure
      pass = false;
    }
  }
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Runs a command and returns (exit code, stdout).
std::pair<int, std::string> run(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return {-1, out};
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const std::string kBin = CTXGATE_BIN;

// --- 1. gradient suite -------------------------------------------------------

constexpr double kOpTol = 1e-5;
constexpr double kModelTol = 1e-3;
constexpr double kStep = 1e-6;

struct OpError {
  double worst = 0.0;
  std::string op;
};

OpError worst_op_error() {
  OpError worst;
  std::string current;
  auto track = [&](const Tensor64& a, const Tensor64& b) {
    const double e = rel_error(a, b);
    if (e > worst.worst) worst = {e, current};
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto dim = [&] { return 1 + static_cast<std::size_t>(rng.below(6)); };
    const std::size_t m = dim(), k = dim(), n = dim();
    using Fn = std::function<double(const Tensor64&)>;
    const auto fd = [](const Fn& f, const Tensor64& x) { return finite_diff_grad<double>(f, x, kStep); };

    current = "matmul";
    const auto a = random_tensor({m, k}, rng), b = random_tensor({k, n}, rng), r = random_tensor({m, n}, rng);
    const auto mg = matmul_backward(a, b, r);
    track(mg.da, fd([&](const Tensor64& x) { return dot(matmul(x, b), r); }, a));
    track(mg.db, fd([&](const Tensor64& x) { return dot(matmul(a, x), r); }, b));

    current = "linear";
    const auto bias = random_tensor({n}, rng);
    Tensor64 dw({k, n}), db({n});
    const auto dx = linear_backward(a, b, r, dw, db);
    track(dx, fd([&](const Tensor64& x) { return dot(linear(x, b, bias), r); }, a));
    track(dw, fd([&](const Tensor64& x) { return dot(linear(a, x, bias), r); }, b));
    track(db, fd([&](const Tensor64& x) { return dot(linear(a, b, x), r); }, bias));

    current = "softmax";
    const auto s = random_tensor({m, n}, rng, 2.0);
    track(softmax_rows_backward(softmax_rows(s), r), fd([&](const Tensor64& x) { return dot(softmax_rows(x), r); }, s));

    current = "layer_norm";
    // Two features normalize to +-1 whatever x is: dx is ~eps and the check
    // would measure finite-difference noise. Use at least three.
    const std::size_t cols = n + 2;
    const auto lx = random_tensor({m, cols}, rng), g = random_tensor({cols}, rng), be = random_tensor({cols}, rng);
    const auto lr = random_tensor({m, cols}, rng);
    LayerNormCache<double> cache;
    layer_norm(lx, g, be, 1e-12, &cache);
    const auto lg = layer_norm_backward(cache, g, lr);
    track(lg.dx, fd([&](const Tensor64& x) { return dot(layer_norm(x, g, be, 1e-12), lr); }, lx));
    track(lg.dgamma, fd([&](const Tensor64& x) { return dot(layer_norm(lx, x, be, 1e-12), lr); }, g));
    track(lg.dbeta, fd([&](const Tensor64& x) { return dot(layer_norm(lx, g, x, 1e-12), lr); }, be));

    current = "gelu";
    track(gelu_backward(s, r), fd([&](const Tensor64& x) { return dot(gelu(x), r); }, s));

    current = "dropout";
    const std::uint64_t drop_seed = rng.next_u64();
    std::optional<Tensor64> mask;
    Rng d1(drop_seed);
    dropout(s, 0.3, true, d1, &mask);
    track(dropout_backward(mask, r), fd(
                                         [&](const Tensor64& x) {
                                           Rng d2(drop_seed);
                                           return dot(dropout(x, 0.3, true, d2), r);
                                         },
                                         s));

    current = "cross_entropy";
    const auto logits = random_tensor({m, 2}, rng, 3.0);
    std::vector<int> labels(m);
    for (auto& l : labels) l = static_cast<int>(rng.below(2));
    track(cross_entropy(logits, labels).dlogits,
          fd([&](const Tensor64& x) { return cross_entropy(x, labels).loss; }, logits));
  }
  return worst;
}

double worst_model_error() {
  ModelConfig cfg;
  cfg.vocab_size = 20;
  cfg.d_model = 32;
  cfg.n_heads = 4;
  cfg.n_layers = 2;
  cfg.d_ff = 64;
  cfg.max_len = 8;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(5000 + seed);
    auto model = CaBertModel<double>::init(cfg, seed);
    for (auto* p : model.parameters())
      if (!p->decay)
        for (auto& v : p->value.storage()) v += 0.1 * rng.normal();
    std::vector<TokenSequence> batch;
    for (int i = 0; i < 3; ++i) {
      TokenSequence s;
      s.true_length = 3 + rng.below(cfg.max_len - 2);
      s.ids.assign(cfg.max_len, kPadId);
      s.attention_mask.assign(cfg.max_len, 0);
      for (std::size_t j = 0; j < s.true_length; ++j) {
        s.ids[j] = static_cast<TokenId>(kReservedTokens + rng.below(cfg.vocab_size - kReservedTokens));
        s.attention_mask[j] = 1;
      }
      s.ids[0] = kClsId;
      batch.push_back(s);
    }
    const std::vector<int> labels{0, 1, static_cast<int>(rng.below(2))};
    const std::uint64_t drop_seed = rng.next_u64();
    auto loss = [&] {
      Rng drop(drop_seed);
      return cross_entropy(forward(model, std::span<const TokenSequence>(batch), Mode::kTrain, drop),
                           std::span<const int>(labels))
          .loss;
    };
    model.zero_grad();
    {
      Rng drop(drop_seed);
      ForwardTrace<double> trace;
      const auto logits = forward(model, std::span<const TokenSequence>(batch), Mode::kTrain, drop, &trace);
      backward(model, trace, cross_entropy(logits, std::span<const int>(labels)).dlogits);
    }
    auto params = model.parameters();
    for (int pick = 0; pick < 5; ++pick) {
      auto* p = params[rng.below(params.size())];
      std::vector<double> analytic, numeric;
      for (int c = 0; c < 6; ++c) {
        std::size_t i = rng.below(p->value.numel());
        if (p->name == "embeddings.token") i = static_cast<std::size_t>(batch[0].ids[1]) * cfg.d_model + i % cfg.d_model;
        const double saved = p->value[i];
        p->value[i] = saved + 1e-5;
        const double up = loss();
        p->value[i] = saved - 1e-5;
        const double down = loss();
        p->value[i] = saved;
        analytic.push_back(p->grad[i]);
        numeric.push_back((up - down) / 2e-5);
      }
      worst = std::max(worst, rel_error(Tensor64({analytic.size()}, analytic), Tensor64({numeric.size()}, numeric)));
    }
  }
  return worst;
}

Outcome gradient_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto op_err = worst_op_error();
  const double op = op_err.worst;
  const double model = worst_model_error();
  const double secs = seconds_since(t0);
  o.check(op <= kOpTol, "per-op rel error " + fmt(op) + " > 1e-5 (" + op_err.op + ")");
  o.check(model <= kModelTol, "end-to-end rel error " + fmt(model) + " > 1e-3");
  o.check(secs < 120.0, "runtime " + fmt(secs) + " s >= 120 s");
  if (o.pass) o.detail = "max per-op rel " + fmt(op, 2) + " (" + op_err.op + "), end-to-end rel " + fmt(model, 2) + ", " + fmt(secs, 3) + " s";
  return o;
}

// --- 2. metrics oracle -------------------------------------------------------

Outcome metrics_oracle() {
  Outcome o;
  Rng rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(100);
    const double p1 = rng.uniform(), agree = rng.uniform();
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.bernoulli(p1);
      p[i] = rng.bernoulli(agree) ? t[i] : static_cast<int>(rng.below(2));
    }
    const auto r = report(confusion(t, p));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += t[i] == p[i];
    const double acc = static_cast<double>(correct) / static_cast<double>(n);
    worst = std::max(worst, std::abs(r.accuracy - acc));
    double prec[2], rec[2], f1[2], sup[2];
    for (int c = 0; c < 2; ++c) {
      double tp = 0, pred = 0, act = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += t[i] == c && p[i] == c;
        pred += p[i] == c;
        act += t[i] == c;
      }
      prec[c] = pred > 0 ? tp / pred : 0.0;
      rec[c] = act > 0 ? tp / act : 0.0;
      f1[c] = prec[c] + rec[c] > 0 ? 2 * prec[c] * rec[c] / (prec[c] + rec[c]) : 0.0;
      sup[c] = act;
      worst = std::max({worst, std::abs(r.classes[c].precision - prec[c]), std::abs(r.classes[c].recall - rec[c]),
                        std::abs(r.classes[c].f1 - f1[c])});
      o.check(r.classes[c].support == static_cast<std::size_t>(act), "support mismatch");
    }
    const double dn = static_cast<double>(n);
    worst = std::max({worst, std::abs(r.macro.precision - (prec[0] + prec[1]) / 2),
                      std::abs(r.macro.recall - (rec[0] + rec[1]) / 2), std::abs(r.macro.f1 - (f1[0] + f1[1]) / 2),
                      std::abs(r.weighted.precision - (sup[0] * prec[0] + sup[1] * prec[1]) / dn),
                      std::abs(r.weighted.recall - (sup[0] * rec[0] + sup[1] * rec[1]) / dn),
                      std::abs(r.weighted.f1 - (sup[0] * f1[0] + sup[1] * f1[1]) / dn)});
    o.check(r.weighted.recall == r.accuracy, "weighted recall != accuracy in case " + std::to_string(trial));
  }
  o.check(worst <= 1e-12, "max deviation " + fmt(worst) + " > 1e-12");
  if (o.pass) o.detail = "1000 cases, max deviation " + fmt(worst, 2) + ", weighted recall == accuracy in all";
  return o;
}

// --- 3. regimen fidelity -----------------------------------------------------

Outcome regimen() {
  Outcome o;
  const TrainConfig cfg;
  o.check(cfg.learning_rate == 2e-5 && cfg.epochs == 3 && cfg.batch_size == 16 && cfg.warmup_fraction == 0.10,
          "defaults differ from (2e-5, 3 epochs, batch 16, 10% warmup)");
  for (std::size_t total : {10u, 100u, 1000u, 1203u, 5000u}) {
    const std::size_t warm = warmup_steps(total, cfg.warmup_fraction);
    o.check(lr_at_step(0, total, cfg) == 0.0, "lr at step 0 != 0 for total " + std::to_string(total));
    o.check(lr_at_step(total, total, cfg) == 0.0, "lr at final step != 0 for total " + std::to_string(total));
    o.check(lr_at_step(warm, total, cfg) == 2e-5, "lr at warmup boundary != 2e-5 for total " + std::to_string(total));
    for (std::size_t s = 0; s <= total; ++s) {
      const double expected = s < warm ? 2e-5 * static_cast<double>(s) / static_cast<double>(warm)
                                       : 2e-5 * static_cast<double>(total - s) / static_cast<double>(total - warm);
      o.check(std::abs(lr_at_step(s, total, cfg) - expected) <= 1e-20,
              "lr not linear at step " + std::to_string(s) + " of " + std::to_string(total));
    }
  }
  o.check(warmup_steps(1000, 0.10) == 100 && lr_at_step(550, 1000, cfg) == 1e-5, "1000-step reference points wrong");
  if (o.pass) o.detail = "defaults (2e-5, 3, 16, 0.10); 0 -> 2e-5 at the 10% boundary -> 0, linear between";
  return o;
}

// --- 4/5. end-to-end run and determinism ---------------------------------------

struct EndToEnd {
  testing::TempDir dir{"acceptance"};
  std::filesystem::path data, checkpoint;
};

std::string train_command(const EndToEnd& e, const std::filesystem::path& ckpt) {
  return kBin + " train --data " + e.data.string() + " --out " + ckpt.string() +
         " -K 0 --train-fraction 0.8 --d-model 64 --layers 2 --lr 1e-3 --epochs 3 --seed 7";
}

Outcome end_to_end(EndToEnd& e) {
  Outcome o;
  e.data = e.dir / "synth.csv";
  e.checkpoint = e.dir / "run1.ckpt";
  const auto [synth_code, synth_out] = run(kBin + " synth --n 2000 --seed 7 --out " + e.data.string());
  o.check(synth_code == 0, "synth exited " + std::to_string(synth_code));
  if (!o.pass) return o;

  const auto t0 = Clock::now();
  const auto [code, out] = run(train_command(e, e.checkpoint));
  const double secs = seconds_since(t0);
  o.check(code == 0, "train exited " + std::to_string(code));
  if (!o.pass) return o;

  const auto arts = app::artifacts_for(e.checkpoint);
  const auto history = TrainHistory::from_json(testing::slurp(arts.history));
  const double acc = history.epochs[history.best_epoch].validation.accuracy;

  const auto train_ex = window(load_dataset(arts.train_fold), 0);
  const auto val_ex = window(load_dataset(arts.val_fold), 0);
  std::size_t val_ones = 0;
  for (const auto& ex : val_ex) val_ones += ex.label == 1;
  const double majority_share =
      static_cast<double>(std::max(val_ones, val_ex.size() - val_ones)) / static_cast<double>(val_ex.size());
  const double majority = baseline_majority(train_ex, val_ex).accuracy;
  const double bow = baseline_bow(train_ex, val_ex, 7).accuracy;

  o.check(acc >= 0.95, "validation accuracy " + fmt(acc) + " < 0.95");
  o.check(secs < 300.0, "training took " + fmt(secs) + " s");
  o.check(std::abs(majority - majority_share) <= 0.03,
          "majority baseline " + fmt(majority) + " vs fold majority share " + fmt(majority_share));
  o.check(acc > majority && acc > bow,
          "CA-BERT " + fmt(acc) + " does not beat majority " + fmt(majority) + " and bag-of-words " + fmt(bow));
  o.detail = (o.pass ? "" : o.detail + "; ") + "val acc " + fmt(acc) + " (best epoch " +
             std::to_string(history.best_epoch + 1) + "), majority " + fmt(majority) + " (fold share " +
             fmt(majority_share) + "), bag-of-words " + fmt(bow) + ", " + fmt(secs, 3) + " s";
  return o;
}

Outcome determinism(const EndToEnd& e) {
  Outcome o;
  const auto second = e.dir / "run2.ckpt";
  const auto [code, out] = run(train_command(e, second));
  o.check(code == 0, "second train exited " + std::to_string(code));
  if (!o.pass) return o;
  const auto a = app::artifacts_for(e.checkpoint), b = app::artifacts_for(second);
  o.check(testing::slurp(a.history) == testing::slurp(b.history), "TrainHistory differs");
  // The checkpoint records its own vocabulary file name; compare everything
  // else byte for byte by re-serializing with the first run's metadata.
  const auto ca = read_checkpoint(a.checkpoint), cb = read_checkpoint(b.checkpoint);
  o.check(serialize_checkpoint(ca.model, ca.info) == serialize_checkpoint(cb.model, ca.info),
          "best checkpoint weights differ");
  o.check(ca.model_id() == read_checkpoint(a.checkpoint).model_id(), "model id unstable");
  o.check(testing::slurp(a.vocab) == testing::slurp(b.vocab), "vocabulary differs");
  if (o.pass) o.detail = "identical history and bit-identical best checkpoint weights (model " + ca.model_id() + ")";
  return o;
}

// --- 6. round-trips ------------------------------------------------------------

Outcome round_trips(const EndToEnd& e) {
  Outcome o;
  const auto arts = app::artifacts_for(e.checkpoint);
  const auto ckpt = read_checkpoint(e.checkpoint);
  const auto resaved = e.dir / "resaved.ckpt";
  save_checkpoint(ckpt.model, resaved, ckpt.info);
  const auto reloaded = load_checkpoint(resaved);
  const auto vocab = Vocabulary::load(arts.vocab);
  const auto val = encode_examples(window(load_dataset(arts.val_fold), 0), vocab, ckpt.model.config().max_len);
  std::vector<TokenSequence> batch;
  for (const auto& s : val) batch.push_back(s.seq);
  o.check(forward_eval(ckpt.model, std::span<const TokenSequence>(batch)) ==
              forward_eval(reloaded, std::span<const TokenSequence>(batch)),
          "reloaded checkpoint logits differ");

  const auto records = load_dataset(e.data);
  std::ostringstream first, second;
  write_dataset(first, records, DatasetFormat::kCsv);
  std::istringstream in(first.str());
  const auto reparsed = parse_dataset(in, DatasetFormat::kCsv);
  write_dataset(second, reparsed, DatasetFormat::kCsv);
  o.check(reparsed == records && first.str() == second.str(), "CSV parse -> write -> parse is not a fixpoint");

  const auto vocab_copy = e.dir / "vocab.copy";
  vocab.save(vocab_copy);
  o.check(Vocabulary::load(vocab_copy) == vocab && testing::slurp(vocab_copy) == testing::slurp(arts.vocab),
          "vocabulary file round-trip differs");
  if (o.pass)
    o.detail = "logits bit-identical on " + std::to_string(batch.size()) + " sequences; CSV and vocabulary fixpoints";
  return o;
}

// --- 7. split hygiene ----------------------------------------------------------

Outcome split_hygiene() {
  Outcome o;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto records = synthesize(500 + 17 * seed, 1000 + seed);
    std::map<std::string, std::size_t> sizes;
    for (const auto& r : records) ++sizes[r.chat_id];
    std::size_t largest = 0;
    for (const auto& [id, n] : sizes) largest = std::max(largest, n);
    const auto [train, val] = split(records, 0.8, seed);
    std::set<std::string> train_ids;
    for (const auto& r : train) train_ids.insert(r.chat_id);
    for (const auto& r : val) o.check(!train_ids.count(r.chat_id), "chat_id " + r.chat_id + " spans folds");
    const double off = std::abs(static_cast<double>(train.size()) - 0.8 * static_cast<double>(records.size()));
    o.check(off <= static_cast<double>(largest), "seed " + std::to_string(seed) + ": train fold off by " + fmt(off));
    o.check(train.size() + val.size() == records.size(), "records lost");
  }
  std::vector<ChatRecord> equal;
  for (int c = 0; c < 2500; ++c)
    for (int t = 0; t < 4; ++t) equal.push_back({"turn", t % 2, "conv-" + std::to_string(c), "x"});
  const auto [train, val] = split(equal, 0.8, 0);
  o.check(train.size() == 8000 && val.size() == 2000,
          "10,000 records split " + std::to_string(train.size()) + "/" + std::to_string(val.size()));
  if (o.pass) o.detail = "100 seeds clean; 10,000 records -> 8000/2000";
  return o;
}

// --- 8. report format ----------------------------------------------------------

Outcome report_format() {
  Outcome o;
  MetricsReport r;
  r.accuracy = 0.9423;
  r.classes[0] = {0.97, 0.85, 0.91, 2500, false};
  r.classes[1] = {0.93, 0.98, 0.95, 4400, false};
  r.macro = {0.95, 0.94, 0.93};
  r.weighted = {0.94, 0.95, 0.94};
  r.total = 6900;
  const auto text = format_report(r);
  o.check(text.rfind("Validation Accuracy: 0.9423\n", 0) == 0, "header line not rendered verbatim");
  o.check(text.find("           0      0.97      0.85      0.91      2500\n") != std::string::npos,
          "class-0 row not rendered as 0.97/0.85/0.91/2500");
  o.check(format_report(r) == text, "formatting is not deterministic");
  if (o.pass) o.detail = "header \"0.9423\" and 0.97/0.85/0.91/2500 row rendered";
  return o;
}

// --- 9. service --------------------------------------------------------------

Outcome service(const EndToEnd& e) {
  Outcome o;
  const auto gate = app::ContextGate::open(e.checkpoint);
  auto server = app::make_server(gate);
  const int port = server->bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server->listen_after_bind(); });
  server->wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/healthz");
  o.check(health && health->status == 200 && health->body == "ok", "/healthz did not return 200 ok");
  const auto bad = client.Post("/classify", R"({"turns": []})", "application/json");
  o.check(bad && bad->status == 400, "malformed /classify did not return 400");

  const std::string body = R"({"turns": ["Tell me about Rome.", "What about its weather?"]})";
  std::vector<std::future<std::string>> replies;
  for (int i = 0; i < 50; ++i)
    replies.push_back(std::async(std::launch::async, [&] {
      httplib::Client c("127.0.0.1", port);
      const auto r = c.Post("/classify", body, "application/json");
      return r && r->status == 200 ? r->body : std::string("<error>");
    }));
  std::set<std::string> distinct;
  for (auto& f : replies) distinct.insert(f.get());
  o.check(distinct.size() == 1 && *distinct.begin() != "<error>", "concurrent responses differ or failed");

  // CLI predict (separate process) against the live service.
  const auto examples = window(synthesize(100, 4242), 2);
  std::size_t agree = 0;
  for (const auto& ex : examples) {
    std::string cmd = kBin + " predict --checkpoint " + e.checkpoint.string() + " --";
    for (const auto& t : ex.turns) cmd += " " + shell_quote(t);
    const auto [code, out] = run(cmd);
    const auto res = client.Post("/classify", nlohmann::json{{"turns", ex.turns}}.dump(), "application/json");
    if (code == 0 && res && res->status == 200 && out == res->body + "\n") ++agree;
  }
  o.check(agree == examples.size(), "CLI and service agree on " + std::to_string(agree) + "/100 inputs");

  server->stop();
  listener.join();
  if (o.pass) o.detail = "healthz 200, malformed 400, 50 concurrent bodies identical, CLI == service on 100/100";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report_line = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
  };

  EndToEnd e;
  report_line(1, "gradient suite", gradient_suite);
  report_line(2, "metrics oracle", metrics_oracle);
  report_line(3, "regimen fidelity", regimen);
  report_line(4, "end-to-end desk-scale run", [&] { return end_to_end(e); });
  report_line(5, "determinism", [&] { return determinism(e); });
  report_line(6, "round-trips", [&] { return round_trips(e); });
  report_line(7, "split hygiene", split_hygiene);
  report_line(8, "report format", report_format);
  report_line(9, "service", [&] { return service(e); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
