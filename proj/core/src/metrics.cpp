#include "ctxgate/metrics.hpp"

#include <cstdio>
#include <json.hpp>

#include "ctxgate/errors.hpp"

namespace ctxgate {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ArgumentError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                        std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw ArgumentError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw ArgumentError("confusion: non-binary label at position " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

MetricsReport report(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.total = cm.total();
  if (r.total == 0) throw ArgumentError("report: empty confusion matrix");
  auto ratio = [](double num, double den, bool& degenerate) {
    if (den == 0.0) {
      degenerate = true;
      return 0.0;
    }
    return num / den;
  };
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t o = 1 - c;
    const auto tp = static_cast<double>(cm.counts[c][c]);
    const auto fp = static_cast<double>(cm.counts[o][c]);
    const auto fn = static_cast<double>(cm.counts[c][o]);
    ClassMetrics& m = r.classes[c];
    m.support = cm.counts[c][c] + cm.counts[c][o];
    m.precision = ratio(tp, tp + fp, m.degenerate);
    m.recall = ratio(tp, tp + fn, m.degenerate);
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, m.degenerate);
  }
  const auto total = static_cast<double>(r.total);
  r.accuracy = static_cast<double>(cm.counts[0][0] + cm.counts[1][1]) / total;
  const auto& a = r.classes[0];
  const auto& b = r.classes[1];
  r.macro = {(a.precision + b.precision) / 2.0, (a.recall + b.recall) / 2.0, (a.f1 + b.f1) / 2.0};
  const auto wa = static_cast<double>(a.support), wb = static_cast<double>(b.support);
  r.weighted = {(wa * a.precision + wb * b.precision) / total, (wa * a.recall + wb * b.recall) / total,
                (wa * a.f1 + wb * b.f1) / total};
  // support_c * recall_c == TP_c only up to rounding; use the exact count so
  // weighted recall is bit-equal to accuracy.
  r.weighted.recall = r.accuracy;
  return r;
}

std::string format_report(const MetricsReport& r, std::string_view title) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%.*s Accuracy: %.4f\n\n", static_cast<int>(title.size()), title.data(),
                r.accuracy);
  out += line;
  std::snprintf(line, sizeof line, "%12s%10s%10s%10s%10s\n\n", "", "precision", "recall", "f1-score", "support");
  out += line;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& m = r.classes[c];
    std::snprintf(line, sizeof line, "%12zu%10.2f%10.2f%10.2f%10zu\n", c, m.precision, m.recall, m.f1, m.support);
    out += line;
  }
  out += "\n";
  std::snprintf(line, sizeof line, "%12s%10s%10s%10.2f%10zu\n", "accuracy", "", "", r.accuracy, r.total);
  out += line;
  std::snprintf(line, sizeof line, "%12s%10.2f%10.2f%10.2f%10zu\n", "macro avg", r.macro.precision, r.macro.recall,
                r.macro.f1, r.total);
  out += line;
  std::snprintf(line, sizeof line, "%12s%10.2f%10.2f%10.2f%10zu\n", "weighted avg", r.weighted.precision,
                r.weighted.recall, r.weighted.f1, r.total);
  out += line;
  return out;
}

namespace {

using nlohmann::json;

json averages_json(const AverageMetrics& a) {
  return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

AverageMetrics averages_from(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  json classes = json::array();
  for (const auto& m : r.classes) {
    classes.push_back(json{{"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support},
                           {"degenerate", m.degenerate}});
  }
  json j{{"accuracy", r.accuracy},
         {"classes", classes},
         {"macro_avg", averages_json(r.macro)},
         {"weighted_avg", averages_json(r.weighted)},
         {"total", r.total}};
  return j.dump();
}

MetricsReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    MetricsReport r;
    r.accuracy = j.at("accuracy").get<double>();
    const auto& classes = j.at("classes");
    if (classes.size() != 2) throw ArgumentError("report_from_json: expected two classes");
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& m = classes[c];
      r.classes[c] = {m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>(),
                      m.at("support").get<std::size_t>(), m.at("degenerate").get<bool>()};
    }
    r.macro = averages_from(j.at("macro_avg"));
    r.weighted = averages_from(j.at("weighted_avg"));
    r.total = j.at("total").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("report_from_json: ") + e.what());
  }
}

}  // namespace ctxgate
