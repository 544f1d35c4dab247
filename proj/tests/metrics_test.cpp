#include <gtest/gtest.h>

#include "ctxgate/errors.hpp"
#include "ctxgate/metrics.hpp"
#include "ctxgate/rng.hpp"

namespace ctxgate {
namespace {

// Brute-force recomputation straight from the label lists.
struct Oracle {
  double accuracy;
  double precision[2], recall[2], f1[2];
  std::size_t support[2];
  double macro_p, macro_r, macro_f, weighted_p, weighted_r, weighted_f;
};

Oracle oracle(const std::vector<int>& t, const std::vector<int>& p) {
  Oracle o{};
  const auto n = static_cast<double>(t.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < t.size(); ++i) correct += t[i] == p[i];
  o.accuracy = static_cast<double>(correct) / n;
  for (int c = 0; c < 2; ++c) {
    std::size_t tp = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp += t[i] == c && p[i] == c;
      predicted += p[i] == c;
      actual += t[i] == c;
    }
    const double prec = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double rec = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    o.precision[c] = prec;
    o.recall[c] = rec;
    o.f1[c] = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    o.support[c] = actual;
  }
  o.macro_p = (o.precision[0] + o.precision[1]) / 2;
  o.macro_r = (o.recall[0] + o.recall[1]) / 2;
  o.macro_f = (o.f1[0] + o.f1[1]) / 2;
  const double w0 = static_cast<double>(o.support[0]) / n, w1 = static_cast<double>(o.support[1]) / n;
  o.weighted_p = w0 * o.precision[0] + w1 * o.precision[1];
  o.weighted_r = w0 * o.recall[0] + w1 * o.recall[1];
  o.weighted_f = w0 * o.f1[0] + w1 * o.f1[1];
  return o;
}

TEST(Confusion, KnownCases) {
  const std::vector<int> t{0, 1}, p{0, 1};
  const auto cm = confusion(t, p);
  EXPECT_EQ(cm.counts[0][0], 1u);
  EXPECT_EQ(cm.counts[1][1], 1u);
  EXPECT_EQ(cm.counts[0][1], 0u);
  EXPECT_EQ(cm.counts[1][0], 0u);
  const std::vector<int> one{1}, zero{0};
  EXPECT_EQ(confusion(one, zero).counts[1][0], 1u);
}

TEST(Confusion, RejectsBadInput) {
  const std::vector<int> a{0, 1}, b{0}, c{0, 2}, empty;
  EXPECT_THROW(confusion(a, b), ArgumentError);
  EXPECT_THROW(confusion(a, c), ArgumentError);
  EXPECT_THROW(confusion(empty, empty), ArgumentError);
}

TEST(Confusion, MatchesTallyOnRandomVectors) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t(100), p(100);
    std::size_t tally[2][2] = {};
    for (std::size_t i = 0; i < 100; ++i) {
      t[i] = static_cast<int>(rng.below(2));
      p[i] = static_cast<int>(rng.below(2));
      ++tally[t[i]][p[i]];
    }
    const auto cm = confusion(t, p);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_EQ(cm.counts[a][b], tally[a][b]);
  }
}

TEST(Report, PerfectPredictions) {
  const std::vector<int> t{0, 1, 1, 0, 1};
  const auto r = report(confusion(t, t));
  EXPECT_EQ(r.accuracy, 1.0);
  for (const auto& c : r.classes) {
    EXPECT_EQ(c.precision, 1.0);
    EXPECT_EQ(c.recall, 1.0);
    EXPECT_EQ(c.f1, 1.0);
    EXPECT_FALSE(c.degenerate);
  }
}

TEST(Report, FormulaCase) {
  // Class 0: TP=1, FP=1, FN=0.
  const std::vector<int> t{0, 1}, p{0, 0};
  const auto r = report(confusion(t, p));
  EXPECT_EQ(r.classes[0].precision, 0.5);
  EXPECT_EQ(r.classes[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.classes[0].f1, 2.0 / 3.0);
}

TEST(Report, ZeroOverZeroIsZero) {
  const std::vector<int> t{0, 0, 0}, p{0, 0, 0};
  const auto r = report(confusion(t, p));
  EXPECT_EQ(r.classes[1].precision, 0.0);
  EXPECT_EQ(r.classes[1].recall, 0.0);
  EXPECT_EQ(r.classes[1].f1, 0.0);
  EXPECT_EQ(r.classes[1].support, 0u);
  EXPECT_TRUE(r.classes[1].degenerate);
}

TEST(Report, AgreesWithBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(100);
    // Vary the skew so degenerate classes show up regularly.
    const double p1 = rng.uniform(), agree = rng.uniform();
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.bernoulli(p1);
      p[i] = rng.bernoulli(agree) ? t[i] : static_cast<int>(rng.below(2));
    }
    const auto r = report(confusion(t, p));
    const auto o = oracle(t, p);
    constexpr double tol = 1e-12;
    EXPECT_NEAR(r.accuracy, o.accuracy, tol);
    for (int c = 0; c < 2; ++c) {
      EXPECT_NEAR(r.classes[c].precision, o.precision[c], tol);
      EXPECT_NEAR(r.classes[c].recall, o.recall[c], tol);
      EXPECT_NEAR(r.classes[c].f1, o.f1[c], tol);
      EXPECT_EQ(r.classes[c].support, o.support[c]);
      const auto& m = r.classes[c];
      EXPECT_LE(std::min(m.precision, m.recall), m.f1 + tol);
      EXPECT_GE(std::max(m.precision, m.recall), m.f1 - tol);
      EXPECT_EQ(m.f1 == 0.0, m.precision * m.recall == 0.0);
    }
    EXPECT_NEAR(r.macro.precision, o.macro_p, tol);
    EXPECT_NEAR(r.macro.recall, o.macro_r, tol);
    EXPECT_NEAR(r.macro.f1, o.macro_f, tol);
    EXPECT_NEAR(r.weighted.precision, o.weighted_p, tol);
    EXPECT_NEAR(r.weighted.recall, o.weighted_r, tol);
    EXPECT_NEAR(r.weighted.f1, o.weighted_f, tol);
    EXPECT_EQ(r.weighted.recall, r.accuracy);
    EXPECT_EQ(r.total, n);
    EXPECT_EQ(r.classes[0].support + r.classes[1].support, n);
  }
}

MetricsReport table_two() {
  MetricsReport r;
  r.accuracy = 0.9423;
  r.classes[0] = {0.97, 0.85, 0.91, 2500, false};
  r.classes[1] = {0.93, 0.98, 0.95, 4400, false};
  r.macro = {0.95, 0.94, 0.93};
  r.weighted = {0.94, 0.95, 0.94};
  r.total = 6900;
  return r;
}

TEST(FormatReport, RendersTableTwoValues) {
  const auto text = format_report(table_two());
  EXPECT_EQ(text.rfind("Validation Accuracy: 0.9423\n", 0), 0u) << text;
  EXPECT_NE(text.find("           0      0.97      0.85      0.91      2500\n"), std::string::npos) << text;
  EXPECT_NE(text.find("           1      0.93      0.98      0.95      4400\n"), std::string::npos) << text;
  EXPECT_NE(text.find("   macro avg      0.95      0.94      0.93      6900\n"), std::string::npos) << text;
  EXPECT_NE(text.find("weighted avg      0.94      0.95      0.94      6900\n"), std::string::npos) << text;
  EXPECT_NE(text.find("precision    recall  f1-score   support"), std::string::npos) << text;
  EXPECT_EQ(format_report(table_two()), text);
  EXPECT_EQ(format_report(table_two(), "Test").rfind("Test Accuracy: 0.9423", 0), 0u);
}

TEST(ReportJson, RoundTripIsExact) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t(37), p(37);
    for (std::size_t i = 0; i < 37; ++i) {
      t[i] = static_cast<int>(rng.below(2));
      p[i] = static_cast<int>(rng.below(2));
    }
    const auto r = report(confusion(t, p));
    EXPECT_EQ(report_from_json(report_to_json(r)), r);
  }
  EXPECT_EQ(report_from_json(report_to_json(table_two())), table_two());
  EXPECT_THROW(report_from_json("{}"), ArgumentError);
}

}  // namespace
}  // namespace ctxgate
