#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace ctxgate {

/// counts[true][pred] for the two classes.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const noexcept { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  /// Set when any of the three rates hit 0/0 and was defined as 0.
  bool degenerate = false;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const AverageMetrics&, const AverageMetrics&) = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> classes{};
  AverageMetrics macro;
  AverageMetrics weighted;
  std::size_t total = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Labels must be 0 or 1; lengths must match and be non-zero.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

MetricsReport report(const ConfusionMatrix& cm);

/// Fixed-width text table: an accuracy header line at four decimals, then
/// per-class rows, accuracy, macro avg and weighted avg at two decimals.
std::string format_report(const MetricsReport& r, std::string_view title = "Validation");

/// Full-precision machine-readable form of the same fields.
std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(std::string_view text);

}  // namespace ctxgate
