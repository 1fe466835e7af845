#pragma once

#include <cstdint>

namespace biaslens::eval {

/// Binary confusion counts with "biased" as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  [[nodiscard]] std::uint64_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Scores on the biased class plus micro/macro F1 over both classes. A
/// ratio with a zero denominator is reported as 0 and flagged.
struct MetricsRow {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double micro_f1 = 0.0;  // equals accuracy for single-label binary data
  double macro_f1 = 0.0;  // mean of biased and non-biased F1

  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool non_biased_precision_undefined = false;
  bool non_biased_recall_undefined = false;
  bool non_biased_f1_undefined = false;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// Harmonic mean; 0 when precision + recall is 0.
double f1_score(double precision, double recall);

/// Throws Error(empty_input) when every count is zero.
MetricsRow compute_metrics(const ConfusionCounts& counts);

/// Whether a reported F1 (in percent) matches the harmonic mean of the
/// reported precision and recall within `tolerance_pp` percentage points.
bool f1_consistent(double precision_pct, double recall_pct, double f1_pct, double tolerance_pp);

}  // namespace biaslens::eval
