#include "biaslens/eval/metrics.hpp"

#include <cmath>

#include "biaslens/common.hpp"

namespace biaslens::eval {

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f1_score(double precision, double recall) {
  double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

MetricsRow compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(ErrorCode::empty_input, "confusion counts are all zero");
  MetricsRow row;
  row.precision = ratio(c.tp, c.tp + c.fp, row.precision_undefined);
  row.recall = ratio(c.tp, c.tp + c.fn, row.recall_undefined);
  row.f1_undefined = row.precision + row.recall == 0.0;
  row.f1 = f1_score(row.precision, row.recall);

  double nb_precision = ratio(c.tn, c.tn + c.fn, row.non_biased_precision_undefined);
  double nb_recall = ratio(c.tn, c.tn + c.fp, row.non_biased_recall_undefined);
  row.non_biased_f1_undefined = nb_precision + nb_recall == 0.0;
  double nb_f1 = f1_score(nb_precision, nb_recall);

  row.micro_f1 = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  row.macro_f1 = (row.f1 + nb_f1) / 2.0;
  return row;
}

bool f1_consistent(double precision_pct, double recall_pct, double f1_pct, double tolerance_pp) {
  return std::abs(f1_score(precision_pct, recall_pct) - f1_pct) <= tolerance_pp;
}

}  // namespace biaslens::eval
