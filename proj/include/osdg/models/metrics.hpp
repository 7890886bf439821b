#pragma once

#include <span>
#include <string>
#include <vector>

#include "osdg/corpus.hpp"
#include "osdg/models/ovr.hpp"

namespace osdg {

struct BinaryMetrics {
  SdgId sdg{1};
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double auc = 0;  // NaN when one class is absent
  std::size_t support = 0;  // positives
  std::size_t rows = 0;

  // F1 of the classifier that predicts positive for every row.
  double always_positive_f1() const;
};

// ROC-AUC as the Mann-Whitney statistic with mid-ranks for ties.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

BinaryMetrics binary_metrics(SdgId sdg, std::span<const double> scores,
                             std::span<const int> labels, double threshold);

// Per-SDG held-out metrics for SDGs 1..16 over the rows with a one-vs-rest
// target.
std::vector<BinaryMetrics> evaluate(const OvrModelSet& model_set, const Corpus& corpus);

// Frozen schema: [{sdg, precision, recall, f1, auc, support}, ...].
std::string metrics_json(const std::vector<BinaryMetrics>& metrics);
std::string metrics_table(const std::vector<BinaryMetrics>& metrics);

}  // namespace osdg
