#include "osdg/models/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "osdg/error.hpp"

namespace osdg {

double BinaryMetrics::always_positive_f1() const {
  if (rows == 0 || support == 0) return 0.0;
  const double p = static_cast<double>(support) / static_cast<double>(rows);
  return 2.0 * p / (1.0 + p);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

BinaryMetrics binary_metrics(SdgId sdg, std::span<const double> scores,
                             std::span<const int> labels, double threshold) {
  BinaryMetrics m;
  m.sdg = sdg;
  m.rows = labels.size();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) {
      ++m.support;
      predicted ? ++tp : ++fn;
    } else if (predicted) {
      ++fp;
    }
  }
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.auc = roc_auc(scores, labels);
  return m;
}

std::vector<BinaryMetrics> evaluate(const OvrModelSet& model_set, const Corpus& corpus) {
  std::vector<FeatureVector> features;
  features.reserve(corpus.size());
  for (const auto& row : corpus) features.push_back(featurize(row.text, model_set.vocabulary));

  std::vector<BinaryMetrics> out;
  for (const auto& [sdg, model] : model_set.models) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (auto t = ovr_target(corpus[i], sdg)) {
        scores.push_back(model.probability(features[i]));
        labels.push_back(*t ? 1 : 0);
      }
    }
    out.push_back(binary_metrics(sdg, scores, labels, model.threshold));
  }
  return out;
}

std::string metrics_json(const std::vector<BinaryMetrics>& metrics) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& m : metrics) {
    arr.push_back({{"sdg", m.sdg.value()},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"auc", std::isnan(m.auc) ? nlohmann::ordered_json() : nlohmann::ordered_json(m.auc)},
                   {"support", m.support}});
  }
  return arr.dump(2);
}

std::string metrics_table(const std::vector<BinaryMetrics>& metrics) {
  std::string out = "sdg  precision  recall     f1      auc     support\n";
  char line[128];
  for (const auto& m : metrics) {
    std::snprintf(line, sizeof line, "%3d  %9.4f  %6.4f  %6.4f  %7.4f  %7zu\n", m.sdg.value(),
                  m.precision, m.recall, m.f1, m.auc, m.support);
    out += line;
  }
  return out;
}

}  // namespace osdg
