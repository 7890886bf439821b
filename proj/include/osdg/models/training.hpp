#pragma once

#include <vector>

#include "osdg/corpus.hpp"
#include "osdg/models/metrics.hpp"
#include "osdg/models/ovr.hpp"

namespace osdg {

// Curates `dataset` per `setup` (SDG 17 dropped, agreement/majority filter)
// and splits it. Training and evaluation both go through here so they see
// the same held-out rows.
Split prepare_split(const Corpus& dataset, const DatasetSetup& setup);

struct TrainingRun {
  OvrModelSet model_set;
  Split split;
  std::vector<BinaryMetrics> test_metrics;
};

TrainingRun run_training(const Corpus& dataset, const DatasetSetup& setup, const ModelSetOptions& options);

}  // namespace osdg
