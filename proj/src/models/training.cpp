#include "osdg/models/training.hpp"

#include "osdg/error.hpp"

namespace osdg {

Split prepare_split(const Corpus& dataset, const DatasetSetup& setup) {
  const Corpus curated =
      filter_high_agreement(trainable_rows(dataset), setup.min_agreement, setup.require_positive_majority);
  if (curated.empty()) throw Error(ErrorCode::EmptyCorpus, "no rows left after filtering");
  return split(curated, setup.test_fraction, setup.seed);
}

TrainingRun run_training(const Corpus& dataset, const DatasetSetup& setup, const ModelSetOptions& options) {
  TrainingRun run;
  run.split = prepare_split(dataset, setup);
  run.model_set = train_model_set(run.split.train, options, setup);
  run.test_metrics = evaluate(run.model_set, run.split.test);
  return run;
}

}  // namespace osdg
