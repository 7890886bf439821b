#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "osdg/corpus.hpp"
#include "osdg/models/vocabulary.hpp"
#include "osdg/sdg.hpp"

namespace osdg {

inline constexpr std::string_view kModelFormatVersion = "osdg-ovr/1";

struct TrainConfig {
  double lambda = 1e-4;
  double lr = 0.1;             // decays as lr / sqrt(epoch)
  std::size_t epochs = 500;    // upper bound
  std::uint64_t seed = 42;
  std::size_t patience = 10;
  double threshold = 0.5;
  double validation_fraction = 0.1;  // ignored below kMinValidationRows
};

inline constexpr std::size_t kMinValidationRows = 20;
inline constexpr std::size_t kLossSmoothingWindow = 5;

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::size_t max_epochs = 0;
  std::size_t patience = 0;
  double lambda = 0;
  double lr = 0;
  double positive_weight = 1;
  double negative_weight = 1;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t validation_rows = 0;
  // Training objective per epoch up to and including best_epoch.
  std::vector<double> loss_curve;
  std::vector<double> validation_curve;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct OvrModel {
  SdgId sdg{1};
  Eigen::VectorXd weights;
  double bias = 0;
  double threshold = 0.5;
  TrainingMeta training_meta;

  double decision(const FeatureVector& x) const { return x.dot(weights) + bias; }
  double probability(const FeatureVector& x) const;
};

// How the training set was curated; persisted so evaluation can rebuild the
// same held-out split.
struct DatasetSetup {
  double min_agreement = 0.6;
  bool require_positive_majority = true;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;

  friend bool operator==(const DatasetSetup&, const DatasetSetup&) = default;
};

struct OvrModelSet {
  std::string format_version{kModelFormatVersion};
  Vocabulary vocabulary;
  std::map<SdgId, OvrModel> models;
  DatasetSetup dataset;
};

// One-vs-rest target for `sdg`: true for a positive-majority row of that SDG,
// false for rows of other SDGs and negative-majority rows of that SDG,
// nullopt for tied rows of that SDG.
std::optional<bool> ovr_target(const LabeledSnippet& row, SdgId sdg);

// Throws Error{NoPositives}/{NoNegatives} naming the SDG and
// Error{Divergence} carrying the epoch at which the loss went non-finite.
OvrModel train_ovr(const Corpus& train, SdgId sdg, const Vocabulary& vocabulary,
                   const TrainConfig& config);

struct ModelSetOptions {
  std::size_t min_df = 5;
  std::size_t max_features = 50000;
  TrainConfig train;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Builds the vocabulary on `train` and fits SDGs 1..16 in parallel.
OvrModelSet train_model_set(const Corpus& train, const ModelSetOptions& options,
                            const DatasetSetup& dataset = {});

using SdgScores = std::map<SdgId, double>;

SdgScores predict_proba(const OvrModelSet& model_set, std::string_view text);
SdgScores predict_proba(const OvrModelSet& model_set, const FeatureVector& x);
// SDGs whose probability is at or above the model's threshold.
std::set<SdgId> ml_labels(const SdgScores& probs, const OvrModelSet& model_set);

void save_model_set(const OvrModelSet& model_set, const std::filesystem::path& path);
std::string serialize_model_set(const OvrModelSet& model_set);
// Throws Error{Corrupt} for empty/truncated/invalid files and
// Error{UnsupportedVersion} for an unknown format_version.
OvrModelSet load_model_set(const std::filesystem::path& path);
OvrModelSet parse_model_set(std::string_view bytes);

}  // namespace osdg
