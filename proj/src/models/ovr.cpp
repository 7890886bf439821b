#include "osdg/models/ovr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "osdg/error.hpp"
#include "osdg/models/logistic.hpp"
#include "osdg/util.hpp"

namespace osdg {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using json = nlohmann::json;

namespace {

SparseRows select_rows(const SparseRows& X, const std::vector<std::size_t>& rows) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (SparseRows::InnerIterator it(X, static_cast<Eigen::Index>(rows[r])); it; ++it)
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
  SparseRows out(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

double trailing_mean(const std::vector<double>& curve, std::size_t end) {
  const std::size_t begin = end > kLossSmoothingWindow ? end - kLossSmoothingWindow : 0;
  double sum = 0;
  for (std::size_t i = begin; i < end; ++i) sum += curve[i];
  return sum / static_cast<double>(end - begin);
}

// Fits one binary model on the rows of X that have a one-vs-rest target.
OvrModel fit_binary(const SparseRows& X_all, const Corpus& corpus, SdgId sdg,
                    const TrainConfig& config) {
  std::vector<std::size_t> rows;
  std::vector<double> targets;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (auto t = ovr_target(corpus[i], sdg)) {
      rows.push_back(i);
      targets.push_back(*t ? 1.0 : 0.0);
      positives += *t ? 1 : 0;
    }
  }
  const std::size_t negatives = rows.size() - positives;
  const std::string name = "SDG " + std::to_string(sdg.value());
  if (positives == 0) throw Error(ErrorCode::NoPositives, name + " has no positive training rows");
  if (negatives == 0) throw Error(ErrorCode::NoNegatives, name + " has no negative training rows");
  if (!(config.lambda >= 0.0) || !(config.lr > 0.0) || config.epochs == 0 || config.patience == 0 ||
      !(config.threshold > 0.0 && config.threshold < 1.0))
    throw Error(ErrorCode::InvalidArgument, "invalid training configuration");

  // Inverse class frequency, normalized so the weights average to one.
  const double n = static_cast<double>(rows.size());
  const double w_pos = n / (2.0 * static_cast<double>(positives));
  const double w_neg = n / (2.0 * static_cast<double>(negatives));

  Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(sdg.value()));
  std::vector<std::size_t> local(rows.size());
  for (std::size_t i = 0; i < local.size(); ++i) local[i] = i;
  std::vector<std::size_t> fit_idx, val_idx;
  if (rows.size() >= kMinValidationRows) {
    shuffle(local, rng);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(n * config.validation_fraction)));
    val_idx.assign(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit_idx.assign(local.begin() + static_cast<std::ptrdiff_t>(n_val), local.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(fit_idx.begin(), fit_idx.end());
  } else {
    fit_idx = local;
    val_idx = local;
  }

  auto gather = [&](const std::vector<std::size_t>& idx, SparseRows& X, Eigen::VectorXd& y,
                    Eigen::VectorXd& c) {
    std::vector<std::size_t> source(idx.size());
    y.resize(static_cast<Eigen::Index>(idx.size()));
    c.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      source[k] = rows[idx[k]];
      y[static_cast<Eigen::Index>(k)] = targets[idx[k]];
      c[static_cast<Eigen::Index>(k)] = targets[idx[k]] > 0.5 ? w_pos : w_neg;
    }
    X = select_rows(X_all, source);
  };
  SparseRows X_fit, X_val;
  Eigen::VectorXd y_fit, c_fit, y_val, c_val;
  gather(fit_idx, X_fit, y_fit, c_fit);
  gather(val_idx, X_val, y_val, c_val);

  const Eigen::Index dim = X_all.cols();
  // w = scale * v keeps the per-step L2 shrinkage O(1).
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  double scale = 1.0;
  double bias = 0.0;

  OvrModel model{sdg, Eigen::VectorXd::Zero(dim), 0.0, config.threshold, {}};
  TrainingMeta& meta = model.training_meta;
  meta.seed = config.seed;
  meta.max_epochs = config.epochs;
  meta.patience = config.patience;
  meta.lambda = config.lambda;
  meta.lr = config.lr;
  meta.positive_weight = w_pos;
  meta.negative_weight = w_neg;
  meta.positives = positives;
  meta.negatives = negatives;
  meta.validation_rows = val_idx.size();

  std::vector<double> curve, val_curve;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X_fit.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double eta = config.lr / std::sqrt(static_cast<double>(epoch));
    const double shrink = 1.0 / (1.0 + eta * config.lambda);
    shuffle(order, rng);
    for (Eigen::Index r : order) {
      double dot = 0.0;
      for (SparseRows::InnerIterator it(X_fit, r); it; ++it) dot += it.value() * v[it.col()];
      const double z = scale * dot + bias;
      const double g = c_fit[r] * (sigmoid(z) - y_fit[r]);
      if (g != 0.0) {
        const double step = eta * g / scale;
        for (SparseRows::InnerIterator it(X_fit, r); it; ++it) v[it.col()] -= step * it.value();
        bias -= eta * g;
      }
      scale *= shrink;
      if (scale < 1e-9) {
        v *= scale;
        scale = 1.0;
      }
    }
    const Eigen::VectorXd w = scale * v;
    const double loss = regularized_log_loss(X_fit, y_fit, c_fit, w, bias, config.lambda);
    const double val_loss = regularized_log_loss(X_val, y_val, c_val, w, bias, 0.0);
    if (!std::isfinite(loss) || !std::isfinite(val_loss) || !std::isfinite(bias) || !w.allFinite())
      throw Error(ErrorCode::Divergence,
                  name + " diverged at epoch " + std::to_string(epoch));
    curve.push_back(loss);
    val_curve.push_back(val_loss);
    meta.epochs_run = epoch;
    // Guard: a rising smoothed training loss ends training; that epoch's
    // weights are never kept.
    if (curve.size() >= 2 && trailing_mean(curve, curve.size()) > trailing_mean(curve, curve.size() - 1))
      break;
    if (val_loss < best_val) {
      best_val = val_loss;
      model.weights = w;
      model.bias = bias;
      meta.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  meta.loss_curve.assign(curve.begin(), curve.begin() + static_cast<std::ptrdiff_t>(meta.best_epoch));
  meta.validation_curve.assign(val_curve.begin(),
                               val_curve.begin() + static_cast<std::ptrdiff_t>(meta.best_epoch));
  return model;
}

json meta_to_json(const TrainingMeta& m) {
  return json{{"seed", m.seed},
              {"epochs_run", m.epochs_run},
              {"best_epoch", m.best_epoch},
              {"max_epochs", m.max_epochs},
              {"patience", m.patience},
              {"lambda", m.lambda},
              {"lr", m.lr},
              {"positive_weight", m.positive_weight},
              {"negative_weight", m.negative_weight},
              {"positives", m.positives},
              {"negatives", m.negatives},
              {"validation_rows", m.validation_rows},
              {"loss_curve", m.loss_curve},
              {"validation_curve", m.validation_curve}};
}

TrainingMeta meta_from_json(const json& j) {
  TrainingMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.epochs_run = j.at("epochs_run").get<std::size_t>();
  m.best_epoch = j.at("best_epoch").get<std::size_t>();
  m.max_epochs = j.at("max_epochs").get<std::size_t>();
  m.patience = j.at("patience").get<std::size_t>();
  m.lambda = j.at("lambda").get<double>();
  m.lr = j.at("lr").get<double>();
  m.positive_weight = j.at("positive_weight").get<double>();
  m.negative_weight = j.at("negative_weight").get<double>();
  m.positives = j.at("positives").get<std::size_t>();
  m.negatives = j.at("negatives").get<std::size_t>();
  m.validation_rows = j.at("validation_rows").get<std::size_t>();
  m.loss_curve = j.at("loss_curve").get<std::vector<double>>();
  m.validation_curve = j.at("validation_curve").get<std::vector<double>>();
  return m;
}

}  // namespace

double OvrModel::probability(const FeatureVector& x) const {
  return sigmoid(x.dot(weights) + bias);
}

std::optional<bool> ovr_target(const LabeledSnippet& row, SdgId sdg) {
  if (row.sdg != sdg) return false;
  if (row.positive_majority()) return true;
  if (row.negative_majority()) return false;
  return std::nullopt;
}

OvrModel train_ovr(const Corpus& train, SdgId sdg, const Vocabulary& vocabulary,
                   const TrainConfig& config) {
  return fit_binary(featurize_corpus(train, vocabulary), train, sdg, config);
}

OvrModelSet train_model_set(const Corpus& train, const ModelSetOptions& options,
                            const DatasetSetup& dataset) {
  OvrModelSet set;
  set.dataset = dataset;
  set.vocabulary = build_vocabulary(train, options.min_df, options.max_features);
  const SparseRows X = featurize_corpus(train, set.vocabulary);

  const auto sdgs = trainable_sdgs();
  std::vector<std::optional<OvrModel>> fitted(sdgs.size());
  std::vector<std::exception_ptr> failures(sdgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < sdgs.size();) {
      try {
        fitted[k] = fit_binary(X, train, sdgs[k], options.train);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(sdgs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t k = 0; k < sdgs.size(); ++k) {
    if (failures[k]) std::rethrow_exception(failures[k]);
    set.models.emplace(sdgs[k], std::move(*fitted[k]));
  }
  return set;
}

SdgScores predict_proba(const OvrModelSet& model_set, std::string_view text) {
  return predict_proba(model_set, featurize(text, model_set.vocabulary));
}

SdgScores predict_proba(const OvrModelSet& model_set, const FeatureVector& x) {
  SdgScores out;
  for (const auto& [sdg, model] : model_set.models) out.emplace(sdg, model.probability(x));
  return out;
}

std::set<SdgId> ml_labels(const SdgScores& probs, const OvrModelSet& model_set) {
  std::set<SdgId> out;
  for (const auto& [sdg, p] : probs) {
    auto it = model_set.models.find(sdg);
    if (it != model_set.models.end() && p >= it->second.threshold) out.insert(sdg);
  }
  return out;
}

std::string serialize_model_set(const OvrModelSet& s) {
  json models = json::object();
  for (const auto& [sdg, m] : s.models) {
    models[std::to_string(sdg.value())] = {
        {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
        {"bias", m.bias},
        {"threshold", m.threshold},
        {"training_meta", meta_to_json(m.training_meta)}};
  }
  const auto& v = s.vocabulary;
  json doc{{"format_version", s.format_version},
           {"vocabulary",
            {{"tokens", v.tokens()},
             {"min_df", v.min_df()},
             {"max_features", v.max_features()},
             {"num_documents", v.num_documents()}}},
           {"idf", std::vector<double>(v.idf().data(), v.idf().data() + v.idf().size())},
           {"dataset",
            {{"min_agreement", s.dataset.min_agreement},
             {"require_positive_majority", s.dataset.require_positive_majority},
             {"test_fraction", s.dataset.test_fraction},
             {"seed", s.dataset.seed}}},
           {"models", std::move(models)}};
  return doc.dump();
}

void save_model_set(const OvrModelSet& model_set, const std::filesystem::path& path) {
  const std::string bytes = serialize_model_set(model_set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write model file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw Error(ErrorCode::StorageFailure, "write failed for " + path.string());
}

OvrModelSet load_model_set(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::MissingFile, "model file not found: " + path.string());
  return parse_model_set(read_file(path));
}

OvrModelSet parse_model_set(std::string_view bytes) {
  if (trim(bytes).empty()) throw Error(ErrorCode::Corrupt, "model file is empty");
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") || !doc["format_version"].is_string())
    throw Error(ErrorCode::Corrupt, "model file lacks format_version");
  if (doc["format_version"].get<std::string>() != kModelFormatVersion)
    throw Error(ErrorCode::UnsupportedVersion,
                "unsupported model format " + doc["format_version"].get<std::string>());
  try {
    OvrModelSet s;
    const auto& jv = doc.at("vocabulary");
    const auto idf = doc.at("idf").get<std::vector<double>>();
    s.vocabulary = Vocabulary(jv.at("tokens").get<std::vector<std::string>>(),
                              Eigen::Map<const Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size())),
                              jv.at("min_df").get<std::size_t>(), jv.at("max_features").get<std::size_t>(),
                              jv.at("num_documents").get<std::size_t>());
    const auto& jd = doc.at("dataset");
    s.dataset.min_agreement = jd.at("min_agreement").get<double>();
    s.dataset.require_positive_majority = jd.at("require_positive_majority").get<bool>();
    s.dataset.test_fraction = jd.at("test_fraction").get<double>();
    s.dataset.seed = jd.at("seed").get<std::uint64_t>();
    for (SdgId sdg : trainable_sdgs()) {
      const auto& jm = doc.at("models").at(std::to_string(sdg.value()));
      const auto w = jm.at("weights").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != s.vocabulary.size())
        throw Error(ErrorCode::Corrupt, "weights for SDG " + std::to_string(sdg.value()) +
                                            " do not match the vocabulary size");
      OvrModel m{sdg,
                 Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                 jm.at("bias").get<double>(), jm.at("threshold").get<double>(),
                 meta_from_json(jm.at("training_meta"))};
      s.models.emplace(sdg, std::move(m));
    }
    if (doc.at("models").size() != SdgId::kTrainable)
      throw Error(ErrorCode::Corrupt, "model file must hold exactly 16 models");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("model file is incomplete: ") + e.what());
  }
}

}  // namespace osdg
