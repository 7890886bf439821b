#include "osdg/models/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "osdg/error.hpp"

namespace osdg {

Vocabulary::Vocabulary(std::vector<std::string> tokens, Eigen::VectorXd idf, std::size_t min_df,
                       std::size_t max_features, std::size_t num_documents)
    : tokens_(std::move(tokens)),
      idf_(std::move(idf)),
      min_df_(min_df),
      max_features_(max_features),
      num_documents_(num_documents) {
  if (static_cast<Eigen::Index>(tokens_.size()) != idf_.size())
    throw Error(ErrorCode::Corrupt, "vocabulary and idf sizes differ");
  for (Eigen::Index i = 0; i < idf_.size(); ++i) {
    if (!std::isfinite(idf_[i]) || idf_[i] <= 0.0)
      throw Error(ErrorCode::Corrupt, "idf must be finite and positive");
    if (!index_.emplace(tokens_[static_cast<std::size_t>(i)], i).second)
      throw Error(ErrorCode::Corrupt, "duplicate vocabulary token " + tokens_[static_cast<std::size_t>(i)]);
  }
}

std::optional<Eigen::Index> Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df, std::size_t max_features) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& s : corpus) {
    std::unordered_set<std::string> seen;
    for (auto& tok : tokenize_words(s.text))
      if (seen.insert(tok).second) ++df[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : df)
    if (n >= min_df) kept.emplace_back(tok, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (kept.size() > max_features) kept.resize(max_features);
  std::sort(kept.begin(), kept.end());

  const double n_docs = static_cast<double>(corpus.size());
  std::vector<std::string> tokens;
  Eigen::VectorXd idf(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    tokens.push_back(kept[i].first);
    idf[static_cast<Eigen::Index>(i)] =
        std::log((1.0 + n_docs) / (1.0 + static_cast<double>(kept[i].second))) + 1.0;
  }
  return Vocabulary(std::move(tokens), std::move(idf), min_df, max_features, corpus.size());
}

FeatureVector featurize(std::string_view text, const Vocabulary& vocabulary) {
  return featurize(tokenize(text), vocabulary);
}

FeatureVector featurize(const std::vector<Token>& tokens, const Vocabulary& vocabulary) {
  std::map<Eigen::Index, int> tf;
  for (const auto& tok : tokens)
    if (auto idx = vocabulary.index_of(tok.text)) ++tf[*idx];

  FeatureVector x(vocabulary.size());
  x.reserve(static_cast<Eigen::Index>(tf.size()));
  for (const auto& [idx, count] : tf)
    x.insert(idx) = (1.0 + std::log(static_cast<double>(count))) * vocabulary.idf()[idx];
  const double norm = x.norm();
  if (norm > 0.0) x /= norm;
  return x;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> featurize_corpus(const Corpus& corpus,
                                                              const Vocabulary& vocabulary) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t row = 0; row < corpus.size(); ++row) {
    const FeatureVector x = featurize(corpus[row].text, vocabulary);
    for (FeatureVector::InnerIterator it(x); it; ++it)
      triplets.emplace_back(static_cast<int>(row), static_cast<int>(it.index()), it.value());
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> X(static_cast<Eigen::Index>(corpus.size()),
                                                 vocabulary.size());
  X.setFromTriplets(triplets.begin(), triplets.end());
  return X;
}

}  // namespace osdg
