#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "osdg/corpus.hpp"
#include "osdg/tokenize.hpp"

namespace osdg {

// Sparse, L2-normalized TF-IDF vector. Either the zero vector or unit length.
using FeatureVector = Eigen::SparseVector<double>;

class Vocabulary {
 public:
  Vocabulary() = default;
  // `tokens[i]` maps to feature i; idf must have one finite, positive entry
  // per token.
  Vocabulary(std::vector<std::string> tokens, Eigen::VectorXd idf, std::size_t min_df,
             std::size_t max_features, std::size_t num_documents);

  std::optional<Eigen::Index> index_of(std::string_view token) const;
  Eigen::Index size() const { return static_cast<Eigen::Index>(tokens_.size()); }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const Eigen::VectorXd& idf() const { return idf_; }
  std::size_t min_df() const { return min_df_; }
  std::size_t max_features() const { return max_features_; }
  std::size_t num_documents() const { return num_documents_; }

 private:
  std::vector<std::string> tokens_;
  Eigen::VectorXd idf_;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::size_t min_df_ = 1;
  std::size_t max_features_ = 0;
  std::size_t num_documents_ = 0;
};

// Keeps tokens with document frequency >= min_df, the max_features most
// frequent (ties lexicographic). Feature indices follow lexicographic token
// order. idf = ln((1 + N) / (1 + df)) + 1.
Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df, std::size_t max_features);

// Sub-linear term frequency (1 + ln tf) times idf, then L2-normalized.
FeatureVector featurize(std::string_view text, const Vocabulary& vocabulary);
FeatureVector featurize(const std::vector<Token>& tokens, const Vocabulary& vocabulary);

// Row-major design matrix, one featurized row per snippet.
Eigen::SparseMatrix<double, Eigen::RowMajor> featurize_corpus(const Corpus& corpus,
                                                              const Vocabulary& vocabulary);

}  // namespace osdg
