#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "osdg/models/ovr.hpp"
#include "osdg/ontology.hpp"
#include "osdg/sdg.hpp"
#include "osdg/translate.hpp"
#include "osdg/util.hpp"

namespace osdg {

struct SdgEvidence {
  double probability = 0;
  std::vector<KeywordMatch> keyword_matches;
};

struct ClassificationResult {
  std::string input_hash;
  LanguageCode language = LanguageCode::en;
  bool translated = false;
  std::string analyzed_text;  // English text the models and ontology saw
  std::map<SdgId, SdgEvidence> per_sdg;
  std::set<SdgId> ml_labels;
  std::set<SdgId> evidence_sdgs;
  // Always ml_labels ∩ evidence_sdgs.
  std::set<SdgId> final_labels;
  std::optional<SdgId> most_relevant;
};

// Everything classification reads. The translator and cache are only touched
// for non-English input and may be null otherwise.
struct PipelineDeps {
  const OvrModelSet* model_set = nullptr;
  const Ontology* ontology = nullptr;
  TranslatorBackend* translator = nullptr;
  TranslationCache* cache = nullptr;
  std::size_t min_hits = 1;
};

std::string input_digest(std::string_view text, LanguageCode language);

// Throws Error{EmptyText} for blank input and TranslationError when the
// translator fails.
ClassificationResult classify_text(std::string_view text, LanguageCode language,
                                   const PipelineDeps& deps);

// Same as classify_text, for input that is already English.
ClassificationResult classify_english(std::string_view english, const PipelineDeps& deps);

struct AggregationConfig {
  double relevance_threshold = 0.15;
  double sdg_share_threshold = 0.10;
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 6;

  // Throws Error{InvalidArgument} unless both thresholds lie in (0, 1) and
  // 1 <= min_sentences <= max_sentences.
  void validate() const;
};

struct TextSpan {
  std::size_t begin;
  std::size_t end;
};

struct Chunk {
  std::string text;
  std::size_t begin;  // byte offsets into the document
  std::size_t end;
  std::size_t sentences;
};

// Sentence boundary: '.', '!' or '?' (optionally followed by closing quotes
// or brackets), then whitespace, then an uppercase letter or a digit.
std::vector<TextSpan> split_sentences(std::string_view text, std::size_t begin, std::size_t end);

// Paragraphs are separated by blank lines. A paragraph with more than
// max_sentences sentences is cut into the fewest consecutive windows of at
// most max_sentences, sized as evenly as possible (longer windows first).
std::vector<Chunk> chunk_document(std::string_view text, const AggregationConfig& config = {});

struct Aggregation {
  std::size_t chunk_count = 0;
  std::size_t related_chunk_count = 0;
  double related_fraction = 0;
  std::map<SdgId, std::size_t> sdg_chunk_counts;
  std::map<SdgId, double> shares;        // count / related chunks, before filtering
  std::map<SdgId, double> distribution;  // kept SDGs, renormalized to sum to 1
};

// Document-level label distribution from per-chunk final labels. Both
// thresholds are inclusive.
Aggregation aggregate_labels(const std::vector<std::set<SdgId>>& chunk_labels,
                             const AggregationConfig& config);

struct DocumentResult {
  std::size_t chunk_count = 0;
  std::size_t related_chunk_count = 0;
  double related_fraction = 0;
  std::map<SdgId, double> distribution;
  std::vector<Chunk> chunks;
  std::vector<ClassificationResult> per_chunk;
};

// Throws Error{EmptyDocument} when chunking yields nothing.
DocumentResult classify_document(std::string_view text, LanguageCode language,
                                 const PipelineDeps& deps, const AggregationConfig& config = {},
                                 unsigned threads = 0);

// Append-only JSON-lines store for user-suggested labels. Suggestions are
// recorded only; nothing in the classification path reads them.
class FeedbackStore {
 public:
  explicit FeedbackStore(std::filesystem::path path);
  ~FeedbackStore();

  // Throws Error{EmptySuggestion} for an empty set and Error{StorageFailure}
  // when the append cannot be made durable.
  std::uint64_t record_suggestion(const std::string& input_hash, const std::string& text,
                                  const std::set<SdgId>& suggested_sdgs,
                                  const std::optional<std::string>& note = std::nullopt);

  std::uint64_t count() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::unique_ptr<AppendLog> log_;
  std::uint64_t next_id_ = 1;
  std::uint64_t count_ = 0;
};

}  // namespace osdg
