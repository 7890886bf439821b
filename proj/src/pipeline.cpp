#include "osdg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>

#include "json.hpp"
#include "osdg/error.hpp"
#include "osdg/tokenize.hpp"
#include "osdg/util.hpp"

namespace osdg {

std::string input_digest(std::string_view text, LanguageCode language) {
  std::string normalized(to_string(language));
  normalized += '\n';
  normalized += normalize_whitespace(text);
  return sha256_hex(normalized);
}

ClassificationResult classify_english(std::string_view english, const PipelineDeps& deps) {
  if (!deps.model_set || !deps.ontology)
    throw Error(ErrorCode::InvalidArgument, "pipeline needs a model set and an ontology");
  ClassificationResult result;
  result.analyzed_text = std::string(english);

  const auto tokens = tokenize(english);
  const SdgScores probs = predict_proba(*deps.model_set, featurize(tokens, deps.model_set->vocabulary));
  const auto matches = match_keywords(tokens, *deps.ontology);

  for (const auto& [sdg, p] : probs) result.per_sdg[sdg].probability = p;
  for (const auto& m : matches)
    if (auto it = result.per_sdg.find(m.sdg); it != result.per_sdg.end())
      it->second.keyword_matches.push_back(m);

  result.ml_labels = ml_labels(probs, *deps.model_set);
  result.evidence_sdgs = evidence_sdgs(matches, deps.min_hits);
  std::set_intersection(result.ml_labels.begin(), result.ml_labels.end(), result.evidence_sdgs.begin(),
                        result.evidence_sdgs.end(),
                        std::inserter(result.final_labels, result.final_labels.end()));
  // Ascending iteration with strict '>' leaves ties on the lower SDG.
  for (SdgId sdg : result.final_labels)
    if (!result.most_relevant || probs.at(sdg) > probs.at(*result.most_relevant))
      result.most_relevant = sdg;
  return result;
}

ClassificationResult classify_text(std::string_view text, LanguageCode language,
                                   const PipelineDeps& deps) {
  if (trim(text).empty()) throw Error(ErrorCode::EmptyText, "text is empty");
  std::string english = translate_to_english({std::string(text), language}, deps.translator, deps.cache);
  ClassificationResult result = classify_english(english, deps);
  result.input_hash = input_digest(text, language);
  result.language = language;
  result.translated = language != LanguageCode::en;
  return result;
}

// --- chunking -----------------------------------------------------------------

void AggregationConfig::validate() const {
  if (!(relevance_threshold > 0.0 && relevance_threshold < 1.0) ||
      !(sdg_share_threshold > 0.0 && sdg_share_threshold < 1.0))
    throw Error(ErrorCode::InvalidArgument, "aggregation thresholds must lie in (0, 1)");
  if (min_sentences < 1 || min_sentences > max_sentences)
    throw Error(ErrorCode::InvalidArgument, "chunk sentence range must satisfy 1 <= min <= max");
}

namespace {

bool is_space_cp(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0 || cp == 0x2009 || cp == 0x202F || cp == 0x3000;
}

bool is_closer(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x2019 || cp == 0x201D || cp == 0xBB;
}

TextSpan trimmed(std::string_view text, std::size_t begin, std::size_t end) {
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return {begin, end};
}

}  // namespace

std::vector<TextSpan> split_sentences(std::string_view text, std::size_t begin, std::size_t end) {
  std::vector<TextSpan> sentences;
  std::size_t start = begin;
  std::size_t pos = begin;
  while (pos < end) {
    const char c = text[pos];
    ++pos;
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t sentence_end = pos;
    while (sentence_end < end && (text[sentence_end] == '.' || text[sentence_end] == '!' || text[sentence_end] == '?'))
      ++sentence_end;
    for (std::size_t p = sentence_end; p < end;) {
      std::size_t q = p;
      if (!is_closer(decode_utf8(text, q))) break;
      sentence_end = p = q;
    }
    std::size_t next = sentence_end;
    bool saw_space = false;
    for (std::size_t q = next; q < end;) {
      std::size_t r = q;
      if (!is_space_cp(decode_utf8(text, r))) break;
      saw_space = true;
      next = q = r;
    }
    if (!saw_space || next >= end) {
      pos = sentence_end;
      continue;
    }
    std::size_t probe = next;
    const char32_t first = decode_utf8(text, probe);
    if (!(is_upper(first) || (first >= '0' && first <= '9'))) {
      pos = sentence_end;
      continue;
    }
    auto span = trimmed(text, start, sentence_end);
    if (span.begin < span.end) sentences.push_back(span);
    start = pos = next;
  }
  auto span = trimmed(text, start, end);
  if (span.begin < span.end) sentences.push_back(span);
  return sentences;
}

std::vector<Chunk> chunk_document(std::string_view text, const AggregationConfig& config) {
  config.validate();
  std::vector<TextSpan> paragraphs;
  std::size_t para_begin = std::string_view::npos;
  std::size_t para_end = 0;
  for (std::size_t line_begin = 0; line_begin <= text.size();) {
    std::size_t line_end = text.find('\n', line_begin);
    if (line_end == std::string_view::npos) line_end = text.size();
    const bool blank = trim(text.substr(line_begin, line_end - line_begin)).empty();
    if (blank) {
      if (para_begin != std::string_view::npos) paragraphs.push_back({para_begin, para_end});
      para_begin = std::string_view::npos;
    } else {
      if (para_begin == std::string_view::npos) para_begin = line_begin;
      para_end = line_end;
    }
    if (line_end == text.size()) break;
    line_begin = line_end + 1;
  }
  if (para_begin != std::string_view::npos) paragraphs.push_back({para_begin, para_end});

  std::vector<Chunk> chunks;
  for (const auto& para : paragraphs) {
    const auto sentences = split_sentences(text, para.begin, para.end);
    if (sentences.empty()) continue;
    const std::size_t n = sentences.size();
    const std::size_t windows = (n + config.max_sentences - 1) / config.max_sentences;
    const std::size_t base = n / windows;
    const std::size_t extra = n % windows;
    std::size_t first = 0;
    for (std::size_t w = 0; w < windows; ++w) {
      const std::size_t count = base + (w < extra ? 1 : 0);
      const std::size_t b = sentences[first].begin;
      const std::size_t e = sentences[first + count - 1].end;
      chunks.push_back({std::string(text.substr(b, e - b)), b, e, count});
      first += count;
    }
  }
  return chunks;
}

// --- aggregation ----------------------------------------------------------------

namespace {
// Ratios of small integers against decimal thresholds: the slack absorbs the
// last-ulp error of thresholds that are themselves computed.
constexpr double kThresholdSlack = 1e-12;
}  // namespace

Aggregation aggregate_labels(const std::vector<std::set<SdgId>>& chunk_labels,
                             const AggregationConfig& config) {
  config.validate();
  Aggregation agg;
  agg.chunk_count = chunk_labels.size();
  for (const auto& labels : chunk_labels) {
    if (labels.empty()) continue;
    ++agg.related_chunk_count;
    for (SdgId sdg : labels) ++agg.sdg_chunk_counts[sdg];
  }
  if (agg.chunk_count == 0) return agg;
  agg.related_fraction =
      static_cast<double>(agg.related_chunk_count) / static_cast<double>(agg.chunk_count);
  if (agg.related_chunk_count == 0) return agg;
  for (const auto& [sdg, n] : agg.sdg_chunk_counts)
    agg.shares[sdg] = static_cast<double>(n) / static_cast<double>(agg.related_chunk_count);
  if (agg.related_fraction < config.relevance_threshold - kThresholdSlack) return agg;

  std::size_t kept_total = 0;
  for (const auto& [sdg, share] : agg.shares)
    if (share >= config.sdg_share_threshold - kThresholdSlack) kept_total += agg.sdg_chunk_counts[sdg];
  for (const auto& [sdg, share] : agg.shares)
    if (share >= config.sdg_share_threshold - kThresholdSlack)
      agg.distribution[sdg] =
          static_cast<double>(agg.sdg_chunk_counts[sdg]) / static_cast<double>(kept_total);
  return agg;
}

DocumentResult classify_document(std::string_view text, LanguageCode language,
                                 const PipelineDeps& deps, const AggregationConfig& config,
                                 unsigned threads) {
  DocumentResult doc;
  doc.chunks = chunk_document(text, config);
  if (doc.chunks.empty()) throw Error(ErrorCode::EmptyDocument, "document has no text to classify");

  doc.per_chunk.resize(doc.chunks.size());
  std::vector<std::exception_ptr> failures(doc.chunks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < doc.chunks.size();) {
      try {
        doc.per_chunk[i] = classify_text(doc.chunks[i].text, language, deps);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, doc.chunks.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<std::set<SdgId>> labels;
  labels.reserve(doc.per_chunk.size());
  for (const auto& r : doc.per_chunk) labels.push_back(r.final_labels);
  Aggregation agg = aggregate_labels(labels, config);
  doc.chunk_count = agg.chunk_count;
  doc.related_chunk_count = agg.related_chunk_count;
  doc.related_fraction = agg.related_fraction;
  doc.distribution = std::move(agg.distribution);
  return doc;
}

// --- feedback store ---------------------------------------------------------------

FeedbackStore::FeedbackStore(std::filesystem::path path) : path_(std::move(path)) {
  for (const auto& line : read_log_lines(path_)) {
    auto rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.contains("id") || !rec["id"].is_number_unsigned())
      throw Error(ErrorCode::StorageFailure, "corrupt suggestion log " + path_.string());
    next_id_ = std::max(next_id_, rec["id"].get<std::uint64_t>() + 1);
    ++count_;
  }
  log_ = std::make_unique<AppendLog>(path_);
}

FeedbackStore::~FeedbackStore() = default;

std::uint64_t FeedbackStore::record_suggestion(const std::string& input_hash, const std::string& text,
                                               const std::set<SdgId>& suggested_sdgs,
                                               const std::optional<std::string>& note) {
  if (suggested_sdgs.empty()) throw Error(ErrorCode::EmptySuggestion, "suggestion has no SDG labels");
  std::lock_guard lock(mu_);
  std::vector<int> sdgs;
  for (SdgId s : suggested_sdgs) sdgs.push_back(s.value());
  nlohmann::ordered_json rec{{"id", next_id_},
                             {"timestamp", utc_timestamp()},
                             {"input_hash", input_hash},
                             {"text", text},
                             {"suggested_sdgs", sdgs},
                             {"note", note ? nlohmann::ordered_json(*note) : nlohmann::ordered_json()}};
  log_->append(rec.dump());
  ++count_;
  return next_id_++;
}

std::uint64_t FeedbackStore::count() const {
  std::lock_guard lock(mu_);
  return count_;
}

}  // namespace osdg
