#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osdg/sdg.hpp"

namespace osdg {

// Normalized majority margin |accepts - rejects| / (accepts + rejects).
// Throws Error{InvalidCounts} when no votes were cast.
double compute_agreement(long long accepts, long long rejects);

struct LabeledSnippet {
  std::string text_id;
  std::optional<std::string> source_ref;
  std::string text;
  SdgId sdg{1};
  long long labels_positive = 0;
  long long labels_negative = 0;
  double agreement = 0.0;

  bool positive_majority() const { return labels_positive > labels_negative; }
  bool negative_majority() const { return labels_negative > labels_positive; }

  friend bool operator==(const LabeledSnippet&, const LabeledSnippet&) = default;
};

// Immutable ordered collection of snippets with a per-SDG row index.
// A text_id may repeat only under a different candidate SDG; such ids are
// listed in shared_text_ids().
class Corpus {
 public:
  Corpus() = default;
  // Throws Error{DuplicateRow} if a (text_id, sdg) pair repeats.
  explicit Corpus(std::vector<LabeledSnippet> snippets);

  const std::vector<LabeledSnippet>& snippets() const { return snippets_; }
  const LabeledSnippet& operator[](std::size_t i) const { return snippets_[i]; }
  std::size_t size() const { return snippets_.size(); }
  bool empty() const { return snippets_.empty(); }
  auto begin() const { return snippets_.begin(); }
  auto end() const { return snippets_.end(); }

  const std::map<SdgId, std::vector<std::size_t>>& by_sdg() const { return by_sdg_; }
  const std::vector<std::string>& shared_text_ids() const { return shared_text_ids_; }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.snippets_ == b.snippets_; }

 private:
  std::vector<LabeledSnippet> snippets_;
  std::map<SdgId, std::vector<std::size_t>> by_sdg_;
  std::vector<std::string> shared_text_ids_;
};

enum class LoadMode { Strict, Lenient };

struct LoadResult {
  Corpus corpus;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

inline constexpr double kAgreementTolerance = 1e-9;

// Reads an OSDG-CD file (comma- or tab-separated; the delimiter is sniffed
// from the header). Strict mode throws on the first invalid row; lenient mode
// drops and counts invalid rows and trusts the stored agreement value.
LoadResult load_community_dataset(const std::filesystem::path& path, LoadMode mode);
LoadResult load_community_dataset(std::istream& in, LoadMode mode);

// Snippet pools share the CSV layout but carry zeroed counts.
Corpus load_snippet_pool(const std::filesystem::path& path);

void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

Corpus filter_high_agreement(const Corpus& corpus, double min_agreement,
                             bool require_positive_majority);

// Drops rows whose candidate SDG is excluded from training (SDG 17).
Corpus trainable_rows(const Corpus& corpus);

struct Split {
  Corpus train;
  Corpus test;
};

// Stratified per candidate SDG: each SDG contributes round(n * test_fraction)
// rows to the test side. Both sides keep the input's row order.
Split split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

}  // namespace osdg
