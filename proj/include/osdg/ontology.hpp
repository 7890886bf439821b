#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "osdg/sdg.hpp"
#include "osdg/tokenize.hpp"

namespace osdg {

inline constexpr std::size_t kMaxPhraseTokens = 8;

struct OntologyTerm {
  SdgId sdg{1};
  std::vector<std::string> phrase;
  std::string term_id;  // "<sdg>:<phrase tokens joined by a space>"

  std::string phrase_text() const;
};

struct KeywordMatch {
  SdgId sdg{1};
  std::string term_id;
  std::size_t term_index = 0;  // into Ontology::terms()
  std::size_t start_token = 0;
  std::size_t end_token = 0;  // exclusive
  std::size_t begin_byte = 0;
  std::size_t end_byte = 0;

  friend bool operator==(const KeywordMatch&, const KeywordMatch&) = default;
};

// Aho-Corasick automaton whose alphabet is the set of distinct phrase tokens,
// so every reported hit is aligned to token boundaries.
class TokenMatcher {
 public:
  struct Hit {
    std::size_t pattern;
    std::size_t start;
    std::size_t end;  // exclusive
  };

  TokenMatcher() = default;
  explicit TokenMatcher(const std::vector<std::vector<std::string>>& patterns);

  // Every occurrence of every pattern, ordered by end position.
  std::vector<Hit> find_all(const std::vector<Token>& tokens) const;

 private:
  struct Node {
    std::vector<std::pair<int, int>> next;  // (symbol, node), sorted by symbol
    int fail = 0;
    int dict_link = -1;                     // nearest fail-chain node with output
    std::vector<std::size_t> outputs;       // patterns ending exactly here
  };

  int child(int node, int symbol) const;

  std::unordered_map<std::string, int> symbols_;
  std::vector<std::size_t> lengths_;
  std::vector<Node> nodes_;
};

class Ontology {
 public:
  Ontology() = default;
  // Throws Error{DuplicateRow} on a repeated (sdg, phrase) pair.
  Ontology(std::vector<OntologyTerm> terms, std::string version);

  const std::vector<OntologyTerm>& terms() const { return terms_; }
  const std::string& version() const { return version_; }
  const TokenMatcher& matcher() const { return matcher_; }
  std::size_t terms_for(SdgId sdg) const;

 private:
  std::vector<OntologyTerm> terms_;
  std::string version_;
  TokenMatcher matcher_;
};

struct OntologyLoadResult {
  Ontology ontology;
  std::vector<std::string> warnings;
};

// CSV with header `sdg,term`. The version string defaults to the file stem.
OntologyLoadResult load_ontology(const std::filesystem::path& path);
OntologyLoadResult load_ontology(std::istream& in, std::string version);

std::vector<KeywordMatch> match_keywords(std::string_view text, const Ontology& ontology);
std::vector<KeywordMatch> match_keywords(const std::vector<Token>& tokens, const Ontology& ontology);

// SDGs with at least `min_hits` matches. Throws Error{InvalidArgument} for
// min_hits == 0.
std::set<SdgId> evidence_sdgs(const std::vector<KeywordMatch>& matches, std::size_t min_hits = 1);

}  // namespace osdg
