#include "osdg/ontology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include "osdg/csv.hpp"
#include "osdg/error.hpp"
#include "osdg/util.hpp"

namespace osdg {

std::string OntologyTerm::phrase_text() const {
  std::string out;
  for (const auto& tok : phrase) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

// --- TokenMatcher ---------------------------------------------------------

TokenMatcher::TokenMatcher(const std::vector<std::vector<std::string>>& patterns) {
  nodes_.emplace_back();
  lengths_.reserve(patterns.size());
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    lengths_.push_back(patterns[p].size());
    int node = 0;
    for (const auto& tok : patterns[p]) {
      auto [it, inserted] = symbols_.emplace(tok, static_cast<int>(symbols_.size()));
      const int sym = it->second;
      auto& next = nodes_[node].next;
      auto pos = std::lower_bound(next.begin(), next.end(), std::pair{sym, 0},
                                  [](const auto& a, const auto& b) { return a.first < b.first; });
      if (pos != next.end() && pos->first == sym) {
        node = pos->second;
      } else {
        const int created = static_cast<int>(nodes_.size());
        next.insert(pos, {sym, created});
        nodes_.emplace_back();
        node = created;
      }
    }
    if (!patterns[p].empty()) nodes_[node].outputs.push_back(p);
  }

  std::deque<int> queue;
  for (const auto& [sym, v] : nodes_[0].next) {
    nodes_[v].fail = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const auto& [sym, v] : nodes_[u].next) {
      int f = nodes_[u].fail;
      while (f != 0 && child(f, sym) < 0) f = nodes_[f].fail;
      const int target = child(f, sym);
      nodes_[v].fail = (target < 0 || target == v) ? 0 : target;
      const int fv = nodes_[v].fail;
      nodes_[v].dict_link = nodes_[fv].outputs.empty() ? nodes_[fv].dict_link : fv;
      queue.push_back(v);
    }
  }
}

int TokenMatcher::child(int node, int symbol) const {
  const auto& next = nodes_[node].next;
  auto pos = std::lower_bound(next.begin(), next.end(), std::pair{symbol, 0},
                              [](const auto& a, const auto& b) { return a.first < b.first; });
  return (pos != next.end() && pos->first == symbol) ? pos->second : -1;
}

std::vector<TokenMatcher::Hit> TokenMatcher::find_all(const std::vector<Token>& tokens) const {
  std::vector<Hit> hits;
  if (nodes_.empty()) return hits;
  int state = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto sym_it = symbols_.find(tokens[i].text);
    if (sym_it == symbols_.end()) {
      state = 0;
      continue;
    }
    const int sym = sym_it->second;
    while (state != 0 && child(state, sym) < 0) state = nodes_[state].fail;
    const int next = child(state, sym);
    state = next < 0 ? 0 : next;
    for (int n = nodes_[state].outputs.empty() ? nodes_[state].dict_link : state; n >= 0;
         n = nodes_[n].dict_link) {
      for (std::size_t p : nodes_[n].outputs) hits.push_back({p, i + 1 - lengths_[p], i + 1});
    }
  }
  return hits;
}

// --- Ontology --------------------------------------------------------------

Ontology::Ontology(std::vector<OntologyTerm> terms, std::string version)
    : terms_(std::move(terms)), version_(std::move(version)) {
  std::vector<std::vector<std::string>> patterns;
  patterns.reserve(terms_.size());
  std::map<std::pair<SdgId, std::vector<std::string>>, int> seen;
  for (const auto& t : terms_) {
    if (t.phrase.empty()) throw Error(ErrorCode::EmptyTerm, "empty phrase for " + t.term_id);
    if (t.phrase.size() > kMaxPhraseTokens)
      throw Error(ErrorCode::TermTooLong, "phrase longer than 8 tokens: " + t.term_id);
    if (!seen.emplace(std::pair{t.sdg, t.phrase}, 0).second)
      throw Error(ErrorCode::DuplicateRow, "duplicate ontology term " + t.term_id);
    patterns.push_back(t.phrase);
  }
  matcher_ = TokenMatcher(patterns);
}

std::size_t Ontology::terms_for(SdgId sdg) const {
  return static_cast<std::size_t>(
      std::count_if(terms_.begin(), terms_.end(), [&](const auto& t) { return t.sdg == sdg; }));
}

OntologyLoadResult load_ontology(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open ontology " + path.string());
  return load_ontology(in, path.stem().string());
}

OntologyLoadResult load_ontology(std::istream& in, std::string version) {
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) throw Error(ErrorCode::MalformedHeader, "ontology file is empty");
  if (!row.empty() && row[0].rfind("\xEF\xBB\xBF", 0) == 0) row[0].erase(0, 3);
  if (row.size() != 2 || trim(row[0]) != "sdg" || trim(row[1]) != "term")
    throw Error(ErrorCode::MalformedHeader, "ontology header must be 'sdg,term'");

  OntologyLoadResult result;
  std::vector<OntologyTerm> terms;
  std::map<std::pair<SdgId, std::vector<std::string>>, std::size_t> seen;
  while (reader.next(row)) {
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    const std::string where = "line " + std::to_string(reader.record_line());
    if (row.size() != 2) throw Error(ErrorCode::ParseError, where + ": expected 2 fields");
    SdgId sdg{1};
    try {
      sdg = SdgId::parse(row[0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidSdg, where + ": " + e.what());
    }
    std::vector<std::string> phrase = tokenize_words(row[1]);
    if (phrase.empty()) throw Error(ErrorCode::EmptyTerm, where + ": empty term");
    if (phrase.size() > kMaxPhraseTokens)
      throw Error(ErrorCode::TermTooLong, where + ": term has more than 8 tokens");
    OntologyTerm term{sdg, std::move(phrase), {}};
    term.term_id = std::to_string(sdg.value()) + ":" + term.phrase_text();
    if (!seen.emplace(std::pair{term.sdg, term.phrase}, terms.size()).second) {
      result.warnings.push_back(where + ": duplicate term " + term.term_id + " collapsed");
      continue;
    }
    terms.push_back(std::move(term));
  }
  result.ontology = Ontology(std::move(terms), std::move(version));
  for (SdgId sdg : trainable_sdgs())
    if (result.ontology.terms_for(sdg) == 0)
      result.warnings.push_back("SDG " + std::to_string(sdg.value()) + " has no ontology terms");
  return result;
}

// --- matching --------------------------------------------------------------

std::vector<KeywordMatch> match_keywords(std::string_view text, const Ontology& ontology) {
  return match_keywords(tokenize(text), ontology);
}

std::vector<KeywordMatch> match_keywords(const std::vector<Token>& tokens, const Ontology& ontology) {
  // Nested hits of one SDG that share a start token collapse to the longest.
  std::map<std::pair<std::size_t, SdgId>, TokenMatcher::Hit> best;
  for (const auto& hit : ontology.matcher().find_all(tokens)) {
    const SdgId sdg = ontology.terms()[hit.pattern].sdg;
    auto [it, inserted] = best.emplace(std::pair{hit.start, sdg}, hit);
    if (!inserted && hit.end > it->second.end) it->second = hit;
  }
  std::vector<KeywordMatch> matches;
  matches.reserve(best.size());
  for (const auto& [key, hit] : best) {
    const auto& term = ontology.terms()[hit.pattern];
    matches.push_back({term.sdg, term.term_id, hit.pattern, hit.start, hit.end,
                       tokens[hit.start].begin, tokens[hit.end - 1].end});
  }
  return matches;
}

std::set<SdgId> evidence_sdgs(const std::vector<KeywordMatch>& matches, std::size_t min_hits) {
  if (min_hits == 0) throw Error(ErrorCode::InvalidArgument, "min_hits must be at least 1");
  std::map<SdgId, std::size_t> counts;
  for (const auto& m : matches) ++counts[m.sdg];
  std::set<SdgId> out;
  for (const auto& [sdg, n] : counts)
    if (n >= min_hits) out.insert(sdg);
  return out;
}

}  // namespace osdg
