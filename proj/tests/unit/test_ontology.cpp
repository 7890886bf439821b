#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "osdg/error.hpp"
#include "osdg/ontology.hpp"
#include "osdg/tokenize.hpp"
#include "support.hpp"

using namespace osdg;

namespace {

Ontology make_ontology(const std::string& csv_body) {
  std::istringstream in("sdg,term\n" + csv_body);
  return load_ontology(in, "test").ontology;
}

ErrorCode ontology_error(const std::string& csv_body) {
  std::istringstream in("sdg,term\n" + csv_body);
  try {
    load_ontology(in, "test");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Config;
}

using MatchKey = std::tuple<std::size_t, std::size_t, std::size_t>;  // term, start, end

// Quadratic scan: every term at every start, then the longest per (start, SDG).
std::set<MatchKey> brute_force(const std::vector<std::string>& words, const Ontology& ontology) {
  std::map<std::pair<std::size_t, int>, MatchKey> best;
  for (std::size_t t = 0; t < ontology.terms().size(); ++t) {
    const auto& phrase = ontology.terms()[t].phrase;
    for (std::size_t s = 0; s + phrase.size() <= words.size(); ++s) {
      bool equal = true;
      for (std::size_t k = 0; k < phrase.size() && equal; ++k) equal = words[s + k] == phrase[k];
      if (!equal) continue;
      const auto key = std::pair{s, ontology.terms()[t].sdg.value()};
      const MatchKey m{t, s, s + phrase.size()};
      auto it = best.find(key);
      if (it == best.end() || std::get<2>(m) > std::get<2>(it->second)) best[key] = m;
    }
  }
  std::set<MatchKey> out;
  for (const auto& [k, m] : best) out.insert(m);
  return out;
}

std::set<MatchKey> keys_of(const std::vector<KeywordMatch>& matches) {
  std::set<MatchKey> out;
  for (const auto& m : matches) out.insert({m.term_index, m.start_token, m.end_token});
  return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(tokenize_words("Clean Water, and sanitation!") ==
        std::vector<std::string>{"clean", "water", "and", "sanitation"});
  CHECK(tokenize_words("CO2-emissions 2030") == std::vector<std::string>{"co2", "emissions", "2030"});
  CHECK(tokenize_words("Educación Ñandú") == std::vector<std::string>{"educación", "ñandú"});
  CHECK(tokenize_words("  ...  ").empty());

  const auto tokens = tokenize("Hi, you");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[1].begin == 4);
  CHECK(tokens[1].end == 7);
}

TEST_CASE("load_ontology parses terms and flags problems") {
  const auto ontology = make_ontology("6,clean water\n6,Sanitation\n");
  REQUIRE(ontology.terms().size() == 2);
  CHECK(ontology.terms()[0].term_id == "6:clean water");
  CHECK(ontology.terms()[0].phrase == std::vector<std::string>{"clean", "water"});

  std::istringstream dup("sdg,term\n6,clean water\n6,Clean  Water\n");
  const auto result = load_ontology(dup, "dup");
  CHECK(result.ontology.terms().size() == 1);
  CHECK_FALSE(result.warnings.empty());

  CHECK(ontology_error("18,foo\n") == ErrorCode::InvalidSdg);
  CHECK(ontology_error("3, -- \n") == ErrorCode::EmptyTerm);
  CHECK(ontology_error("3,a b c d e f g h i\n") == ErrorCode::TermTooLong);
  CHECK_THROWS_AS(load_ontology("/nonexistent/ontology.csv"), Error);
}

TEST_CASE("seed ontology covers every SDG") {
  const auto result = load_ontology(testing::data_path("ontology/seed-v1.csv"));
  CHECK(result.warnings.empty());
  for (int sdg = 1; sdg <= 17; ++sdg) CHECK(result.ontology.terms_for(SdgId(sdg)) > 0);
  CHECK(result.ontology.version() == "seed-v1");
}

TEST_CASE("match_keywords examples") {
  const auto ontology = make_ontology("6,clean water\n6,water\n6,sanitation\n13,climate change\n7,clean energy\n");
  const auto matches = match_keywords("Access to Clean Water and sanitation; climate-change risks.", ontology);
  std::vector<std::string> ids;
  for (const auto& m : matches) ids.push_back(m.term_id);
  // The nested "water" starts one token later, so it is reported separately.
  CHECK(ids == std::vector<std::string>{"6:clean water", "6:water", "6:sanitation", "13:climate change"});
  CHECK(matches[0].begin_byte == 10);
  CHECK(matches[0].end_byte == 21);

  CHECK(evidence_sdgs(matches) == std::set<SdgId>{SdgId(6), SdgId(13)});
  CHECK(evidence_sdgs(matches, 2) == std::set<SdgId>{SdgId(6)});
  CHECK_THROWS_AS(evidence_sdgs(matches, 0), Error);
}

TEST_CASE("matches respect token boundaries and case") {
  const auto ontology = make_ontology("6,water\n14,sea\n");
  CHECK(match_keywords("A waterfall near the seaside.", ontology).empty());
  CHECK(keys_of(match_keywords("WATER and Water", ontology)) == keys_of(match_keywords("water and water", ontology)));
  CHECK(match_keywords("WATER and Water", ontology).size() == 2);
}

TEST_CASE("nested terms of one SDG sharing a start collapse to the longest") {
  const auto ontology = make_ontology("6,water\n6,water supply\n9,water supply\n");
  const auto matches = match_keywords("water supply", ontology);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].term_id == "6:water supply");
  CHECK(matches[1].term_id == "9:water supply");
}

TEST_CASE("automaton agrees with a brute-force scan on random input") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "water", "clean"};
  auto word = [&] { return alphabet[rng() % alphabet.size()]; };
  for (int trial = 0; trial < 300; ++trial) {
    std::ostringstream csv;
    std::set<std::pair<int, std::string>> used;
    const int n_terms = 1 + static_cast<int>(rng() % 12);
    for (int t = 0; t < n_terms; ++t) {
      const int sdg = 1 + static_cast<int>(rng() % 4);
      std::string phrase = word();
      const int len = 1 + static_cast<int>(rng() % 4);
      for (int k = 1; k < len; ++k) phrase += " " + word();
      if (used.insert({sdg, phrase}).second) csv << sdg << "," << phrase << "\n";
    }
    const auto ontology = make_ontology(csv.str());
    std::string text;
    const int n_words = static_cast<int>(rng() % 40);
    for (int k = 0; k < n_words; ++k) text += (k ? (rng() % 3 ? " " : ", ") : "") + word();
    CHECK(keys_of(match_keywords(text, ontology)) == brute_force(tokenize_words(text), ontology));
  }
}

TEST_CASE("seed ontology agrees with brute force on synthetic snippets") {
  const auto& ontology = testing::seed_ontology();
  const auto corpus = osdg::synthesize_corpus();
  for (std::size_t i = 0; i < corpus.size(); i += 37)
    CHECK(keys_of(match_keywords(corpus[i].text, ontology)) == brute_force(tokenize_words(corpus[i].text), ontology));
}
