#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osdg/corpus.hpp"
#include "osdg/sdg.hpp"

namespace osdg {

// Deterministic stand-in for the community dataset: topical 3-6 sentence
// snippets per SDG with simulated volunteer votes. Used where the real
// release is unavailable (demos, offline tests); it is a proxy, not data.
struct SynthOptions {
  std::size_t rows_per_sdg = 250;  // SDGs 1..16
  std::size_t sdg17_rows = 100;
  std::uint64_t seed = 42;
  double off_topic_rate = 0.2;     // rows whose text belongs to another SDG
  double vote_noise = 0.12;        // chance a single vote goes against the truth
  double cross_topic_rate = 0.25;  // chance a sentence borrows another SDG's vocabulary
};

Corpus synthesize_corpus(const SynthOptions& options = {});

// Topic phrases the generator draws from for one SDG.
const std::vector<std::string>& topic_phrases(SdgId sdg);

}  // namespace osdg
