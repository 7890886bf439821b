#include "osdg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "osdg/csv.hpp"
#include "osdg/error.hpp"
#include "osdg/util.hpp"

namespace osdg {

namespace {

constexpr const char* kColumns[] = {"doi",        "text_id",         "text",     "sdg",
                                    "labels_negative", "labels_positive", "agreement"};

struct ColumnMap {
  std::optional<std::size_t> doi;
  std::size_t text_id, text, sdg, negative, positive, agreement;
  std::size_t width;
};

ColumnMap map_header(csv::Row header) {
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos[std::string(trim(header[i]))] = i;

  auto require = [&](const char* name) {
    auto it = pos.find(name);
    if (it == pos.end())
      throw Error(ErrorCode::MalformedHeader, std::string("missing column '") + name + "'");
    return it->second;
  };
  ColumnMap m{};
  if (auto it = pos.find("doi"); it != pos.end()) m.doi = it->second;
  m.text_id = require("text_id");
  m.text = require("text");
  m.sdg = require("sdg");
  m.negative = require("labels_negative");
  m.positive = require("labels_positive");
  m.agreement = require("agreement");
  m.width = header.size();
  return m;
}

// Parses one data row. Returns an error message instead of throwing so the
// caller can decide between strict and lenient handling.
struct RowOutcome {
  std::optional<LabeledSnippet> snippet;
  ErrorCode code = ErrorCode::ParseError;
  std::string message;
};

RowOutcome parse_row(const csv::Row& row, const ColumnMap& cols, LoadMode mode, bool allow_zero_votes) {
  RowOutcome out;
  auto fail = [&](ErrorCode code, std::string msg) {
    out.code = code;
    out.message = std::move(msg);
    return out;
  };
  if (row.size() != cols.width)
    return fail(ErrorCode::ParseError, "expected " + std::to_string(cols.width) + " fields, got " +
                                           std::to_string(row.size()));
  LabeledSnippet s;
  s.text_id = std::string(trim(row[cols.text_id]));
  if (s.text_id.empty()) return fail(ErrorCode::ParseError, "empty text_id");
  if (cols.doi && !trim(row[*cols.doi]).empty()) s.source_ref = std::string(trim(row[*cols.doi]));
  s.text = row[cols.text];
  if (trim(s.text).empty()) return fail(ErrorCode::EmptyText, "empty text for " + s.text_id);
  try {
    s.sdg = SdgId::parse(row[cols.sdg]);
  } catch (const Error& e) {
    return fail(ErrorCode::InvalidSdg, e.what());
  }
  if (!parse_count(row[cols.positive], s.labels_positive) ||
      !parse_count(row[cols.negative], s.labels_negative) || s.labels_positive < 0 ||
      s.labels_negative < 0)
    return fail(ErrorCode::InvalidCounts, "non-integer or negative vote counts for " + s.text_id);
  if (allow_zero_votes) {
    s.labels_positive = s.labels_negative = 0;
    s.agreement = 0.0;
    out.snippet = std::move(s);
    return out;
  }
  if (s.labels_positive + s.labels_negative < 1)
    return fail(ErrorCode::InvalidCounts, "no votes recorded for " + s.text_id);
  double stored = 0.0;
  if (!parse_double(row[cols.agreement], stored) || stored < 0.0 || stored > 1.0)
    return fail(ErrorCode::ParseError, "agreement is not a fraction for " + s.text_id);
  double recomputed = compute_agreement(s.labels_positive, s.labels_negative);
  if (mode == LoadMode::Strict) {
    if (std::abs(stored - recomputed) > kAgreementTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "agreement mismatch for " << s.text_id << ": stored " << stored << ", recomputed "
          << recomputed;
      return fail(ErrorCode::AgreementMismatch, msg.str());
    }
    s.agreement = recomputed;
  } else {
    s.agreement = stored;
  }
  out.snippet = std::move(s);
  return out;
}

LoadResult load_impl(std::istream& in, LoadMode mode, bool pool) {
  std::string header_line;
  if (!std::getline(in, header_line) || trim(header_line).empty())
    throw Error(ErrorCode::MalformedHeader, "missing header row");
  const char delimiter = csv::sniff_delimiter(header_line);
  csv::Row header;
  {
    std::istringstream hs(header_line);
    csv::Reader(hs, delimiter).next(header);
  }
  ColumnMap cols = map_header(header);

  LoadResult result;
  std::vector<LabeledSnippet> rows;
  std::set<std::pair<std::string, SdgId>> seen;
  csv::Reader reader(in, delimiter);
  csv::Row row;
  while (reader.next(row)) {
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    // +1 for the header consumed separately.
    const std::size_t line = reader.record_line() + 1;
    RowOutcome parsed = parse_row(row, cols, mode, pool);
    if (parsed.snippet && !seen.emplace(parsed.snippet->text_id, parsed.snippet->sdg).second) {
      parsed.code = ErrorCode::DuplicateRow;
      parsed.message = "duplicate (text_id, sdg) for " + parsed.snippet->text_id;
      parsed.snippet.reset();
    }
    if (!parsed.snippet) {
      if (mode == LoadMode::Strict)
        throw Error(parsed.code, "line " + std::to_string(line) + ": " + parsed.message);
      ++result.dropped;
      continue;
    }
    rows.push_back(std::move(*parsed.snippet));
  }
  if (rows.empty()) result.warnings.push_back("dataset contains no rows");
  if (result.dropped)
    result.warnings.push_back("dropped " + std::to_string(result.dropped) + " invalid rows");
  result.corpus = Corpus(std::move(rows));
  for (const auto& id : result.corpus.shared_text_ids())
    result.warnings.push_back("text_id " + id + " appears under several SDG labels");
  return result;
}

}  // namespace

double compute_agreement(long long accepts, long long rejects) {
  if (accepts < 0 || rejects < 0 || accepts + rejects < 1)
    throw Error(ErrorCode::InvalidCounts, "agreement needs at least one vote");
  const long long margin = accepts > rejects ? accepts - rejects : rejects - accepts;
  return static_cast<double>(margin) / static_cast<double>(accepts + rejects);
}

Corpus::Corpus(std::vector<LabeledSnippet> snippets) : snippets_(std::move(snippets)) {
  std::set<std::pair<std::string, SdgId>> keys;
  std::map<std::string, int> id_count;
  for (std::size_t i = 0; i < snippets_.size(); ++i) {
    const auto& s = snippets_[i];
    if (!keys.emplace(s.text_id, s.sdg).second)
      throw Error(ErrorCode::DuplicateRow, "duplicate (text_id, sdg) for " + s.text_id);
    by_sdg_[s.sdg].push_back(i);
    ++id_count[s.text_id];
  }
  for (const auto& [id, n] : id_count)
    if (n > 1) shared_text_ids_.push_back(id);
}

LoadResult load_community_dataset(const std::filesystem::path& path, LoadMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open dataset " + path.string());
  return load_community_dataset(in, mode);
}

LoadResult load_community_dataset(std::istream& in, LoadMode mode) {
  return load_impl(in, mode, false);
}

Corpus load_snippet_pool(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open snippet pool " + path.string());
  return load_impl(in, LoadMode::Strict, true).corpus;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  csv::write_row(out, csv::Row(std::begin(kColumns), std::end(kColumns)));
  for (const auto& s : corpus) {
    csv::write_row(out, {s.source_ref.value_or(""), s.text_id, s.text, std::to_string(s.sdg.value()),
                         std::to_string(s.labels_negative), std::to_string(s.labels_positive),
                         format_double(s.agreement)});
  }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + path.string());
  write_corpus(corpus, out);
  if (!out.flush()) throw Error(ErrorCode::StorageFailure, "write failed for " + path.string());
}

Corpus filter_high_agreement(const Corpus& corpus, double min_agreement,
                             bool require_positive_majority) {
  if (!(min_agreement >= 0.0 && min_agreement <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "min_agreement must lie in [0, 1]");
  std::vector<LabeledSnippet> kept;
  for (const auto& s : corpus) {
    if (s.agreement < min_agreement) continue;
    if (require_positive_majority && !s.positive_majority()) continue;
    kept.push_back(s);
  }
  return Corpus(std::move(kept));
}

Corpus trainable_rows(const Corpus& corpus) {
  std::vector<LabeledSnippet> kept;
  for (const auto& s : corpus)
    if (!s.sdg.excluded_from_training()) kept.push_back(s);
  return Corpus(std::move(kept));
}

Split split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "test_fraction must lie in (0, 1)");
  std::vector<bool> in_test(corpus.size(), false);
  for (const auto& [sdg, rows] : corpus.by_sdg()) {
    if (rows.size() < 2)
      throw Error(ErrorCode::TooSmallToStratify,
                  "SDG " + std::to_string(sdg.value()) + " has fewer than 2 rows");
    // Independent stream per SDG so adding rows to one goal leaves the
    // others' partitions untouched.
    Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(sdg.value()));
    std::vector<std::size_t> order = rows;
    shuffle(order, rng);
    const auto n_test = static_cast<std::size_t>(std::llround(rows.size() * test_fraction));
    for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;
  }
  std::vector<LabeledSnippet> train, test;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    (in_test[i] ? test : train).push_back(corpus[i]);
  return {Corpus(std::move(train)), Corpus(std::move(test))};
}

}  // namespace osdg
