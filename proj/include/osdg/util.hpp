#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osdg {

std::string_view trim(std::string_view s);
// Collapses internal whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
// Full-string parse; returns false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);
bool parse_count(std::string_view text, long long& out);

std::string sha256_hex(std::string_view data);

// RFC 3339 UTC timestamp with millisecond precision.
std::string utc_timestamp();

std::string read_file(const std::filesystem::path& path);

// Append-only line log. Each append is a single write(2) on an O_APPEND
// descriptor followed by fsync, so a crash leaves whole lines only (a torn
// final line at worst, which readers skip).
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path, bool sync = true);
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  // Throws Error{StorageFailure}. `line` must not contain a newline.
  void append(std::string_view line);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  bool sync_;
};

// Complete lines of a log file; a trailing line without '\n' is ignored.
std::vector<std::string> read_log_lines(const std::filesystem::path& path);

// Deterministic RNG plumbing. std::uniform_int_distribution and std::shuffle
// are implementation-defined, so anything that must be reproducible across
// standard libraries goes through these.
using Rng = std::mt19937_64;

std::uint64_t uniform_index(Rng& rng, std::uint64_t n);
double uniform_unit(Rng& rng);

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  shuffle(std::span<T>(items), rng);
}

}  // namespace osdg
