#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "osdg/error.hpp"
#include "osdg/sdg.hpp"

namespace osdg {

struct TranslationRequest {
  std::string text;
  LanguageCode source = LanguageCode::en;
  // The target is always English.
};

class TranslationError : public Error {
 public:
  TranslationError(ErrorCode code, const std::string& message, int attempts)
      : Error(code, message), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// A translation service. Implementations must be safe to call concurrently
// and must return non-empty text for non-empty input.
class TranslatorBackend {
 public:
  virtual ~TranslatorBackend() = default;
  virtual std::string name() const = 0;
  // Throws TranslationError on failure.
  virtual std::string translate(const TranslationRequest& request) = 0;
};

// Thread-safe LRU keyed by (backend name, source language, content digest).
class TranslationCache {
 public:
  explicit TranslationCache(std::size_t capacity = 4096) : capacity_(capacity) {}

  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, std::string value);
  std::size_t size() const;

  static std::string key(std::string_view backend, LanguageCode source, std::string_view text);

 private:
  using Entry = std::pair<std::string, std::string>;
  mutable std::mutex mu_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

// English passes through byte-identical without touching the backend.
// `backend` may be null only for English input; `cache` may be null.
std::string translate_to_english(const TranslationRequest& request, TranslatorBackend* backend,
                                 TranslationCache* cache);

// Offline backend driven by a phrase dictionary:
//   {"es": {"agua limpia": "clean water", "y": "and"}, "fr": {...}}
// Longest dictionary phrase wins at each token; unknown tokens and the
// separators between tokens are copied through.
class DictionaryBackend : public TranslatorBackend {
 public:
  using Phrasebook = std::map<LanguageCode, std::map<std::vector<std::string>, std::string>>;

  explicit DictionaryBackend(Phrasebook phrasebook);
  static std::unique_ptr<DictionaryBackend> from_file(const std::filesystem::path& path);
  static std::unique_ptr<DictionaryBackend> from_json(std::string_view json_text);

  std::string name() const override { return "dictionary"; }
  std::string translate(const TranslationRequest& request) override;

  std::size_t calls() const;

 private:
  Phrasebook phrasebook_;
  std::size_t max_phrase_ = 1;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:9000/translate
  std::string auth_token;
  std::chrono::milliseconds timeout{10000};
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{200};
};

// POSTs {"text","source","target":"en"} and expects {"translation": "..."}.
// Connection failures, 429 and 5xx responses are retried with exponential
// backoff; other non-2xx statuses fail immediately.
class HttpBackend : public TranslatorBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string name() const override { return "http:" + config_.endpoint; }
  std::string translate(const TranslationRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace osdg
