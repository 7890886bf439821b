#include "osdg/translate.hpp"

#include <algorithm>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "osdg/tokenize.hpp"
#include "osdg/util.hpp"

namespace osdg {

// --- cache -------------------------------------------------------------------

std::optional<std::string> TranslationCache::get(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

void TranslationCache::put(const std::string& key, std::string value) {
  std::lock_guard lock(mu_);
  if (capacity_ == 0) return;
  if (auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(value);
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(key, std::move(value));
  index_[key] = lru_.begin();
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

std::size_t TranslationCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

std::string TranslationCache::key(std::string_view backend, LanguageCode source, std::string_view text) {
  std::string k(backend);
  k += '|';
  k += to_string(source);
  k += '|';
  k += sha256_hex(text);
  return k;
}

std::string translate_to_english(const TranslationRequest& request, TranslatorBackend* backend,
                                 TranslationCache* cache) {
  if (request.source == LanguageCode::en) return request.text;
  if (!backend)
    throw TranslationError(ErrorCode::TranslatorFailure,
                           "no translator configured for language " + std::string(to_string(request.source)), 0);
  std::string key;
  if (cache) {
    key = TranslationCache::key(backend->name(), request.source, request.text);
    if (auto hit = cache->get(key)) return *hit;
  }
  std::string english = backend->translate(request);
  if (english.empty() && !request.text.empty())
    throw TranslationError(ErrorCode::MalformedResponse, "translator returned empty text", 1);
  if (cache) cache->put(key, english);
  return english;
}

// --- dictionary backend ------------------------------------------------------

DictionaryBackend::DictionaryBackend(Phrasebook phrasebook) : phrasebook_(std::move(phrasebook)) {
  for (const auto& [lang, entries] : phrasebook_)
    for (const auto& [phrase, english] : entries) max_phrase_ = std::max(max_phrase_, phrase.size());
}

std::unique_ptr<DictionaryBackend> DictionaryBackend::from_file(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

std::unique_ptr<DictionaryBackend> DictionaryBackend::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid dictionary JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "dictionary must be a JSON object");
  Phrasebook book;
  for (const auto& [lang, entries] : doc.items()) {
    const LanguageCode code = parse_language(lang);
    if (!entries.is_object())
      throw Error(ErrorCode::ParseError, "dictionary entries for " + lang + " must be an object");
    for (const auto& [source, english] : entries.items()) {
      auto phrase = tokenize_words(source);
      if (phrase.empty() || !english.is_string())
        throw Error(ErrorCode::ParseError, "bad dictionary entry '" + source + "'");
      book[code][std::move(phrase)] = english.get<std::string>();
    }
  }
  return std::make_unique<DictionaryBackend>(std::move(book));
}

std::size_t DictionaryBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string DictionaryBackend::translate(const TranslationRequest& request) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  auto book_it = phrasebook_.find(request.source);
  if (book_it == phrasebook_.end())
    throw TranslationError(ErrorCode::TranslatorFailure,
                           "dictionary has no entries for " + std::string(to_string(request.source)), 1);
  const auto& book = book_it->second;
  const std::string_view text = request.text;
  const auto tokens = tokenize(text);

  std::string out;
  std::size_t copied_to = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    std::size_t len = std::min(max_phrase_, tokens.size() - i);
    const std::string* english = nullptr;
    for (; len > 0; --len) {
      std::vector<std::string> key;
      for (std::size_t k = i; k < i + len; ++k) key.push_back(tokens[k].text);
      if (auto it = book.find(key); it != book.end()) {
        english = &it->second;
        break;
      }
    }
    out.append(text.substr(copied_to, tokens[i].begin - copied_to));
    if (!english) {
      out.append(text.substr(tokens[i].begin, tokens[i].end - tokens[i].begin));
      copied_to = tokens[i].end;
      ++i;
      continue;
    }
    std::string replacement = *english;
    std::size_t pos = tokens[i].begin;
    if (!replacement.empty() && is_upper(decode_utf8(text, pos))) {
      std::size_t rpos = 0;
      const char32_t first = decode_utf8(replacement, rpos);
      std::string cap;
      append_utf8(cap, to_upper(first));
      replacement = cap + replacement.substr(rpos);
    }
    out += replacement;
    copied_to = tokens[i + len - 1].end;
    i += len;
  }
  out.append(text.substr(copied_to));
  if (trim(out).empty() && !trim(text).empty()) return request.text;
  return out;
}

// --- HTTP backend --------------------------------------------------------------

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (url.empty() || scheme_end == std::string::npos)
    throw Error(ErrorCode::Config, "translator endpoint must be an absolute URL: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (config_.max_retries < 0) throw Error(ErrorCode::Config, "max_retries must be >= 0");
}

std::string HttpBackend::translate(const TranslationRequest& request) {
  const std::string body =
      nlohmann::json{{"text", request.text}, {"source", to_string(request.source)}, {"target", "en"}}.dump();
  httplib::Headers headers;
  if (!config_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + config_.auth_token);

  const int max_attempts = config_.max_retries + 1;
  std::string last_failure;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(config_.initial_backoff * (1 << std::min(attempt - 2, 16)));
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300)
      throw TranslationError(ErrorCode::TranslatorFailure,
                             "translator returned HTTP " + std::to_string(res->status), attempt);
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("translation") ||
        !doc["translation"].is_string())
      throw TranslationError(ErrorCode::MalformedResponse,
                             "translator response lacks a 'translation' string", attempt);
    std::string english = doc["translation"].get<std::string>();
    if (english.empty() && !request.text.empty())
      throw TranslationError(ErrorCode::MalformedResponse, "translator returned empty text", attempt);
    return english;
  }
  throw TranslationError(ErrorCode::TranslatorFailure,
                         "translator failed after " + std::to_string(max_attempts) +
                             " attempts (" + std::to_string(config_.max_retries) + " retries): " + last_failure,
                         max_attempts);
}

}  // namespace osdg
