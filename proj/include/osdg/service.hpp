#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "osdg/community.hpp"
#include "osdg/error.hpp"
#include "osdg/models/ovr.hpp"
#include "osdg/ontology.hpp"
#include "osdg/pipeline.hpp"
#include "osdg/translate.hpp"

namespace httplib {
class Server;
}

namespace osdg {

inline constexpr std::size_t kMinRequestLimit = 1024;

struct TranslatorConfig {
  std::string kind = "none";  // none | dictionary | http
  std::filesystem::path dictionary_path;
  HttpBackendConfig http;
  std::size_t cache_capacity = 4096;
};

// Keys of the JSON config file (paths relative to the file's directory):
//   listen "host:port", model_path, ontology_path, suggestions_path,
//   community_dir, pdf_extractor_command, max_request_bytes, threads,
//   cors_origin, min_hits,
//   aggregation {relevance_threshold, sdg_share_threshold, min_sentences, max_sentences},
//   translator {kind, dictionary_path, endpoint, auth_token, timeout_ms,
//               max_retries, initial_backoff_ms, cache_capacity}
// Environment overrides: OSDG_LISTEN, OSDG_MODEL_PATH, OSDG_ONTOLOGY_PATH,
// OSDG_SUGGESTIONS_PATH, OSDG_COMMUNITY_DIR, OSDG_PDF_EXTRACTOR,
// OSDG_MAX_REQUEST_BYTES, OSDG_THREADS, OSDG_CORS_ORIGIN,
// OSDG_TRANSLATOR_KIND, OSDG_TRANSLATOR_DICTIONARY, OSDG_TRANSLATOR_ENDPOINT,
// OSDG_TRANSLATOR_TOKEN.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path model_path;
  std::filesystem::path ontology_path;
  std::filesystem::path suggestions_path;
  std::optional<std::filesystem::path> community_dir;
  // Either uses {input}/{output} placeholders, or reads the PDF on stdin and
  // writes text to stdout.
  std::optional<std::string> pdf_extractor_command;
  TranslatorConfig translator;
  AggregationConfig aggregation;
  std::size_t max_request_bytes = 8u << 20;
  unsigned threads = 8;
  std::string cors_origin = "*";
  std::size_t min_hits = 1;

  // Throws Error{Config} naming the offending key.
  static ServiceConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  void apply_env(const std::function<const char*(const char*)>& getenv_fn);
  // Referenced paths must exist and the size limit must be at least 1 KiB.
  void validate() const;
};

// Reads the file, applies OSDG_* environment overrides and validates.
ServiceConfig load_service_config(const std::filesystem::path& path);

// HTTP status for an error code; unlisted codes map to 500.
int http_status(ErrorCode code);

nlohmann::ordered_json to_json(const ClassificationResult& result, const Ontology& ontology);
nlohmann::ordered_json to_json(const DocumentResult& result, const Ontology& ontology);
nlohmann::ordered_json to_json(const Session& session);
nlohmann::ordered_json to_json(const NextTask& next);

// Bundled goal/target listing served by /api/v1/sdg-targets.
const nlohmann::json& sdg_targets();

// Runs `command` on a PDF and returns the extracted text. Throws
// Error{ExtractorFailed} on a non-zero exit or unreadable output.
std::string run_pdf_extractor(const std::string& command, std::string_view pdf_bytes);

class Service {
 public:
  // Loads the model set, ontology, translator and stores; throws on any
  // failure so a bad deployment never binds a port.
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listen address and returns the bound port.
  int bind();
  // Serves until stop(); requires bind().
  void run();
  // Stops accepting connections; in-flight requests finish first.
  void stop();

  const ServiceConfig& config() const { return config_; }
  std::string model_version() const { return model_version_; }
  const Ontology& ontology() const { return ontology_; }

 private:
  void routes();

  ServiceConfig config_;
  OvrModelSet model_set_;
  Ontology ontology_;
  std::string model_version_;
  std::unique_ptr<TranslatorBackend> translator_;
  std::unique_ptr<TranslationCache> cache_;
  std::unique_ptr<FeedbackStore> feedback_;
  std::unique_ptr<CommunityStore> community_;
  std::unique_ptr<httplib::Server> server_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace osdg
