#include "osdg/service.hpp"

#include <stdlib.h>
#include <sys/wait.h>

#include <fstream>

#include "httplib.h"
#include "osdg/util.hpp"

namespace osdg {

using nlohmann::json;
using nlohmann::ordered_json;

extern const char* const kSdgTargetsJson;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void parse_listen(const std::string& listen, std::string& host, int& port) {
  const auto colon = listen.rfind(':');
  long long p = 0;
  if (colon == std::string::npos || !parse_count(listen.substr(colon + 1), p) || p < 0 || p > 65535)
    throw Error(ErrorCode::Config, "listen must be host:port, got '" + listen + "'");
  host = listen.substr(0, colon);
  port = static_cast<int>(p);
}

std::size_t parse_size(const char* key, const std::string& text) {
  long long n = 0;
  if (!parse_count(text, n) || n < 0) throw Error(ErrorCode::Config, std::string(key) + " must be a non-negative integer");
  return static_cast<std::size_t>(n);
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

bool replace_all(std::string& s, std::string_view from, const std::string& to) {
  bool any = false;
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
    any = true;
  }
  return any;
}

std::vector<int> sdg_list(const std::set<SdgId>& s) {
  std::vector<int> out;
  for (SdgId id : s) out.push_back(id.value());
  return out;
}

std::string_view mode_name(const SessionMode& mode) {
  switch (mode.kind) {
    case SessionMode::Kind::Intro: return "intro";
    case SessionMode::Kind::SingleSdg: return "single";
    case SessionMode::Kind::Mixed: return "mixed";
  }
  return "mixed";
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                ordered_json extra = ordered_json::object()) {
  ordered_json body{{"code", code}, {"message", message}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  send_json(res, status, body);
}

// Runs a handler and turns every exception into a {code, message} body.
template <typename F>
void guarded(httplib::Response& res, F&& fn) {
  try {
    fn();
  } catch (const TranslationError& e) {
    send_error(res, http_status(e.code()), e.code_name(), e.what(), {{"attempts", e.attempts()}});
  } catch (const Error& e) {
    const int status = http_status(e.code());
    send_error(res, status, e.code_name(), status == 500 ? "internal error" : e.what());
  } catch (const json::exception&) {
    send_error(res, 400, to_string(ErrorCode::InvalidArgument), "request body has the wrong shape");
  } catch (const std::exception&) {
    send_error(res, 500, "Internal", "internal error");
  }
}

json parse_body(const httplib::Request& req) {
  auto doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  return doc;
}

LanguageCode language_field(const json& doc) {
  if (!doc.contains("language")) return LanguageCode::en;
  if (!doc["language"].is_string()) throw Error(ErrorCode::UnsupportedLanguage, "language must be a string");
  return parse_language(doc["language"].get<std::string>());
}

bool media_is(const std::string& content_type, std::string_view want) {
  const auto semi = content_type.find(';');
  return trim(std::string_view(content_type).substr(0, semi)) == want;
}

}  // namespace

// --- config ------------------------------------------------------------------------

ServiceConfig ServiceConfig::from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::Config, "service config must be a JSON object");
  ServiceConfig c;
  try {
    if (doc.contains("listen")) parse_listen(doc["listen"].get<std::string>(), c.host, c.port);
    if (doc.contains("model_path")) c.model_path = resolve(base_dir, doc["model_path"].get<std::string>());
    if (doc.contains("ontology_path")) c.ontology_path = resolve(base_dir, doc["ontology_path"].get<std::string>());
    if (doc.contains("suggestions_path"))
      c.suggestions_path = resolve(base_dir, doc["suggestions_path"].get<std::string>());
    if (doc.contains("community_dir") && !doc["community_dir"].is_null())
      c.community_dir = resolve(base_dir, doc["community_dir"].get<std::string>());
    if (doc.contains("pdf_extractor_command") && !doc["pdf_extractor_command"].is_null())
      c.pdf_extractor_command = doc["pdf_extractor_command"].get<std::string>();
    c.max_request_bytes = doc.value("max_request_bytes", c.max_request_bytes);
    c.threads = doc.value("threads", c.threads);
    c.cors_origin = doc.value("cors_origin", c.cors_origin);
    c.min_hits = doc.value("min_hits", c.min_hits);
    if (doc.contains("aggregation")) {
      const auto& a = doc["aggregation"];
      c.aggregation.relevance_threshold = a.value("relevance_threshold", c.aggregation.relevance_threshold);
      c.aggregation.sdg_share_threshold = a.value("sdg_share_threshold", c.aggregation.sdg_share_threshold);
      c.aggregation.min_sentences = a.value("min_sentences", c.aggregation.min_sentences);
      c.aggregation.max_sentences = a.value("max_sentences", c.aggregation.max_sentences);
    }
    if (doc.contains("translator")) {
      const auto& t = doc["translator"];
      c.translator.kind = t.value("kind", c.translator.kind);
      if (t.contains("dictionary_path"))
        c.translator.dictionary_path = resolve(base_dir, t["dictionary_path"].get<std::string>());
      c.translator.http.endpoint = t.value("endpoint", c.translator.http.endpoint);
      c.translator.http.auth_token = t.value("auth_token", c.translator.http.auth_token);
      c.translator.http.timeout = std::chrono::milliseconds(t.value("timeout_ms", c.translator.http.timeout.count()));
      c.translator.http.max_retries = t.value("max_retries", c.translator.http.max_retries);
      c.translator.http.initial_backoff =
          std::chrono::milliseconds(t.value("initial_backoff_ms", c.translator.http.initial_backoff.count()));
      c.translator.cache_capacity = t.value("cache_capacity", c.translator.cache_capacity);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("bad config value: ") + e.what());
  }
  return c;
}

void ServiceConfig::apply_env(const std::function<const char*(const char*)>& getenv_fn) {
  auto env = [&](const char* key) -> std::optional<std::string> {
    const char* v = getenv_fn(key);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("OSDG_LISTEN")) parse_listen(*v, host, port);
  if (auto v = env("OSDG_MODEL_PATH")) model_path = *v;
  if (auto v = env("OSDG_ONTOLOGY_PATH")) ontology_path = *v;
  if (auto v = env("OSDG_SUGGESTIONS_PATH")) suggestions_path = *v;
  if (auto v = env("OSDG_COMMUNITY_DIR")) community_dir = std::filesystem::path(*v);
  if (auto v = env("OSDG_PDF_EXTRACTOR")) pdf_extractor_command = *v;
  if (auto v = env("OSDG_MAX_REQUEST_BYTES")) max_request_bytes = parse_size("OSDG_MAX_REQUEST_BYTES", *v);
  if (auto v = env("OSDG_THREADS")) threads = static_cast<unsigned>(parse_size("OSDG_THREADS", *v));
  if (auto v = env("OSDG_CORS_ORIGIN")) cors_origin = *v;
  if (auto v = env("OSDG_TRANSLATOR_KIND")) translator.kind = *v;
  if (auto v = env("OSDG_TRANSLATOR_DICTIONARY")) translator.dictionary_path = *v;
  if (auto v = env("OSDG_TRANSLATOR_ENDPOINT")) translator.http.endpoint = *v;
  if (auto v = env("OSDG_TRANSLATOR_TOKEN")) translator.http.auth_token = *v;
}

void ServiceConfig::validate() const {
  auto require_file = [](const char* key, const std::filesystem::path& p) {
    if (p.empty()) throw Error(ErrorCode::Config, std::string(key) + " is not set");
    if (!std::filesystem::is_regular_file(p))
      throw Error(ErrorCode::Config, std::string(key) + " does not exist: " + p.string());
  };
  require_file("model_path", model_path);
  require_file("ontology_path", ontology_path);
  if (suggestions_path.empty()) throw Error(ErrorCode::Config, "suggestions_path is not set");
  const auto parent = suggestions_path.has_parent_path() ? suggestions_path.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(parent))
    throw Error(ErrorCode::Config, "suggestions_path directory does not exist: " + parent.string());
  if (community_dir) {
    require_file("community_dir tasks.csv", *community_dir / "tasks.csv");
    require_file("community_dir intro.json", *community_dir / "intro.json");
  }
  if (translator.kind == "dictionary") {
    require_file("translator.dictionary_path", translator.dictionary_path);
  } else if (translator.kind == "http") {
    if (translator.http.endpoint.empty()) throw Error(ErrorCode::Config, "translator.endpoint is not set");
    if (translator.http.max_retries < 0) throw Error(ErrorCode::Config, "translator.max_retries must be >= 0");
  } else if (translator.kind != "none") {
    throw Error(ErrorCode::Config, "translator.kind must be none, dictionary or http");
  }
  if (max_request_bytes < kMinRequestLimit)
    throw Error(ErrorCode::Config, "max_request_bytes must be at least 1024");
  if (threads == 0) throw Error(ErrorCode::Config, "threads must be positive");
  if (min_hits == 0) throw Error(ErrorCode::Config, "min_hits must be positive");
  try {
    aggregation.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, std::string("aggregation: ") + e.what());
  }
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Config, path.string() + " is not valid JSON");
  ServiceConfig c = ServiceConfig::from_json(doc, path.parent_path());
  c.apply_env([](const char* key) { return std::getenv(key); });
  c.validate();
  return c;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidSdg:
    case ErrorCode::EmptyText:
    case ErrorCode::UnsupportedLanguage:
    case ErrorCode::EmptySuggestion:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownTask:
    case ErrorCode::UnknownVolunteer:
      return 404;
    case ErrorCode::AlreadyOnboarded:
    case ErrorCode::NotOnboarded:
    case ErrorCode::IntroIncomplete:
    case ErrorCode::OpenSessionExists:
    case ErrorCode::NoEligibleTasks:
    case ErrorCode::SessionComplete:
    case ErrorCode::OutOfOrderTask:
    case ErrorCode::DuplicateVote:
    case ErrorCode::VoteCapReached:
    case ErrorCode::TaskRetired:
      return 409;
    case ErrorCode::PayloadTooLarge:
      return 413;
    case ErrorCode::UnsupportedMediaType:
      return 415;
    case ErrorCode::NoExtractor:
    case ErrorCode::EmptyDocument:
      return 422;
    case ErrorCode::TranslatorFailure:
    case ErrorCode::MalformedResponse:
    case ErrorCode::ExtractorFailed:
      return 502;
    default:
      return 500;
  }
}

// --- JSON views ------------------------------------------------------------------------

ordered_json to_json(const ClassificationResult& r, const Ontology& ontology) {
  ordered_json per_sdg = ordered_json::object();
  for (const auto& [sdg, ev] : r.per_sdg) {
    ordered_json matches = ordered_json::array();
    for (const auto& m : ev.keyword_matches)
      matches.push_back({{"term", ontology.terms().at(m.term_index).phrase_text()},
                         {"term_id", m.term_id},
                         {"start_token", m.start_token},
                         {"end_token", m.end_token},
                         {"begin_byte", m.begin_byte},
                         {"end_byte", m.end_byte}});
    per_sdg[std::to_string(sdg.value())] = {{"probability", ev.probability}, {"keyword_matches", matches}};
  }
  return {{"input_hash", r.input_hash},
          {"language", to_string(r.language)},
          {"translated", r.translated},
          {"analyzed_text", r.analyzed_text},
          {"per_sdg", per_sdg},
          {"ml_labels", sdg_list(r.ml_labels)},
          {"evidence_sdgs", sdg_list(r.evidence_sdgs)},
          {"final_labels", sdg_list(r.final_labels)},
          {"most_relevant", r.most_relevant ? ordered_json(r.most_relevant->value()) : ordered_json()}};
}

ordered_json to_json(const DocumentResult& d, const Ontology& ontology) {
  ordered_json distribution = ordered_json::object();
  for (const auto& [sdg, share] : d.distribution) distribution[std::to_string(sdg.value())] = share;
  ordered_json chunks = ordered_json::array();
  for (std::size_t i = 0; i < d.chunks.size(); ++i)
    chunks.push_back({{"index", i},
                      {"begin", d.chunks[i].begin},
                      {"end", d.chunks[i].end},
                      {"sentences", d.chunks[i].sentences},
                      {"result", to_json(d.per_chunk[i], ontology)}});
  return {{"chunk_count", d.chunk_count},
          {"related_chunk_count", d.related_chunk_count},
          {"related_fraction", d.related_fraction},
          {"distribution", distribution},
          {"chunks", chunks}};
}

ordered_json to_json(const Session& s) {
  return {{"session_id", s.session_id},
          {"volunteer_id", s.volunteer_id},
          {"mode", mode_name(s.mode)},
          {"sdg", s.mode.sdg ? ordered_json(s.mode.sdg->value()) : ordered_json()},
          {"size", s.task_ids.size()},
          {"cursor", s.cursor},
          {"complete", s.complete()},
          {"completed_at", s.completed_at ? ordered_json(*s.completed_at) : ordered_json()}};
}

ordered_json to_json(const NextTask& n) {
  ordered_json out{{"complete", n.complete}, {"session_size", n.session_size}};
  if (n.complete) return out;
  out["position"] = n.position;
  out["is_stop_point"] = n.is_stop_point;
  out["task"] = {{"task_id", n.task->task_id},
                 {"snippet", n.task->snippet},
                 {"candidate_sdg", n.task->candidate_sdg.value()},
                 {"source_ref", n.task->source_ref ? ordered_json(*n.task->source_ref) : ordered_json()}};
  return out;
}

const json& sdg_targets() {
  static const json doc = json::parse(kSdgTargetsJson);
  return doc;
}

std::string run_pdf_extractor(const std::string& command, std::string_view pdf_bytes) {
  std::string tmpl = (std::filesystem::temp_directory_path() / "osdg-pdf-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw Error(ErrorCode::ExtractorFailed, "cannot create a scratch directory");
  const std::filesystem::path dir(tmpl);
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  const auto input = dir / "input.pdf";
  const auto output = dir / "output.txt";
  {
    std::ofstream out(input, std::ios::binary);
    out.write(pdf_bytes.data(), static_cast<std::streamsize>(pdf_bytes.size()));
    if (!out) throw Error(ErrorCode::ExtractorFailed, "cannot stage the PDF for extraction");
  }
  std::string cmd = command;
  const bool file_in = replace_all(cmd, "{input}", shell_quote(input.string()));
  const bool file_out = replace_all(cmd, "{output}", shell_quote(output.string()));
  cmd = "(" + cmd + ")";
  if (!file_in) cmd += " < " + shell_quote(input.string());
  if (!file_out) cmd += " > " + shell_quote(output.string());
  cmd += " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc) || WEXITSTATUS(rc) != 0)
    throw Error(ErrorCode::ExtractorFailed, "PDF extractor exited with an error");
  if (!std::filesystem::exists(output)) throw Error(ErrorCode::ExtractorFailed, "PDF extractor wrote no output");
  return read_file(output);
}

// --- service -----------------------------------------------------------------------------

Service::Service(ServiceConfig config) : config_(std::move(config)), started_(std::chrono::steady_clock::now()) {
  config_.validate();
  model_set_ = load_model_set(config_.model_path);
  model_version_ = model_set_.format_version + "+" + sha256_hex(read_file(config_.model_path)).substr(0, 12);
  ontology_ = load_ontology(config_.ontology_path).ontology;
  if (config_.translator.kind == "dictionary")
    translator_ = DictionaryBackend::from_file(config_.translator.dictionary_path);
  else if (config_.translator.kind == "http")
    translator_ = std::make_unique<HttpBackend>(config_.translator.http);
  cache_ = std::make_unique<TranslationCache>(config_.translator.cache_capacity);
  feedback_ = std::make_unique<FeedbackStore>(config_.suggestions_path);
  if (config_.community_dir) community_ = std::make_unique<CommunityStore>(*config_.community_dir);
  server_ = std::make_unique<httplib::Server>();
  routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (config_.port == 0) {
    const int port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw Error(ErrorCode::Config, "cannot bind " + config_.host);
    return port;
  }
  if (!server_->bind_to_port(config_.host, config_.port))
    throw Error(ErrorCode::Config, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  return config_.port;
}

void Service::run() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

void Service::routes() {
  auto& srv = *server_;
  const unsigned threads = config_.threads;
  srv.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  srv.set_payload_max_length(config_.max_request_bytes);

  srv.set_post_routing_handler([origin = config_.cors_origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
  });
  srv.Options(R"(/api/v1/.*)", [origin = config_.cors_origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 413)
      send_error(res, 413, to_string(ErrorCode::PayloadTooLarge), "request body exceeds the size limit");
    else if (res.status == 404)
      send_error(res, 404, to_string(ErrorCode::NotFound), "no such endpoint");
    else
      send_error(res, res.status, "HttpError", httplib::status_message(res.status));
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send_error(res, 500, "Internal", "internal error");
  });

  const auto deps = [this] {
    PipelineDeps d;
    d.model_set = &model_set_;
    d.ontology = &ontology_;
    d.translator = translator_.get();
    d.cache = cache_.get();
    d.min_hits = config_.min_hits;
    return d;
  };
  const auto community = [this]() -> CommunityStore& {
    if (!community_) throw Error(ErrorCode::NotFound, "community store is not configured");
    return *community_;
  };

  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    const double uptime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    send_json(res, 200,
              {{"status", "ok"},
               {"model_version", model_version_},
               {"ontology_version", ontology_.version()},
               {"uptime_seconds", uptime}});
  });

  srv.Post("/api/v1/classify", [this, deps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const LanguageCode lang = language_field(body);
      if (!body.contains("text") || !body["text"].is_string())
        throw Error(ErrorCode::EmptyText, "text is required");
      const auto result = classify_text(body["text"].get<std::string>(), lang, deps());
      send_json(res, 200, to_json(result, ontology_));
    });
  });

  srv.Post("/api/v1/classify-document", [this, deps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string content;
      std::string content_type;
      LanguageCode lang = LanguageCode::en;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("file")) throw Error(ErrorCode::InvalidArgument, "multipart field 'file' is required");
        const auto file = req.get_file_value("file");
        content = file.content;
        content_type = file.content_type;
        if (req.has_file("language")) lang = parse_language(std::string(trim(req.get_file_value("language").content)));
      } else {
        content = req.body;
        content_type = req.get_header_value("Content-Type");
        if (req.has_param("language")) lang = parse_language(req.get_param_value("language"));
      }
      std::string text;
      if (media_is(content_type, "application/pdf")) {
        if (!config_.pdf_extractor_command)
          throw Error(ErrorCode::NoExtractor, "no PDF extractor is configured");
        text = run_pdf_extractor(*config_.pdf_extractor_command, content);
      } else if (media_is(content_type, "text/plain")) {
        text = std::move(content);
      } else {
        throw Error(ErrorCode::UnsupportedMediaType, "file must be application/pdf or text/plain");
      }
      if (trim(text).empty()) throw Error(ErrorCode::EmptyDocument, "document contains no text");
      const auto doc = classify_document(text, lang, deps(), config_.aggregation, 1);
      send_json(res, 200, to_json(doc, ontology_));
    });
  });

  srv.Post("/api/v1/suggestions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      if (!body.contains("text") || !body["text"].is_string() || trim(body["text"].get<std::string>()).empty())
        throw Error(ErrorCode::EmptyText, "text is required");
      if (!body.contains("suggested_sdgs") || !body["suggested_sdgs"].is_array())
        throw Error(ErrorCode::EmptySuggestion, "suggested_sdgs must be a non-empty array");
      const auto& raw = body["suggested_sdgs"];
      if (raw.size() > SdgId::kMax) throw Error(ErrorCode::InvalidArgument, "at most 17 SDGs may be suggested");
      std::set<SdgId> sdgs;
      for (const auto& v : raw) {
        if (!v.is_number_integer()) throw Error(ErrorCode::InvalidSdg, "SDG ids must be integers");
        sdgs.insert(SdgId(v.get<int>()));
      }
      std::optional<std::string> note;
      if (body.contains("note") && !body["note"].is_null()) note = body["note"].get<std::string>();
      const std::string text = body["text"].get<std::string>();
      const auto id = feedback_->record_suggestion(input_digest(text, language_field(body)), text, sdgs, note);
      send_json(res, 202, {{"suggestion_id", id}});
    });
  });

  srv.Get("/api/v1/sdg-targets", [](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content(sdg_targets().dump(), "application/json");
  });

  srv.Post("/api/v1/sessions", [community](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto& store = community();
      const json body = parse_body(req);
      const std::string volunteer = body.value("volunteer_id", "");
      if (trim(volunteer).empty()) throw Error(ErrorCode::InvalidArgument, "volunteer_id is required");
      const std::string mode = body.value("mode", "mixed");
      SessionMode m;
      if (mode == "intro") {
        m = SessionMode::intro();
      } else if (mode == "mixed") {
        m = SessionMode::mixed();
      } else if (mode == "single") {
        if (!body.contains("sdg") || !body["sdg"].is_number_integer())
          throw Error(ErrorCode::InvalidSdg, "single mode needs an integer sdg");
        m = SessionMode::single(SdgId(body["sdg"].get<int>()));
      } else {
        throw Error(ErrorCode::InvalidArgument, "mode must be intro, mixed or single");
      }
      try {
        send_json(res, 201, to_json(store.start_session(volunteer, m)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OpenSessionExists) throw;
        send_error(res, 409, e.code_name(), "volunteer already has an open session", {{"session_id", e.what()}});
      }
    });
  });

  srv.Get("/api/v1/sessions/:id", [community](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(community().session(req.path_params.at("id")))); });
  });

  srv.Get("/api/v1/sessions/:id/next", [community](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(community().next_task(req.path_params.at("id")))); });
  });

  srv.Post("/api/v1/sessions/:id/votes", [community](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto& store = community();
      const json body = parse_body(req);
      const std::string task_id = body.value("task_id", "");
      if (task_id.empty()) throw Error(ErrorCode::InvalidArgument, "task_id is required");
      const Decision d = parse_decision(body.value("decision", ""));
      const auto out = store.record_vote(req.path_params.at("id"), task_id, d);
      send_json(res, 200,
                {{"task_id", task_id},
                 {"accepts", out.tally.accepts},
                 {"rejects", out.tally.rejects},
                 {"cursor", out.cursor},
                 {"complete", out.session_complete}});
    });
  });

  srv.Get("/api/v1/volunteers/:id", [community](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto& store = community();
      const auto& id = req.path_params.at("id");
      const auto open = store.open_session(id);
      send_json(res, 200,
                {{"volunteer_id", id},
                 {"onboarded", store.onboarded(id)},
                 {"open_session", open ? ordered_json(*open) : ordered_json()}});
    });
  });

  srv.Get("/api/v1/volunteers/:id/intro-stats", [community](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto& id = req.path_params.at("id");
      ordered_json tasks = ordered_json::array();
      for (const auto& s : community().intro_stats(id))
        tasks.push_back({{"task_id", s.task_id},
                         {"my_decision", to_string(s.my_decision)},
                         {"accepts", s.accepts},
                         {"votes", s.votes},
                         {"community_accept_fraction", s.community_accept_fraction}});
      send_json(res, 200, {{"volunteer_id", id}, {"tasks", tasks}});
    });
  });

  srv.Get("/api/v1/openapi.json", [](const httplib::Request&, httplib::Response& res) {
    ordered_json paths = ordered_json::object();
    auto op = [&](const char* path, const char* method, const char* summary) {
      paths[path][method] = {{"summary", summary}};
    };
    op("/health", "get", "Service health and loaded versions");
    op("/api/v1/classify", "post", "Classify a text {text, language}");
    op("/api/v1/classify-document", "post", "Classify a PDF or plain-text document (multipart field 'file')");
    op("/api/v1/suggestions", "post", "Record suggested SDG labels {text, suggested_sdgs, note}");
    op("/api/v1/sdg-targets", "get", "The 17 goals and their 169 targets");
    op("/api/v1/sessions", "post", "Start or resume a session {volunteer_id, mode, sdg}");
    op("/api/v1/sessions/{id}", "get", "Session state");
    op("/api/v1/sessions/{id}/next", "get", "Current task of a session");
    op("/api/v1/sessions/{id}/votes", "post", "Vote on the current task {task_id, decision}");
    op("/api/v1/volunteers/{id}", "get", "Onboarding state and open session of a volunteer");
    op("/api/v1/volunteers/{id}/intro-stats", "get", "Introductory exercise comparison");
    op("/api/v1/openapi.json", "get", "This description");
    send_json(res, 200, {{"openapi", "3.0.3"}, {"info", {{"title", "osdg"}, {"version", "1"}}}, {"paths", paths}});
  });
}

}  // namespace osdg
