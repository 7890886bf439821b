// osdg: operator command line.
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime failure.

#include <signal.h>

#include <fstream>
#include <iostream>
#include <iterator>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "osdg/community.hpp"
#include "osdg/error.hpp"
#include "osdg/models/training.hpp"
#include "osdg/ontology.hpp"
#include "osdg/pipeline.hpp"
#include "osdg/service.hpp"
#include "osdg/synth.hpp"
#include "osdg/translate.hpp"
#include "osdg/util.hpp"

namespace {

using namespace osdg;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kRuntime = 3;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingFile:
    case ErrorCode::EmptyText:
    case ErrorCode::UnsupportedLanguage:
    case ErrorCode::Config:
      return kUsage;
    case ErrorCode::MalformedHeader:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidSdg:
    case ErrorCode::AgreementMismatch:
    case ErrorCode::InvalidCounts:
    case ErrorCode::DuplicateRow:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::TooSmallToStratify:
    case ErrorCode::EmptyTerm:
    case ErrorCode::TermTooLong:
    case ErrorCode::NoPositives:
    case ErrorCode::NoNegatives:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::Corrupt:
    case ErrorCode::EmptyDocument:
    case ErrorCode::NoExtractor:
    case ErrorCode::UnsupportedMediaType:
      return kData;
    default:
      return kRuntime;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + path.string());
}

std::unique_ptr<TranslatorBackend> make_translator(const std::string& dictionary) {
  if (dictionary.empty()) return nullptr;
  return DictionaryBackend::from_file(dictionary);
}

struct ClassifyArgs {
  std::string model;
  std::string ontology;
  std::string language = "en";
  std::string dictionary;
  std::size_t min_hits = 1;
};

void add_classify_flags(CLI::App* cmd, ClassifyArgs& a) {
  cmd->add_option("--model", a.model, "Model file written by 'osdg train'")->required();
  cmd->add_option("--ontology", a.ontology, "Ontology CSV (sdg,term)")->required();
  cmd->add_option("--language", a.language, "Input language code")->capture_default_str();
  cmd->add_option("--translator-dictionary", a.dictionary, "Phrase dictionary for non-English input");
  cmd->add_option("--min-hits", a.min_hits, "Keyword matches needed as evidence")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OSDG SDG text classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kModelFormatVersion));

  // train
  std::string dataset_path, out_path;
  DatasetSetup setup;
  ModelSetOptions train_opts;
  std::uint64_t seed = 42;
  bool allow_negative_majority = false;
  auto* train = app.add_subcommand("train", "Train the 16 one-vs-rest models and report held-out metrics");
  train->add_option("--dataset", dataset_path, "Community dataset CSV/TSV")->required();
  train->add_option("--out", out_path, "Model file to write")->required();
  train->add_option("--min-agreement", setup.min_agreement, "Minimum agreement score")->capture_default_str();
  train->add_flag("--allow-negative-majority", allow_negative_majority, "Keep rows without a positive majority");
  train->add_option("--test-fraction", setup.test_fraction, "Held-out fraction per SDG")->capture_default_str();
  train->add_option("--seed", seed, "Seed for the split, shuffling and holdout")->capture_default_str();
  train->add_option("--min-df", train_opts.min_df, "Minimum document frequency")->capture_default_str();
  train->add_option("--max-features", train_opts.max_features, "Vocabulary cap")->capture_default_str();
  train->add_option("--lambda", train_opts.train.lambda, "L2 penalty")->capture_default_str();
  train->add_option("--lr", train_opts.train.lr, "Initial learning rate")->capture_default_str();
  train->add_option("--epochs", train_opts.train.epochs, "Maximum epochs")->capture_default_str();
  train->add_option("--patience", train_opts.train.patience, "Early-stopping patience")->capture_default_str();
  train->add_option("--threads", train_opts.threads, "Worker threads (0 = all cores)")->capture_default_str();

  // classify
  ClassifyArgs classify_args;
  std::string text_arg;
  bool from_stdin = false;
  auto* classify = app.add_subcommand("classify", "Classify one text and print the JSON result");
  add_classify_flags(classify, classify_args);
  classify->add_option("text", text_arg, "Text to classify");
  classify->add_flag("--stdin", from_stdin, "Read the text from standard input");

  // classify-doc
  ClassifyArgs doc_args;
  std::string doc_file, pdf_extractor;
  AggregationConfig aggregation;
  auto* classify_doc = app.add_subcommand("classify-doc", "Classify a document and print its SDG distribution");
  add_classify_flags(classify_doc, doc_args);
  classify_doc->add_option("--file", doc_file, "Plain-text or PDF document")->required();
  classify_doc->add_option("--pdf-extractor", pdf_extractor, "Command turning a PDF into text ({input}/{output} or stdio)");
  classify_doc->add_option("--relevance-threshold", aggregation.relevance_threshold)->capture_default_str();
  classify_doc->add_option("--share-threshold", aggregation.sdg_share_threshold)->capture_default_str();

  // eval
  std::string eval_model, eval_dataset, eval_split = "test";
  std::uint64_t eval_seed = 42;
  auto* eval = app.add_subcommand("eval", "Recompute per-SDG metrics for a trained model");
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--dataset", eval_dataset, "Community dataset CSV/TSV")->required();
  eval->add_option("--split", eval_split, "test, train or all")
      ->check(CLI::IsMember({"test", "train", "all"}))
      ->capture_default_str();
  eval->add_option("--seed", eval_seed, "Split seed")->capture_default_str();

  // export-dataset
  std::string store_dir, export_out;
  std::size_t min_validators = kMinExportValidators;
  auto* export_cmd = app.add_subcommand("export-dataset", "Export validated tasks as a community dataset CSV");
  export_cmd->add_option("--store", store_dir, "Community store directory")->required();
  export_cmd->add_option("--out", export_out, "CSV to write")->required();
  export_cmd->add_option("--min-validators", min_validators, "Minimum votes per exported task")->capture_default_str();

  // serve
  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config_path, "Service config JSON")->required();

  // ontology validate
  std::string ontology_file;
  auto* ontology_cmd = app.add_subcommand("ontology", "Ontology tools");
  ontology_cmd->require_subcommand(1);
  auto* validate = ontology_cmd->add_subcommand("validate", "Check an ontology CSV and summarise it");
  validate->add_option("file", ontology_file, "Ontology CSV")->required();

  // community-init
  std::string pool_path, intro_arg, init_store;
  bool include_sdg17 = false;
  auto* init = app.add_subcommand("community-init", "Create a community store from a snippet pool");
  init->add_option("--pool", pool_path, "Snippet pool CSV (counts may be zero)")->required();
  init->add_option("--intro", intro_arg, "Comma-separated intro task ids, or a JSON file with intro_task_ids")->required();
  init->add_option("--store", init_store, "Store directory to create")->required();
  init->add_flag("--include-sdg17", include_sdg17, "Keep SDG 17 snippets");

  // synth-corpus
  std::string synth_out;
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "Write the deterministic synthetic proxy corpus");
  synth_cmd->add_option("--out", synth_out, "CSV to write")->required();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--rows-per-sdg", synth.rows_per_sdg)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) {
      setup.seed = seed;
      setup.require_positive_majority = !allow_negative_majority;
      train_opts.train.seed = seed;
      const auto loaded = load_community_dataset(dataset_path, LoadMode::Strict);
      std::cerr << "loaded " << loaded.corpus.size() << " rows from " << dataset_path << '\n';
      const auto run = run_training(loaded.corpus, setup, train_opts);
      std::cerr << "trained on " << run.split.train.size() << " rows, evaluated on " << run.split.test.size()
                << " rows\n";
      save_model_set(run.model_set, out_path);
      write_text(out_path + ".metrics.json", metrics_json(run.test_metrics) + "\n");
      std::cout << metrics_table(run.test_metrics);
      return kOk;
    }

    if (*classify) {
      std::string text = text_arg;
      if (from_stdin) text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
      if (trim(text).empty()) throw Error(ErrorCode::EmptyText, "no text given");
      const LanguageCode lang = parse_language(classify_args.language);
      const auto model_set = load_model_set(classify_args.model);
      const auto ontology = load_ontology(classify_args.ontology).ontology;
      auto translator = make_translator(classify_args.dictionary);
      TranslationCache cache;
      PipelineDeps deps{&model_set, &ontology, translator.get(), &cache, classify_args.min_hits};
      std::cout << to_json(classify_text(text, lang, deps), ontology).dump(2) << '\n';
      return kOk;
    }

    if (*classify_doc) {
      const LanguageCode lang = parse_language(doc_args.language);
      const std::string bytes = read_file(doc_file);
      const bool is_pdf = bytes.rfind("%PDF", 0) == 0 || std::filesystem::path(doc_file).extension() == ".pdf";
      std::string text;
      if (is_pdf) {
        if (pdf_extractor.empty()) throw Error(ErrorCode::NoExtractor, "PDF input needs --pdf-extractor");
        text = run_pdf_extractor(pdf_extractor, bytes);
      } else {
        text = bytes;
      }
      const auto model_set = load_model_set(doc_args.model);
      const auto ontology = load_ontology(doc_args.ontology).ontology;
      auto translator = make_translator(doc_args.dictionary);
      TranslationCache cache;
      PipelineDeps deps{&model_set, &ontology, translator.get(), &cache, doc_args.min_hits};
      std::cout << to_json(classify_document(text, lang, deps, aggregation), ontology).dump(2) << '\n';
      return kOk;
    }

    if (*eval) {
      const auto model_set = load_model_set(eval_model);
      DatasetSetup s = model_set.dataset;
      s.seed = eval_seed;
      const auto loaded = load_community_dataset(eval_dataset, LoadMode::Strict);
      Corpus rows;
      if (eval_split == "all") {
        rows = filter_high_agreement(trainable_rows(loaded.corpus), s.min_agreement, s.require_positive_majority);
      } else {
        auto sp = prepare_split(loaded.corpus, s);
        rows = eval_split == "test" ? std::move(sp.test) : std::move(sp.train);
      }
      if (rows.empty()) throw Error(ErrorCode::EmptyCorpus, "the " + eval_split + " split is empty");
      std::cout << metrics_json(evaluate(model_set, rows)) << '\n';
      return kOk;
    }

    if (*export_cmd) {
      CommunityStore store(store_dir);
      write_corpus(store.export_dataset(min_validators), export_out);
      store.write_snapshot();
      return kOk;
    }

    if (*serve) {
      // Block the stop signals before any thread starts so only the waiter sees them.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      Service service(load_service_config(config_path));
      const int port = service.bind();
      std::cerr << "listening on " << service.config().host << ':' << port << '\n';
      std::jthread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        std::cerr << "shutting down\n";
        service.stop();
      });
      service.run();
      // run() can also return after a bind-time failure; wake the waiter.
      pthread_kill(waiter.native_handle(), SIGTERM);
      return kOk;
    }

    if (*validate) {
      const auto result = load_ontology(ontology_file);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "ontology " << result.ontology.version() << ": " << result.ontology.terms().size() << " terms\n";
      for (int s = SdgId::kMin; s <= SdgId::kMax; ++s)
        std::cout << "  SDG " << s << ": " << result.ontology.terms_for(SdgId(s)) << '\n';
      return kOk;
    }

    if (*init) {
      std::vector<std::string> intro_ids;
      std::error_code ec;
      if (std::filesystem::is_regular_file(intro_arg, ec)) {
        const auto doc = nlohmann::json::parse(read_file(intro_arg), nullptr, false);
        if (doc.is_discarded() || !doc.contains("intro_task_ids"))
          throw Error(ErrorCode::ParseError, intro_arg + " has no intro_task_ids");
        intro_ids = doc["intro_task_ids"].get<std::vector<std::string>>();
      } else {
        for (std::size_t b = 0; b <= intro_arg.size();) {
          auto e = intro_arg.find(',', b);
          if (e == std::string::npos) e = intro_arg.size();
          intro_ids.emplace_back(trim(std::string_view(intro_arg).substr(b, e - b)));
          b = e + 1;
        }
      }
      CommunityStore::initialize(init_store, load_snippet_pool(pool_path), intro_ids, include_sdg17);
      return kOk;
    }

    if (*synth_cmd) {
      write_corpus(synthesize_corpus(synth), synth_out);
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code_name() << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
