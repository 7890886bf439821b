#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "osdg/models/ovr.hpp"
#include "osdg/ontology.hpp"
#include "osdg/synth.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return OSDG_SOURCE_DIR; }
inline std::filesystem::path data_path(const std::string& rel) { return source_dir() / "data" / rel; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("osdg-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Model set trained once on the synthetic proxy corpus, shared by tests.
inline const osdg::OvrModelSet& proxy_model_set() {
  static const osdg::OvrModelSet set = [] {
    osdg::ModelSetOptions options;
    options.threads = 1;
    return osdg::train_model_set(osdg::trainable_rows(osdg::synthesize_corpus()), options);
  }();
  return set;
}

inline const osdg::Ontology& seed_ontology() {
  static const osdg::Ontology ontology = osdg::load_ontology(data_path("ontology/seed-v1.csv")).ontology;
  return ontology;
}

}  // namespace testing
