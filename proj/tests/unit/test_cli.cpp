#include <sys/wait.h>

#include <array>
#include <cstdio>

#include "doctest.h"
#include "json.hpp"
#include "osdg/community.hpp"
#include "osdg/util.hpp"
#include "support.hpp"

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(OSDG_BINARY) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("cli usage and help") {
  CHECK(run("--help").code == 0);
  CHECK(run("train --help").out.find("--min-agreement") != std::string::npos);
  CHECK(run("").code == 1);
  CHECK(run("no-such-command").code == 1);
  CHECK(run("train --dataset").code == 1);
}

TEST_CASE("cli train is reproducible and eval matches the stored metrics") {
  testing::TempDir dir;
  REQUIRE(run("synth-corpus --out " + q(dir / "corpus.csv")).code == 0);
  const std::string common = "train --dataset " + q(dir / "corpus.csv") + " --seed 42";
  const auto first = run(common + " --threads 1 --out " + q(dir / "a.json"));
  REQUIRE(first.code == 0);
  CHECK(first.out.find("precision") != std::string::npos);
  REQUIRE(run(common + " --threads 4 --out " + q(dir / "b.json")).code == 0);
  CHECK(osdg::read_file(dir / "a.json") == osdg::read_file(dir / "b.json"));

  const auto eval = run("eval --model " + q(dir / "a.json") + " --dataset " + q(dir / "corpus.csv") + " --split test");
  REQUIRE(eval.code == 0);
  const auto stored = nlohmann::json::parse(osdg::read_file(dir / "a.json.metrics.json"));
  CHECK(nlohmann::json::parse(eval.out) == stored);
  CHECK(stored.size() == 16);

  const auto classify = run("classify --model " + q(dir / "a.json") + " --ontology " +
                            q(testing::data_path("ontology/seed-v1.csv")) + " --stdin < " +
                            q(testing::data_path("fixtures/health-abstract.en.txt")));
  REQUIRE(classify.code == 0);
  CHECK(nlohmann::json::parse(classify.out)["final_labels"] == nlohmann::json::array({3}));

  const auto es = run("classify --model " + q(dir / "a.json") + " --ontology " +
                      q(testing::data_path("ontology/seed-v1.csv")) + " --language es --translator-dictionary " +
                      q(testing::data_path("translate/stub-dictionary.json")) + " --stdin < " +
                      q(testing::data_path("fixtures/health-abstract.es.txt")));
  REQUIRE(es.code == 0);
  CHECK(nlohmann::json::parse(es.out)["final_labels"] == nlohmann::json::array({3}));

  const auto doc = run("classify-doc --model " + q(dir / "a.json") + " --ontology " +
                       q(testing::data_path("ontology/seed-v1.csv")) + " --file " +
                       q(testing::data_path("fixtures/twenty-paragraphs.txt")));
  REQUIRE(doc.code == 0);
  CHECK(nlohmann::json::parse(doc.out)["chunk_count"] == 20);

  const std::string classify_base =
      "classify --model " + q(dir / "a.json") + " --ontology " + q(testing::data_path("ontology/seed-v1.csv"));
  CHECK(run(classify_base + " --language xx 'some text'").code == 1);
  CHECK(run(classify_base + " '   '").code == 1);
  CHECK(run(classify_base + " --language es 'agua'").code == 3);
}

TEST_CASE("cli exit codes for missing and malformed inputs") {
  testing::TempDir dir;
  CHECK(run("classify --model " + q(dir / "missing.json") + " --ontology x.csv text").code == 1);
  testing::write_file(dir / "bad.csv", "a,b\n1,2\n");
  CHECK(run("train --dataset " + q(dir / "bad.csv") + " --out " + q(dir / "m.json")).code == 2);
  testing::write_file(dir / "onto.csv", "sdg,term\n19,foo\n");
  CHECK(run("ontology validate " + q(dir / "onto.csv")).code == 2);
  const auto ok = run("ontology validate " + q(testing::data_path("ontology/seed-v1.csv")));
  CHECK(ok.code == 0);
  CHECK(ok.out.find("seed-v1") != std::string::npos);
  testing::write_file(dir / "empty.json", "");
  CHECK(run("classify --model " + q(dir / "empty.json") + " --ontology " +
            q(testing::data_path("ontology/seed-v1.csv")) + " text").code == 2);
}

TEST_CASE("cli community init and export") {
  testing::TempDir dir;
  REQUIRE(run("synth-corpus --rows-per-sdg 5 --out " + q(dir / "pool.csv")).code == 0);
  const auto pool = osdg::load_community_dataset(dir / "pool.csv", osdg::LoadMode::Strict).corpus;
  std::string intro;
  for (std::size_t i = 0; i < 10; ++i) intro += (i ? "," : "") + pool[i].text_id;
  REQUIRE(run("community-init --pool " + q(dir / "pool.csv") + " --intro " + intro + " --store " + q(dir / "store")).code == 0);
  CHECK(run("community-init --pool " + q(dir / "pool.csv") + " --intro a,b --store " + q(dir / "store2")).code != 0);
  {
    osdg::CommunityStore store(dir / "store");
    for (int v = 0; v < 3; ++v) store.cast_vote("v" + std::to_string(v), pool[20].text_id, osdg::Decision::Accept);
  }
  REQUIRE(run("export-dataset --store " + q(dir / "store") + " --out " + q(dir / "export.csv")).code == 0);
  const auto exported = osdg::load_community_dataset(dir / "export.csv", osdg::LoadMode::Strict).corpus;
  REQUIRE(exported.size() == 1);
  CHECK(exported[0].text_id == pool[20].text_id);
  CHECK(exported[0].labels_positive == 3);
}
