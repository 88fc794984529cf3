#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "litmt/cli.hpp"
#include "litmt/io.hpp"
#include "test_support.hpp"

using namespace litmt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args, BackendFactory factory = {}) {
  std::ostringstream out, err;
  CliEnvironment env;
  env.out = &out;
  env.err = &err;
  env.backend_factory = std::move(factory);
  env.sleeper = [](std::chrono::milliseconds) {};
  const int code = run_cli(args, env);
  return {code, out.str(), err.str()};
}

std::string toy_config() { return (testing::source_dir() / "data" / "toy" / "config.json").string(); }

std::size_t line_count(const fs::path& p) {
  const std::string s = io::read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == kExitConfig);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"prepare", "--stage", "4"}).code == kExitConfig);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"validate", "--set", "decoding.nope=1"}).code == kExitConfig);
}

TEST_CASE("validate the toy corpus") {
  const auto r = cli({"--config", toy_config(), "validate"});
  CHECK(r.code == kExitOk);
  CHECK(r.out == "ok: 3 documents, 17 sentences, parallel\n");
}

TEST_CASE("prepare every stage on the toy corpus") {
  const auto dir = testing::scratch_dir("cli-prepare");
  for (const std::string stage : {"1", "2", "3", "baseline"})
    REQUIRE(cli({"--config", toy_config(), "--out", dir.string(), "prepare", "--stage", stage}).code == kExitOk);
  CHECK(line_count(dir / "stage1.jsonl") == 9);
  CHECK(line_count(dir / "stage3.jsonl") == 17);
  CHECK(line_count(dir / "baseline.jsonl") == 17);
  CHECK(io::read_file(dir / "stage2.txt").find("<src>") != std::string::npos);
}

TEST_CASE("stage 2 on an empty corpus writes an empty file") {
  const auto dir = testing::scratch_dir("cli-empty");
  io::write_file(dir / "empty.jsonl", "");
  const auto r = cli({"--out", dir.string(), "--set", "corpus.records=" + (dir / "empty.jsonl").string(), "prepare",
                      "--stage", "2"});
  CHECK(r.code == kExitOk);
  CHECK(io::read_file(dir / "stage2.txt").empty());
}

TEST_CASE("stage 3 needs targets") {
  const auto dir = testing::scratch_dir("cli-mono");
  io::write_file(dir / "mono.jsonl", R"({"doc_id":"a","seg_index":0,"source":"山"})" "\n");
  const auto r = cli({"--out", dir.string(), "--set", "corpus.records=" + (dir / "mono.jsonl").string(), "prepare",
                      "--stage", "3"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("parallel corpus required") != std::string::npos);
}

TEST_CASE("invalid corpus is reported") {
  const auto dir = testing::scratch_dir("cli-invalid");
  io::write_file(dir / "bad.jsonl", R"({"doc_id":"a","seg_index":1,"source":"山"})" "\n");
  const auto r = cli({"--set", "corpus.records=" + (dir / "bad.jsonl").string(), "validate"});
  CHECK(r.code == kExitConfig);
}

TEST_CASE("identity translation copies sources") {
  const auto dir = testing::scratch_dir("cli-identity");
  const auto r = cli({"--config", toy_config(), "--out", dir.string(), "--set", "backend.kind=identity", "translate"});
  REQUIRE(r.code == kExitOk);
  const auto hyps = load_hypotheses(dir / "hypotheses.jsonl");
  REQUIRE(hyps.size() == 17);
  for (const auto& h : hyps) CHECK(h.hypothesis == h.source);
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  CHECK(manifest["sentences"] == 17);
  CHECK(manifest["backend"] == "identity");
  CHECK(manifest["config"]["backend"]["kind"] == "identity");
}

TEST_CASE("scripted translation matches the golden hypotheses") {
  const auto dir = testing::scratch_dir("cli-scripted");
  const auto r = cli({"--config", toy_config(), "--out", dir.string(), "translate"});
  REQUIRE(r.code == kExitOk);
  CHECK(io::read_file(dir / "hypotheses.jsonl") ==
        io::read_file(testing::source_dir() / "tests" / "golden" / "toy_hypotheses.jsonl"));
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  CHECK(manifest["failed_sentences"] == 1);
}

TEST_CASE("abort fallback gives a partial exit") {
  const auto dir = testing::scratch_dir("cli-abort");
  const auto r = cli({"--config", toy_config(), "--out", dir.string(), "--set", "decoding.fallback=abort", "translate"});
  CHECK(r.code == kExitPartial);
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  REQUIRE(manifest["aborted"].size() == 1);
  CHECK(manifest["aborted"][0]["doc_id"] == "novel-002");
}

TEST_CASE("http backend without its API key fails before any request") {
  const auto dir = testing::scratch_dir("cli-http");
  ::unsetenv("LITMT_TEST_MISSING_KEY");
  const auto r = cli({"--config", toy_config(), "--out", dir.string(), "--set", "backend.kind=http", "--set",
                      "backend.base_url=http://127.0.0.1:1", "--set", "backend.model=m", "--set",
                      "backend.api_key_env=LITMT_TEST_MISSING_KEY", "translate"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("LITMT_TEST_MISSING_KEY") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "hypotheses.jsonl"));
}

TEST_CASE("dry run never calls the backend") {
  const auto dir = testing::scratch_dir("cli-dry");
  auto counter = std::make_shared<std::size_t>(0);
  BackendFactory factory = [counter](const RunConfig&) -> std::unique_ptr<TranslationBackend> {
    ++*counter;
    return std::make_unique<testing::CountingBackend>();
  };
  const auto r = cli({"--config", toy_config(), "--out", dir.string(), "translate", "--dry-run"}, factory);
  REQUIRE(r.code == kExitOk);
  CHECK(*counter == 0);
  CHECK(line_count(dir / "prompts.jsonl") == 17);
  CHECK_FALSE(fs::exists(dir / "hypotheses.jsonl"));
  const auto first = nlohmann::json::parse(io::read_file(dir / "prompts.jsonl").substr(0, io::read_file(dir / "prompts.jsonl").find('\n')));
  CHECK(first["doc_id"] == "novel-001");
  CHECK(first["prompt_hash"].get<std::string>().size() == 16);
}

TEST_CASE("evaluate") {
  const auto dir = testing::scratch_dir("cli-evaluate");
  const auto golden = (testing::source_dir() / "tests" / "golden" / "toy_hypotheses.jsonl").string();

  SUBCASE("toy scores equal the reference scorer") {
    const auto r = cli({"--config", toy_config(), "--out", dir.string(), "evaluate", "--hyp", golden});
    REQUIRE(r.code == kExitOk);
    const auto fx = nlohmann::json::parse(io::read_file(testing::source_dir() / "tests" / "fixtures" / "toy_scores.json"));
    const auto s = nlohmann::json::parse(io::read_file(dir / "sbleu.json"));
    const auto d = nlohmann::json::parse(io::read_file(dir / "dbleu.json"));
    CHECK(s["score_exact"].get<double>() == doctest::Approx(fx["s_bleu"]["score"].get<double>()).epsilon(1e-9));
    CHECK(d["score_exact"].get<double>() == doctest::Approx(fx["d_bleu"]["score"].get<double>()).epsilon(1e-9));
    CHECK(s["correct"] == fx["s_bleu"]["correct"]);
    CHECK(d["total"] == fx["d_bleu"]["total"]);
    CHECK(r.out.find("s-BLEU  53.71") != std::string::npos);
    CHECK(r.out.find("d-BLEU  53.98") != std::string::npos);
  }

  SUBCASE("references scored against themselves") {
    std::string self;
    for (const auto& doc : load_records(testing::source_dir() / "data" / "toy" / "corpus.jsonl").documents)
      for (const auto& p : doc.pairs()) {
        nlohmann::ordered_json j{{"doc_id", doc.doc_id}, {"seg_index", p.seg_index}, {"hypothesis", *p.target}};
        self += j.dump() + "\n";
      }
    io::write_file(dir / "self.jsonl", self);
    const auto r = cli({"--config", toy_config(), "--out", dir.string(), "evaluate", "--hyp", (dir / "self.jsonl").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("s-BLEU  100.00") != std::string::npos);
    CHECK(r.out.find("d-BLEU  100.00") != std::string::npos);
  }

  SUBCASE("mismatched documents exit with the alignment code") {
    std::string body = io::read_file(golden);
    const auto pos = body.find("novel-003");
    body.replace(pos, 9, "novel-999");
    io::write_file(dir / "bad.jsonl", body);
    const auto r = cli({"--config", toy_config(), "--out", dir.string(), "evaluate", "--hyp", (dir / "bad.jsonl").string()});
    CHECK(r.code == kExitAlignment);
    CHECK(r.err.find("novel-999") != std::string::npos);
    CHECK(r.err.find("missing hypothesis (novel-003, 0)") != std::string::npos);
  }
}

TEST_CASE("repeated runs produce identical files") {
  const auto a = testing::scratch_dir("cli-repeat-a");
  const auto b = testing::scratch_dir("cli-repeat-b");
  for (const auto& dir : {a, b}) {
    for (const std::string stage : {"1", "2", "3", "baseline"})
      REQUIRE(cli({"--config", toy_config(), "--out", dir.string(), "prepare", "--stage", stage}).code == kExitOk);
    REQUIRE(cli({"--config", toy_config(), "--out", dir.string(), "translate"}).code == kExitOk);
    REQUIRE(cli({"--config", toy_config(), "--out", dir.string(), "evaluate"}).code == kExitOk);
  }
  for (const auto* name : {"stage1.jsonl", "stage2.txt", "stage3.jsonl", "baseline.jsonl", "hypotheses.jsonl",
                           "sbleu.json", "dbleu.json"})
    CHECK_MESSAGE(io::read_file(a / name) == io::read_file(b / name), name);
}
