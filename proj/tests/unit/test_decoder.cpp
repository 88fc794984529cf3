#include <doctest.h>

#include <random>

#include "litmt/decoder.hpp"
#include "test_support.hpp"

using namespace litmt;

namespace {

Document make_doc(const std::string& id, const std::vector<std::string>& sources) {
  Document d;
  d.doc_id = id;
  d.chapters.push_back(Chapter{"c", {}});
  for (std::size_t i = 0; i < sources.size(); ++i)
    d.chapters[0].pairs.push_back(SentencePair{id, "c", i, sources[i], "ref " + sources[i]});
  return d;
}

DecodingState state_with(std::size_t cursor) {
  DecodingState s;
  s.doc_id = "d";
  for (std::size_t i = 0; i < cursor; ++i) s.append("s" + std::to_string(i), "h" + std::to_string(i));
  return s;
}

const Sleeper no_sleep = [](std::chrono::milliseconds) {};

}  // namespace

TEST_CASE("build_prompt window") {
  DecodingConfig cfg;
  SUBCASE("cursor 0 gives empty context") {
    cfg.history = 5;
    CHECK(build_prompt(state_with(0), "x", {}, cfg).context_block.empty());
  }
  SUBCASE("cursor 5, n 2 gives seg 3 and 4 in order") {
    cfg.history = 2;
    const auto spec = build_prompt(state_with(5), "x", {}, cfg);
    REQUIRE(spec.context_block.size() == 2);
    CHECK(spec.context_block[0].seg_index == 3);
    CHECK(spec.context_block[1].seg_index == 4);
    CHECK(spec.context_block[1].translation == "h4");
  }
  SUBCASE("n 3, cursor 2 gives two entries") {
    cfg.history = 3;
    CHECK(build_prompt(state_with(2), "x", {}, cfg).context_block.size() == 2);
  }
  SUBCASE("future exemplars are dropped and k truncates") {
    cfg.exemplars = 1;
    const auto spec =
        build_prompt(state_with(2), "x", {{"d", 2, "a", "A", 1.0}, {"d", 1, "b", "B", 0.9}, {"e", 7, "c", "C", 0.8}},
                     cfg);
    REQUIRE(spec.exemplar_block.size() == 1);
    CHECK(spec.exemplar_block[0].seg_index == 1);
  }
  SUBCASE("n = 0 and k = 0 reduce to the plain prompt") {
    cfg.history = 0;
    cfg.exemplars = 0;
    CHECK(build_prompt(state_with(4), "x", {{"d", 0, "a", "A", 1.0}}, cfg).rendered ==
          render_plain_prompt(cfg.templates, "x"));
  }
}

TEST_CASE("config ranges") {
  DecodingConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg.alpha = 0.5;
  cfg.templates.prompt = "nothing";
  CHECK_THROWS(cfg.check());
}

TEST_CASE("post-processing") {
  CHECK(postprocess_hypothesis("  hello \n", "x") == "hello");
  CHECK(postprocess_hypothesis("\"Quoted.\"", "x") == "Quoted.");
  CHECK(postprocess_hypothesis("“Quoted.”", "x") == "Quoted.");
  CHECK(postprocess_hypothesis("\"Kept.\"", "\"src\"") == "\"Kept.\"");
  CHECK(postprocess_hypothesis("line one\nline two\r\n\nthree", "x") == "line one line two three");
  CHECK(postprocess_hypothesis("   ", "x").empty());
}

TEST_CASE("identity backend returns sources in order") {
  IdentityBackend backend;
  const auto doc = make_doc("d", {"one", "two", "three"});
  const auto t = translate_document(doc, backend, nullptr, {}, no_sleep);
  CHECK(t.hypotheses() == std::vector<std::string>{"one", "two", "three"});
  CHECK_FALSE(t.aborted);
}

TEST_CASE("scripted outputs in segment order; history ends with three entries") {
  std::map<std::string, ScriptedBackend::Script> scripts{{"one", {ScriptedBackend::Step::output("A")}},
                                                         {"two", {ScriptedBackend::Step::output("B")}},
                                                         {"three", {ScriptedBackend::Step::output("C")}}};
  ScriptedBackend backend(scripts);
  std::vector<PromptSpec> seen;
  const auto t = translate_document(make_doc("d", {"one", "two", "three"}), backend, nullptr, {}, no_sleep,
                                    [&](const PromptSpec& p) { seen.push_back(p); });
  CHECK(t.hypotheses() == std::vector<std::string>{"A", "B", "C"});
  REQUIRE(seen.size() == 3);
  CHECK(seen[2].context_block.size() == 2);
  CHECK(seen[2].context_block[1].translation == "B");
}

TEST_CASE("retry then success with backoff") {
  std::map<std::string, ScriptedBackend::Script> scripts{
      {"one", {ScriptedBackend::Step::fail(BackendErrorKind::network), ScriptedBackend::Step::output("A")}}};
  ScriptedBackend backend(scripts);
  DecodingConfig cfg;
  cfg.retry = 2;
  std::vector<std::chrono::milliseconds> sleeps;
  const auto t = translate_document(make_doc("d", {"one"}), backend, nullptr, cfg,
                                    [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  REQUIRE(t.sentences.size() == 1);
  CHECK(t.sentences[0].hypothesis == "A");
  CHECK(t.sentences[0].attempts == 2);
  CHECK(t.sentences[0].errors.size() == 1);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000)});
}

TEST_CASE("exhausted retries copy the source; delays grow geometrically") {
  std::map<std::string, ScriptedBackend::Script> scripts{
      {"one", {ScriptedBackend::Step::fail(BackendErrorKind::rate_limit)}}};
  ScriptedBackend backend(scripts);
  DecodingConfig cfg;
  cfg.retry = 3;
  std::vector<long long> sleeps;
  const auto t = translate_document(make_doc("d", {"one", "two"}), backend, nullptr, cfg,
                                    [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
  CHECK(t.sentences[0].failed);
  CHECK(t.sentences[0].hypothesis == "one");
  CHECK(t.sentences[0].attempts == 4);
  CHECK(sleeps == std::vector<long long>{1000, 2000, 4000});
  CHECK(t.sentences[1].hypothesis == "two");
  CHECK_FALSE(t.aborted);
}

TEST_CASE("non-retryable errors fail immediately; abort policy stops the document") {
  std::map<std::string, ScriptedBackend::Script> scripts{
      {"two", {ScriptedBackend::Step::fail(BackendErrorKind::overlong_prompt)}}};
  ScriptedBackend backend(scripts);
  DecodingConfig cfg;
  cfg.fallback = FallbackPolicy::abort;
  const auto t = translate_document(make_doc("d", {"one", "two", "three"}), backend, nullptr, cfg, no_sleep);
  CHECK(t.aborted);
  REQUIRE(t.sentences.size() == 2);
  CHECK(t.sentences[1].attempts == 1);
  CHECK(t.abort_reason.find("overlong_prompt") != std::string::npos);
}

TEST_CASE("prefix exemplars are earlier hypotheses, never references") {
  std::mt19937 rng(9);
  const Corpus c = testing::marked_corpus(rng, 3, 5, 25);
  testing::CapturingBackend backend;
  DecodingConfig cfg;
  cfg.exemplars = 3;
  run_corpus(c, backend, nullptr, cfg, 2, no_sleep);
  std::size_t exemplars_seen = 0;
  for (const auto& p : backend.prompts()) {
    for (const auto& e : p.exemplar_block) {
      ++exemplars_seen;
      CHECK(e.doc_id == p.doc_id);
      CHECK(e.seg_index < p.seg_index);
      CHECK(e.target == "H" + testing::CapturingBackend::marker_of(e.source) + " out");
    }
  }
  CHECK(exemplars_seen > 0);
}

TEST_CASE("external index exemplars respect the no-future rule") {
  std::mt19937 rng(10);
  const Corpus c = testing::marked_corpus(rng, 3, 5, 20);
  std::vector<PoolEntry> pool;
  for (const auto& d : c.documents)
    for (const auto& p : d.pairs()) pool.push_back({p.source, *p.target, d.doc_id, p.seg_index});
  const auto index = ExemplarIndex::build(pool);
  testing::CapturingBackend backend;
  DecodingConfig cfg;
  cfg.exemplar_source = ExemplarSource::external;
  run_corpus(c, backend, &index, cfg, 3, no_sleep);
  for (const auto& p : backend.prompts())
    for (const auto& e : p.exemplar_block) CHECK((e.doc_id != p.doc_id || e.seg_index < p.seg_index));
}

TEST_CASE("run_corpus") {
  const Sleeper quiet = no_sleep;
  SUBCASE("parallelism does not change outputs") {
    std::mt19937 rng(12);
    const Corpus c = testing::marked_corpus(rng, 6, 1, 10);
    testing::CapturingBackend b1, b2;
    const auto r1 = run_corpus(c, b1, nullptr, {}, 1, quiet);
    const auto r2 = run_corpus(c, b2, nullptr, {}, 4, quiet);
    CHECK(r1.documents == r2.documents);
  }
  SUBCASE("empty corpus") {
    IdentityBackend b;
    const auto r = run_corpus(Corpus{}, b, nullptr, {}, 2, quiet);
    CHECK(r.documents.empty());
    CHECK(r.manifest.documents == 0);
    CHECK_FALSE(r.manifest.started.empty());
  }
  SUBCASE("one aborting document out of three") {
    Corpus c;
    c.documents = {make_doc("a", {"x"}), make_doc("b", {"bad", "y"}), make_doc("c", {"z"})};
    std::map<std::string, ScriptedBackend::Script> scripts{
        {"bad", {ScriptedBackend::Step::fail(BackendErrorKind::protocol)}}};
    ScriptedBackend b(scripts);
    DecodingConfig cfg;
    cfg.fallback = FallbackPolicy::abort;
    const auto r = run_corpus(c, b, nullptr, cfg, 2, quiet);
    CHECK(r.manifest.completed_documents == 2);
    REQUIRE(r.manifest.aborted.size() == 1);
    CHECK(r.manifest.aborted[0].first == "b");
    const auto records = to_hypothesis_records(r.documents);
    CHECK(records.size() == 2);
  }
  SUBCASE("zero parallelism is rejected") {
    IdentityBackend b;
    CHECK_THROWS_AS(run_corpus(Corpus{}, b, nullptr, {}, 0, quiet), std::invalid_argument);
  }
}
