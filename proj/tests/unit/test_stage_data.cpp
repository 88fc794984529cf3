#include <doctest.h>

#include <random>

#include "litmt/stage_data.hpp"
#include "test_support.hpp"

using namespace litmt;

namespace {

Corpus make_corpus(const std::vector<std::vector<std::vector<std::string>>>& docs, bool with_targets = true) {
  Corpus c;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Document doc;
    doc.doc_id = "doc" + std::to_string(d);
    std::size_t seg = 0;
    for (std::size_t ch = 0; ch < docs[d].size(); ++ch) {
      Chapter chapter;
      chapter.chapter_id = "ch" + std::to_string(ch);
      for (const auto& s : docs[d][ch]) {
        std::optional<std::string> tgt;
        if (with_targets) tgt = "T " + s;
        chapter.pairs.push_back(SentencePair{doc.doc_id, chapter.chapter_id, seg++, s, tgt});
      }
      doc.chapters.push_back(std::move(chapter));
    }
    c.documents.push_back(std::move(doc));
  }
  return c;
}

}  // namespace

TEST_CASE("stage 1: single sentence within budget") {
  const auto units = build_stage1_paragraphs(make_corpus({{{"one two three"}}}), Side::source, 10);
  REQUIRE(units.size() == 1);
  CHECK(units[0].text == "one two three");
  CHECK(units[0].token_count == 3);
  CHECK_FALSE(units[0].over_budget);
}

TEST_CASE("stage 1: counts [4,4,4] with budget 8 pack as [0,1] and [2]") {
  const auto units = build_stage1_paragraphs(make_corpus({{{"a b c d", "e f g h", "i j k l"}}}), Side::source, 8);
  REQUIRE(units.size() == 2);
  CHECK(units[0].first_seg == 0);
  CHECK(units[0].last_seg == 1);
  CHECK(units[0].text == "a b c d e f g h");
  CHECK(units[0].token_count == 8);
  CHECK(units[1].first_seg == 2);
  CHECK(units[1].last_seg == 2);
}

TEST_CASE("stage 1: never merges across chapters") {
  const auto units =
      build_stage1_paragraphs(make_corpus({{{"a b"}, {"c d"}}}), Side::source, 1000000);
  REQUIRE(units.size() == 2);
  CHECK(units[0].chapter_id == "ch0");
  CHECK(units[1].chapter_id == "ch1");
}

TEST_CASE("stage 1: oversized sentence becomes a flagged unit of its own") {
  const auto units = build_stage1_paragraphs(make_corpus({{{"a", "b c d e f", "g"}}}), Side::source, 3);
  REQUIRE(units.size() == 3);
  CHECK_FALSE(units[0].over_budget);
  CHECK(units[1].over_budget);
  CHECK(units[1].token_count == 5);
  CHECK_FALSE(units[2].over_budget);
}

TEST_CASE("stage 1: CJK joins without spaces, spaced scripts with one space") {
  const Corpus c = make_corpus({{{"山风。", "夜雨。"}}});
  CHECK(build_stage1_paragraphs(c, Side::source, 100)[0].text == "山风。夜雨。");
  CHECK(build_stage1_paragraphs(c, Side::target, 100)[0].text == "T 山风。T 夜雨。");
  const Corpus latin = make_corpus({{{"wind rose.", "rain fell."}}});
  CHECK(build_stage1_paragraphs(latin, Side::source, 100)[0].text == "wind rose. rain fell.");
  CHECK(build_stage1_paragraphs(latin, Side::target, 100)[0].text == "T wind rose. T rain fell.");
  CHECK(build_stage1_paragraphs(c, Side::source, 100, {}, std::string("|"))[0].text == "山风。|夜雨。");
}

TEST_CASE("stage 1: empty corpus and custom tokenizer") {
  CHECK(build_stage1_paragraphs(Corpus{}, Side::source, 5).empty());
  const TokenCounter bytes = [](std::string_view s) { return s.size(); };
  const auto units = build_stage1_paragraphs(make_corpus({{{"aaa", "bbb", "ccc"}}}), Side::source, 7, bytes);
  REQUIRE(units.size() == 2);
  CHECK(units[0].text == "aaa bbb");
}

TEST_CASE("stage 1: target side on monolingual corpus is an error") {
  CHECK_THROWS_AS(build_stage1_paragraphs(make_corpus({{{"a"}}}, false), Side::target, 5), StageDataError);
}

TEST_CASE("stage 1 property: units partition each chapter and respect the budget") {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    const Corpus c = testing::marked_corpus(rng, 3, 1, 12);
    const std::size_t budget = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    const auto units = build_stage1_paragraphs(c, Side::source, budget);
    std::size_t u = 0;
    for (const auto& doc : c.documents) {
      for (const auto& ch : doc.chapters) {
        std::size_t expect = ch.pairs.front().seg_index;
        while (u < units.size() && units[u].doc_id == doc.doc_id && units[u].chapter_id == ch.chapter_id) {
          CHECK(units[u].first_seg == expect);
          CHECK(units[u].last_seg >= units[u].first_seg);
          if (!units[u].over_budget) CHECK(units[u].token_count <= budget);
          if (units[u].over_budget) CHECK(units[u].first_seg == units[u].last_seg);
          expect = units[u].last_seg + 1;
          ++u;
        }
        CHECK(expect == ch.pairs.back().seg_index + 1);
      }
    }
    CHECK(u == units.size());
  }
}

TEST_CASE("interlinear format examples") {
  CHECK(format_interlinear({"d", {{"s", "t"}}}) == "<src> s\n<tgt> t\n");
  CHECK(format_interlinear({"d", {}}).empty());
  CHECK(format_interlinear({"d", {{"s1", "t1"}, {"s2", "t2"}}}) == "<src> s1\n<tgt> t1\n<src> s2\n<tgt> t2\n");
  CHECK_THROWS_AS(format_interlinear({"d", {{"", "t"}}}), std::invalid_argument);
  CHECK_THROWS_AS(format_interlinear({"d", {{"a\nb", "t"}}}), std::invalid_argument);
}

TEST_CASE("interlinear parse errors") {
  auto line_of = [](const std::string& text) {
    try {
      parse_interlinear(text);
    } catch (const InterlinearParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("<src> a\n<src> b\n") == 2);
  CHECK_THROWS_WITH_AS(parse_interlinear("<src> a\n<src> b\n"), doctest::Contains("tag mismatch"),
                       InterlinearParseError);
  CHECK_THROWS_WITH_AS(parse_interlinear("<tgt> t\n"), doctest::Contains("target before source"),
                       InterlinearParseError);
  CHECK_THROWS_WITH_AS(parse_interlinear("<src> a\n<tgt> b\n<src> c\n"), doctest::Contains("trailing unpaired"),
                       InterlinearParseError);
  CHECK_THROWS_WITH_AS(parse_interlinear("<foo> a\n"), doctest::Contains("unknown tag"), InterlinearParseError);
  CHECK_THROWS_AS(parse_interlinear("<src>a\n<tgt> b\n"), InterlinearParseError);
}

TEST_CASE("interlinear file with several documents") {
  const std::vector<InterlinearDocument> docs = {{"", {{"a", "A"}}}, {"", {{"b", "B"}, {"c", "C"}}}};
  const std::string text = format_interlinear_file(docs);
  CHECK(text == "<src> a\n<tgt> A\n\n<src> b\n<tgt> B\n<src> c\n<tgt> C\n");
  CHECK(parse_interlinear_file(text) == docs);
  CHECK(parse_interlinear_file("").empty());
}

TEST_CASE("stage 2 packing") {
  SUBCASE("one pair") {
    const auto docs = build_stage2_documents(make_corpus({{{"a"}}}), 10);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].document.pairs.size() == 1);
  }
  SUBCASE("combined counts [5,5,5] with budget 10 pack as [0,1] and [2]") {
    // Source "a b" (2) + target "T a b" (3) = 5 tokens per pair.
    const auto docs = build_stage2_documents(make_corpus({{{"a b", "c d", "e f"}}}), 10);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].document.pairs.size() == 2);
    CHECK(docs[0].token_count == 10);
    CHECK(docs[1].document.pairs.size() == 1);
    CHECK(docs[1].first_seg == 2);
  }
  SUBCASE("documents never merge") {
    CHECK(build_stage2_documents(make_corpus({{{"a"}}, {{"b"}}}), 1000).size() == 2);
  }
  SUBCASE("missing target") {
    CHECK_THROWS_WITH_AS(build_stage2_documents(make_corpus({{{"a"}}}, false), 10),
                         doctest::Contains("parallel corpus required"), StageDataError);
  }
  SUBCASE("generated documents round trip") {
    std::mt19937 rng(3);
    const Corpus c = testing::marked_corpus(rng, 5, 1, 20);
    for (const auto& d : build_stage2_documents(c, 25))
      CHECK(parse_interlinear(format_interlinear(d.document), d.document.doc_id) == d.document);
  }
}

TEST_CASE("sentence-level instructions") {
  const InstructionTemplate tmpl{"Translate: {source}"};
  const auto one = build_sentence_instructions(make_corpus({{{"s"}}}), tmpl);
  REQUIRE(one.size() == 1);
  CHECK(one[0].instruction == "Translate: s");
  CHECK(one[0].input == "s");
  CHECK(one[0].output == "T s");
  CHECK(build_sentence_instructions(Corpus{}, tmpl).empty());
  const auto three = build_sentence_instructions(make_corpus({{{"x", "y", "z"}}}), tmpl);
  REQUIRE(three.size() == 3);
  CHECK(three[2].output == "T z");
  CHECK_THROWS_AS(build_sentence_instructions(make_corpus({{{"s"}}}), InstructionTemplate{"no placeholder"}),
                  TemplateError);
  CHECK(format_instructions(one) == "{\"instruction\":\"Translate: s\",\"input\":\"s\",\"output\":\"T s\"}\n");
}

TEST_CASE("stage 3 instructions") {
  DecodingConfig cfg;
  cfg.templates.system = "SYS";
  cfg.templates.prompt = "{context}{exemplars}SRC {source}";
  cfg.templates.context_header = "CTX\n";
  cfg.templates.exemplar_header = "EX\n";

  SUBCASE("first sentence with k=0 has empty blocks") {
    cfg.exemplars = 0;
    const auto r = build_stage3_instructions(make_corpus({{{"alpha beta", "gamma"}}}), cfg, nullptr);
    REQUIRE(r.size() == 2);
    CHECK(r[0].instruction == "SYS\n\nSRC alpha beta");
    CHECK(r[0].input.empty());
    CHECK(r[0].output == "T alpha beta");
  }
  SUBCASE("second sentence with n=1, k=0 shows exactly pair 0 with its reference") {
    cfg.history = 1;
    cfg.exemplars = 0;
    const auto r = build_stage3_instructions(make_corpus({{{"alpha", "beta", "gamma"}}}), cfg, nullptr);
    CHECK(r[1].instruction == "SYS\n\nCTX\nalpha\nT alpha\n\nSRC beta");
    CHECK(r[2].instruction.find("alpha") == std::string::npos);
  }
  SUBCASE("exemplars for sentence 2 come only from sentences 0 and 1") {
    cfg.history = 2;
    cfg.exemplars = 1;
    cfg.exemplar_source = ExemplarSource::external;
    const Corpus c = make_corpus({{{"moon river", "moon night", "moon river night"}}});
    std::vector<PoolEntry> pool;
    for (const auto& p : c.documents[0].pairs()) pool.push_back({p.source, *p.target, p.doc_id, p.seg_index});
    const auto index = ExemplarIndex::build(pool);
    const auto r = build_stage3_instructions(c, cfg, &index);
    REQUIRE(r.size() == 3);
    // Candidates for seg 2 are {0, 1}; both overlap, neither is seg 2 itself.
    const auto& ins = r[2].instruction;
    const auto ex_pos = ins.find("EX\n");
    REQUIRE(ex_pos != std::string::npos);
    const std::string block = ins.substr(ex_pos, ins.find("SRC") - ex_pos);
    CHECK(block.find("moon river night") == std::string::npos);
    CHECK((block.find("moon river\n") != std::string::npos || block.find("moon night\n") != std::string::npos));
    // Seg 0 has no admissible exemplar.
    CHECK(r[0].instruction.find("EX\n") == std::string::npos);
  }
  SUBCASE("non-parallel corpus") {
    CHECK_THROWS_AS(build_stage3_instructions(make_corpus({{{"a"}}}, false), cfg, nullptr), StageDataError);
  }
}

TEST_CASE("stage 3 property: no context or exemplar from the current or a later sentence") {
  std::mt19937 rng(5);
  DecodingConfig cfg;
  cfg.history = 2;
  cfg.exemplars = 2;
  for (auto mode : {ExemplarSource::prefix, ExemplarSource::external}) {
    cfg.exemplar_source = mode;
    const Corpus c = testing::marked_corpus(rng, 4, 1, 15);
    std::vector<PoolEntry> pool;
    for (const auto& d : c.documents)
      for (const auto& p : d.pairs()) pool.push_back({p.source, *p.target, p.doc_id, p.seg_index});
    const auto index = ExemplarIndex::build(pool);
    const auto records = build_stage3_instructions(c, cfg, &index);
    std::size_t r = 0;
    for (const auto& d : c.documents) {
      const auto pairs = d.pairs();
      for (std::size_t i = 0; i < pairs.size(); ++i, ++r) {
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
          const std::string mark = "#" + d.doc_id.substr(1) + "." + std::to_string(j) + "#";
          CHECK(records[r].instruction.find(mark) == std::string::npos);
        }
        // The current source appears exactly once: as the sentence to translate.
        const auto& ins = records[r].instruction;
        const auto first = ins.find(pairs[i].source);
        REQUIRE(first != std::string::npos);
        CHECK(ins.find(pairs[i].source, first + 1) == std::string::npos);
      }
    }
  }
}
