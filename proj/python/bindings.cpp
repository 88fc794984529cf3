#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "litmt/cli.hpp"
#include "litmt/corpus.hpp"
#include "litmt/decoder.hpp"
#include "litmt/metrics.hpp"
#include "litmt/retrieval.hpp"
#include "litmt/stage_data.hpp"

namespace py = pybind11;
using namespace litmt;

namespace {

BleuConfig make_bleu_config(std::size_t max_order, const std::string& smooth, const std::string& tokenize,
                            bool lowercase) {
  BleuConfig c;
  c.max_order = max_order;
  if (smooth == "exp") c.smoothing = Smoothing::exp_floor;
  else if (smooth == "none") c.smoothing = Smoothing::none;
  else throw py::value_error("smooth must be 'exp' or 'none'");
  if (tokenize == "13a") c.tokenization = BleuTokenization::intl13a;
  else if (tokenize == "char") c.tokenization = BleuTokenization::character;
  else throw py::value_error("tokenize must be '13a' or 'char'");
  c.lowercase = lowercase;
  c.check();
  return c;
}

}  // namespace

PYBIND11_MODULE(_litmt, m) {
  m.doc() = "Document-level literary translation toolkit";

  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_ValueError);
  py::register_exception<InterlinearParseError>(m, "InterlinearParseError", PyExc_ValueError);
  py::register_exception<StageDataError>(m, "StageDataError", PyExc_ValueError);

  py::class_<SentencePair>(m, "SentencePair")
      .def_readonly("doc_id", &SentencePair::doc_id)
      .def_readonly("chapter_id", &SentencePair::chapter_id)
      .def_readonly("seg_index", &SentencePair::seg_index)
      .def_readonly("source", &SentencePair::source)
      .def_readonly("target", &SentencePair::target)
      .def("__repr__", [](const SentencePair& p) {
        return "<SentencePair " + p.doc_id + ":" + std::to_string(p.seg_index) + ">";
      });

  py::class_<Document>(m, "Document")
      .def_readonly("doc_id", &Document::doc_id)
      .def("pairs", &Document::pairs)
      .def("__len__", &Document::size);

  py::class_<Corpus>(m, "Corpus")
      .def_readonly("documents", &Corpus::documents)
      .def("is_parallel", &Corpus::is_parallel)
      .def("sentence_count", &Corpus::sentence_count)
      .def("to_jsonl", &format_records);

  m.def("parse_records", &parse_records, py::arg("content"), py::arg("source_name") = "");
  m.def("load_records", &load_records, py::arg("path"));
  m.def("load_line_aligned", &load_line_aligned, py::arg("src_path"), py::arg("tgt_path") = "",
        py::arg("boundary_marker") = "");
  m.def(
      "validate",
      [](const Corpus& c) {
        std::vector<std::string> out;
        for (const auto& v : validate(c).violations) out.push_back(v.to_string());
        return out;
      },
      py::arg("corpus"), "Violation messages; empty when the corpus is well formed.");

  // Retrieval
  py::class_<SimilarityScore>(m, "SimilarityScore")
      .def_readonly("combined", &SimilarityScore::combined)
      .def_readonly("lexical", &SimilarityScore::lexical)
      .def_readonly("keyword", &SimilarityScore::keyword);

  py::class_<ExemplarIndex>(m, "ExemplarIndex")
      .def(py::init([](const std::vector<std::tuple<std::string, std::string, std::string, std::size_t>>& pool,
                       std::size_t max_keywords) {
             std::vector<PoolEntry> entries;
             for (const auto& [src, tgt, doc, seg] : pool) entries.push_back(PoolEntry{src, tgt, doc, seg});
             return ExemplarIndex::build(entries, max_keywords);
           }),
           py::arg("pool"), py::arg("max_keywords") = 5, "pool: list of (source, target, doc_id, seg_index)")
      .def_property_readonly("total_docs", &ExemplarIndex::total_docs)
      .def("idf", &ExemplarIndex::idf)
      .def("keywords", &ExemplarIndex::extract_keywords, py::arg("sentence"), py::arg("m"))
      .def(
          "similarity",
          [](const ExemplarIndex& idx, const std::string& query, std::size_t exemplar_id, double alpha) {
            if (exemplar_id >= idx.exemplars().size()) throw py::index_error("exemplar_id out of range");
            return idx.similarity(query, idx.exemplars()[exemplar_id], RetrievalConfig{alpha});
          },
          py::arg("query"), py::arg("exemplar_id"), py::arg("alpha") = 0.5)
      .def(
          "top_k",
          [](const ExemplarIndex& idx, const std::string& query, std::size_t k, double alpha) {
            std::vector<std::tuple<std::string, std::size_t, double>> out;
            for (const auto& [ex, s] : idx.top_k(query, k, {}, RetrievalConfig{alpha}))
              out.emplace_back(ex->doc_id, ex->seg_index, s.combined);
            return out;
          },
          py::arg("query"), py::arg("k") = 2, py::arg("alpha") = 0.5, "List of (doc_id, seg_index, score).");

  // Stage data
  py::class_<ParagraphUnit>(m, "ParagraphUnit")
      .def_readonly("doc_id", &ParagraphUnit::doc_id)
      .def_readonly("chapter_id", &ParagraphUnit::chapter_id)
      .def_readonly("text", &ParagraphUnit::text)
      .def_readonly("token_count", &ParagraphUnit::token_count)
      .def_readonly("over_budget", &ParagraphUnit::over_budget)
      .def_readonly("first_seg", &ParagraphUnit::first_seg)
      .def_readonly("last_seg", &ParagraphUnit::last_seg);

  m.def(
      "stage1_paragraphs",
      [](const Corpus& c, const std::string& side, std::size_t budget) {
        if (side != "source" && side != "target") throw py::value_error("side must be 'source' or 'target'");
        return build_stage1_paragraphs(c, side == "source" ? Side::source : Side::target, budget);
      },
      py::arg("corpus"), py::arg("side") = "source", py::arg("budget") = kDefaultStage1Budget);

  m.def(
      "format_interlinear",
      [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        InterlinearDocument d;
        for (const auto& [s, t] : pairs) d.pairs.push_back(InterlinearPair{s, t});
        return format_interlinear(d);
      },
      py::arg("pairs"));
  m.def(
      "parse_interlinear",
      [](const std::string& text) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& p : parse_interlinear(text).pairs) out.emplace_back(p.source, p.target);
        return out;
      },
      py::arg("text"));

  // Metrics
  py::class_<BleuReport>(m, "BleuReport")
      .def_readonly("score", &BleuReport::score)
      .def_readonly("precisions", &BleuReport::precisions)
      .def_readonly("brevity_penalty", &BleuReport::brevity_penalty)
      .def_readonly("hyp_length", &BleuReport::hyp_length)
      .def_readonly("ref_length", &BleuReport::ref_length)
      .def_readonly("correct", &BleuReport::correct)
      .def_readonly("total", &BleuReport::total)
      .def_property_readonly("segmentation", [](const BleuReport& r) { return std::string(to_string(r.segmentation)); })
      .def("formatted", &BleuReport::formatted_score)
      .def("__repr__", [](const BleuReport& r) { return "<BleuReport " + r.formatted_score() + ">"; });

  m.def(
      "tokenize",
      [](const std::string& text, const std::string& mode) {
        if (mode != "13a" && mode != "char") throw py::value_error("mode must be '13a' or 'char'");
        return tokenize(text, mode == "13a" ? BleuTokenization::intl13a : BleuTokenization::character);
      },
      py::arg("text"), py::arg("mode") = "13a");
  m.def(
      "corpus_bleu",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs, std::size_t max_order,
         const std::string& smooth, const std::string& tokenize, bool lowercase) {
        return corpus_bleu(hyps, refs, make_bleu_config(max_order, smooth, tokenize, lowercase));
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("max_order") = 4, py::arg("smooth") = "exp",
      py::arg("tokenize") = "13a", py::arg("lowercase") = false);

  py::class_<HypothesisRecord>(m, "HypothesisRecord")
      .def(py::init([](std::string doc_id, std::size_t seg, std::string hyp) {
             return HypothesisRecord{std::move(doc_id), seg, {}, std::move(hyp), false};
           }),
           py::arg("doc_id"), py::arg("seg_index"), py::arg("hypothesis"))
      .def_readonly("doc_id", &HypothesisRecord::doc_id)
      .def_readonly("seg_index", &HypothesisRecord::seg_index)
      .def_readonly("source", &HypothesisRecord::source)
      .def_readonly("hypothesis", &HypothesisRecord::hypothesis)
      .def_readonly("failed", &HypothesisRecord::failed);

  m.def("s_bleu", [](const std::vector<HypothesisRecord>& sys, const Corpus& refs) { return s_bleu(sys, refs); },
        py::arg("system"), py::arg("references"));
  m.def("d_bleu", [](const std::vector<HypothesisRecord>& sys, const Corpus& refs) { return d_bleu(sys, refs); },
        py::arg("system"), py::arg("references"));

  // Decoding
  m.def(
      "translate_identity",
      [](const Corpus& corpus, std::size_t history, std::size_t exemplars, std::size_t parallelism) {
        DecodingConfig cfg;
        cfg.history = history;
        cfg.exemplars = exemplars;
        IdentityBackend backend;
        py::gil_scoped_release release;
        return to_hypothesis_records(run_corpus(corpus, backend, nullptr, cfg, parallelism).documents);
      },
      py::arg("corpus"), py::arg("history") = 3, py::arg("exemplars") = 2, py::arg("parallelism") = 1,
      "Runs incremental decoding with a backend that echoes each source.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return run_cli(args);
      },
      py::arg("args"), "Runs the command-line driver in-process and returns its exit code.");
}
