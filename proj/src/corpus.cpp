#include "litmt/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "litmt/io.hpp"
#include "litmt/text.hpp"

namespace litmt {

using nlohmann::json;

std::size_t Document::size() const {
  std::size_t n = 0;
  for (const auto& ch : chapters) n += ch.pairs.size();
  return n;
}

std::vector<SentencePair> Document::pairs() const {
  std::vector<SentencePair> out;
  out.reserve(size());
  for (const auto& ch : chapters) out.insert(out.end(), ch.pairs.begin(), ch.pairs.end());
  return out;
}

bool Corpus::is_parallel() const {
  for (const auto& doc : documents)
    for (const auto& ch : doc.chapters)
      for (const auto& p : ch.pairs)
        if (!p.target) return false;
  return true;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& doc : documents) n += doc.size();
  return n;
}

const Document* Corpus::find(const std::string& doc_id) const {
  for (const auto& doc : documents)
    if (doc.doc_id == doc_id) return &doc;
  return nullptr;
}

CorpusError::CorpusError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string Violation::to_string() const {
  std::ostringstream os;
  os << "doc=" << doc_id;
  if (!chapter_id.empty()) os << " chapter=" << chapter_id;
  if (seg_index) os << " seg=" << *seg_index;
  os << ": " << message;
  return os.str();
}

namespace {

struct Record {
  SentencePair pair;
  bool has_seg = false;
  std::size_t line = 0;
};

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CorpusError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw CorpusError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

Record parse_record(std::string_view line_text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(line_text);
  } catch (const json::parse_error& e) {
    throw CorpusError(std::string("malformed record: ") + e.what(), line);
  }
  if (!obj.is_object()) throw CorpusError("malformed record: expected an object", line);

  Record rec;
  rec.line = line;
  rec.pair.doc_id = required_string(obj, "doc_id", line);
  rec.pair.source = std::string(text::strip_line_terminators(required_string(obj, "source", line)));

  if (auto it = obj.find("chapter_id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw CorpusError("field 'chapter_id' must be a string", line);
    rec.pair.chapter_id = it->get<std::string>();
  }
  if (auto it = obj.find("seg_index"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long long>() < 0)
      throw CorpusError("field 'seg_index' must be a non-negative integer", line);
    rec.pair.seg_index = it->get<std::size_t>();
    rec.has_seg = true;
  }
  if (auto it = obj.find("target"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw CorpusError("field 'target' must be a string", line);
    rec.pair.target = std::string(text::strip_line_terminators(it->get<std::string>()));
  }
  if (text::is_blank(rec.pair.source)) throw CorpusError("empty source", line);
  return rec;
}

Document assemble_document(const std::string& doc_id, std::vector<Record>& records) {
  const bool has_seg = records.front().has_seg;
  const bool has_target = records.front().pair.target.has_value();
  std::size_t next = 0;
  for (auto& rec : records) {
    if (rec.has_seg != has_seg)
      throw CorpusError("document '" + doc_id + "' mixes records with and without seg_index", rec.line);
    if (rec.pair.target.has_value() != has_target)
      throw CorpusError("document '" + doc_id + "' mixes records with and without target", rec.line);
    if (!has_seg) rec.pair.seg_index = next++;
  }
  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    return a.pair.seg_index < b.pair.seg_index;
  });
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (i > 0 && records[i - 1].pair.seg_index == rec.pair.seg_index) {
      const auto& first = records[i - 1].line < rec.line ? records[i - 1] : rec;
      const auto& dup = records[i - 1].line < rec.line ? rec : records[i - 1];
      throw CorpusError("duplicate segment (doc_id=" + doc_id +
                            ", seg_index=" + std::to_string(rec.pair.seg_index) +
                            "), first seen on line " + std::to_string(first.line),
                        dup.line);
    }
    if (rec.pair.seg_index != i)
      throw CorpusError("non-contiguous seg_index in document '" + doc_id + "': expected " +
                            std::to_string(i) + ", found " + std::to_string(rec.pair.seg_index),
                        rec.line);
  }

  Document doc;
  doc.doc_id = doc_id;
  std::set<std::string> closed;
  for (auto& rec : records) {
    if (doc.chapters.empty() || doc.chapters.back().chapter_id != rec.pair.chapter_id) {
      if (!doc.chapters.empty()) closed.insert(doc.chapters.back().chapter_id);
      if (closed.count(rec.pair.chapter_id))
        throw CorpusError("chapter '" + rec.pair.chapter_id + "' of document '" + doc_id +
                              "' is not contiguous in seg_index order",
                          rec.line);
      doc.chapters.push_back(Chapter{rec.pair.chapter_id, {}});
    }
    doc.chapters.back().pairs.push_back(std::move(rec.pair));
  }
  return doc;
}

}  // namespace

Corpus parse_records(const std::string& content, const std::string& source_name) {
  std::map<std::string, std::vector<Record>> by_doc;
  std::size_t line_no = 0;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = text::strip_line_terminators(line);
    if (text::is_blank(stripped)) continue;
    Record rec = parse_record(stripped, line_no);
    by_doc[rec.pair.doc_id].push_back(std::move(rec));
  }

  Corpus corpus;
  corpus.metadata.source_name = source_name;
  for (auto& [doc_id, records] : by_doc) corpus.documents.push_back(assemble_document(doc_id, records));
  return corpus;
}

Corpus load_records(const std::filesystem::path& path) {
  return parse_records(io::read_file(path), path.filename().string());
}

std::string format_records(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    for (const auto& ch : doc.chapters) {
      for (const auto& p : ch.pairs) {
        nlohmann::ordered_json rec;
        rec["doc_id"] = p.doc_id;
        if (!p.chapter_id.empty()) rec["chapter_id"] = p.chapter_id;
        rec["seg_index"] = p.seg_index;
        rec["source"] = p.source;
        if (p.target) rec["target"] = *p.target;
        out += rec.dump();
        out += '\n';
      }
    }
  }
  return out;
}

void write_records(const Corpus& corpus, const std::filesystem::path& path) {
  io::write_file(path, format_records(corpus));
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::istringstream in(io::read_file(path));
  std::string line;
  while (std::getline(in, line)) lines.emplace_back(text::strip_line_terminators(line));
  return lines;
}

}  // namespace

Corpus load_line_aligned(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                         const std::string& boundary_marker) {
  const auto src = read_lines(src_path);
  const bool parallel = !tgt_path.empty();
  const auto tgt = parallel ? read_lines(tgt_path) : std::vector<std::string>{};
  if (parallel && src.size() != tgt.size())
    throw CorpusError("line-count mismatch: source has " + std::to_string(src.size()) +
                      " lines, target has " + std::to_string(tgt.size()));

  auto is_boundary = [&](const std::string& line) {
    return boundary_marker.empty() ? text::is_blank(line) : line == boundary_marker;
  };

  Corpus corpus;
  corpus.metadata.source_name = src_path.filename().string();
  Document current;
  std::size_t block = 0;
  auto close_block = [&] {
    if (!current.chapters.empty()) corpus.documents.push_back(std::move(current));
    current = Document{};
  };

  for (std::size_t i = 0; i < src.size(); ++i) {
    const bool src_boundary = is_boundary(src[i]);
    if (parallel && src_boundary != is_boundary(tgt[i]))
      throw CorpusError("document boundary mismatch in block " + std::to_string(block) +
                            (src_boundary ? ": boundary in source only" : ": boundary in target only"),
                        i + 1);
    if (src_boundary) {
      if (!current.chapters.empty()) ++block;
      close_block();
      continue;
    }
    if (text::is_blank(src[i])) throw CorpusError("empty source", i + 1);
    if (current.chapters.empty()) {
      char id[32];
      std::snprintf(id, sizeof(id), "doc-%05zu", block);
      current.doc_id = id;
      current.chapters.push_back(Chapter{});
    }
    SentencePair p;
    p.doc_id = current.doc_id;
    p.seg_index = current.chapters.back().pairs.size();
    p.source = src[i];
    if (parallel) p.target = tgt[i];
    current.chapters.back().pairs.push_back(std::move(p));
  }
  close_block();
  return corpus;
}

ValidationReport validate(const Corpus& corpus) {
  ValidationReport report;
  auto add = [&](const std::string& doc, const std::string& ch, std::optional<std::size_t> seg,
                 std::string msg) {
    report.violations.push_back(Violation{doc, ch, seg, std::move(msg)});
  };

  std::set<std::string> seen_docs;
  for (const auto& doc : corpus.documents) {
    if (!seen_docs.insert(doc.doc_id).second) add(doc.doc_id, {}, std::nullopt, "duplicate doc_id");

    std::set<std::string> closed_chapters;
    std::vector<std::size_t> order;
    std::size_t with_target = 0;
    for (std::size_t c = 0; c < doc.chapters.size(); ++c) {
      const auto& ch = doc.chapters[c];
      if (closed_chapters.count(ch.chapter_id))
        add(doc.doc_id, ch.chapter_id, std::nullopt, "chapter split across non-adjacent runs");
      closed_chapters.insert(ch.chapter_id);
      if (ch.pairs.empty()) add(doc.doc_id, ch.chapter_id, std::nullopt, "empty chapter");
      for (const auto& p : ch.pairs) {
        if (p.doc_id != doc.doc_id) add(doc.doc_id, ch.chapter_id, p.seg_index, "pair doc_id differs from document");
        if (p.chapter_id != ch.chapter_id)
          add(doc.doc_id, ch.chapter_id, p.seg_index, "pair chapter_id differs from chapter");
        if (text::is_blank(p.source)) add(doc.doc_id, ch.chapter_id, p.seg_index, "empty source");
        if (p.target) ++with_target;
        order.push_back(p.seg_index);
      }
    }
    if (doc.chapters.empty()) add(doc.doc_id, {}, std::nullopt, "empty document");
    if (with_target != 0 && with_target != order.size())
      add(doc.doc_id, {}, std::nullopt, "mixed presence of targets within document");

    if (!std::is_sorted(order.begin(), order.end()))
      add(doc.doc_id, {}, std::nullopt, "seg_index order disagrees with chapter order");
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1]) add(doc.doc_id, {}, sorted[i], "duplicate seg_index");
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i) {
        add(doc.doc_id, {}, sorted[i], "non-contiguous seg_index");
        break;
      }
    }
  }
  return report;
}

}  // namespace litmt
