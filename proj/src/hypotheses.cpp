#include "litmt/hypotheses.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "litmt/io.hpp"
#include "litmt/text.hpp"

namespace litmt {

std::string format_hypotheses(const std::vector<HypothesisRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["doc_id"] = r.doc_id;
    j["seg_index"] = r.seg_index;
    j["source"] = r.source;
    j["hypothesis"] = r.hypothesis;
    j["failed"] = r.failed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<HypothesisRecord> parse_hypotheses(const std::string& content) {
  std::vector<HypothesisRecord> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      HypothesisRecord r;
      r.doc_id = j.at("doc_id").get<std::string>();
      r.seg_index = j.at("seg_index").get<std::size_t>();
      r.source = j.value("source", std::string{});
      r.hypothesis = j.at("hypothesis").get<std::string>();
      r.failed = j.value("failed", false);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("hypothesis record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<HypothesisRecord> load_hypotheses(const std::filesystem::path& path) {
  return parse_hypotheses(io::read_file(path));
}

}  // namespace litmt
