#pragma once

// Translation output records: {doc_id, seg_index, source, hypothesis, failed}.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace litmt {

struct HypothesisRecord {
  std::string doc_id;
  std::size_t seg_index = 0;
  std::string source;
  std::string hypothesis;
  bool failed = false;

  bool operator==(const HypothesisRecord&) const = default;
};

std::string format_hypotheses(const std::vector<HypothesisRecord>& records);
std::vector<HypothesisRecord> parse_hypotheses(const std::string& content);
std::vector<HypothesisRecord> load_hypotheses(const std::filesystem::path& path);

}  // namespace litmt
