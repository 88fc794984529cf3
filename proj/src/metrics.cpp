#include "litmt/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "litmt/text.hpp"

namespace litmt {

const char* to_string(Smoothing s) { return s == Smoothing::none ? "none" : "exp"; }
const char* to_string(BleuTokenization t) { return t == BleuTokenization::character ? "char" : "13a"; }
const char* to_string(Segmentation s) { return s == Segmentation::document ? "document" : "sentence"; }

void BleuConfig::check() const {
  if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
}

std::string BleuReport::formatted_score() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", score);
  return buf;
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [{-~[-` -&(-+:-@/]
bool is_13a_symbol(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x7B && u <= 0x7E) || (u >= 0x5B && u <= 0x60) || (u >= 0x20 && u <= 0x26) ||
         (u >= 0x28 && u <= 0x2B) || (u >= 0x3A && u <= 0x40) || u == 0x2F;
}

// Each pass mirrors one left-to-right regex substitution. Working on UTF-8
// bytes gives the same result as on code points: the patterns only test
// ASCII characters and continuation bytes never match them.
std::string pad_symbols(const std::string& s) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char c : s) {
    if (is_13a_symbol(c)) {
      out += ' ';
      out += c;
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

// ([^0-9])([\.,]) -> "\1 \2 "
std::string split_period_comma_after_nondigit(const std::string& s) {
  std::string out;
  out.reserve(s.size() * 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && !is_digit(s[i]) && (s[i + 1] == '.' || s[i + 1] == ',')) {
      out += s[i];
      out += ' ';
      out += s[i + 1];
      out += ' ';
      i += 2;
    } else {
      out += s[i++];
    }
  }
  return out;
}

// ([\.,])([^0-9]) -> " \1 \2"
std::string split_period_comma_before_nondigit(const std::string& s) {
  std::string out;
  out.reserve(s.size() * 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && (s[i] == '.' || s[i] == ',') && !is_digit(s[i + 1])) {
      out += ' ';
      out += s[i];
      out += ' ';
      out += s[i + 1];
      i += 2;
    } else {
      out += s[i++];
    }
  }
  return out;
}

// ([0-9])(-) -> "\1 \2 "
std::string split_dash_after_digit(const std::string& s) {
  std::string out;
  out.reserve(s.size() * 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && is_digit(s[i]) && s[i + 1] == '-') {
      out += s[i];
      out += " - ";
      i += 2;
    } else {
      out += s[i++];
    }
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t cp : text::decode_utf8(s)) {
    if (text::is_space(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      text::append_utf8(cur, cp);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> tokenize_13a(std::string_view input) {
  std::string line(input);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";
  line = pad_symbols(line);
  line = split_period_comma_after_nondigit(line);
  line = split_period_comma_before_nondigit(line);
  line = split_dash_after_digit(line);
  return split_whitespace(line);
}

// Python's str.rstrip().
std::string_view rstrip(std::string_view s) {
  const auto t = text::trim(s);
  if (t.empty()) return s.substr(0, 0);
  return s.substr(0, static_cast<std::size_t>(t.data() - s.data()) + t.size());
}

std::vector<std::string> preprocess(std::string_view segment, const BleuConfig& config) {
  if (config.lowercase) return tokenize(rstrip(text::to_lower(segment)), config.tokenization);
  return tokenize(rstrip(segment), config.tokenization);
}

// Key joiner: U+001F is whitespace to the tokenizer, so no token contains it.
using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t max_order) {
  NgramCounts counts;
  for (std::size_t n = 1; n <= max_order; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = std::to_string(n);
      for (std::size_t k = 0; k < n; ++k) {
        key += '\x1f';
        key += tokens[i + k];
      }
      ++counts[key];
    }
  }
  return counts;
}

std::size_t order_of(const std::string& key) { return static_cast<std::size_t>(std::stoul(key.substr(0, key.find('\x1f')))); }

double floored_log(double x) { return x == 0.0 ? -9999999999.0 : std::log(x); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text, BleuTokenization mode) {
  if (mode == BleuTokenization::intl13a) return tokenize_13a(text);
  std::vector<std::string> out;
  for (char32_t cp : text::decode_utf8(text)) {
    if (text::is_space(cp)) continue;
    std::string one;
    text::append_utf8(one, cp);
    out.push_back(std::move(one));
  }
  return out;
}

BleuReport corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                       const BleuConfig& config) {
  config.check();
  if (hypotheses.size() != references.size())
    throw std::invalid_argument("hypothesis/reference count mismatch: " + std::to_string(hypotheses.size()) + " vs " +
                                std::to_string(references.size()));
  if (hypotheses.empty()) throw std::invalid_argument("corpus_bleu needs at least one segment");

  const std::size_t N = config.max_order;
  BleuReport r;
  r.correct.assign(N, 0);
  r.total.assign(N, 0);
  r.precisions.assign(N, 0.0);

  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = preprocess(hypotheses[s], config);
    const auto ref = preprocess(references[s], config);
    r.hyp_length += hyp.size();
    r.ref_length += ref.size();
    const auto ref_counts = count_ngrams(ref, N);
    for (const auto& [key, count] : count_ngrams(hyp, N)) {
      const std::size_t n = order_of(key) - 1;
      r.total[n] += count;
      if (auto it = ref_counts.find(key); it != ref_counts.end()) r.correct[n] += std::min(count, it->second);
    }
  }

  r.brevity_penalty = 1.0;
  if (r.hyp_length < r.ref_length)
    r.brevity_penalty = r.hyp_length > 0
                            ? std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length))
                            : 0.0;

  bool any_match = false;
  for (auto c : r.correct) any_match = any_match || c > 0;
  if (!any_match) return r;

  // Precisions in percent, as the reference scorer computes them.
  std::vector<double> pct(N, 0.0);
  double smooth = 1.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (r.total[n] == 0) break;
    if (r.correct[n] == 0) {
      if (config.smoothing == Smoothing::exp_floor) {
        smooth *= 2.0;
        pct[n] = 100.0 / (smooth * static_cast<double>(r.total[n]));
      }
    } else {
      pct[n] = 100.0 * static_cast<double>(r.correct[n]) / static_cast<double>(r.total[n]);
    }
  }
  double log_sum = 0.0;
  for (double p : pct) log_sum += floored_log(p);
  r.score = r.brevity_penalty * std::exp(log_sum / static_cast<double>(N));
  for (std::size_t n = 0; n < N; ++n) r.precisions[n] = pct[n] / 100.0;
  return r;
}

namespace {

std::string location(const std::string& doc_id, std::size_t seg) {
  return "(" + doc_id + ", " + std::to_string(seg) + ")";
}

}  // namespace

AlignmentError::AlignmentError(std::vector<std::string> gaps)
    : std::runtime_error("alignment is not total: " + std::to_string(gaps.size()) + " gap(s)" +
                         (gaps.empty() ? std::string() : ", first " + gaps.front())),
      gaps_(std::move(gaps)) {}

std::vector<AlignedDocument> align(const std::vector<HypothesisRecord>& system, const Corpus& references) {
  std::map<std::pair<std::string, std::size_t>, const HypothesisRecord*> by_key;
  std::vector<std::string> gaps;
  for (const auto& h : system)
    if (!by_key.emplace(std::pair{h.doc_id, h.seg_index}, &h).second)
      gaps.push_back("duplicate hypothesis " + location(h.doc_id, h.seg_index));

  std::vector<AlignedDocument> out;
  std::size_t matched = 0;
  for (const auto& doc : references.documents) {
    AlignedDocument aligned{doc.doc_id, {}, {}};
    for (const auto& p : doc.pairs()) {
      const auto it = by_key.find({doc.doc_id, p.seg_index});
      if (!p.target) {
        gaps.push_back("reference without target " + location(doc.doc_id, p.seg_index));
      } else if (it == by_key.end()) {
        gaps.push_back("missing hypothesis " + location(doc.doc_id, p.seg_index));
      } else {
        aligned.hypotheses.push_back(it->second->hypothesis);
        aligned.references.push_back(*p.target);
      }
      if (it != by_key.end()) ++matched;
    }
    out.push_back(std::move(aligned));
  }
  if (matched != by_key.size()) {
    for (const auto& [key, h] : by_key) {
      const Document* doc = references.find(key.first);
      if (!doc || key.second >= doc->size()) gaps.push_back("hypothesis without reference " + location(key.first, key.second));
    }
  }
  if (!gaps.empty()) throw AlignmentError(std::move(gaps));
  return out;
}

BleuReport s_bleu(const std::vector<HypothesisRecord>& system, const Corpus& references, const BleuConfig& config) {
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  for (auto& doc : align(system, references)) {
    hyps.insert(hyps.end(), doc.hypotheses.begin(), doc.hypotheses.end());
    refs.insert(refs.end(), doc.references.begin(), doc.references.end());
  }
  auto report = corpus_bleu(hyps, refs, config);
  report.segmentation = Segmentation::sentence;
  return report;
}

namespace {

std::string join_spaces(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ' ';
    out += parts[i];
  }
  return out;
}

}  // namespace

BleuReport d_bleu(const std::vector<HypothesisRecord>& system, const Corpus& references, const BleuConfig& config) {
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  for (auto& doc : align(system, references)) {
    hyps.push_back(join_spaces(doc.hypotheses));
    refs.push_back(join_spaces(doc.references));
  }
  auto report = corpus_bleu(hyps, refs, config);
  report.segmentation = Segmentation::document;
  return report;
}

nlohmann::ordered_json to_json(const BleuReport& report, const BleuConfig& config) {
  nlohmann::ordered_json j;
  j["segmentation"] = to_string(report.segmentation);
  j["score"] = std::stod(report.formatted_score());
  j["score_exact"] = report.score;
  j["precisions"] = report.precisions;
  j["brevity_penalty"] = report.brevity_penalty;
  j["hyp_length"] = report.hyp_length;
  j["ref_length"] = report.ref_length;
  j["correct"] = report.correct;
  j["total"] = report.total;
  j["config"] = {{"max_order", config.max_order},
                 {"smoothing", to_string(config.smoothing)},
                 {"tokenize", to_string(config.tokenization)},
                 {"lowercase", config.lowercase}};
  return j;
}

}  // namespace litmt
