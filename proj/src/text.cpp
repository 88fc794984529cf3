#include "litmt/text.hpp"

#include <cstdio>

namespace litmt::text {

namespace {

// Decodes one code point at s[i]; sets len to the bytes consumed.
char32_t next_code_point(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  char32_t cp = 0;
  if (b0 < 0x80) {
    len = 1;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    len = 1;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    len = 1;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      len = 1;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  return cp;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = 0;
    out.push_back(next_code_point(s, i, len));
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

bool is_space(char32_t cp) {
  if (cp >= 0x09 && cp <= 0x0D) return true;
  if (cp >= 0x1C && cp <= 0x20) return true;
  switch (cp) {
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      break;
  }
  return cp >= 0x2000 && cp <= 0x200A;
}

bool is_unsegmented(char32_t cp) {
  return (cp >= 0x0E00 && cp <= 0x0E7F) ||    // Thai
         (cp >= 0x3000 && cp <= 0x303F) ||    // CJK symbols and punctuation
         (cp >= 0x3040 && cp <= 0x30FF) ||    // kana
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // CJK ext A
         (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK unified
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // CJK compatibility
         (cp >= 0xFE30 && cp <= 0xFE4F) ||    // CJK compatibility forms
         (cp >= 0xFF00 && cp <= 0xFFEF) ||    // half/fullwidth forms
         (cp >= 0x20000 && cp <= 0x2FFFF);    // CJK ext B..
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : decode_utf8(s)) append_utf8(out, to_lower(cp));
  return out;
}

std::vector<std::string> split_pieces(std::string_view s) {
  std::vector<std::string> pieces;
  std::string run;
  auto flush = [&] {
    if (!run.empty()) {
      pieces.push_back(std::move(run));
      run.clear();
    }
  };
  for (char32_t cp : decode_utf8(s)) {
    if (is_space(cp)) {
      flush();
    } else if (is_unsegmented(cp)) {
      flush();
      std::string one;
      append_utf8(one, cp);
      pieces.push_back(std::move(one));
    } else {
      append_utf8(run, cp);
    }
  }
  flush();
  return pieces;
}

std::size_t count_tokens(std::string_view s) {
  std::size_t count = 0;
  bool in_run = false;
  for (char32_t cp : decode_utf8(s)) {
    if (is_space(cp)) {
      in_run = false;
    } else if (is_unsegmented(cp)) {
      in_run = false;
      ++count;
    } else if (!in_run) {
      in_run = true;
      ++count;
    }
  }
  return count;
}

bool is_predominantly_unsegmented(std::string_view s) {
  std::size_t total = 0;
  std::size_t unsegmented = 0;
  for (char32_t cp : decode_utf8(s)) {
    if (is_space(cp)) continue;
    ++total;
    if (is_unsegmented(cp)) ++unsegmented;
  }
  return total > 0 && 2 * unsegmented > total;
}

std::string_view trim(std::string_view s) {
  std::size_t begin = s.size();
  std::size_t end = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = 0;
    const char32_t cp = next_code_point(s, i, len);
    if (!is_space(cp)) {
      if (begin == s.size()) begin = i;
      end = i + len;
    }
    i += len;
  }
  if (begin == s.size()) return s.substr(0, 0);
  return s.substr(begin, end - begin);
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::string_view strip_line_terminators(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace litmt::text
