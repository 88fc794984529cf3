#pragma once

// UTF-8 helpers shared by the corpus, packing, retrieval and BLEU code.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace litmt::text {

/// Decodes UTF-8 into code points. Malformed sequences decode to U+FFFD, one
/// per offending byte.
std::vector<char32_t> decode_utf8(std::string_view s);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

/// Python's str.isspace() set.
bool is_space(char32_t cp);

/// Scripts written without spaces between words (Han, kana, Thai, CJK
/// punctuation and fullwidth forms). Hangul is spaced and excluded.
bool is_unsegmented(char32_t cp);

/// Simple case folding for Latin, Latin-1, Greek and Cyrillic capitals.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view s);

/// Splits on whitespace; inside each chunk every unsegmented-script code
/// point is its own piece and every maximal run of other code points is one
/// piece.
std::vector<std::string> split_pieces(std::string_view s);

/// Number of pieces produced by split_pieces(). The default token counter.
std::size_t count_tokens(std::string_view s);

/// True when more than half of the non-space code points are unsegmented.
bool is_predominantly_unsegmented(std::string_view s);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

/// Removes trailing '\n' and '\r' characters only.
std::string_view strip_line_terminators(std::string_view s);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view s);

}  // namespace litmt::text
