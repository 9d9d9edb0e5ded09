#pragma once

// UTF-8 helpers shared by normalization, similarity and the noise channel.
// Coverage is Latin (incl. Extended-A/B and Additional), Greek and Cyrillic,
// which is what Portuguese documents need.

#include <string>
#include <string_view>
#include <vector>

namespace realcred::text {

/// Decodes UTF-8 into scalar values. Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Number of scalar values.
std::size_t length(std::string_view s);

std::u32string casefold(std::u32string_view s);
std::u32string strip_diacritics(std::u32string_view s);

char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);
bool is_letter(char32_t cp);
bool is_space(char32_t cp);
constexpr bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

/// Splits on runs of whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::u32string> split_whitespace(std::u32string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace realcred::text
