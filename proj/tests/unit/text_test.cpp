#include <gtest/gtest.h>

#include "realcred/text.hpp"

namespace realcred::text {
namespace {

TEST(Utf8, RoundTripsPortugueseText) {
  const std::string s = "João Gonçalves, nº 12 — Évora";
  EXPECT_EQ(encode_utf8(decode_utf8(s)), s);
  EXPECT_EQ(length("João"), 4u);
}

TEST(Utf8, InvalidBytesBecomeReplacementCharacter) {
  const std::string bad = "a\xC3";
  auto cps = decode_utf8(bad);
  ASSERT_EQ(cps.size(), 2u);
  EXPECT_EQ(cps[1], char32_t{0xFFFD});
}

TEST(Casefold, FoldsLatinAndSharpS) {
  EXPECT_EQ(encode_utf8(casefold(decode_utf8("JOÃO ÇÉ"))), "joão çé");
  EXPECT_EQ(encode_utf8(casefold(decode_utf8("Straße"))), "strasse");
}

TEST(StripDiacritics, KeepsCase) {
  EXPECT_EQ(encode_utf8(strip_diacritics(decode_utf8("Conceição ÁGUEDA"))), "Conceicao AGUEDA");
  // combining acute accent
  EXPECT_EQ(encode_utf8(strip_diacritics(decode_utf8("e\xCC\x81"))), "e");
}

TEST(Case, UpperLowerInverse) {
  EXPECT_EQ(to_upper(U'ã'), U'Ã');
  EXPECT_EQ(to_lower(U'Ã'), U'ã');
  EXPECT_EQ(to_upper(U'q'), U'Q');
}

TEST(Split, CollapsesRunsOfWhitespace) {
  auto parts = split_whitespace(std::string_view("  rua\t augusta   12 "));
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[2], "12");
  EXPECT_TRUE(split_whitespace(std::string_view("   ")).empty());
}

}  // namespace
}  // namespace realcred::text
