#include <gtest/gtest.h>

#include "chunkbench/unicode.hpp"

using namespace chunkbench::unicode;

TEST(Unicode, Utf8Roundtrip) {
  const std::string s = "ក្រaé\U0001F33E";
  const auto cps = decode_utf8(s);
  ASSERT_EQ(cps.size(), 6u);
  EXPECT_EQ(cps[0], U'ក');
  EXPECT_EQ(cps[5], U'\U0001F33E');
  EXPECT_EQ(encode_utf8(cps), s);
}

TEST(Unicode, InvalidBytesDecodeToReplacement) {
  const auto cps = decode_utf8(std::string("a\xFF" "b", 3));
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], U'\uFFFD');
}

TEST(Unicode, NfcComposes) {
  EXPECT_EQ(to_nfc("e\u0301"), "\u00E9");
  EXPECT_EQ(to_nfc(std::u32string(U"e\u0301")), U"\u00E9");
}

TEST(Unicode, Properties) {
  EXPECT_TRUE(is_whitespace(U' '));
  EXPECT_TRUE(is_whitespace(U'\n'));
  EXPECT_TRUE(is_whitespace(U'\u00A0'));
  EXPECT_FALSE(is_whitespace(kZeroWidthSpace));
  EXPECT_TRUE(is_mark(U'\u17B6'));
  EXPECT_TRUE(is_mark(U'\u17D2'));
  EXPECT_TRUE(is_mark(U'\u0301'));
  EXPECT_FALSE(is_mark(U'ក'));
}

TEST(Unicode, GraphemeBoundariesKeepKhmerClustersTogether) {
  // ស + coeng + វ + vowel sign AA, then យ. UAX #29 breaks after the coeng;
  // safe boundaries do not.
  const std::u32string text = U"ស្វាយ";
  const auto b = grapheme_boundaries(text);
  ASSERT_EQ(b.size(), text.size() + 1);
  EXPECT_TRUE(b[0]);
  EXPECT_FALSE(b[1]);
  EXPECT_TRUE(b[2]);
  EXPECT_FALSE(b[3]);
  EXPECT_TRUE(b[4]);
  EXPECT_TRUE(b[5]);
  const auto safe = safe_boundaries(text);
  EXPECT_EQ(safe, (std::vector<bool>{true, false, false, false, true, true}));
}

TEST(Unicode, SafeBoundariesExcludeMarks) {
  const std::u32string text = U"a \u0301b";
  const auto safe = safe_boundaries(text);
  EXPECT_TRUE(safe[0]);
  EXPECT_TRUE(safe[1]);
  EXPECT_FALSE(safe[2]);
  EXPECT_TRUE(safe[4]);
}
