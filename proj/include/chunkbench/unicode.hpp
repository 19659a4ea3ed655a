#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chunkbench::unicode {

constexpr char32_t kZeroWidthSpace = U'\u200B';
constexpr char32_t kKhmerCoeng = U'\u17D2';
constexpr char32_t kByteOrderMark = U'\uFEFF';

// Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view text);

std::string to_nfc(std::string_view utf8);
std::u32string to_nfc(std::u32string_view text);

// Unicode White_Space property.
bool is_whitespace(char32_t ch);
// General category M (Mn, Mc, Me).
bool is_mark(char32_t ch);

// Extended grapheme cluster boundaries: result has text.size() + 1 entries,
// result[i] is true when a cluster starts (or the text ends) at index i.
std::vector<bool> grapheme_boundaries(std::u32string_view text);

// Positions where a chunk may begin or end: a grapheme boundary whose
// codepoint (if any) is not a Mark and that does not follow a Khmer coeng
// (U+17D2), which binds the next consonant into a subscript even though
// UAX #29 breaks there. Positions 0 and size() are always safe.
std::vector<bool> safe_boundaries(std::u32string_view text);

}  // namespace chunkbench::unicode
