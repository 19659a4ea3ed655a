#include "chunkbench/unicode.hpp"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "chunkbench/error.hpp"

namespace chunkbench::unicode {

std::u32string decode_utf8(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 3);
  for (char32_t ch : text) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(ch), error);
    if (error) {
      n = 0;
      U8_APPEND_UNSAFE(buf, n, 0xFFFD);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  }
  return *nfc;
}

icu::UnicodeString to_icu(std::u32string_view text) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                        static_cast<int32_t>(text.size()));
}

}  // namespace

std::string to_nfc(std::string_view utf8) {
  const auto& nfc = nfc_instance();
  UErrorCode status = U_ZERO_ERROR;
  auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString normalized = nfc.normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::u32string to_nfc(std::u32string_view text) {
  const auto& nfc = nfc_instance();
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc.normalize(to_icu(text), status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  std::u32string out(static_cast<std::size_t>(normalized.countChar32()), U'\0');
  UErrorCode extract_status = U_ZERO_ERROR;
  normalized.toUTF32(reinterpret_cast<UChar32*>(out.data()), static_cast<int32_t>(out.size()), extract_status);
  return out;
}

bool is_whitespace(char32_t ch) { return u_isUWhiteSpace(static_cast<UChar32>(ch)) != 0; }

bool is_mark(char32_t ch) {
  return (U_GET_GC_MASK(static_cast<UChar32>(ch)) & U_GC_M_MASK) != 0;
}

std::vector<bool> grapheme_boundaries(std::u32string_view text) {
  std::vector<bool> result(text.size() + 1, false);
  result[0] = true;
  result[text.size()] = true;
  if (text.size() < 2) {
    return result;
  }

  icu::UnicodeString utf16 = to_icu(text);
  // UTF-16 index -> codepoint index.
  std::vector<std::size_t> cp_at(static_cast<std::size_t>(utf16.length()) + 1, 0);
  {
    std::size_t cp = 0;
    int32_t i = 0;
    while (i < utf16.length()) {
      cp_at[static_cast<std::size_t>(i)] = cp;
      i = utf16.moveIndex32(i, 1);
      ++cp;
    }
    cp_at[static_cast<std::size_t>(utf16.length())] = cp;
  }

  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) {
    throw Error(std::string("ICU grapheme iterator unavailable: ") + u_errorName(status));
  }
  it->setText(utf16);
  for (int32_t pos = it->first(); pos != icu::BreakIterator::DONE; pos = it->next()) {
    result[cp_at[static_cast<std::size_t>(pos)]] = true;
  }
  return result;
}

std::vector<bool> safe_boundaries(std::u32string_view text) {
  std::vector<bool> safe = grapheme_boundaries(text);
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (safe[i] && (is_mark(text[i]) || text[i - 1] == kKhmerCoeng)) {
      safe[i] = false;
    }
  }
  return safe;
}

}  // namespace chunkbench::unicode
