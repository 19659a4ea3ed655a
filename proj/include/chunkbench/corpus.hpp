#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chunkbench::corpus {

struct Document {
  std::string id;
  std::string text;  // UTF-8, normalized
  std::string source;
};

struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
};

struct CodepointRange {
  char32_t first;
  char32_t last;  // inclusive
};

// Which codepoints count as Khmer, and whether U+200B is stripped during
// normalization.
class ScriptProfile {
 public:
  // Throws ConfigError unless ranges are well-formed, sorted and disjoint.
  ScriptProfile(std::vector<CodepointRange> khmer_ranges, bool strip_zwsp);

  // Khmer (U+1780-17FF) and Khmer Symbols (U+19E0-19FF).
  static std::vector<CodepointRange> default_khmer_ranges();
  // ZWSP stripped: used when computing metrics.
  static ScriptProfile for_metrics();
  // ZWSP kept: it carries word boundaries the chunkers can use.
  static ScriptProfile for_chunking();

  const std::vector<CodepointRange>& khmer_ranges() const noexcept { return ranges_; }
  bool strip_zwsp() const noexcept { return strip_zwsp_; }

 private:
  std::vector<CodepointRange> ranges_;
  bool strip_zwsp_;
};

std::string normalize_text(std::string_view raw, const ScriptProfile& profile);

bool is_khmer(char32_t ch, const ScriptProfile& profile);

std::set<char32_t> khmer_char_set(std::string_view text, const ScriptProfile& profile);

// JSONL loaders. Blank lines are skipped; malformed lines raise ParseError
// carrying the 1-based line number.
std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  const ScriptProfile& profile = ScriptProfile::for_chunking());
std::vector<QAPair> load_qa(const std::filesystem::path& path,
                            const ScriptProfile& profile = ScriptProfile::for_chunking());

}  // namespace chunkbench::corpus
