#include "chunkbench/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "chunkbench/error.hpp"
#include "chunkbench/unicode.hpp"

namespace chunkbench::corpus {

ScriptProfile::ScriptProfile(std::vector<CodepointRange> khmer_ranges, bool strip_zwsp)
    : ranges_(std::move(khmer_ranges)), strip_zwsp_(strip_zwsp) {
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (ranges_[i].first > ranges_[i].last) {
      throw ConfigError("script profile: range " + std::to_string(i) + " has first > last");
    }
    if (i > 0 && ranges_[i].first <= ranges_[i - 1].last) {
      throw ConfigError("script profile: ranges must be sorted ascending and disjoint");
    }
  }
}

std::vector<CodepointRange> ScriptProfile::default_khmer_ranges() {
  return {{0x1780, 0x17FF}, {0x19E0, 0x19FF}};
}

ScriptProfile ScriptProfile::for_metrics() { return ScriptProfile(default_khmer_ranges(), true); }

ScriptProfile ScriptProfile::for_chunking() { return ScriptProfile(default_khmer_ranges(), false); }

std::string normalize_text(std::string_view raw, const ScriptProfile& profile) {
  std::u32string text = unicode::decode_utf8(raw);

  std::size_t begin = 0;
  while (begin < text.size() && text[begin] == unicode::kByteOrderMark) {
    ++begin;
  }

  std::u32string cleaned;
  cleaned.reserve(text.size() - begin);
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char32_t ch = text[i];
    if (ch == U'\r') {
      cleaned.push_back(U'\n');
      if (i + 1 < text.size() && text[i + 1] == U'\n') {
        ++i;
      }
    } else if (ch == unicode::kZeroWidthSpace && profile.strip_zwsp()) {
      continue;
    } else {
      cleaned.push_back(ch);
    }
  }
  return unicode::encode_utf8(unicode::to_nfc(cleaned));
}

bool is_khmer(char32_t ch, const ScriptProfile& profile) {
  const auto& ranges = profile.khmer_ranges();
  auto it = std::upper_bound(ranges.begin(), ranges.end(), ch,
                             [](char32_t c, const CodepointRange& r) { return c < r.first; });
  if (it == ranges.begin()) {
    return false;
  }
  --it;
  return ch <= it->last;
}

std::set<char32_t> khmer_char_set(std::string_view text, const ScriptProfile& profile) {
  std::set<char32_t> out;
  for (char32_t ch : unicode::decode_utf8(text)) {
    if (is_khmer(ch, profile)) {
      out.insert(ch);
    }
  }
  return out;
}

namespace {

using nlohmann::json;

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

std::string required_string(const json& obj, const char* field, const std::string& file, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ParseError(file, line, std::string("missing \"") + field + "\" field");
  }
  if (!it->is_string()) {
    throw ParseError(file, line, std::string("\"") + field + "\" must be a string");
  }
  return it->get<std::string>();
}

// Calls fn(object, line_number) for every non-blank line.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_for_read(path);
  const std::string file = path.string();
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(file, number, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
      throw ParseError(file, number, "expected a JSON object");
    }
    fn(obj, number);
  }
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path, const ScriptProfile& profile) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  const std::string file = path.string();
  for_each_json_line(path, [&](const json& obj, std::size_t line) {
    Document doc;
    doc.id = required_string(obj, "id", file, line);
    if (doc.id.empty()) {
      throw ParseError(file, line, "empty document id");
    }
    if (!seen.insert(doc.id).second) {
      throw ParseError(file, line, "duplicate document id \"" + doc.id + "\"");
    }
    doc.text = normalize_text(required_string(obj, "text", file, line), profile);
    if (auto it = obj.find("source"); it != obj.end() && it->is_string()) {
      doc.source = it->get<std::string>();
    } else {
      doc.source = file;
    }
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<QAPair> load_qa(const std::filesystem::path& path, const ScriptProfile& profile) {
  std::vector<QAPair> pairs;
  std::unordered_set<std::string> seen;
  const std::string file = path.string();
  for_each_json_line(path, [&](const json& obj, std::size_t line) {
    QAPair qa;
    qa.id = required_string(obj, "id", file, line);
    if (qa.id.empty()) {
      throw ParseError(file, line, "empty question id");
    }
    if (!seen.insert(qa.id).second) {
      throw ParseError(file, line, "duplicate question id \"" + qa.id + "\"");
    }
    qa.question = normalize_text(required_string(obj, "question", file, line), profile);
    qa.answer = normalize_text(required_string(obj, "answer", file, line), profile);
    if (qa.question.empty() || qa.answer.empty()) {
      throw ParseError(file, line, "question and answer must be non-empty");
    }
    pairs.push_back(std::move(qa));
  });
  return pairs;
}

}  // namespace chunkbench::corpus
