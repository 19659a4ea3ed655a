#include "chunkbench/chunkers.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "chunkbench/error.hpp"
#include "chunkbench/llm.hpp"
#include "chunkbench/unicode.hpp"
#include "split_engine.hpp"

namespace chunkbench::chunkers {

namespace {

constexpr std::array<ChunkMethod, 4> kMethods = {ChunkMethod::Recursive, ChunkMethod::KhmerAware,
                                                  ChunkMethod::SentenceBased, ChunkMethod::LlmBased};

constexpr char32_t kKhan = U'។';
constexpr char32_t kBariyoosan = U'៕';

bool is_sentence_terminator(char32_t ch) {
  return ch == kKhan || ch == kBariyoosan || ch == U'.' || ch == U'!' || ch == U'?';
}

}  // namespace

std::string_view method_id(ChunkMethod method) {
  switch (method) {
    case ChunkMethod::Recursive:
      return "recursive";
    case ChunkMethod::KhmerAware:
      return "khmer_aware";
    case ChunkMethod::SentenceBased:
      return "sentence";
    case ChunkMethod::LlmBased:
      return "llm";
  }
  return "unknown";
}

std::string_view method_label(ChunkMethod method) {
  switch (method) {
    case ChunkMethod::Recursive:
      return "Recursive";
    case ChunkMethod::KhmerAware:
      return "Khmer-Aware";
    case ChunkMethod::SentenceBased:
      return "Sentence-based";
    case ChunkMethod::LlmBased:
      return "LLM";
  }
  return "Unknown";
}

std::optional<ChunkMethod> parse_method(std::string_view id) {
  for (ChunkMethod m : kMethods) {
    if (method_id(m) == id) {
      return m;
    }
  }
  return std::nullopt;
}

const std::vector<ChunkMethod>& all_methods() {
  static const std::vector<ChunkMethod> methods(kMethods.begin(), kMethods.end());
  return methods;
}

std::string Chunk::key() const { return doc_id + "#" + std::to_string(seq); }

std::vector<std::string> ChunkConfig::default_separators() {
  return {"\n\n", "\n", "។", ".", "!", "?", " ", ""};
}

void ChunkConfig::validate() const {
  if (max_chars < 1) {
    throw ConfigError("chunk config: max_chars must be >= 1");
  }
  if (overlap_chars >= max_chars) {
    throw ConfigError("chunk config: overlap_chars must be < max_chars");
  }
  if (sentences_per_chunk < 1) {
    throw ConfigError("chunk config: sentences_per_chunk must be >= 1");
  }
  if (sentence_overlap >= sentences_per_chunk) {
    throw ConfigError("chunk config: sentence_overlap must be < sentences_per_chunk");
  }
  if (khmer_aware_max_chars < 1) {
    throw ConfigError("chunk config: khmer_aware_max_chars must be >= 1");
  }
}

std::vector<Chunk> chunk_recursive(const corpus::Document& doc, const ChunkConfig& cfg) {
  cfg.validate();
  const std::u32string text = unicode::decode_utf8(doc.text);
  std::vector<detail::SeparatorLevel> levels;
  levels.reserve(cfg.separators.size() + 1);
  for (const auto& sep : cfg.separators) {
    levels.push_back({unicode::decode_utf8(sep)});
  }
  // The grapheme level is what makes the max_chars bound hold.
  if (levels.empty() || !levels.back().front().empty()) {
    levels.push_back({U""});
  }
  detail::SplitEngine engine(text);
  auto spans = engine.split(levels, cfg.max_chars, cfg.overlap_chars);
  return detail::spans_to_chunks(doc.id, text, spans, ChunkMethod::Recursive);
}

std::vector<Chunk> chunk_khmer_aware(const corpus::Document& doc, const ChunkConfig& cfg) {
  cfg.validate();
  const std::u32string text = unicode::decode_utf8(doc.text);
  const std::vector<detail::SeparatorLevel> levels = {
      {U"\n\n"},
      {U"\n"},
      {std::u32string(1, kKhan), std::u32string(1, kBariyoosan)},
      // Oversized segments only.
      {U" "},
      {std::u32string(1, unicode::kZeroWidthSpace)},
      {U""},
  };
  detail::SplitEngine engine(text);
  auto spans = engine.split(levels, cfg.khmer_aware_max_chars, 0);
  return detail::spans_to_chunks(doc.id, text, spans, ChunkMethod::KhmerAware);
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::u32string_view text) {
  const std::vector<bool> safe = unicode::safe_boundaries(text);
  std::vector<std::pair<std::size_t, std::size_t>> sentences;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_sentence_terminator(text[i])) {
      continue;
    }
    const std::size_t cut = i + 1;
    if (cut < text.size() && !unicode::is_whitespace(text[cut])) {
      continue;
    }
    if (!safe[cut]) {
      continue;
    }
    sentences.emplace_back(begin, cut);
    begin = cut;
  }
  if (begin < text.size()) {
    const bool blank =
        std::all_of(text.begin() + static_cast<std::ptrdiff_t>(begin), text.end(), unicode::is_whitespace);
    if (!blank || sentences.empty()) {
      sentences.emplace_back(begin, text.size());
    } else {
      sentences.back().second = text.size();
    }
  }
  return sentences;
}

std::vector<Chunk> chunk_sentence(const corpus::Document& doc, const ChunkConfig& cfg) {
  cfg.validate();
  const std::u32string text = unicode::decode_utf8(doc.text);
  const auto sentences = split_sentences(text);

  std::vector<detail::Span> spans;
  const std::size_t step = cfg.sentences_per_chunk - cfg.sentence_overlap;
  for (std::size_t first = 0; first < sentences.size(); first += step) {
    const std::size_t last = std::min(first + cfg.sentences_per_chunk, sentences.size());
    spans.push_back({sentences[first].first, sentences[last - 1].second});
    if (last == sentences.size()) {
      break;
    }
  }
  return detail::spans_to_chunks(doc.id, text, spans, ChunkMethod::SentenceBased);
}

std::vector<Chunk> chunk_document(ChunkMethod method, const corpus::Document& doc, const ChunkConfig& cfg,
                                  LlmClient* client) {
  switch (method) {
    case ChunkMethod::Recursive:
      return chunk_recursive(doc, cfg);
    case ChunkMethod::KhmerAware:
      return chunk_khmer_aware(doc, cfg);
    case ChunkMethod::SentenceBased:
      return chunk_sentence(doc, cfg);
    case ChunkMethod::LlmBased:
      if (client == nullptr) {
        throw ConfigError("llm chunking requires an LLM client");
      }
      return chunk_llm(doc, *client, cfg);
  }
  throw ConfigError("unknown chunk method");
}

}  // namespace chunkbench::chunkers
