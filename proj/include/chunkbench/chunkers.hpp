#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chunkbench/corpus.hpp"

namespace chunkbench::chunkers {

enum class ChunkMethod { Recursive, KhmerAware, SentenceBased, LlmBased };

// Stable identifier used in config files and chunk JSONL ("recursive",
// "khmer_aware", "sentence", "llm").
std::string_view method_id(ChunkMethod method);
// Row label used in reports ("Recursive", "Khmer-Aware", ...).
std::string_view method_label(ChunkMethod method);
std::optional<ChunkMethod> parse_method(std::string_view id);
const std::vector<ChunkMethod>& all_methods();

struct Chunk {
  std::string doc_id;
  std::size_t seq = 0;
  std::string text;        // trimmed slice of the document
  std::size_t start = 0;   // codepoint offset, pre-trim
  std::size_t end = 0;     // exclusive
  ChunkMethod method = ChunkMethod::Recursive;
  bool fallback = false;   // LLM output failed validation, recursive result used

  // Index key, unique within one method's chunk list.
  std::string key() const;

  bool operator==(const Chunk&) const = default;
};

struct ChunkConfig {
  std::size_t max_chars = 300;
  std::size_t overlap_chars = 50;
  std::size_t sentences_per_chunk = 5;
  std::size_t sentence_overlap = 1;
  std::size_t khmer_aware_max_chars = 800;
  std::vector<std::string> separators = default_separators();

  static std::vector<std::string> default_separators();

  // Throws ConfigError on violated invariants.
  void validate() const;
};

class LlmClient;

std::vector<Chunk> chunk_recursive(const corpus::Document& doc, const ChunkConfig& cfg);
std::vector<Chunk> chunk_khmer_aware(const corpus::Document& doc, const ChunkConfig& cfg);
std::vector<Chunk> chunk_sentence(const corpus::Document& doc, const ChunkConfig& cfg);
std::vector<Chunk> chunk_llm(const corpus::Document& doc, LlmClient& client, const ChunkConfig& cfg);

// Dispatches on method; client is only used for LlmBased and must then be
// non-null.
std::vector<Chunk> chunk_document(ChunkMethod method, const corpus::Document& doc, const ChunkConfig& cfg,
                                  LlmClient* client = nullptr);

// Sentence spans [start, end) in codepoints. Sentences end after one of
// ។ ៕ . ! ? when followed by whitespace or end of text.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::u32string_view text);

}  // namespace chunkbench::chunkers
