#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chunkbench/chunkers.hpp"

namespace chunkbench::chunkers::detail {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
};

// Alternatives that split at the same level. An empty alternative splits at
// every safe grapheme boundary.
using SeparatorLevel = std::vector<std::u32string>;

// Hierarchical splitter over a codepoint buffer. Separators stay attached to
// the end of the piece they terminate; pieces are cut only at safe
// boundaries; runs of fitting pieces are merged greedily with overlap.
class SplitEngine {
 public:
  explicit SplitEngine(std::u32string_view text);

  std::vector<Span> split(const std::vector<SeparatorLevel>& levels, std::size_t max_chars,
                          std::size_t overlap_chars) const;

  const std::vector<bool>& safe() const noexcept { return safe_; }

 private:
  void split_span(Span span, const std::vector<SeparatorLevel>& levels, std::size_t level,
                  std::size_t max_chars, std::size_t overlap_chars, std::vector<Span>& out) const;
  std::vector<std::size_t> cut_points(Span span, const SeparatorLevel& level) const;
  static void merge(const std::vector<Span>& pieces, std::size_t max_chars, std::size_t overlap_chars,
                    std::vector<Span>& out);

  std::u32string_view text_;
  std::vector<bool> safe_;
};

// Leading whitespace is trimmed except a whitespace codepoint followed by a
// Mark; trailing whitespace is trimmed.
Span trim_span(std::u32string_view text, Span span);

// Trims each span and drops the empty ones; seq numbers are consecutive.
std::vector<Chunk> spans_to_chunks(const std::string& doc_id, std::u32string_view text,
                                   const std::vector<Span>& spans, ChunkMethod method);

}  // namespace chunkbench::chunkers::detail
